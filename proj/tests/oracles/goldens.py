#!/usr/bin/env python3
"""Independent oracles for the frozen expected values used by the C++ tests.

Brute force over subsets / injections where the search space is small, and a
0-1 ILP (antichain-labelling formulation, solved by HiGHS through scipy) for
the strong-chain maxima on grids up to 64 points.  Nothing here shares code
with the library.

    python3 tests/oracles/goldens.py
"""
import itertools
import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp


def grid(shape):
    return list(itertools.product(*[range(1, k + 1) for k in shape]))


def leq(a, b):
    return all(x <= y for x, y in zip(a, b))


def lt(a, b):
    return a != b and leq(a, b)


def strict(a, b):
    return all(x < y for x, y in zip(a, b))


def max_antichain(points, rel):
    best = 0
    n = len(points)
    for mask in range(1 << n):
        sel = [points[i] for i in range(n) if mask >> i & 1]
        if len(sel) <= best:
            continue
        if all(not rel(a, b) and not rel(b, a) for a, b in itertools.combinations(sel, 2)):
            best = len(sel)
    return best


def max_free(points, bad):
    """Largest subset S with bad(S) false; exhaustive."""
    n = len(points)
    best = 0
    for mask in range(1 << n):
        cnt = bin(mask).count("1")
        if cnt <= best:
            continue
        sel = [points[i] for i in range(n) if mask >> i & 1]
        if not bad(sel):
            best = cnt
    return best


def has_join(sel):
    s = set(sel)
    for v, w in itertools.combinations(sel, 2):
        u = tuple(max(a, b) for a, b in zip(v, w))
        if u != v and u != w and u in s:
            return True
    return False


def has_ba(sel, d, k, n):
    s = set(sel)
    offsets = [o for o in itertools.product(range(k), repeat=n) if any(o)]
    for v0 in sel:
        for vs in itertools.combinations(offsets, d):
            ok = True
            for a, b in itertools.combinations(vs, 2):
                if any(x and y for x, y in zip(a, b)):
                    ok = False
                    break
            if not ok:
                continue
            good = True
            for r in range(d + 1):
                for idx in itertools.combinations(vs, r):
                    p = tuple(v0[i] + sum(o[i] for o in idx) for i in range(n))
                    if p not in s:
                        good = False
                        break
                if not good:
                    break
            if good:
                return True
    return False


def max_no_long_chain_ilp(points, rel, c):
    """Max subset that splits into c antichains of `rel` (no (c+1)-chain)."""
    n = len(points)
    if c == 0:
        return 0
    nv = n * c
    obj = -np.ones(nv)
    rows = []
    for u in range(n):
        # at most one label per point
        row = np.zeros(nv)
        row[u * c:(u + 1) * c] = 1
        rows.append((row, 1))
    for u in range(n):
        for v in range(n):
            if rel(points[u], points[v]):
                for j in range(c):
                    for jp in range(j, c):
                        row = np.zeros(nv)
                        row[u * c + jp] = 1
                        row[v * c + j] = 1
                        rows.append((row, 1))
    A = np.array([r for r, _ in rows])
    ub = np.array([b for _, b in rows], dtype=float)
    res = milp(obj, constraints=LinearConstraint(A, -np.inf, ub),
               integrality=np.ones(nv), bounds=Bounds(0, 1))
    return int(round(-res.fun))


def main():
    print("width [3]^2 =", max_antichain(grid((3, 3)), lt))
    print("width [2]^4 =", max_antichain(grid((2,) * 4), lt))
    print("max_avoiding [2]^2 strong C2 =",
          max_free(grid((2, 2)), lambda s: any(strict(a, b) or strict(b, a)
                                               for a, b in itertools.combinations(s, 2))))
    for k, l in itertools.product(range(1, 4), repeat=2):
        if k * l == 1:
            continue
        print(f"max_no_join [{k}]x[{l}] =", max_free(grid((k, l)), has_join))
    print("max_no_join [2] =", max_free(grid((2,)), has_join))
    print("b([3]^2, d=2) =", max_free(grid((3, 3)), lambda s: has_ba(s, 2, 3, 2)))
    for n in (2, 3, 4):
        print(f"b({n},1) =", max_free(grid((2,) * n), lambda s: has_ba(s, 1, 2, n)))
    # weak chains in [2]^n (Erdos)
    for n, kk in [(2, 2), (3, 2), (3, 3), (4, 2), (4, 3)]:
        v = max_no_long_chain_ilp(grid((2,) * n), lt, kk - 1)
        e = max(sum(math.comb(n, i) for i in range(l, l + kk - 1) if 0 <= i <= n)
                for l in range(0, n + 1))
        print(f"La([2]^{n}, C{kk}) ilp={v} erdos={e}")
    print("strong chain goldens (k, d, h, value, strong chain bound):")
    shapes = []
    for d in range(1, 7):
        k = 2
        while k ** d <= 64:
            shapes.append((k, d))
            k += 1
    for k, d in shapes:
        pts = grid((k,) * d)
        for h in range(1, 5):
            v = max_no_long_chain_ilp(pts, strict, h - 1)
            print(f"  {{{k}, {d}, {h}, {v}}},  // bound {d*(h-1)*k**(d-1)}")


if __name__ == "__main__":
    main()
