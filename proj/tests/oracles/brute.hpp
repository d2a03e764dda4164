#pragma once

// Brute-force reference computations used only by tests. Nothing here calls
// into the library beyond plain data; the point is to be obviously correct.

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace brute {

using Vec = std::vector<int>;

inline bool leq(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] > b[i]) return false;
    return true;
}

inline bool lt(const Vec& a, const Vec& b) { return a != b && leq(a, b); }

inline bool strict_all(const Vec& a, const Vec& b) {
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] >= b[i]) return false;
    return true;
}

/// All points of [k_1] x ... x [k_n], last coordinate fastest.
inline std::vector<Vec> grid_points(const Vec& sides) {
    std::vector<Vec> out{{}};
    for (int k : sides) {
        std::vector<Vec> next;
        for (const auto& p : out)
            for (int v = 1; v <= k; ++v) {
                auto q = p;
                q.push_back(v);
                next.push_back(q);
            }
        out = next;
    }
    return out;
}

/// Largest antichain of a relation given as lt[x][y], by subset enumeration.
inline std::size_t max_antichain(const std::vector<std::vector<bool>>& less) {
    const std::size_t p = less.size();
    std::size_t best = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
        bool ok = true;
        for (std::size_t x = 0; x < p && ok; ++x)
            for (std::size_t y = 0; y < p && ok; ++y)
                if ((mask >> x & 1) && (mask >> y & 1) && less[x][y]) ok = false;
        if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcountll(mask)));
    }
    return best;
}

/// Longest chain by enumeration of all subsets (p <= 20).
inline std::size_t longest_chain(const std::vector<std::vector<bool>>& less) {
    const std::size_t p = less.size();
    std::size_t best = 0;
    for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << p); ++mask) {
        bool ok = true;
        for (std::size_t x = 0; x < p && ok; ++x)
            for (std::size_t y = x + 1; y < p && ok; ++y)
                if ((mask >> x & 1) && (mask >> y & 1) && !less[x][y] && !less[y][x]) ok = false;
        if (ok) best = std::max<std::size_t>(best, static_cast<std::size_t>(__builtin_popcountll(mask)));
    }
    return best;
}

/// Warshall closure.
inline std::vector<std::vector<bool>> closure(std::vector<std::vector<bool>> r) {
    const std::size_t p = r.size();
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t i = 0; i < p; ++i)
            for (std::size_t j = 0; j < p; ++j)
                if (r[i][k] && r[k][j]) r[i][j] = true;
    return r;
}

/// Is there an injective f: P -> family with the requested order behaviour?
/// mode 0 weak (x<y => f(x)<f(y)), 1 induced (iff), 2 strong (x<y => strict in
/// all coordinates, incomparable => incomparable).
inline bool has_copy(const std::vector<std::vector<bool>>& less, const std::vector<Vec>& family, int mode) {
    const std::size_t p = less.size();
    std::vector<int> image(p, -1);
    std::vector<bool> used(family.size(), false);
    std::function<bool(std::size_t)> rec = [&](std::size_t x) -> bool {
        if (x == p) return true;
        for (std::size_t c = 0; c < family.size(); ++c) {
            if (used[c]) continue;
            bool ok = true;
            for (std::size_t y = 0; y < x && ok; ++y) {
                const Vec& a = family[static_cast<std::size_t>(image[y])];
                const Vec& b = family[c];
                const bool xy = less[y][x], yx = less[x][y];
                if (mode == 0) {
                    if (xy && !lt(a, b)) ok = false;
                    if (yx && !lt(b, a)) ok = false;
                } else if (mode == 1) {
                    if (xy != lt(a, b) || yx != lt(b, a)) ok = false;
                } else {
                    if (xy && !strict_all(a, b)) ok = false;
                    if (yx && !strict_all(b, a)) ok = false;
                    if (!xy && !yx && (leq(a, b) || leq(b, a))) ok = false;
                }
            }
            if (!ok) continue;
            used[c] = true;
            image[x] = static_cast<int>(c);
            if (rec(x + 1)) return true;
            used[c] = false;
        }
        return false;
    };
    return rec(0);
}

}  // namespace brute
