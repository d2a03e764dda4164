#include "pgl/extremal.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <deque>
#include <exception>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

#include <fmt/format.h>

#include "pgl/decomposition.hpp"
#include "pgl/errors.hpp"

namespace pgl {

// ---------------------------------------------------------------------------
// Greene-Kleitman bound

std::size_t max_c_family(const std::vector<DynBitset>& above, const DynBitset& subset, std::size_t c) {
    const auto pts = subset.indices();
    const std::size_t m = pts.size();
    if (c == 0 || m == 0) return 0;
    // Node 0 source, 1 sink, 2 + 2i entry of point i, 3 + 2i exit.
    struct Edge {
        std::size_t to;
        int cap;
        long cost;
    };
    const std::size_t nodes = 2 + 2 * m;
    std::vector<Edge> edges;
    std::vector<std::vector<std::size_t>> adj(nodes);
    auto add = [&](std::size_t a, std::size_t b, long cost) {
        adj[a].push_back(edges.size());
        edges.push_back({b, 1, cost});
        adj[b].push_back(edges.size());
        edges.push_back({a, 0, -cost});
    };
    std::vector<std::size_t> pos(subset.size(), 0);
    for (std::size_t i = 0; i < m; ++i) pos[pts[i]] = i;
    for (std::size_t i = 0; i < m; ++i) {
        add(0, 2 + 2 * i, static_cast<long>(c));
        add(2 + 2 * i, 3 + 2 * i, -1);
        add(3 + 2 * i, 1, 0);
        above[pts[i]].for_each([&](std::size_t y) {
            if (subset.test(y)) add(3 + 2 * i, 2 + 2 * pos[y], 0);
        });
    }
    // Successive shortest paths; the cost is convex in the flow, so stop at
    // the first non-negative augmenting path.
    long total = 0;
    constexpr long kInf = std::numeric_limits<long>::max() / 4;
    while (true) {
        std::vector<long> dist(nodes, kInf);
        std::vector<std::size_t> via(nodes, std::numeric_limits<std::size_t>::max());
        std::vector<char> queued(nodes, 0);
        std::deque<std::size_t> q{0};
        dist[0] = 0;
        queued[0] = 1;
        while (!q.empty()) {
            const std::size_t u = q.front();
            q.pop_front();
            queued[u] = 0;
            for (std::size_t e : adj[u]) {
                const Edge& ed = edges[e];
                if (ed.cap > 0 && dist[u] + ed.cost < dist[ed.to]) {
                    dist[ed.to] = dist[u] + ed.cost;
                    via[ed.to] = e;
                    if (!queued[ed.to]) {
                        queued[ed.to] = 1;
                        q.push_back(ed.to);
                    }
                }
            }
        }
        if (dist[1] >= 0) break;
        for (std::size_t v = 1; v != 0;) {
            const std::size_t e = via[v];
            edges[e].cap -= 1;
            edges[e ^ 1].cap += 1;
            v = edges[e ^ 1].to;
        }
        total += dist[1];
    }
    return static_cast<std::size_t>(static_cast<long>(m) + total);
}

mpz_class erdos_bound(int n, int c) {
    std::vector<mpz_class> b;
    for (int i = 0; i <= n; ++i) {
        mpz_class v;
        mpz_bin_uiui(v.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(i));
        b.push_back(v);
    }
    std::sort(b.begin(), b.end(), [](const mpz_class& x, const mpz_class& y) { return x > y; });
    mpz_class sum = 0;
    for (int i = 0; i < c && i < static_cast<int>(b.size()); ++i) sum += b[static_cast<std::size_t>(i)];
    return sum;
}

// ---------------------------------------------------------------------------
// Forbidden structures for the exact searches

namespace {

constexpr std::size_t kNoChainLimit = std::numeric_limits<std::size_t>::max();

class Structure {
  public:
    virtual ~Structure() = default;
    /// F + {c} contains the structure using c, where c has the largest index.
    /// Sets `undecided` when a sub-search ran out of budget.
    virtual bool through(const DynBitset& family, std::size_t c, bool& undecided) const = 0;
    /// Independent full check used to re-verify witnesses.
    virtual bool contained_in(const Family& family) const = 0;

    /// Free families have no chain of chain_limit + 1 points under chain_order.
    std::size_t chain_limit = kNoChainLimit;
    std::vector<DynBitset> chain_order;
};

std::vector<DynBitset> grid_order(const GridShape& shape, bool strict) {
    const std::size_t N = shape.size();
    std::vector<Point> pts;
    for (std::size_t i = 0; i < N; ++i) pts.push_back(shape.point(i));
    std::vector<DynBitset> above(N, DynBitset(N));
    for (std::size_t a = 0; a < N; ++a)
        for (std::size_t b = a + 1; b < N; ++b)
            if (strict ? strictly_precedes(pts[a], pts[b]) : precedes(pts[a], pts[b])) above[a].set(b);
    return above;
}

class PosetStructure final : public Structure {
  public:
    PosetStructure(const GridShape& shape, const Poset& poset, CopyMode mode, std::uint64_t budget)
        : poset_(poset), mode_(mode), budget_(budget), matcher_(all_points(shape), poset, mode) {
        for (std::size_t x = 0; x < poset.size(); ++x)
            if (poset.above(x).none()) maximal_.push_back(x);
        const bool is_chain = height(poset) == poset.size();
        if (mode == CopyMode::weak || is_chain) {
            chain_limit = poset.size() - 1;
            chain_order = grid_order(shape, mode == CopyMode::strong);
        }
    }

    bool through(const DynBitset& family, std::size_t c, bool& undecided) const override {
        DynBitset allowed = family;
        allowed.set(c);
        try {
            // c has the largest index, so it can only be a maximal element.
            return matcher_.find_anchored(allowed, c, maximal_, budget_).has_value();
        } catch (const BudgetExceeded&) {
            undecided = true;
            return true;
        }
    }

    bool contained_in(const Family& family) const override {
        return find_copy(family, poset_, mode_, SearchOptions{budget_, Exec::serial}).has_value();
    }

  private:
    static std::vector<Point> all_points(const GridShape& shape) {
        std::vector<Point> pts;
        for (std::size_t i = 0; i < shape.size(); ++i) pts.push_back(shape.point(i));
        return pts;
    }

    Poset poset_;
    CopyMode mode_;
    std::uint64_t budget_;
    CopyMatcher matcher_;
    std::vector<std::size_t> maximal_;
};

class BooleanAlgebraStructure final : public Structure {
  public:
    BooleanAlgebraStructure(const GridShape& shape, int d) : shape_(shape), d_(d) {
        if (d == 1) {
            chain_limit = 1;
            chain_order = grid_order(shape, false);
        }
    }
    bool through(const DynBitset& family, std::size_t c, bool&) const override {
        return find_boolean_algebra_with_top(Family::from_bits(shape_, family), shape_.point(c), d_).has_value();
    }
    bool contained_in(const Family& family) const override {
        return find_boolean_algebra(family, d_).has_value();
    }

  private:
    GridShape shape_;
    int d_;
};

class JoinStructure final : public Structure {
  public:
    explicit JoinStructure(const GridShape& shape) : shape_(shape) {}
    bool through(const DynBitset& family, std::size_t c, bool&) const override {
        return find_join_triple_with_top(Family::from_bits(shape_, family), shape_.point(c)).has_value();
    }
    bool contained_in(const Family& family) const override {
        return find_join_triple(family, Exec::serial).has_value();
    }

  private:
    GridShape shape_;
};

struct SearchOutcome {
    std::size_t optimum = 0;
    DynBitset witness;
    bool complete = true;
    std::string method;
    std::uint64_t nodes = 0;
};

// Every subset, by increasing top bit: a set is free iff it is free without
// its top point and the top point closes no copy.
SearchOutcome exhaustive_search(const GridShape& shape, const Structure& st, Exec exec) {
    const std::size_t N = shape.size();
    const std::uint64_t total = std::uint64_t{1} << N;
    std::vector<char> free(total, 0);
    free[0] = 1;
    std::atomic<bool> undecided_any{false};
    auto decide = [&](std::uint64_t mask, std::size_t b) {
        const std::uint64_t rest = mask ^ (std::uint64_t{1} << b);
        if (!free[rest]) return;
        DynBitset bits(N);
        for (std::size_t i = 0; i < b; ++i)
            if (rest >> i & 1) bits.set(i);
        bool undecided = false;
        free[mask] = !st.through(bits, b, undecided);
        if (undecided) undecided_any = true;
    };
    for (std::size_t b = 0; b < N; ++b) {
        const std::uint64_t lo = std::uint64_t{1} << b, hi = lo << 1;
        if (exec == Exec::serial) {
            for (std::uint64_t mask = lo; mask < hi; ++mask) decide(mask, b);
        } else {
            std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 256)
            for (std::uint64_t mask = lo; mask < hi; ++mask) {
                try {
                    decide(mask, b);
                } catch (...) {
#pragma omp critical(pgl_exhaustive_error)
                    if (!error) error = std::current_exception();
                }
            }
            if (error) std::rethrow_exception(error);
        }
    }
    SearchOutcome out;
    out.method = "exhaustive";
    out.nodes = total;
    std::uint64_t best_mask = 0;
    int best = -1;
    for (std::uint64_t mask = 0; mask < total; ++mask)
        if (free[mask] && __builtin_popcountll(mask) > best) {
            best = __builtin_popcountll(mask);
            best_mask = mask;
        }
    out.optimum = static_cast<std::size_t>(best);
    out.witness = DynBitset(N);
    for (std::size_t i = 0; i < N; ++i)
        if (best_mask >> i & 1) out.witness.set(i);
    out.complete = !undecided_any;
    return out;
}

// Include-first branch and bound over points in index order (a linear
// extension of the grid). Bound: |F| + min(|R|, GK_c(R)) for the suffix R.
class BranchAndBound {
  public:
    BranchAndBound(const GridShape& shape, const Structure& st, const ExtremalOptions& options)
        : N_(shape.size()), st_(st), options_(options), suffix_ub_(N_ + 1, 0) {
        for (std::size_t i = 0; i <= N_; ++i) {
            suffix_ub_[i] = N_ - i;
            if (st.chain_limit != kNoChainLimit && i < N_) {
                DynBitset rest(N_);
                for (std::size_t j = i; j < N_; ++j) rest.set(j);
                suffix_ub_[i] = std::min(suffix_ub_[i], max_c_family(st.chain_order, rest, st.chain_limit));
            }
        }
    }

    SearchOutcome run() {
        // Root branches: the first few decisions, include before exclude.
        struct Task {
            DynBitset bits;
            std::size_t count;
        };
        const std::size_t depth = std::min<std::size_t>(N_, 6);
        std::vector<Task> tasks;
        DynBitset bits(N_);
        auto expand = [&](auto&& self, std::size_t i, std::size_t count) -> void {
            if (i == depth) {
                tasks.push_back({bits, count});
                return;
            }
            bool undecided = false;
            if (!st_.through(bits, i, undecided)) {
                bits.set(i);
                self(self, i + 1, count + 1);
                bits.reset(i);
            }
            if (undecided) undecided_ = true;
            self(self, i + 1, count);
        };
        expand(expand, 0, 0);

        std::vector<Local> results(tasks.size());
        auto solve = [&](std::size_t t) {
            Local& loc = results[t];
            loc.bits = tasks[t].bits;
            rec(loc, depth, tasks[t].count);
        };
        if (options_.exec == Exec::serial) {
            for (std::size_t t = 0; t < tasks.size(); ++t) solve(t);
        } else {
            std::exception_ptr error;
#pragma omp parallel for schedule(dynamic, 1)
            for (std::size_t t = 0; t < tasks.size(); ++t) {
                try {
                    solve(t);
                } catch (...) {
#pragma omp critical(pgl_bnb_error)
                    if (!error) error = std::current_exception();
                }
            }
            if (error) std::rethrow_exception(error);
        }

        // Largest optimum; ties go to the first root branch in search order.
        SearchOutcome out;
        out.method = "branch-and-bound";
        std::size_t pick = 0;
        for (std::size_t t = 0; t < results.size(); ++t)
            if (results[t].best > results[pick].best) pick = t;
        out.optimum = static_cast<std::size_t>(std::max<long>(0, results[pick].best));
        out.witness = results[pick].best_bits;
        if (out.witness.size() == 0) out.witness = DynBitset(N_);
        out.complete = !budget_hit_ && !undecided_;
        out.nodes = nodes_.load();
        return out;
    }

  private:
    struct Local {
        DynBitset bits, best_bits;
        long best = -1;
    };

    void rec(Local& loc, std::size_t i, std::size_t count) {
        if (budget_hit_.load(std::memory_order_relaxed)) return;
        if (nodes_.fetch_add(1, std::memory_order_relaxed) + 1 > options_.node_budget) {
            budget_hit_ = true;
            return;
        }
        if (static_cast<long>(count) > loc.best) {
            loc.best = static_cast<long>(count);
            loc.best_bits = loc.bits;
            std::size_t g = global_.load();
            while (count > g && !global_.compare_exchange_weak(g, count)) {
            }
        }
        if (i == N_) return;
        const std::size_t ub = count + suffix_ub_[i];
        if (static_cast<long>(ub) <= loc.best || ub < global_.load(std::memory_order_relaxed)) return;
        if (st_.chain_limit != kNoChainLimit && i > 0) {
            // The final family lies in the chosen points plus the suffix and
            // is still c-chain-free there; this sees the exclusions too.
            // Suffix points already completing a copy can never be added.
            DynBitset reach = loc.bits;
            for (std::size_t j = i; j < N_; ++j) {
                bool unsure = false;
                if (!st_.through(loc.bits, j, unsure) || unsure) reach.set(j);
            }
            const std::size_t tight = max_c_family(st_.chain_order, reach, st_.chain_limit);
            if (static_cast<long>(tight) <= loc.best || tight < global_.load(std::memory_order_relaxed)) return;
        }
        bool undecided = false;
        if (!st_.through(loc.bits, i, undecided)) {
            loc.bits.set(i);
            rec(loc, i + 1, count + 1);
            loc.bits.reset(i);
        }
        if (undecided) undecided_ = true;
        rec(loc, i + 1, count);
    }

    std::size_t N_;
    const Structure& st_;
    ExtremalOptions options_;
    std::vector<std::size_t> suffix_ub_;
    std::atomic<std::uint64_t> nodes_{0};
    std::atomic<std::size_t> global_{0};
    std::atomic<bool> budget_hit_{false};
    std::atomic<bool> undecided_{false};
};

ExtremalResult solve(const GridShape& shape, const Structure& st, const ExtremalOptions& options,
                     std::string structure, std::string mode) {
    SearchOutcome out = shape.size() <= options.exhaustive_points && shape.size() < 63
                            ? exhaustive_search(shape, st, options.exec)
                            : BranchAndBound(shape, st, options).run();
    ExtremalResult r;
    r.shape = shape;
    r.structure = std::move(structure);
    r.mode = std::move(mode);
    r.optimum = out.optimum;
    r.witness = Family::from_bits(shape, out.witness);
    r.complete = out.complete;
    r.method = out.method;
    r.stats.nodes = out.nodes;
    if (r.witness.size() != r.optimum) throw std::logic_error("extremal witness size disagrees with the optimum");
    if (st.contained_in(r.witness)) throw std::logic_error("extremal witness contains the forbidden structure");
    return r;
}

}  // namespace

ExtremalResult max_avoiding(const GridShape& shape, const Poset& poset, CopyMode mode,
                            const ExtremalOptions& options, const std::string& name) {
    if (poset.size() == 0) throw PrecondError("every family contains the empty poset");
    const PosetStructure st(shape, poset, mode, options.check_budget);
    return solve(shape, st, options, "poset:" + name, std::string(to_string(mode)));
}

ExtremalResult max_no_boolean_algebra(const GridShape& shape, int d, const ExtremalOptions& options) {
    if (d < 1) throw PrecondError("Boolean algebra dimension must be at least 1");
    const BooleanAlgebraStructure st(shape, d);
    return solve(shape, st, options, fmt::format("boolean-algebra:{}", d), "-");
}

ExtremalResult max_no_join(const GridShape& shape, const ExtremalOptions& options) {
    const JoinStructure st(shape);
    return solve(shape, st, options, "join", "-");
}

// ---------------------------------------------------------------------------
// Bound formulas and constants

namespace {

mpz_class pow_z(long base, unsigned long e) {
    mpz_class r;
    mpz_ui_pow_ui(r.get_mpz_t(), static_cast<unsigned long>(base), e);
    return r;
}

mpz_class binom(int n, int k) {
    mpz_class r;
    mpz_bin_uiui(r.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return r;
}

std::string rational_string(const mpq_class& q) {
    return q.get_den() == 1 ? q.get_num().get_str() : q.get_num().get_str() + "/" + q.get_den().get_str();
}

// log2 of a positive rational, good to double precision.
double log2_q(const mpq_class& q) {
    auto lg = [](const mpz_class& z) {
        long e = 0;
        const double m = mpz_get_d_2exp(&e, z.get_mpz_t());
        return std::log2(m) + static_cast<double>(e);
    };
    return lg(q.get_num()) - lg(q.get_den());
}

}  // namespace

int smallest_d0(std::uint64_t r) {
    if (r == 0) return 1;
    for (int d = 2;; ++d)
        if (mpz_class(1) << static_cast<unsigned>(d - 2) >= mpz_class(static_cast<unsigned long>(r)) * (d + 1)) return d;
}

bool exceeds_dense_threshold(std::uint64_t family_size, int d0, int h, std::size_t l, int k, int d) {
    if (h < 1 || k < 1 || d < 1) throw PrecondError("dense extraction threshold needs h, k, d >= 1");
    const mpz_class kd1 = pow_z(k, static_cast<unsigned long>(d - 1));
    const mpz_class lhs = mpz_class(static_cast<unsigned long>(family_size)) - mpz_class(8 * d0 * (h - 1)) * kd1;
    if (l == 0) return lhs > 0;
    if (lhs <= 0) return false;
    // lhs > 4lh k^{(h-1)/h} k^{d-1}  <=>  lhs^h > (4lh)^h k^{h-1} k^{(d-1)h}
    mpz_class left, right;
    mpz_pow_ui(left.get_mpz_t(), lhs.get_mpz_t(), static_cast<unsigned long>(h));
    const mpz_class c = mpz_class(static_cast<unsigned long>(4 * l * static_cast<std::size_t>(h)));
    mpz_pow_ui(right.get_mpz_t(), c.get_mpz_t(), static_cast<unsigned long>(h));
    right *= pow_z(k, static_cast<unsigned long>(h - 1));
    mpz_class kd1h;
    mpz_pow_ui(kd1h.get_mpz_t(), kd1.get_mpz_t(), static_cast<unsigned long>(h));
    right *= kd1h;
    return left > right;
}

mpz_class strong_chain_bound(int d, int h, int k) {
    return mpz_class(d) * (h - 1) * pow_z(k, static_cast<unsigned long>(d - 1));
}

mpz_class strong_multilevel_bound(int d, int h, int k) { return 4 * strong_chain_bound(d, h, k); }

mpq_class BoundConstants::C(std::size_t l) const {
    if (C_exponent > (1 << 24)) throw SizeError("C_l has more than 2^24 bits");
    mpq_class v = C_coefficients.at(l);
    mpz_class f = mpz_class(1) << static_cast<unsigned>(C_exponent.get_ui());
    v *= f;
    v.canonicalize();
    return v;
}

BoundConstants compute_constants(const Poset& poset) {
    BoundConstants bc;
    const auto seq = interpolation_sequence(poset);
    bc.p = poset.size();
    bc.h = static_cast<std::size_t>(seq.levels.height);
    bc.q = seq.q;
    for (const auto& lv : seq.levels.levels) bc.r = std::max(bc.r, lv.size());
    bc.d0 = smallest_d0(bc.r);
    if (bc.p == 0) return bc;

    const unsigned long p = bc.p, h = bc.h;
    // s_{i+1} is the least power of two above (100 p^3 h s_i)^{2h^2}; with
    // s_i = 2^{e_i} that power is 2^{bitlength(X) + 2h^2 e_i}, X = (100p^3h)^{2h^2}.
    mpz_class X;
    mpz_ui_pow_ui(X.get_mpz_t(), 100 * p * p * p * h, 2 * h * h);
    const mpz_class bits_x = static_cast<unsigned long>(mpz_sizeinbase(X.get_mpz_t(), 2));
    bc.s_exponents.push_back(0);
    for (std::size_t i = 0; i + 2 <= bc.h; ++i)
        bc.s_exponents.push_back(bits_x + mpz_class(2 * h * h) * bc.s_exponents.back());

    // C_0 = 2h^2 p^3 s_{h-1}^2, C_{l+1} = (1 + 8h/p) C_l.
    bc.C_exponent = 2 * bc.s_exponents.back();
    mpq_class c = mpq_class(mpz_class(2 * h * h * p * p * p));
    mpq_class step(mpz_class(p + 8 * h), mpz_class(p));
    step.canonicalize();
    for (std::size_t l = 0; l <= bc.q; ++l) {
        bc.C_coefficients.push_back(c);
        c *= step;
    }

    // (C_q / C_0) = step^q against sum_{j <= J} (8h)^j / j!, a lower bound for e^{8h}.
    mpq_class ratio = 1;
    for (std::size_t l = 0; l < bc.q; ++l) ratio *= step;
    mpq_class partial = 0, term = 1;
    for (unsigned long j = 0; j < 4000 && !bc.cq_certified; ++j) {
        if (j > 0) {
            term *= mpq_class(mpz_class(8 * h), mpz_class(j));
            term.canonicalize();
        }
        partial += term;
        if (ratio < partial) bc.cq_certified = true;
    }

    if (bc.p >= 2) {
        const double lg = (log2_q(bc.C_coefficients.back()) + bc.C_exponent.get_d()) / std::log2(static_cast<double>(p));
        bc.c_h_proxy = fmt::format("{:.6f}", lg);
    }
    return bc;
}

std::vector<NamedBound> bound_catalog(const Poset& poset, int n, int k, const mpq_class& big_o_constant) {
    if (n < 1 || k < 1) throw PrecondError("bound catalog needs n, k >= 1");
    const auto seq = interpolation_sequence(poset);
    const int p = static_cast<int>(poset.size());
    const int h = seq.levels.height;
    std::size_t r = 0;
    for (const auto& lv : seq.levels.levels) r = std::max(r, lv.size());
    const int d0 = smallest_d0(r);
    const mpz_class middle = binom(n, n / 2);
    const std::string oconst = rational_string(big_o_constant);
    std::vector<NamedBound> out;

    out.push_back({"sperner", "C(n, floor(n/2))", middle.get_str(), true, true, "width of 2^[n]"});
    out.push_back({"erdos_height", "sum of the h-1 largest C(n, i)", erdos_bound(n, h - 1).get_str(), true, true,
                   "lower bound on La(n, P): no chain of h points"});
    {
        const double v = big_o_constant.get_d() * h * std::log2(static_cast<double>(p) / h + 2) * middle.get_d();
        out.push_back({"la_boolean", fmt::format("{} * h * log2(|P|/h + 2) * C(n, floor(n/2))", oconst),
                       fmt::format("{:.6g}", v), false, true, "constant unspecified; value approximate"});
    }
    {
        const auto bc = compute_constants(poset);
        std::string value = fmt::format("({}) * 2^{} * {}", rational_string(bc.C_coefficients.back()),
                                        bc.C_exponent.get_str(), middle.get_str());
        out.push_back({"la_induced", "C_q * C(n, floor(n/2))", value, true, true,
                       "C_q stands in for |P|^{c(h)}; vacuous at searchable sizes"});
    }
    {
        const std::uint64_t w = grid_width(GridShape::uniform(k, n), 0);
        const double lp = p > 1 ? std::pow(std::log2(static_cast<double>(p)), 1.5) : 0.0;
        const double v = big_o_constant.get_d() * static_cast<double>(w) * h * lp;
        out.push_back({"weak_grid", fmt::format("{} * w * h * log2(|P|)^(3/2)", oconst),
                       fmt::format("{:.6g}", v), false, true, "constant unspecified; value approximate"});
    }
    out.push_back({"strong_chains", "d (h-1) k^(d-1)", strong_chain_bound(n, h, k).get_str(), true, true,
                   "no strong chain of h points"});
    {
        const bool ok = (mpz_class(1) << static_cast<unsigned>(std::max(0, n - 2))) >=
                            mpz_class(static_cast<unsigned long>(r)) * (n + 1) &&
                        n >= 2 && h >= 2;
        out.push_back({"strong_multilevel", "4 d (h-1) k^(d-1)", strong_multilevel_bound(n, h, k).get_str(), true, ok,
                       "strong K^h_r with r the largest level; needs 2^(d-2)/(d+1) >= r and h >= 2"});
    }
    {
        // (8 d0 (h-1) + 4 l h k^{(h-1)/h}) k^{d-1}, l = q.
        const mpz_class kd1 = pow_z(k, static_cast<unsigned long>(n - 1));
        int root = 0;
        for (int s = 1;; ++s) {
            const mpz_class v = pow_z(s, static_cast<unsigned long>(std::max(h, 1)));
            if (v == k) root = s;
            if (v >= k) break;
        }
        const std::string formula = "(8 d0 (h-1) + 4 l h k^((h-1)/h)) k^(d-1)";
        if (root) {
            const mpz_class v = (mpz_class(8 * d0 * (h - 1)) +
                                 mpz_class(static_cast<unsigned long>(4 * seq.q * static_cast<std::size_t>(h))) *
                                     pow_z(root, static_cast<unsigned long>(std::max(h - 1, 0)))) *
                                kd1;
            out.push_back({"dense_extraction", formula, v.get_str(), true, true, fmt::format("d0 = {}, l = q = {}", d0, seq.q)});
        } else {
            const double v = (8.0 * d0 * (h - 1) + 4.0 * static_cast<double>(seq.q) * h *
                                                       std::pow(static_cast<double>(k), (h - 1.0) / h)) *
                             kd1.get_d();
            out.push_back({"dense_extraction", formula, fmt::format("{:.6g}", v), false, true,
                           fmt::format("d0 = {}, l = q = {}; k is not an h-th power, value approximate", d0, seq.q)});
        }
    }
    out.push_back({"bipartite", "a^O(1) (log b)^O(1) w", "unspecified", false, true,
                   "exponents unspecified; reported symbolically"});
    return out;
}

// ---------------------------------------------------------------------------
// Block classification and intersection selection

std::string_view to_string(BlockClass c) noexcept {
    switch (c) {
        case BlockClass::empty: return "empty";
        case BlockClass::light: return "light";
        case BlockClass::fat: return "fat";
        case BlockClass::medium: return "medium";
    }
    return "?";
}

std::vector<BlockClass> classify_blocks(const Family& family, const BlockGrid& blocks, std::uint64_t p,
                                        std::uint64_t s_prev) {
    if (!(family.shape() == blocks.shape())) throw ShapeMismatch("block grid and family shapes differ");
    if (p == 0) throw PrecondError("p must be positive");
    const std::size_t d = blocks.shape().dim();
    const mpz_class S = pow_z(blocks.side(), static_cast<unsigned long>(d - 1));
    const mpz_class pz(static_cast<unsigned long>(p));
    std::vector<BlockClass> out;
    out.reserve(blocks.block_count());
    for (std::size_t b = 0; b < blocks.block_count(); ++b) {
        const Point u = blocks.index_shape().point(b);
        std::size_t count = 0;
        for (std::size_t i : blocks.block_indices(u)) count += family.contains_index(i);
        if (count == 0) {
            out.push_back(BlockClass::empty);
            continue;
        }
        if (mpz_class(static_cast<unsigned long>(count)) * pz <= S) {
            out.push_back(BlockClass::light);
            continue;
        }
        const std::size_t pr = d >= 2 ? block_projection(blocks, u, family).size() : 1;
        if (mpz_class(static_cast<unsigned long>(pr)) * pz * pz * static_cast<unsigned long>(s_prev) >= S)
            out.push_back(BlockClass::fat);
        else
            out.push_back(BlockClass::medium);
    }
    return out;
}

IntersectionSelection intersection_select(const SetSystem& system, int h) {
    const std::size_t m = system.sets.size();
    const mpq_class& alpha = system.alpha;
    if (h < 1) throw PrecondError("h must be at least 1");
    if (!(alpha > 0 && alpha < mpq_class(1, 2))) throw PrecondError("alpha must lie strictly between 0 and 1/2");
    mpq_class need = mpq_class(2 * h) / alpha;
    need.canonicalize();
    if (mpq_class(static_cast<unsigned long>(m)) < need) throw PrecondError("need m >= 2h/alpha sets");
    const mpq_class V(static_cast<unsigned long>(system.ground));
    for (const auto& s : system.sets) {
        if (s.size() != system.ground) throw ShapeMismatch("set length differs from the ground set");
        if (mpq_class(static_cast<unsigned long>(s.count())) < alpha * V)
            throw PrecondError("every set must have at least alpha |V| points");
    }

    // M = ceil(2h / alpha).
    mpz_class Mz;
    mpz_cdiv_q(Mz.get_mpz_t(), need.get_num().get_mpz_t(), need.get_den().get_mpz_t());
    const std::size_t M = std::min<std::size_t>(m, Mz.get_ui());
    const std::size_t hh = static_cast<std::size_t>(h);

    std::map<std::vector<std::size_t>, std::size_t> votes;
    for (std::size_t v = 0; v < system.ground; ++v) {
        std::vector<std::size_t> tuple;
        for (std::size_t i = 0; i < M && tuple.size() < hh; ++i)
            if (system.sets[i].test(v)) tuple.push_back(i);
        if (tuple.size() == hh) ++votes[tuple];
    }
    IntersectionSelection out;
    if (h == 1) {
        // A single set: the largest one, lowest index on ties.
        std::size_t best = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (system.sets[i].count() > system.sets[best].count()) best = i;
        out.indices = {best};
    } else if (votes.empty()) {
        for (std::size_t i = 0; i < hh; ++i) out.indices.push_back(i);
    } else {
        std::size_t best = 0;
        for (const auto& [tuple, count] : votes)
            if (count > best) {
                best = count;
                out.indices = tuple;
            }
    }
    out.intersection = system.sets[out.indices[0]];
    for (std::size_t i = 1; i < out.indices.size(); ++i) out.intersection &= system.sets[out.indices[i]];

    mpq_class bound = alpha / 12;
    mpq_class g = 1;
    for (int i = 0; i <= h; ++i) g *= bound;
    g *= V;
    if (mpq_class(static_cast<unsigned long>(out.intersection.count())) < g)
        throw std::logic_error("intersection_select missed the (alpha/12)^(h+1) guarantee");
    return out;
}

}  // namespace pgl
