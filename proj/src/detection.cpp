#include "pgl/detection.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ranges.h>
#include <omp.h>

#include "pgl/decomposition.hpp"
#include "pgl/errors.hpp"
#include "pgl/extremal.hpp"

namespace pgl {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

}  // namespace

void set_thread_count(int n) {
    omp_set_num_threads(n > 0 ? n : omp_get_num_procs());
}

int thread_count() { return omp_get_max_threads(); }

std::string_view to_string(CopyMode mode) noexcept {
    switch (mode) {
        case CopyMode::weak: return "weak";
        case CopyMode::induced: return "induced";
        case CopyMode::strong: return "strong";
    }
    return "?";
}

CopyMode parse_copy_mode(std::string_view name) {
    if (name == "weak") return CopyMode::weak;
    if (name == "induced") return CopyMode::induced;
    if (name == "strong") return CopyMode::strong;
    throw InputError(fmt::format("unknown copy mode '{}'", name));
}

// ---------------------------------------------------------------------------
// Copy search

CopyMatcher::CopyMatcher(std::vector<Point> universe, const Poset& poset, CopyMode mode)
    : universe_(std::move(universe)), poset_(poset), mode_(mode) {
    const std::size_t m = universe_.size();
    if (m > kMaxCopyUniverse)
        throw SizeError(fmt::format("copy search over {} points exceeds the cap of {}", m, kMaxCopyUniverse));
    const auto order = level_order(poset_);
    var_rank_.assign(poset_.size(), 0);
    for (std::size_t i = 0; i < order.size(); ++i) var_rank_[order[i]] = i;

    up_.assign(m, DynBitset(m));
    down_.assign(m, DynBitset(m));
    incomparable_.assign(m, DynBitset(m));
    for (std::size_t a = 0; a < m; ++a) {
        for (std::size_t b = a + 1; b < m; ++b) {
            const Order o = compare(universe_[a], universe_[b]);
            if (o == Order::incomparable) {
                incomparable_[a].set(b);
                incomparable_[b].set(a);
                continue;
            }
            if (o == Order::equal) continue;
            const std::size_t lo = o == Order::less ? a : b, hi = o == Order::less ? b : a;
            if (mode_ == CopyMode::strong && !strictly_precedes(universe_[lo], universe_[hi])) continue;
            up_[lo].set(hi);
            down_[hi].set(lo);
        }
    }
}

struct CopySearchState {
    const CopyMatcher& m;
    std::size_t p;
    std::vector<std::vector<DynBitset>> dom;  // dom[depth][var]
    std::vector<std::size_t> image;
    std::atomic<std::uint64_t>& nodes;
    std::uint64_t budget;
    // Parallel cancellation: abandon this branch once a lower branch succeeds.
    const std::atomic<std::size_t>* best_branch = nullptr;
    std::size_t branch = 0;
    bool cancelled = false;

    CopySearchState(const CopyMatcher& matcher, std::atomic<std::uint64_t>& counter, std::uint64_t node_budget)
        : m(matcher),
          p(matcher.poset_.size()),
          dom(p + 1, std::vector<DynBitset>(p, DynBitset(matcher.universe_.size()))),
          image(p, kNone),
          nodes(counter),
          budget(node_budget) {}

    void count_node() {
        if (nodes.fetch_add(1, std::memory_order_relaxed) + 1 > budget)
            throw BudgetExceeded(fmt::format("copy search exceeded {} nodes", budget));
    }

    std::size_t choose(std::size_t depth) const {
        std::size_t best = kNone, best_count = kNone;
        for (std::size_t y = 0; y < p; ++y) {
            if (image[y] != kNone) continue;
            const std::size_t c = dom[depth][y].count();
            if (best == kNone || c < best_count || (c == best_count && m.var_rank_[y] < m.var_rank_[best])) {
                best = y;
                best_count = c;
            }
        }
        return best;
    }

    // Narrow every unassigned domain after var -> c; false on a wipe-out.
    bool propagate(std::size_t depth, std::size_t var, std::size_t c) {
        const Poset& P = m.poset_;
        for (std::size_t y = 0; y < p; ++y) {
            if (image[y] != kNone || y == var) continue;
            DynBitset& d = dom[depth + 1][y];
            d = dom[depth][y];
            if (P.less(var, y))
                d &= m.up_[c];
            else if (P.less(y, var))
                d &= m.down_[c];
            else if (m.mode_ != CopyMode::weak)
                d &= m.incomparable_[c];
            d.reset(c);
            if (d.none()) return false;
        }
        return true;
    }

    bool dfs(std::size_t depth) {
        count_node();
        if (best_branch && best_branch->load(std::memory_order_relaxed) < branch) {
            cancelled = true;
            return false;
        }
        if (depth == p) return true;
        const std::size_t var = choose(depth);
        const DynBitset& candidates = dom[depth][var];
        for (std::size_t c = candidates.find_first(); c < candidates.size(); c = candidates.find_next(c + 1)) {
            image[var] = c;
            if (propagate(depth, var, c) && dfs(depth + 1)) return true;
            image[var] = kNone;
            if (cancelled) return false;
        }
        return false;
    }
};

std::optional<std::vector<std::size_t>> CopyMatcher::find(const DynBitset& allowed, const SearchOptions& options,
                                                          SearchStats* stats) const {
    const std::size_t p = poset_.size();
    if (p == 0) return std::vector<std::size_t>{};
    if (allowed.count() < p) return std::nullopt;

    std::atomic<std::uint64_t> nodes{0};
    CopySearchState root(*this, nodes, options.node_budget);
    for (auto& d : root.dom[0]) d = allowed;
    const std::size_t var = root.choose(0);
    const auto candidates = allowed.indices();

    auto run_branch = [&](CopySearchState& st, std::size_t i) -> bool {
        std::fill(st.image.begin(), st.image.end(), kNone);
        for (std::size_t y = 0; y < p; ++y) st.dom[0][y] = allowed;
        st.count_node();
        st.image[var] = candidates[i];
        return st.propagate(0, var, candidates[i]) && st.dfs(1);
    };

    std::optional<std::vector<std::size_t>> result;
    if (options.exec == Exec::serial || candidates.size() < 2) {
        for (std::size_t i = 0; i < candidates.size() && !result; ++i)
            if (run_branch(root, i)) result = root.image;
    } else {
        // Every branch below the best success runs to completion, so the
        // winner is the lowest successful branch regardless of scheduling.
        std::atomic<std::size_t> best{kNone};
        std::vector<std::vector<std::size_t>> found(candidates.size());
        std::exception_ptr error;
#pragma omp parallel
        {
            CopySearchState st(*this, nodes, options.node_budget);
            st.best_branch = &best;
#pragma omp for schedule(dynamic, 1)
            for (std::size_t i = 0; i < candidates.size(); ++i) {
                if (best.load() < i) continue;
                try {
                    st.branch = i;
                    st.cancelled = false;
                    if (run_branch(st, i)) {
                        found[i] = st.image;
                        std::size_t cur = best.load();
                        while (i < cur && !best.compare_exchange_weak(cur, i)) {
                        }
                    }
                } catch (...) {
#pragma omp critical(pgl_copy_error)
                    if (!error) error = std::current_exception();
                    best.store(0);
                }
            }
        }
        if (error) std::rethrow_exception(error);
        if (best.load() != kNone) result = found[best.load()];
    }
    if (stats) stats->nodes += nodes.load();
    return result;
}

std::optional<std::vector<std::size_t>> CopyMatcher::find_anchored(const DynBitset& allowed, std::size_t anchor,
                                                                   std::span<const std::size_t> vars,
                                                                   std::uint64_t node_budget,
                                                                   SearchStats* stats) const {
    const std::size_t p = poset_.size();
    if (p == 0 || !allowed.test(anchor) || allowed.count() < p) return std::nullopt;
    std::atomic<std::uint64_t> nodes{0};
    CopySearchState st(*this, nodes, node_budget);
    std::optional<std::vector<std::size_t>> result;
    for (std::size_t var : vars) {
        std::fill(st.image.begin(), st.image.end(), kNone);
        for (std::size_t y = 0; y < p; ++y) st.dom[0][y] = allowed;
        st.count_node();
        st.image[var] = anchor;
        if (st.propagate(0, var, anchor) && st.dfs(1)) {
            result = st.image;
            break;
        }
    }
    if (stats) stats->nodes += nodes.load();
    return result;
}

namespace {

bool pair_ok(CopyMode mode, bool x_lt_y, bool y_lt_x, const Point& a, const Point& b) {
    const Order o = compare(a, b);
    if (o == Order::equal) return false;
    switch (mode) {
        case CopyMode::weak:
            return (!x_lt_y || o == Order::less) && (!y_lt_x || o == Order::greater);
        case CopyMode::induced:
            return x_lt_y == (o == Order::less) && y_lt_x == (o == Order::greater);
        case CopyMode::strong:
            if (x_lt_y) return strictly_precedes(a, b);
            if (y_lt_x) return strictly_precedes(b, a);
            return o == Order::incomparable;
    }
    return false;
}

// Plain enumeration of every injection, for cross-checking tiny searches.
bool exists_by_injections(const std::vector<Point>& pts, const Poset& P, CopyMode mode) {
    const std::size_t p = P.size();
    std::vector<std::size_t> img(p);
    std::vector<bool> used(pts.size(), false);
    auto rec = [&](auto&& self, std::size_t x) -> bool {
        if (x == p) {
            for (std::size_t a = 0; a < p; ++a)
                for (std::size_t b = a + 1; b < p; ++b)
                    if (!pair_ok(mode, P.less(a, b), P.less(b, a), pts[img[a]], pts[img[b]])) return false;
            return true;
        }
        for (std::size_t c = 0; c < pts.size(); ++c) {
            if (used[c]) continue;
            used[c] = true;
            img[x] = c;
            const bool ok = self(self, x + 1);
            used[c] = false;
            if (ok) return true;
        }
        return false;
    };
    return rec(rec, 0);
}

constexpr std::uint64_t kInjectionCheckLimit = 200'000;

std::uint64_t falling_factorial(std::size_t n, std::size_t p) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < p; ++i) {
        if (n < i) return 0;
        r *= n - i;
        if (r > kInjectionCheckLimit) return r;
    }
    return r;
}

}  // namespace

std::optional<Embedding> find_copy(const Family& family, const Poset& poset, CopyMode mode,
                                   const SearchOptions& options, SearchStats* stats) {
    std::vector<Point> pts = family.points();
    const CopyMatcher matcher(pts, poset, mode);
    DynBitset all(pts.size());
    all.set_all();
    const auto found = matcher.find(all, options, stats);

    if (pts.size() <= 20 && falling_factorial(pts.size(), poset.size()) <= kInjectionCheckLimit &&
        exists_by_injections(pts, poset, mode) != found.has_value())
        throw std::logic_error("find_copy disagrees with injection enumeration");

    if (!found) return std::nullopt;
    Embedding e{mode, {}};
    e.image.reserve(poset.size());
    for (std::size_t c : *found) e.image.push_back(pts[c]);
    return e;
}

bool verify_embedding(const Family& family, const Poset& poset, const Embedding& embedding) {
    const std::size_t p = poset.size();
    if (embedding.image.size() != p) return false;
    for (const Point& x : embedding.image)
        if (x.dim() != family.shape().dim() || !family.contains(x)) return false;
    for (std::size_t a = 0; a < p; ++a)
        for (std::size_t b = a + 1; b < p; ++b)
            if (!pair_ok(embedding.mode, poset.less(a, b), poset.less(b, a), embedding.image[a], embedding.image[b]))
                return false;
    return true;
}

// ---------------------------------------------------------------------------
// Boolean algebras

std::vector<Point> BooleanAlgebraWitness::points() const {
    const std::size_t d = offsets.size();
    std::vector<Point> out;
    out.reserve(std::size_t{1} << d);
    for (std::size_t mask = 0; mask < (std::size_t{1} << d); ++mask) {
        Point x = base;
        for (std::size_t i = 0; i < d; ++i)
            if (mask >> i & 1)
                for (std::size_t j = 0; j < x.dim(); ++j) x[j] += offsets[i][j];
        out.push_back(std::move(x));
    }
    return out;
}

namespace {

// Splits the support of top - base into d nonempty offset groups (restricted
// growth strings, so offsets come ordered by their first coordinate) and
// returns the first split whose every proper sum lies in F.
std::optional<BooleanAlgebraWitness> split_interval(const Family& family, const Point& base, const Point& top, int d,
                                                    std::uint64_t& nodes, std::uint64_t budget) {
    std::vector<std::size_t> support;
    for (std::size_t j = 0; j < base.dim(); ++j)
        if (top[j] > base[j]) support.push_back(j);
    const std::size_t s = support.size();
    if (s < static_cast<std::size_t>(d)) return std::nullopt;

    std::vector<int> group(s, 0);
    auto check = [&]() -> std::optional<BooleanAlgebraWitness> {
        BooleanAlgebraWitness w{base, std::vector<Point>(static_cast<std::size_t>(d),
                                                         Point(std::vector<int>(base.dim(), 0)))};
        for (std::size_t t = 0; t < s; ++t)
            w.offsets[static_cast<std::size_t>(group[t])][support[t]] = top[support[t]] - base[support[t]];
        const std::size_t full = (std::size_t{1} << d) - 1;
        const auto pts = w.points();
        for (std::size_t mask = 1; mask < full; ++mask)
            if (!family.contains(pts[mask])) return std::nullopt;
        return w;
    };
    // Enumerate restricted growth strings with exactly d blocks.
    auto rec = [&](auto&& self, std::size_t t, int used) -> std::optional<BooleanAlgebraWitness> {
        if (s - t < static_cast<std::size_t>(d - used)) return std::nullopt;
        if (t == s) {
            if (++nodes > budget) throw BudgetExceeded(fmt::format("Boolean algebra search exceeded {} nodes", budget));
            return check();
        }
        for (int g = 0; g <= std::min(used, d - 1); ++g) {
            group[t] = g;
            if (auto r = self(self, t + 1, std::max(used, g + 1))) return r;
        }
        return std::nullopt;
    };
    return rec(rec, 0, 0);
}

}  // namespace

std::optional<BooleanAlgebraWitness> find_boolean_algebra(const Family& family, int d, std::uint64_t node_budget) {
    if (d < 1) throw PrecondError("Boolean algebra dimension must be at least 1");
    const auto pts = family.points();
    std::uint64_t nodes = 0;
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) {
            if (!precedes(pts[a], pts[b])) continue;
            if (auto w = split_interval(family, pts[a], pts[b], d, nodes, node_budget)) return w;
        }
    return std::nullopt;
}

std::optional<BooleanAlgebraWitness> find_boolean_algebra_with_top(const Family& family, const Point& top, int d) {
    if (d < 1) throw PrecondError("Boolean algebra dimension must be at least 1");
    std::uint64_t nodes = 0;
    for (const Point& base : family.points()) {
        if (!precedes(base, top)) continue;
        if (auto w = split_interval(family, base, top, d, nodes, std::numeric_limits<std::uint64_t>::max())) return w;
    }
    return std::nullopt;
}

bool verify_boolean_algebra(const Family& family, const BooleanAlgebraWitness& witness) {
    const std::size_t n = family.shape().dim();
    if (witness.base.dim() != n || witness.offsets.empty()) return false;
    for (std::size_t i = 0; i < witness.offsets.size(); ++i) {
        const Point& v = witness.offsets[i];
        if (v.dim() != n) return false;
        if (std::all_of(v.begin(), v.end(), [](int c) { return c == 0; })) return false;
        if (std::any_of(v.begin(), v.end(), [](int c) { return c < 0; })) return false;
        for (std::size_t j = i + 1; j < witness.offsets.size(); ++j)
            if (!disjoint(v, witness.offsets[j])) return false;
    }
    for (const Point& x : witness.points())
        if (!family.shape().contains(x) || !family.contains(x)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Join triples

std::optional<JoinTriple> find_join_triple(const Family& family, Exec exec) {
    const auto idx = family.indices();
    const GridShape& shape = family.shape();
    const std::size_t n = shape.dim(), m = idx.size();
    // Points decoded once; the join is tested by index lookup.
    std::vector<int> coords(m * n);
    for (std::size_t i = 0; i < m; ++i) shape.decode(idx[i], std::span<int>(coords.data() + i * n, n));

    auto scan_row = [&](std::size_t i) -> std::size_t {
        const int* a = coords.data() + i * n;
        for (std::size_t j = i + 1; j < m; ++j) {
            const int* b = coords.data() + j * n;
            std::size_t u = 0;
            bool a_le = true, b_le = true;
            for (std::size_t t = 0; t < n; ++t) {
                const int c = std::max(a[t], b[t]);
                a_le = a_le && a[t] == c;
                b_le = b_le && b[t] == c;
                u += static_cast<std::size_t>(c - 1) * shape.stride(t);
            }
            if (!a_le && !b_le && family.contains_index(u)) return j;
        }
        return kNone;
    };

    std::size_t best_i = kNone, best_j = kNone;
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < m && best_i == kNone; ++i)
            if (const std::size_t j = scan_row(i); j != kNone) best_i = i, best_j = j;
    } else {
        std::atomic<std::size_t> best{kNone};
        std::vector<std::size_t> partner(m, kNone);
#pragma omp parallel for schedule(dynamic, 16)
        for (std::size_t i = 0; i < m; ++i) {
            if (best.load(std::memory_order_relaxed) < i) continue;
            if (const std::size_t j = scan_row(i); j != kNone) {
                partner[i] = j;
                std::size_t cur = best.load();
                while (i < cur && !best.compare_exchange_weak(cur, i)) {
                }
            }
        }
        best_i = best.load();
        if (best_i != kNone) best_j = partner[best_i];
    }
    if (best_i == kNone) return std::nullopt;
    const Point v = shape.point(idx[best_i]), w = shape.point(idx[best_j]);
    return JoinTriple{join(v, w), v, w};
}

std::optional<JoinTriple> find_join_triple_with_top(const Family& family, const Point& top) {
    std::vector<Point> below;
    for (const Point& x : family.points())
        if (precedes(x, top)) below.push_back(x);
    for (std::size_t i = 0; i < below.size(); ++i)
        for (std::size_t j = i + 1; j < below.size(); ++j)
            if (join(below[i], below[j]) == top) return JoinTriple{top, below[i], below[j]};
    return std::nullopt;
}

BadElements find_bad_elements_2d(const Family& family) {
    const GridShape& shape = family.shape();
    if (shape.dim() != 2) throw ShapeError("find_bad_elements_2d needs a 2-dimensional grid");
    // Lowest first coordinate per row b, lowest second coordinate per column a.
    std::vector<int> row_min(static_cast<std::size_t>(shape.side(1)) + 1, 0);
    std::vector<int> col_min(static_cast<std::size_t>(shape.side(0)) + 1, 0);
    const auto pts = family.points();
    for (const Point& x : pts) {
        int& r = row_min[static_cast<std::size_t>(x[1])];
        if (r == 0 || x[0] < r) r = x[0];
        int& c = col_min[static_cast<std::size_t>(x[0])];
        if (c == 0 || x[1] < c) c = x[1];
    }
    BadElements out;
    for (const Point& x : pts) {
        const bool xb = row_min[static_cast<std::size_t>(x[1])] == x[0];
        const bool yb = col_min[static_cast<std::size_t>(x[0])] == x[1];
        if (xb) out.x_bad.push_back(x);
        if (yb) out.y_bad.push_back(x);
        if (!xb && !yb) out.neither.push_back(x);
    }
    return out;
}

JoinTriple join_triple_from_element(const Family& family, const Point& element) {
    if (family.shape().dim() != 2) throw ShapeError("join_triple_from_element needs a 2-dimensional grid");
    if (!family.contains(element)) throw PrecondError("element is not in the family");
    const int a = element[0], b = element[1];
    int a2 = 0, b2 = 0;
    for (int t = 1; t < a && !a2; ++t)
        if (family.contains({t, b})) a2 = t;
    for (int t = 1; t < b && !b2; ++t)
        if (family.contains({a, t})) b2 = t;
    if (!a2 || !b2) throw PrecondError("element is x-bad or y-bad");
    return JoinTriple{element, Point{a2, b}, Point{a, b2}};
}

std::optional<JoinTriple> replay_join_bound(const Family& family) {
    const GridShape& shape = family.shape();
    if (shape.dim() != 2) throw ShapeError("replay_join_bound needs a 2-dimensional grid");
    if (family.size() <= static_cast<std::size_t>(shape.side(0) + shape.side(1))) return std::nullopt;
    const auto bad = find_bad_elements_2d(family);
    // At most one x-bad element per row and one y-bad element per column.
    if (bad.neither.empty()) throw ExtractionFailed("pigeonhole replay found no element that is neither x- nor y-bad");
    return join_triple_from_element(family, bad.neither.front());
}

// ---------------------------------------------------------------------------
// Scale witnesses and good elements

ScaleLadder ScaleLadder::powers(int s, int h) {
    if (s < 1 || h < 0) throw PrecondError("ladder needs s >= 1 and h >= 0");
    ScaleLadder l;
    std::int64_t b = 1;
    for (int i = 0; i <= h; ++i) {
        l.blocks.push_back(b);
        b *= s;
    }
    return l;
}

namespace {

std::int64_t ceil_div(std::int64_t a, std::int64_t b) { return (a + b - 1) / b; }

void check_level(const ScaleLadder& ladder, int level) {
    if (level < 1 || level > ladder.levels()) throw RangeError(fmt::format("ladder level {} out of range", level));
}

// First t in [lo, hi] with x's row point at t in F, or 0.
int first_on_row(const Family& family, const Point& x, std::int64_t lo, std::int64_t hi) {
    const GridShape& shape = family.shape();
    const std::size_t last = shape.dim() - 1;
    hi = std::min<std::int64_t>(hi, shape.side(last));
    lo = std::max<std::int64_t>(lo, 1);
    if (lo > hi) return 0;
    const std::size_t base = shape.index(x) - static_cast<std::size_t>(x[last] - 1);
    for (std::int64_t t = lo; t <= hi; ++t)
        if (family.contains_index(base + static_cast<std::size_t>(t - 1))) return static_cast<int>(t);
    return 0;
}

}  // namespace

int witness_below(const Family& family, const ScaleLadder& ladder, const Point& x, int level) {
    check_level(ladder, level);
    const std::int64_t a = x[x.dim() - 1];
    const std::int64_t B = ladder.blocks[static_cast<std::size_t>(level)];
    const std::int64_t f = ladder.blocks[static_cast<std::size_t>(level - 1)];
    return first_on_row(family, x, (ceil_div(a, B) - 1) * B + 1, (ceil_div(a, f) - 1) * f);
}

int witness_above(const Family& family, const ScaleLadder& ladder, const Point& x, int level) {
    check_level(ladder, level);
    const std::int64_t a = x[x.dim() - 1];
    const std::int64_t B = ladder.blocks[static_cast<std::size_t>(level)];
    const std::int64_t f = ladder.blocks[static_cast<std::size_t>(level - 1)];
    return first_on_row(family, x, ceil_div(a, f) * f + 1, ceil_div(a, B) * B);
}

Family good_elements(const Family& family, const ScaleLadder& ladder, Exec exec) {
    const auto idx = family.indices();
    std::vector<char> good(idx.size(), 0);
    auto test = [&](std::size_t i) {
        const Point x = family.shape().point(idx[i]);
        for (int lv = 1; lv <= ladder.levels(); ++lv)
            if (!witness_below(family, ladder, x, lv) || !witness_above(family, ladder, x, lv)) return;
        good[i] = 1;
    };
    if (exec == Exec::serial) {
        for (std::size_t i = 0; i < idx.size(); ++i) test(i);
    } else {
#pragma omp parallel for schedule(static)
        for (std::size_t i = 0; i < idx.size(); ++i) test(i);
    }
    Family out(family.shape());
    for (std::size_t i = 0; i < idx.size(); ++i)
        if (good[i]) out.insert_index(idx[i]);
    return out;
}

// ---------------------------------------------------------------------------
// Dense strong-copy extraction

Embedding lift_slice_copy(const Family& family, const Poset& poset, std::size_t l, const ScaleLadder& ladder,
                          const Embedding& slice_copy, int t) {
    const auto seq = interpolation_sequence(poset);
    if (l < 1 || l > seq.q) throw PrecondError("lift needs 1 <= l <= q");
    const Poset& Pl = seq.step(l);
    const int h = seq.levels.height;
    if (ladder.levels() != h) throw PrecondError("ladder levels must equal the height of P");
    const std::size_t zl = seq.order[l - 1];

    Embedding out{CopyMode::strong, {}};
    for (std::size_t z = 0; z < poset.size(); ++z) {
        std::vector<int> c = slice_copy.image.at(z).coords();
        c.push_back(t);
        Point x(std::move(c));
        // r binds to the rank of z here, not the largest level size.
        const int r = seq.levels.rank[z];
        const bool in_s = z == zl || Pl.less(zl, z);
        const int w = in_s ? witness_above(family, ladder, x, r) : witness_below(family, ladder, x, h + 1 - r);
        if (w == 0) throw ExtractionFailed(fmt::format("element {} has no witness at level {}", z, in_s ? r : h + 1 - r));
        x[x.dim() - 1] = w;
        out.image.push_back(std::move(x));
    }
    if (!verify_embedding(family, Pl, out)) throw ExtractionFailed(fmt::format("lifted copy of P_{} is not strong", l));
    return out;
}

namespace {

// The recursion on a power-of-s grid.
std::optional<Embedding> extract_rec(const Family& family, const Poset& poset, const InterpolationSequence& seq,
                                     std::size_t l, const ScaleLadder& ladder, const DenseExtractionOptions& options) {
    if (l == 0) return find_copy(family, seq.step(0), CopyMode::strong, options.search);
    const std::size_t last = family.shape().dim() - 1;
    const Family good = good_elements(family, ladder, options.search.exec);
    if (good.empty()) return std::nullopt;

    // Slices by decreasing density; the densest one carries the proof, the
    // rest are a fallback when it fails below threshold.
    const int k = family.shape().side(last);
    std::vector<std::pair<std::size_t, int>> slices;
    for (int t = 1; t <= k; ++t) {
        const std::size_t c = slice(good, last, t).size();
        if (c) slices.emplace_back(c, t);
    }
    std::stable_sort(slices.begin(), slices.end(), [](const auto& a, const auto& b) { return a.first > b.first; });
    for (const auto& [count, t] : slices) {
        const auto sub = extract_rec(slice(good, last, t), poset, seq, l - 1, ladder, options);
        if (sub) return lift_slice_copy(family, poset, l, ladder, *sub, t);
    }
    return std::nullopt;
}

}  // namespace

std::optional<Embedding> extract_strong_copy_dense(const Family& family, const Poset& poset, std::size_t l,
                                                   const DenseExtractionOptions& options) {
    const GridShape& shape = family.shape();
    const auto seq = interpolation_sequence(poset);
    if (l > seq.q) throw PrecondError(fmt::format("l = {} exceeds q = {}", l, seq.q));
    if (!shape.is_uniform()) throw PrecondError("dense extraction needs a uniform grid");
    const int d = static_cast<int>(shape.dim());
    if (d < static_cast<int>(l) + 1) throw PrecondError("dense extraction needs at least l + 1 dimensions");
    if (poset.size() == 0) return Embedding{CopyMode::strong, {}};

    const int h = seq.levels.height;
    const int k = shape.side(0);
    if (options.require_threshold) {
        std::size_t r = 0;
        for (const auto& lv : seq.levels.levels) r = std::max(r, lv.size());
        const int d0 = smallest_d0(r);
        if (!exceeds_dense_threshold(family.size(), d0, h, l, k, d))
            throw ThresholdNotMet(fmt::format("|F| = {} does not exceed the dense-extraction bound", family.size()));
    }

    // Largest s with s^h <= k.
    int s = 1;
    auto pow_le = [&](int base) {
        std::int64_t v = 1;
        for (int i = 0; i < h; ++i) {
            v *= base;
            if (v > k) return false;
        }
        return true;
    };
    while (pow_le(s + 1)) ++s;
    if (s < 2) return std::nullopt;
    int m = 1;
    for (int i = 0; i < h; ++i) m *= s;
    const ScaleLadder ladder = ScaleLadder::powers(s, h);

    std::optional<Embedding> found;
    if (m == k) {
        found = extract_rec(family, poset, seq, l, ladder, options);
    } else {
        const DenseSubgrid sub = densest_subgrid(family, m);
        const GridShape small = GridShape::uniform(m, d);
        Family restricted(small);
        std::vector<int> c(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < small.size(); ++i) {
            small.decode(i, c);
            std::vector<int> g(c.size());
            for (std::size_t a = 0; a < c.size(); ++a) g[a] = sub.selection[a][static_cast<std::size_t>(c[a] - 1)];
            if (family.contains(Point(g))) restricted.insert_index(i);
        }
        found = extract_rec(restricted, poset, seq, l, ladder, options);
        if (found)
            for (Point& x : found->image)
                for (std::size_t a = 0; a < x.dim(); ++a) x[a] = sub.selection[a][static_cast<std::size_t>(x[a] - 1)];
    }
    if (found && !verify_embedding(family, seq.step(l), *found))
        throw ExtractionFailed("dense extraction returned an invalid strong copy");
    return found;
}

// ---------------------------------------------------------------------------
// Claim 15 extraction

Family block_projection(const BlockGrid& grid, const Point& block, const Family& family) {
    const std::size_t d = grid.shape().dim();
    if (d < 2) throw PrecondError("block projection needs at least 2 dimensions");
    const int s = grid.side();
    Family out(GridShape::uniform(s, static_cast<int>(d) - 1));
    std::vector<int> local(d - 1);
    for (std::size_t i : grid.block_indices(block)) {
        if (!family.contains_index(i)) continue;
        const Point x = grid.shape().point(i);
        for (std::size_t a = 0; a + 1 < d; ++a) local[a] = x[a] - (block[a] - 1) * s;
        out.insert(Point(local));
    }
    return out;
}

std::optional<Embedding> find_copy_via_fat_blocks(const BlockGrid& grid, std::span<const Point> blocks,
                                                  const Family& family, const Poset& poset, std::size_t l,
                                                  const SearchOptions& options) {
    if (!(grid.shape() == family.shape())) throw ShapeMismatch("block grid and family shapes differ");
    const auto seq = interpolation_sequence(poset);
    if (l > seq.q) throw PrecondError(fmt::format("l = {} exceeds q = {}", l, seq.q));
    const std::size_t h = static_cast<std::size_t>(seq.levels.height);
    if (blocks.size() < h) throw PrecondError(fmt::format("need {} blocks, got {}", h, blocks.size()));
    const std::size_t d = grid.shape().dim();
    for (std::size_t j = 0; j < blocks.size(); ++j) {
        if (blocks[j].dim() != d) throw ShapeMismatch("block index of wrong dimension");
        if (j == 0) continue;
        for (std::size_t a = 0; a + 1 < d; ++a)
            if (blocks[j][a] != blocks[0][a]) throw PrecondError("blocks do not share a row");
        if (blocks[j][d - 1] <= blocks[j - 1][d - 1]) throw PrecondError("blocks must increase along the last axis");
    }
    if (poset.size() == 0) return Embedding{CopyMode::strong, {}};

    Family common = block_projection(grid, blocks[0], family);
    for (std::size_t j = 1; j < h; ++j) {
        const Family v = block_projection(grid, blocks[j], family);
        Family next(common.shape());
        for (std::size_t i : common.indices())
            if (v.contains_index(i)) next.insert_index(i);
        common = std::move(next);
    }
    const Poset& Pl = seq.step(l);
    const auto copy = find_copy(common, Pl, CopyMode::strong, options);
    if (!copy) return std::nullopt;

    const int s = grid.side();
    Embedding out{CopyMode::strong, {}};
    for (std::size_t z = 0; z < poset.size(); ++z) {
        const Point& w = blocks[static_cast<std::size_t>(seq.levels.rank[z] - 1)];
        std::vector<int> g(d);
        for (std::size_t a = 0; a + 1 < d; ++a) g[a] = (w[a] - 1) * s + copy->image[z][a];
        int t = 0;
        for (int c = (w[d - 1] - 1) * s + 1; c <= w[d - 1] * s && !t; ++c) {
            g[d - 1] = c;
            if (family.contains(Point(g))) t = c;
        }
        if (!t) throw ExtractionFailed("projection point has no preimage in its block");
        g[d - 1] = t;
        out.image.emplace_back(std::move(g));
    }
    if (!verify_embedding(family, Pl, out)) throw ExtractionFailed("lifted block copy is not strong");
    return out;
}

std::optional<Embedding> find_copy_via_fat_row(const BlockGrid& grid, std::span<const Point> row_blocks,
                                               const Family& family, const Poset& poset, std::size_t l,
                                               std::uint64_t alpha_num, std::uint64_t alpha_den,
                                               const SearchOptions& options) {
    const int h = static_cast<int>(height(poset));
    if (h == 0) return Embedding{CopyMode::strong, {}};
    SetSystem sys;
    sys.alpha = mpq_class(mpz_class(alpha_num), mpz_class(alpha_den));
    sys.alpha.canonicalize();
    std::vector<Family> proj;
    for (const Point& b : row_blocks) proj.push_back(block_projection(grid, b, family));
    if (proj.empty()) throw PrecondError("no blocks given");
    sys.ground = proj.front().shape().size();
    for (const Family& f : proj) sys.sets.push_back(f.bits());
    const auto sel = intersection_select(sys, h);
    std::vector<Point> chosen;
    for (std::size_t i : sel.indices) chosen.push_back(row_blocks[i]);
    std::sort(chosen.begin(), chosen.end(),
              [](const Point& a, const Point& b) { return a[a.dim() - 1] < b[b.dim() - 1]; });
    return find_copy_via_fat_blocks(grid, chosen, family, poset, l, options);
}

}  // namespace pgl
