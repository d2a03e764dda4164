#include "pgl/poset.hpp"

#include <algorithm>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>

#include <fmt/format.h>

#include "pgl/errors.hpp"

namespace pgl {

namespace {

std::vector<DynBitset> transpose(const std::vector<DynBitset>& rows) {
    std::vector<DynBitset> cols(rows.size(), DynBitset(rows.size()));
    for (std::size_t x = 0; x < rows.size(); ++x)
        rows[x].for_each([&](std::size_t y) { cols[y].set(x); });
    return cols;
}

// Shortest directed cycle through `start` in the raw relation.
std::vector<std::size_t> find_cycle(const std::vector<std::vector<bool>>& raw, std::size_t start) {
    const std::size_t p = raw.size();
    std::vector<std::size_t> parent(p, p);
    std::deque<std::size_t> queue;
    for (std::size_t y = 0; y < p; ++y) {
        if (!raw[start][y]) continue;
        if (y == start) return {start, start};
        if (parent[y] == p) {
            parent[y] = start;
            queue.push_back(y);
        }
    }
    while (!queue.empty()) {
        const std::size_t x = queue.front();
        queue.pop_front();
        if (raw[x][start]) {
            std::vector<std::size_t> cycle{start};
            for (std::size_t v = x; v != start; v = parent[v]) cycle.push_back(v);
            std::reverse(cycle.begin() + 1, cycle.end());
            cycle.push_back(start);
            return cycle;
        }
        for (std::size_t y = 0; y < p; ++y) {
            if (raw[x][y] && parent[y] == p && y != start) {
                parent[y] = x;
                queue.push_back(y);
            }
        }
    }
    return {start, start};
}

}  // namespace

Poset::Poset(std::vector<std::string> labels, std::vector<DynBitset> above)
    : labels_(std::move(labels)), above_(std::move(above)), below_(transpose(above_)) {}

Poset Poset::from_relation(std::vector<std::string> labels,
                           const std::vector<std::vector<bool>>& raw) {
    const std::size_t p = labels.size();
    if (raw.size() != p) throw InputError("relation matrix does not match label count");
    std::vector<DynBitset> above(p, DynBitset(p));
    for (std::size_t x = 0; x < p; ++x) {
        if (raw[x].size() != p) throw InputError("relation matrix is not square");
        for (std::size_t y = 0; y < p; ++y)
            if (raw[x][y]) above[x].set(y);
    }
    // Warshall on bitset rows.
    for (std::size_t k = 0; k < p; ++k)
        for (std::size_t x = 0; x < p; ++x)
            if (above[x].test(k)) above[x] |= above[k];

    for (std::size_t x = 0; x < p; ++x) {
        if (above[x].test(x)) {
            auto cycle = find_cycle(raw, x);
            std::string msg = "relation has a cycle:";
            for (auto v : cycle) msg += " " + labels[v];
            throw CycleError(msg, std::move(cycle));
        }
    }
    return Poset(std::move(labels), std::move(above));
}

Poset Poset::from_pairs(std::vector<std::string> labels,
                        std::span<const std::pair<std::size_t, std::size_t>> less_pairs) {
    const std::size_t p = labels.size();
    std::vector<std::vector<bool>> raw(p, std::vector<bool>(p, false));
    for (auto [x, y] : less_pairs) {
        if (x >= p || y >= p) throw InputError("relation refers to an unknown element");
        raw[x][y] = true;
    }
    return from_relation(std::move(labels), raw);
}

Poset Poset::from_closed(std::vector<std::string> labels, std::vector<DynBitset> above) {
    const std::size_t p = labels.size();
    if (above.size() != p) throw std::logic_error("relation size mismatch");
    for (std::size_t x = 0; x < p; ++x) {
        if (above[x].test(x)) throw std::logic_error("relation is not irreflexive");
        bool closed = true;
        above[x].for_each([&](std::size_t y) {
            DynBitset missing = above[y];
            missing.subtract(above[x]);
            if (missing.any()) closed = false;
        });
        if (!closed) throw std::logic_error("relation is not transitively closed");
    }
    return Poset(std::move(labels), std::move(above));
}

Poset Poset::chain(std::size_t p) {
    std::vector<std::string> labels;
    std::vector<DynBitset> above(p, DynBitset(p));
    for (std::size_t x = 0; x < p; ++x) {
        labels.push_back(fmt::format("c{}", x + 1));
        for (std::size_t y = x + 1; y < p; ++y) above[x].set(y);
    }
    return Poset(std::move(labels), std::move(above));
}

Poset Poset::antichain(std::size_t p) {
    std::vector<std::string> labels;
    for (std::size_t x = 0; x < p; ++x) labels.push_back(fmt::format("a{}", x + 1));
    return Poset(std::move(labels), std::vector<DynBitset>(p, DynBitset(p)));
}

std::optional<std::size_t> Poset::index_of(const std::string& label) const {
    auto it = std::find(labels_.begin(), labels_.end(), label);
    if (it == labels_.end()) return std::nullopt;
    return static_cast<std::size_t>(it - labels_.begin());
}

std::vector<std::pair<std::size_t, std::size_t>> Poset::comparable_pairs() const {
    std::vector<std::pair<std::size_t, std::size_t>> out;
    for (std::size_t x = 0; x < size(); ++x)
        above_[x].for_each([&](std::size_t y) { out.emplace_back(x, y); });
    return out;
}

std::size_t Poset::relation_size() const noexcept {
    std::size_t n = 0;
    for (const auto& row : above_) n += row.count();
    return n;
}

Poset validate_poset(std::vector<std::string> labels, const std::vector<std::vector<bool>>& raw) {
    return Poset::from_relation(std::move(labels), raw);
}

std::vector<std::size_t> level_order(const Poset& poset) {
    const auto levels = level_decomposition(poset);
    std::vector<std::size_t> order;
    order.reserve(poset.size());
    for (const auto& level : levels.levels) order.insert(order.end(), level.begin(), level.end());
    return order;
}

LevelDecomposition level_decomposition(const Poset& poset) {
    const std::size_t p = poset.size();
    LevelDecomposition out;
    out.rank.assign(p, 0);
    // In a closed relation, fewer predecessors comes first in some linear extension.
    std::vector<std::size_t> topo(p);
    std::iota(topo.begin(), topo.end(), std::size_t{0});
    std::stable_sort(topo.begin(), topo.end(), [&](std::size_t a, std::size_t b) {
        return poset.below(a).count() < poset.below(b).count();
    });
    for (std::size_t x : topo) {
        int r = 1;
        poset.below(x).for_each([&](std::size_t y) { r = std::max(r, out.rank[y] + 1); });
        out.rank[x] = r;
        out.height = std::max(out.height, r);
    }
    out.levels.resize(static_cast<std::size_t>(out.height));
    for (std::size_t x = 0; x < p; ++x)
        out.levels[static_cast<std::size_t>(out.rank[x] - 1)].push_back(x);
    return out;
}

std::size_t height(const Poset& poset) {
    return static_cast<std::size_t>(level_decomposition(poset).height);
}

std::size_t min_chain_cover(const std::vector<DynBitset>& above) {
    const std::size_t n = above.size();
    constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
    std::vector<std::vector<std::size_t>> adj(n);
    for (std::size_t x = 0; x < n; ++x) adj[x] = above[x].indices();

    std::vector<std::size_t> match_left(n, kNone), match_right(n, kNone), dist(n);
    auto bfs = [&] {
        std::deque<std::size_t> queue;
        bool found = false;
        for (std::size_t x = 0; x < n; ++x) {
            if (match_left[x] == kNone) {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = kNone;
            }
        }
        while (!queue.empty()) {
            const std::size_t x = queue.front();
            queue.pop_front();
            for (std::size_t y : adj[x]) {
                const std::size_t m = match_right[y];
                if (m == kNone) {
                    found = true;
                } else if (dist[m] == kNone) {
                    dist[m] = dist[x] + 1;
                    queue.push_back(m);
                }
            }
        }
        return found;
    };
    // Iterative DFS along the BFS layering.
    std::vector<std::size_t> it(n);
    auto dfs = [&](std::size_t root) {
        std::vector<std::size_t> stack{root};
        while (!stack.empty()) {
            const std::size_t x = stack.back();
            bool advanced = false;
            while (it[x] < adj[x].size()) {
                const std::size_t y = adj[x][it[x]];
                const std::size_t m = match_right[y];
                if (m == kNone) {
                    // Augment along the stack.
                    std::size_t free_right = y;
                    for (auto s = stack.rbegin(); s != stack.rend(); ++s) {
                        const std::size_t u = *s;
                        const std::size_t prev = match_left[u];
                        match_left[u] = free_right;
                        match_right[free_right] = u;
                        free_right = prev;
                    }
                    return true;
                }
                if (dist[m] == dist[x] + 1) {
                    stack.push_back(m);
                    advanced = true;
                    break;
                }
                ++it[x];
            }
            if (!advanced) {
                dist[x] = kNone;
                stack.pop_back();
                if (!stack.empty()) ++it[stack.back()];
            }
        }
        return false;
    };

    std::size_t matching = 0;
    while (bfs()) {
        std::fill(it.begin(), it.end(), 0);
        for (std::size_t x = 0; x < n; ++x)
            if (match_left[x] == kNone && dfs(x)) ++matching;
    }
    return n - matching;
}

std::size_t width(const Poset& poset) {
    if (poset.size() == 0) return 0;
    std::vector<DynBitset> above;
    above.reserve(poset.size());
    for (std::size_t x = 0; x < poset.size(); ++x) above.push_back(poset.above(x));
    const std::size_t w = min_chain_cover(above);
    if (poset.size() <= 20 && width_by_enumeration(poset) != w)
        throw std::logic_error("Dilworth width disagrees with exhaustive enumeration");
    return w;
}

namespace {

void max_antichain_rec(const std::vector<std::uint64_t>& incomparable, std::uint64_t candidates,
                       std::size_t current, std::size_t& best) {
    if (candidates == 0) {
        best = std::max(best, current);
        return;
    }
    if (current + static_cast<std::size_t>(std::popcount(candidates)) <= best) return;
    const int v = std::countr_zero(candidates);
    const std::uint64_t bit = std::uint64_t{1} << v;
    max_antichain_rec(incomparable, candidates & incomparable[static_cast<std::size_t>(v)],
                      current + 1, best);
    max_antichain_rec(incomparable, candidates & ~bit, current, best);
}

}  // namespace

std::size_t width_by_enumeration(const Poset& poset) {
    const std::size_t p = poset.size();
    if (p > 64) throw SizeError("width_by_enumeration supports at most 64 elements");
    std::vector<std::uint64_t> incomparable(p, 0);
    for (std::size_t x = 0; x < p; ++x)
        for (std::size_t y = 0; y < p; ++y)
            if (x != y && !poset.comparable(x, y)) incomparable[x] |= std::uint64_t{1} << y;
    std::size_t best = 0;
    const std::uint64_t all = p == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << p) - 1;
    max_antichain_rec(incomparable, all, 0, best);
    return best;
}

Poset complete_multilevel(std::span<const int> level_sizes) {
    if (level_sizes.empty()) throw PrecondError("complete multilevel poset needs at least one level");
    std::vector<std::string> labels;
    std::vector<std::size_t> level_of;
    for (std::size_t i = 0; i < level_sizes.size(); ++i) {
        if (level_sizes[i] < 1) throw PrecondError("level sizes must be positive");
        for (int j = 0; j < level_sizes[i]; ++j) {
            labels.push_back(fmt::format("A{}.{}", i + 1, j + 1));
            level_of.push_back(i);
        }
    }
    const std::size_t p = labels.size();
    std::vector<DynBitset> above(p, DynBitset(p));
    for (std::size_t x = 0; x < p; ++x)
        for (std::size_t y = 0; y < p; ++y)
            if (level_of[x] < level_of[y]) above[x].set(y);
    return Poset::from_closed(std::move(labels), std::move(above));
}

Poset cartesian_product(std::span<const Poset> factors, ProductOptions options) {
    std::size_t total = 1;
    for (const auto& f : factors) {
        if (f.size() == 0) return Poset::antichain(0);
        if (total > options.max_elements / f.size())
            throw SizeError(fmt::format("product exceeds the element cap of {}", options.max_elements));
        total *= f.size();
    }
    const std::size_t m = factors.size();
    auto decode = [&](std::size_t idx) {
        std::vector<std::size_t> t(m);
        for (std::size_t i = m; i-- > 0;) {
            t[i] = idx % factors[i].size();
            idx /= factors[i].size();
        }
        return t;
    };
    std::vector<std::string> labels;
    labels.reserve(total);
    std::vector<std::vector<std::size_t>> tuples;
    tuples.reserve(total);
    for (std::size_t idx = 0; idx < total; ++idx) {
        auto t = decode(idx);
        std::string label = "(";
        for (std::size_t i = 0; i < m; ++i) {
            if (i) label += ",";
            label += factors[i].label(t[i]);
        }
        label += ")";
        labels.push_back(std::move(label));
        tuples.push_back(std::move(t));
    }
    std::vector<DynBitset> above(total, DynBitset(total));
    for (std::size_t a = 0; a < total; ++a) {
        for (std::size_t b = 0; b < total; ++b) {
            if (a == b) continue;
            bool le = true;
            for (std::size_t i = 0; i < m && le; ++i)
                le = tuples[a][i] == tuples[b][i] || factors[i].less(tuples[a][i], tuples[b][i]);
            if (le) above[a].set(b);
        }
    }
    return Poset::from_closed(std::move(labels), std::move(above));
}

InterpolationSequence interpolation_sequence(const Poset& poset) {
    InterpolationSequence seq;
    seq.levels = level_decomposition(poset);
    const std::size_t p = poset.size();
    for (const auto& level : seq.levels.levels)
        seq.order.insert(seq.order.end(), level.begin(), level.end());
    seq.q = p - (seq.levels.levels.empty() ? 0 : seq.levels.levels.back().size());

    std::vector<DynBitset> rel(p, DynBitset(p));
    for (std::size_t x = 0; x < p; ++x)
        for (std::size_t y = 0; y < p; ++y)
            if (seq.levels.rank[x] < seq.levels.rank[y]) rel[x].set(y);
    seq.steps.push_back(Poset::from_closed(poset.labels(), rel));

    for (std::size_t l = 0; l < seq.q; ++l) {
        const std::size_t z = seq.order[l];
        DynBitset up = poset.above(z);
        up.set(z);
        // Drop every pair (s, t) with s in S and t outside S.
        up.for_each([&](std::size_t s) { rel[s] &= up; });
        // from_closed throws if the removal broke transitivity.
        seq.steps.push_back(Poset::from_closed(poset.labels(), rel));
    }
    return seq;
}

}  // namespace pgl
