#include "pgl/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <random>
#include <stdexcept>

#include <fmt/format.h>

#include "pgl/errors.hpp"

namespace pgl {

namespace {

/// Decoded coordinates of every grid point, row-major.
std::vector<int> decode_all(const GridShape& shape) {
    const std::size_t n = shape.dim();
    std::vector<int> coords(shape.size() * n);
    for (std::size_t i = 0; i < shape.size(); ++i)
        shape.decode(i, std::span<int>(coords.data() + i * n, n));
    return coords;
}

bool leq(const int* a, const int* b, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i)
        if (a[i] > b[i]) return false;
    return true;
}

std::uint64_t ipow(std::uint64_t base, int exp) {
    std::uint64_t r = 1;
    for (int i = 0; i < exp; ++i) r *= base;
    return r;
}

}  // namespace

Poset grid_poset(const GridShape& shape) {
    const std::size_t size = shape.size();
    const std::size_t n = shape.dim();
    const auto coords = decode_all(shape);
    std::vector<DynBitset> above(size, DynBitset(size));
    for (std::size_t x = 0; x < size; ++x)
        for (std::size_t y = x + 1; y < size; ++y)
            if (leq(&coords[x * n], &coords[y * n], n)) above[x].set(y);
    std::vector<std::string> labels;
    labels.reserve(size);
    for (std::size_t i = 0; i < size; ++i) {
        std::string s = "(";
        for (std::size_t j = 0; j < n; ++j) s += (j ? "," : "") + std::to_string(coords[i * n + j]);
        labels.push_back(s + ")");
    }
    return Poset::from_closed(std::move(labels), std::move(above));
}

std::vector<std::uint64_t> rank_sizes(const GridShape& shape) {
    std::vector<std::uint64_t> poly{1};
    for (int k : shape.sides()) {
        std::vector<std::uint64_t> next(poly.size() + static_cast<std::size_t>(k) - 1, 0);
        for (std::size_t i = 0; i < poly.size(); ++i)
            for (int j = 0; j < k; ++j) next[i + static_cast<std::size_t>(j)] += poly[i];
        poly = std::move(next);
    }
    return poly;
}

std::uint64_t grid_width(const GridShape& shape, std::size_t cross_check_limit) {
    const auto ranks = rank_sizes(shape);
    const std::uint64_t w = *std::max_element(ranks.begin(), ranks.end());
    if (shape.size() <= cross_check_limit) {
        const Poset poset = grid_poset(shape);
        std::vector<DynBitset> above;
        above.reserve(poset.size());
        for (std::size_t x = 0; x < poset.size(); ++x) above.push_back(poset.above(x));
        const std::size_t dilworth = min_chain_cover(above);
        if (dilworth != w)
            throw std::logic_error(fmt::format("rank width {} disagrees with Dilworth width {}", w, dilworth));
    }
    return w;
}

WidthEstimate width_estimate(int k, int n) {
    if (k < 2 || n < 1) throw PrecondError("width_estimate needs k >= 2 and n >= 1");
    WidthEstimate e;
    e.exact = grid_width(GridShape::uniform(k, n), 0);
    e.estimate = std::pow(static_cast<double>(k), n - 1) / std::sqrt(static_cast<double>(n));
    e.ratio = static_cast<double>(e.exact) / e.estimate;
    return e;
}

std::size_t ChainPartition::min_size() const {
    std::size_t m = chains.empty() ? 0 : chains.front().size();
    for (const auto& c : chains) m = std::min(m, c.size());
    return m;
}

std::vector<Point> ChainPartition::points(std::size_t chain) const {
    std::vector<Point> out;
    for (std::size_t i : chains.at(chain)) out.push_back(shape.point(i));
    return out;
}

void ChainPartition::validate() const {
    DynBitset seen(shape.size());
    const std::size_t n = shape.dim();
    std::vector<int> a(n), b(n);
    for (const auto& c : chains) {
        if (c.empty()) throw std::logic_error("empty chain in partition");
        for (std::size_t i = 0; i < c.size(); ++i) {
            if (c[i] >= shape.size() || seen.test(c[i])) throw std::logic_error("chains overlap");
            seen.set(c[i]);
            if (i == 0) continue;
            shape.decode(c[i - 1], a);
            shape.decode(c[i], b);
            if (!leq(a.data(), b.data(), n)) throw std::logic_error("chain is not totally ordered");
        }
    }
    if (seen.count() != shape.size()) throw std::logic_error("chains do not cover the grid");
}

ChainPartition symmetric_chain_decomposition(const GridShape& shape) {
    std::vector<std::vector<std::size_t>> chains(1);
    for (int b = 0; b < shape.side(0); ++b) chains[0].push_back(static_cast<std::size_t>(b));
    for (std::size_t axis = 1; axis < shape.dim(); ++axis) {
        const auto k = static_cast<std::size_t>(shape.side(axis));
        std::vector<std::vector<std::size_t>> next;
        for (const auto& c : chains) {
            const std::size_t m = c.size();
            for (std::size_t j = 0; j < std::min(m, k); ++j) {
                std::vector<std::size_t> hook;
                for (std::size_t b = 0; b + j < k; ++b) hook.push_back(c[j] * k + b);
                for (std::size_t a = j + 1; a < m; ++a) hook.push_back(c[a] * k + (k - 1 - j));
                next.push_back(std::move(hook));
            }
        }
        chains = std::move(next);
    }
    ChainPartition out{shape, std::move(chains)};
    out.validate();
    return out;
}

std::size_t long_chain_bound(const GridShape& shape) {
    const std::uint64_t w = grid_width(shape, 0);
    const std::uint64_t num = shape.size() - w;
    return std::max<std::size_t>(1, static_cast<std::size_t>((num + 2 * w - 1) / (2 * w)));
}

namespace {

class Rebalancer {
  public:
    Rebalancer(const GridShape& shape, std::size_t bound)
        : n_(shape.dim()), coords_(decode_all(shape)), bound_(bound) {}

    bool less(std::size_t a, std::size_t b) const {
        return a != b && leq(&coords_[a * n_], &coords_[b * n_], n_);
    }

    std::size_t deficit(std::size_t size) const { return size >= bound_ ? 0 : bound_ - size; }

    std::size_t total_deficit(const std::vector<std::vector<std::size_t>>& chains) const {
        std::size_t t = 0;
        for (const auto& c : chains) t += deficit(c.size());
        return t;
    }

    struct Move {
        std::size_t a, b, pa, pb;
    };

    /// Tail exchange: X = A[..pa) + B[pb..), Y = B[..pb) + A[pa..).
    bool valid(const std::vector<std::size_t>& A, const std::vector<std::size_t>& B, std::size_t pa,
               std::size_t pb) const {
        const std::size_t x = pa + B.size() - pb, y = pb + A.size() - pa;
        if (x == 0 || y == 0) return false;
        if (pa > 0 && pb < B.size() && !less(A[pa - 1], B[pb])) return false;
        if (pb > 0 && pa < A.size() && !less(B[pb - 1], A[pa])) return false;
        return true;
    }

    static void apply(std::vector<std::vector<std::size_t>>& chains, const Move& mv) {
        auto& A = chains[mv.a];
        auto& B = chains[mv.b];
        std::vector<std::size_t> x(A.begin(), A.begin() + static_cast<std::ptrdiff_t>(mv.pa));
        x.insert(x.end(), B.begin() + static_cast<std::ptrdiff_t>(mv.pb), B.end());
        std::vector<std::size_t> y(B.begin(), B.begin() + static_cast<std::ptrdiff_t>(mv.pb));
        y.insert(y.end(), A.begin() + static_cast<std::ptrdiff_t>(mv.pa), A.end());
        A = std::move(x);
        B = std::move(y);
    }

    bool local_search(std::vector<std::vector<std::size_t>>& chains, std::size_t steps, std::uint64_t seed) const {
        std::mt19937_64 rng(seed);
        std::vector<Move> plateau;
        for (std::size_t step = 0; step < steps; ++step) {
            if (total_deficit(chains) == 0) return true;
            long best_delta = 0;
            Move best{};
            bool have_best = false;
            plateau.clear();
            for (std::size_t a = 0; a < chains.size(); ++a) {
                if (deficit(chains[a].size()) == 0) continue;
                for (std::size_t b = 0; b < chains.size(); ++b) {
                    if (b == a) continue;
                    const auto& A = chains[a];
                    const auto& B = chains[b];
                    const long before = static_cast<long>(deficit(A.size()) + deficit(B.size()));
                    for (std::size_t pa = 0; pa <= A.size(); ++pa) {
                        for (std::size_t pb = 0; pb <= B.size(); ++pb) {
                            if ((pa == 0 && pb == 0) || (pa == A.size() && pb == B.size())) continue;
                            if (!valid(A, B, pa, pb)) continue;
                            const std::size_t x = pa + B.size() - pb, y = pb + A.size() - pa;
                            const long delta = static_cast<long>(deficit(x) + deficit(y)) - before;
                            if (delta < best_delta) {
                                best_delta = delta;
                                best = {a, b, pa, pb};
                                have_best = true;
                            } else if (delta == 0 && x != A.size()) {
                                plateau.push_back({a, b, pa, pb});
                            }
                        }
                    }
                }
            }
            if (have_best) {
                apply(chains, best);
            } else if (!plateau.empty()) {
                apply(chains, plateau[rng() % plateau.size()]);
            } else {
                return false;
            }
        }
        return total_deficit(chains) == 0;
    }

    /// Assigns points in rank order to at most w chains; exact at desk scale.
    bool backtrack(std::size_t size, std::size_t w, std::size_t node_budget,
                   std::vector<std::vector<std::size_t>>& out) const {
        std::vector<std::size_t> order(size);
        std::iota(order.begin(), order.end(), 0);
        auto rank = [&](std::size_t i) {
            long r = 0;
            for (std::size_t j = 0; j < n_; ++j) r += coords_[i * n_ + j];
            return r;
        };
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rank(a) < rank(b); });
        std::vector<std::vector<std::size_t>> chains;
        std::size_t nodes = 0;
        auto rec = [&](auto&& self, std::size_t pos) -> bool {
            if (++nodes > node_budget) return false;
            std::size_t need = (w - chains.size()) * bound_;
            for (const auto& c : chains) need += deficit(c.size());
            if (size - pos < need) return false;
            if (pos == size) return chains.size() == w;
            const std::size_t x = order[pos];
            std::vector<std::size_t> options;
            for (std::size_t c = 0; c < chains.size(); ++c)
                if (less(chains[c].back(), x)) options.push_back(c);
            std::stable_sort(options.begin(), options.end(),
                             [&](std::size_t a, std::size_t b) { return chains[a].size() < chains[b].size(); });
            for (std::size_t c : options) {
                chains[c].push_back(x);
                if (self(self, pos + 1)) return true;
                chains[c].pop_back();
            }
            if (chains.size() < w) {
                chains.push_back({x});
                if (self(self, pos + 1)) return true;
                chains.pop_back();
            }
            return false;
        };
        if (!rec(rec, 0)) return false;
        out = std::move(chains);
        return true;
    }

  private:
    std::size_t n_;
    std::vector<int> coords_;
    std::size_t bound_;
};

}  // namespace

ChainPartition partition_long_chains(const GridShape& shape, const LongChainOptions& options) {
    if (!shape.is_uniform()) throw PrecondError("partition_long_chains needs a uniform grid");
    const std::size_t w = grid_width(shape, 0);
    const std::size_t bound = long_chain_bound(shape);
    ChainPartition part = symmetric_chain_decomposition(shape);
    const Rebalancer rb(shape, bound);
    if (part.min_size() < bound && !rb.local_search(part.chains, options.local_search_steps, options.seed)) {
        std::vector<std::vector<std::size_t>> chains;
        if (!rb.backtrack(shape.size(), w, options.backtrack_nodes, chains))
            throw ContractUnmet(fmt::format("no partition into {} chains of size >= {} found within budget", w, bound));
        part.chains = std::move(chains);
    }
    part.validate();
    if (part.chains.size() != w || part.min_size() < bound)
        throw ContractUnmet(fmt::format("partition has {} chains with minimum size {}, needs {} and {}",
                                        part.chains.size(), part.min_size(), w, bound));
    return part;
}

std::vector<int> GridPartition::part_sides(std::size_t part) const {
    std::vector<int> sides;
    for (std::size_t j = 0; j < factors.size(); ++j)
        sides.push_back(static_cast<int>(factors[j].chains[parts.at(part)[j]].size()));
    return sides;
}

std::size_t GridPartition::part_size(std::size_t part) const {
    std::size_t s = 1;
    for (int side : part_sides(part)) s *= static_cast<std::size_t>(side);
    return s;
}

NaturalBijection GridPartition::bijection(std::size_t part) const {
    std::vector<std::vector<Point>> chains;
    for (std::size_t j = 0; j < factors.size(); ++j) chains.push_back(factors[j].points(parts.at(part)[j]));
    return NaturalBijection(std::move(chains));
}

std::vector<std::size_t> GridPartition::part_indices(std::size_t part) const {
    const auto& p = parts.at(part);
    const std::size_t d = factors.size();
    std::vector<std::uint64_t> radix(d);
    for (std::size_t j = 0; j < d; ++j) radix[j] = factors[j].shape.size();
    std::vector<std::size_t> out{0};
    for (std::size_t j = 0; j < d; ++j) {
        const auto& chain = factors[j].chains[p[j]];
        std::vector<std::size_t> next;
        next.reserve(out.size() * chain.size());
        for (std::size_t base : out)
            for (std::size_t c : chain) next.push_back(base * radix[j] + c);
        out = std::move(next);
    }
    return out;
}

GridPartition partition_into_grids(const GridShape& shape, int d, const LongChainOptions& options) {
    const int n = static_cast<int>(shape.dim());
    if (!shape.is_uniform()) throw PrecondError("partition_into_grids needs a uniform grid");
    if (d < 1 || d > n) throw PrecondError(fmt::format("need 1 <= d <= n, got d = {}, n = {}", d, n));
    const int k = shape.side(0);
    GridPartition out;
    out.shape = shape;
    for (int j = 0; j < d; ++j) out.factor_dims.push_back(n / d + (j < n % d ? 1 : 0));
    out.factors.resize(static_cast<std::size_t>(d));

    std::exception_ptr error;
#pragma omp parallel for schedule(dynamic)
    for (int j = 0; j < d; ++j) {
        try {
            out.factors[static_cast<std::size_t>(j)] =
                partition_long_chains(GridShape::uniform(k, out.factor_dims[static_cast<std::size_t>(j)]), options);
        } catch (...) {
#pragma omp critical
            if (!error) error = std::current_exception();
        }
    }
    if (error) std::rethrow_exception(error);

    std::size_t count = 1;
    for (const auto& f : out.factors) count *= f.chains.size();
    for (std::size_t i = 0; i < count; ++i) {
        std::vector<std::size_t> combo(static_cast<std::size_t>(d));
        std::size_t r = i;
        for (std::size_t j = static_cast<std::size_t>(d); j-- > 0;) {
            combo[j] = r % out.factors[j].chains.size();
            r /= out.factors[j].chains.size();
        }
        out.parts.push_back(std::move(combo));
    }

    DynBitset covered(shape.size());
    for (std::size_t i = 0; i < out.parts.size(); ++i) {
        const NaturalBijection bij = out.bijection(i);
        const GridShape image = bij.target_shape();
        const auto indices = out.part_indices(i);
        for (std::size_t t = 0; t < image.size(); ++t) {
            const Point p = image.point(t);
            const auto tuple = bij.inverse(p);
            if (bij.forward(tuple) != p) throw std::logic_error("natural bijection does not round-trip");
            const std::size_t idx = shape.index(bij.concatenated(p));
            if (idx != indices[t]) throw std::logic_error("part index order disagrees with the bijection");
            if (covered.test(idx)) throw std::logic_error("grid parts overlap");
            covered.set(idx);
        }
    }
    if (covered.count() != shape.size()) throw std::logic_error("grid parts do not cover the grid");
    return out;
}

namespace {

std::uint64_t binomial(std::uint64_t n, std::uint64_t k) {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::uint64_t i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

}  // namespace

DenseSubgrid densest_subgrid(const Family& family, int m, std::size_t exhaustive_limit) {
    const GridShape& shape = family.shape();
    const std::size_t d = shape.dim();
    for (int side : shape.sides())
        if (m < 1 || m > side) throw PrecondError(fmt::format("subgrid side {} does not fit side {}", m, side));

    std::vector<std::vector<int>> members;
    std::vector<int> c(d);
    family.bits().for_each([&](std::size_t i) {
        shape.decode(i, c);
        members.push_back(c);
    });

    DenseSubgrid out;
    const std::uint64_t md = ipow(static_cast<std::uint64_t>(m), static_cast<int>(d));
    out.average_bound = static_cast<std::size_t>((members.size() * md + shape.size() - 1) / shape.size());

    // Greedy: keep the m heaviest positions of each axis in turn. Each step
    // keeps at least an m/side fraction of the surviving members.
    std::vector<std::vector<int>> members_left = members;
    for (std::size_t axis = 0; axis < d; ++axis) {
        std::vector<std::size_t> weight(static_cast<std::size_t>(shape.side(axis)) + 1, 0);
        for (const auto& x : members_left) ++weight[static_cast<std::size_t>(x[axis])];
        std::vector<int> pos(static_cast<std::size_t>(shape.side(axis)));
        std::iota(pos.begin(), pos.end(), 1);
        std::stable_sort(pos.begin(), pos.end(), [&](int a, int b) {
            return weight[static_cast<std::size_t>(a)] > weight[static_cast<std::size_t>(b)];
        });
        pos.resize(static_cast<std::size_t>(m));
        std::sort(pos.begin(), pos.end());
        std::vector<bool> keep(static_cast<std::size_t>(shape.side(axis)) + 1, false);
        for (int p : pos) keep[static_cast<std::size_t>(p)] = true;
        std::erase_if(members_left, [&](const auto& x) { return !keep[static_cast<std::size_t>(x[axis])]; });
        out.selection.push_back(std::move(pos));
    }
    out.count = members_left.size();

    std::uint64_t combos = 1;
    for (int side : shape.sides()) {
        combos *= binomial(static_cast<std::uint64_t>(side), static_cast<std::uint64_t>(m));
        if (combos > exhaustive_limit) break;
    }
    if (combos <= exhaustive_limit) {
        std::vector<std::vector<std::vector<int>>> choices(d);
        for (std::size_t axis = 0; axis < d; ++axis) {
            std::vector<bool> mask(static_cast<std::size_t>(shape.side(axis)), false);
            std::fill(mask.begin(), mask.begin() + m, true);
            do {
                std::vector<int> sel;
                for (std::size_t i = 0; i < mask.size(); ++i)
                    if (mask[i]) sel.push_back(static_cast<int>(i) + 1);
                choices[axis].push_back(std::move(sel));
            } while (std::prev_permutation(mask.begin(), mask.end()));
        }
        std::vector<std::size_t> pick(d, 0);
        std::vector<std::vector<bool>> in(d);
        while (true) {
            for (std::size_t axis = 0; axis < d; ++axis) {
                in[axis].assign(static_cast<std::size_t>(shape.side(axis)) + 1, false);
                for (int p : choices[axis][pick[axis]]) in[axis][static_cast<std::size_t>(p)] = true;
            }
            std::size_t cnt = 0;
            for (const auto& x : members) {
                bool ok = true;
                for (std::size_t axis = 0; axis < d && ok; ++axis) ok = in[axis][static_cast<std::size_t>(x[axis])];
                cnt += ok ? 1 : 0;
            }
            if (cnt > out.count) {
                out.count = cnt;
                for (std::size_t axis = 0; axis < d; ++axis) out.selection[axis] = choices[axis][pick[axis]];
            }
            std::size_t axis = d;
            while (axis-- > 0) {
                if (++pick[axis] < choices[axis].size()) break;
                pick[axis] = 0;
            }
            if (axis == static_cast<std::size_t>(-1)) break;
        }
    }
    if (out.count < out.average_bound) throw std::logic_error("densest subgrid fell below the average");
    return out;
}

Family restrict_to_part(const GridPartition& partition, std::size_t part, const Family& family) {
    if (!(family.shape() == partition.shape)) throw ShapeMismatch("family shape differs from the partition");
    const auto sides = partition.part_sides(part);
    Family local{GridShape(sides)};
    const auto indices = partition.part_indices(part);
    for (std::size_t t = 0; t < indices.size(); ++t)
        if (family.contains_index(indices[t])) local.insert_index(t);
    return local;
}

DenseSubgrid densest_subgrid(const GridPartition& partition, std::size_t part, const Family& family, int m,
                             std::size_t exhaustive_limit) {
    return densest_subgrid(restrict_to_part(partition, part, family), m, exhaustive_limit);
}

mpq_class reduce_dimension_bound(const GridPartition& partition, const mpq_class& c) {
    mpq_class total = 0;
    for (std::size_t i = 0; i < partition.part_count(); ++i) {
        const auto sides = partition.part_sides(i);
        const int m = *std::min_element(sides.begin(), sides.end());
        mpq_class term(static_cast<unsigned long>(partition.part_size(i)), static_cast<unsigned long>(m));
        term.canonicalize();
        total += c * term;
    }
    total.canonicalize();
    return total;
}

}  // namespace pgl
