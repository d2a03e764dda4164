#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include <gmpxx.h>

#include "pgl/grid.hpp"
#include "pgl/poset.hpp"

namespace pgl {

/// The grid as an explicit Poset (element i = mixed-radix index i).
Poset grid_poset(const GridShape& shape);

/// Largest coefficient of prod_i (1 + x + ... + x^{k_i - 1}). Chain products
/// are Sperner, so this is the width. For grids of at most `cross_check_limit`
/// points the value is also checked against a Dilworth matching; a mismatch
/// throws std::logic_error.
std::uint64_t grid_width(const GridShape& shape, std::size_t cross_check_limit = 4000);

/// Rank sizes of the grid: coefficient j counts points with sum(x_i - 1) = j.
std::vector<std::uint64_t> rank_sizes(const GridShape& shape);

struct WidthEstimate {
    double estimate = 0;  ///< k^{n-1} / sqrt(n)
    std::uint64_t exact = 0;
    double ratio = 0;  ///< exact * sqrt(n) / k^{n-1}
};
WidthEstimate width_estimate(int k, int n);

/// Disjoint chains covering a grid. Chains hold mixed-radix indices in
/// ascending order.
struct ChainPartition {
    GridShape shape;
    std::vector<std::vector<std::size_t>> chains;

    std::size_t min_size() const;
    std::vector<Point> points(std::size_t chain) const;
    /// Throws std::logic_error unless the chains are disjoint, covering and
    /// each totally ordered.
    void validate() const;
};

/// Saturated chains symmetric about the middle rank, built by hooks one
/// coordinate at a time. The chain count equals the width.
ChainPartition symmetric_chain_decomposition(const GridShape& shape);

/// max(1, ceil(k^n / (2w) - 1/2)).
std::size_t long_chain_bound(const GridShape& shape);

struct LongChainOptions {
    std::size_t local_search_steps = 200'000;
    std::size_t backtrack_nodes = 5'000'000;
    std::uint64_t seed = 0x5eed;
};

/// Exactly w chains, each of size >= long_chain_bound(shape). Starts from the
/// symmetric chain decomposition and exchanges chain tails until the bound
/// holds, then falls back to backtracking. Throws ContractUnmet otherwise.
ChainPartition partition_long_chains(const GridShape& shape, const LongChainOptions& options = {});

/// [k]^n as products of chains C_{i,1} x ... x C_{i,d}, C_{i,j} a chain of
/// the factor [k]^{m_j}.
struct GridPartition {
    GridShape shape;
    std::vector<int> factor_dims;              ///< m_1..m_d
    std::vector<ChainPartition> factors;       ///< long-chain partition of each [k]^{m_j}
    std::vector<std::vector<std::size_t>> parts;  ///< parts[i][j] = chain of factor j

    std::size_t part_count() const noexcept { return parts.size(); }
    /// |C_{i,1}|, ..., |C_{i,d}|.
    std::vector<int> part_sides(std::size_t part) const;
    std::size_t part_size(std::size_t part) const;
    NaturalBijection bijection(std::size_t part) const;
    /// Mixed-radix indices in [k]^n of the part, in image index order.
    std::vector<std::size_t> part_indices(std::size_t part) const;
};

/// Throws PrecondError unless 1 <= d <= n and the shape is uniform. Parts are
/// verified disjoint, covering, and round-tripped through the natural bijection.
GridPartition partition_into_grids(const GridShape& shape, int d, const LongChainOptions& options = {});

struct DenseSubgrid {
    std::vector<std::vector<int>> selection;  ///< per axis, m ascending 1-based positions
    std::size_t count = 0;                     ///< |subgrid intersected with F|
    std::size_t average_bound = 0;             ///< ceil(|F| m^d / |G|)
};

/// m positions per axis of the grid carrying `family` whose subgrid meets the
/// family in at least the average. Per-axis greedy on marginals; when the
/// number of candidate subgrids is at most `exhaustive_limit` the best one is
/// taken instead.
DenseSubgrid densest_subgrid(const Family& family, int m, std::size_t exhaustive_limit = 4096);

/// Same on part `part` of a grid partition, with F a family of [k]^n.
DenseSubgrid densest_subgrid(const GridPartition& partition, std::size_t part, const Family& family, int m,
                             std::size_t exhaustive_limit = 4096);

/// The family restricted to a part, transported to [|C_1|] x ... x [|C_d|].
Family restrict_to_part(const GridPartition& partition, std::size_t part, const Family& family);

/// sum_i C |G_i| / m_i over the parts, m_i the smallest side of G_i.
mpq_class reduce_dimension_bound(const GridPartition& partition, const mpq_class& c);

}  // namespace pgl
