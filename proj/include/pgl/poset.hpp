#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pgl/bitset.hpp"

namespace pgl {

/// A finite strict partial order on elements 0..p-1, stored transitively
/// closed as one "strictly above" and one "strictly below" bitset per element.
/// Immutable once built.
class Poset {
  public:
    Poset() = default;

    /// Closes `raw` transitively (raw[x][y] means x < y) and validates the
    /// result. Throws CycleError, with a witness cycle, if the closure has x < x.
    static Poset from_relation(std::vector<std::string> labels,
                               const std::vector<std::vector<bool>>& raw);
    static Poset from_pairs(std::vector<std::string> labels,
                            std::span<const std::pair<std::size_t, std::size_t>> less_pairs);

    /// Wraps a relation that the caller claims is already a strict order.
    /// Throws std::logic_error if it is not irreflexive and transitively closed.
    static Poset from_closed(std::vector<std::string> labels, std::vector<DynBitset> above);

    static Poset chain(std::size_t p);
    static Poset antichain(std::size_t p);

    std::size_t size() const noexcept { return labels_.size(); }
    const std::string& label(std::size_t x) const { return labels_[x]; }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    std::optional<std::size_t> index_of(const std::string& label) const;

    bool less(std::size_t x, std::size_t y) const noexcept { return above_[x].test(y); }
    bool comparable(std::size_t x, std::size_t y) const noexcept {
        return above_[x].test(y) || above_[y].test(x);
    }
    const DynBitset& above(std::size_t x) const noexcept { return above_[x]; }
    const DynBitset& below(std::size_t x) const noexcept { return below_[x]; }

    /// R(P): all (x, y) with x < y, in row-major order.
    std::vector<std::pair<std::size_t, std::size_t>> comparable_pairs() const;
    std::size_t relation_size() const noexcept;

    friend bool operator==(const Poset& a, const Poset& b) {
        return a.labels_ == b.labels_ && a.above_ == b.above_;
    }

  private:
    Poset(std::vector<std::string> labels, std::vector<DynBitset> above);

    std::vector<std::string> labels_;
    std::vector<DynBitset> above_;
    std::vector<DynBitset> below_;
};

/// Same as Poset::from_relation.
Poset validate_poset(std::vector<std::string> labels, const std::vector<std::vector<bool>>& raw);

/// Size of the longest chain (0 for the empty poset).
std::size_t height(const Poset& poset);

/// Size of the largest antichain, via Dilworth: p minus a maximum matching
/// in the comparability bipartite graph.
std::size_t width(const Poset& poset);

/// Largest antichain by exhaustive branching; p <= 64.
std::size_t width_by_enumeration(const Poset& poset);

/// Minimum number of chains covering a DAG given as transitively closed
/// successor sets. Hopcroft-Karp on the split graph.
std::size_t min_chain_cover(const std::vector<DynBitset>& above);

struct LevelDecomposition {
    std::vector<int> rank;                         ///< rank[x] in 1..height
    std::vector<std::vector<std::size_t>> levels;  ///< levels[i] = A_{i+1}, ascending indices
    int height = 0;
};

/// rank(x) = size of the longest chain whose maximum is x.
LevelDecomposition level_decomposition(const Poset& poset);

/// K_{r_1..r_h}: stacked antichains of the given sizes, each level entirely
/// below every later level. Element labels are "A<i>.<j>", 1-indexed.
Poset complete_multilevel(std::span<const int> level_sizes);

struct ProductOptions {
    std::size_t max_elements = 1'000'000;
};

/// Componentwise order on the tuple product. Tuples are enumerated with the
/// first factor most significant; labels are "(l1,l2,...)".
Poset cartesian_product(std::span<const Poset> factors, ProductOptions options = {});

struct InterpolationSequence {
    /// z_1..z_p as element indices, nondecreasing in rank, ties by index.
    std::vector<std::size_t> order;
    std::size_t q = 0;
    /// steps[l] is P_l for l = 0..q, on the same element set as the source.
    std::vector<Poset> steps;
    LevelDecomposition levels;

    const Poset& step(std::size_t l) const { return steps.at(l); }
};

/// Builds P_0 = K_{|A_1|..|A_h|} on P's elements and corrects one element per
/// step: with S the up-set of z_{l+1}, R(P_{l+1}) = R(P_l) minus S x (P \ S).
InterpolationSequence interpolation_sequence(const Poset& poset);

/// Elements ordered by rank then index.
std::vector<std::size_t> level_order(const Poset& poset);

}  // namespace pgl
