#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "pgl/bitset.hpp"
#include "pgl/exec.hpp"
#include "pgl/grid.hpp"
#include "pgl/poset.hpp"

namespace pgl {

enum class CopyMode { weak, induced, strong };

std::string_view to_string(CopyMode mode) noexcept;
/// Throws InputError on an unknown name.
CopyMode parse_copy_mode(std::string_view name);

/// image[x] is the point assigned to poset element x.
struct Embedding {
    CopyMode mode = CopyMode::weak;
    std::vector<Point> image;
};

struct SearchOptions {
    std::uint64_t node_budget = 10'000'000;
    Exec exec = Exec::parallel;
};

inline constexpr std::size_t kMaxCopyUniverse = 8192;

/// Backtracking copy search over a fixed list of candidate points. Variables
/// are chosen by smallest domain (ties by level order); candidates are tried
/// in index order, so the witness found is the first in that search order.
/// Immutable after construction and safe to share between threads.
class CopyMatcher {
  public:
    /// Throws SizeError past kMaxCopyUniverse candidates.
    CopyMatcher(std::vector<Point> universe, const Poset& poset, CopyMode mode);

    const std::vector<Point>& universe() const noexcept { return universe_; }
    const Poset& poset() const noexcept { return poset_; }
    CopyMode mode() const noexcept { return mode_; }

    /// Images as universe indices, using only candidates in `allowed`.
    /// Throws BudgetExceeded when the node budget runs out first.
    std::optional<std::vector<std::size_t>> find(const DynBitset& allowed, const SearchOptions& options = {},
                                                 SearchStats* stats = nullptr) const;

    /// Copies that send one of `vars` to `anchor`. Serial; used for
    /// incremental checks where the new point is the only unknown.
    std::optional<std::vector<std::size_t>> find_anchored(const DynBitset& allowed, std::size_t anchor,
                                                          std::span<const std::size_t> vars,
                                                          std::uint64_t node_budget, SearchStats* stats = nullptr) const;

  private:
    friend struct CopySearchState;

    std::vector<Point> universe_;
    Poset poset_;
    CopyMode mode_;
    std::vector<std::size_t> var_rank_;  ///< position of each element in level order
    std::vector<DynBitset> up_, down_, incomparable_;
};

/// A copy of P in F in the given mode, or none. Throws BudgetExceeded.
std::optional<Embedding> find_copy(const Family& family, const Poset& poset, CopyMode mode,
                                   const SearchOptions& options = {}, SearchStats* stats = nullptr);

/// Independent pairwise re-check of an embedding.
bool verify_embedding(const Family& family, const Poset& poset, const Embedding& embedding);

/// v0 plus pairwise disjoint nonzero offsets v1..vd (0-indexed offsets).
struct BooleanAlgebraWitness {
    Point base;
    std::vector<Point> offsets;

    /// All 2^d points v0 + sum_{i in I} v_i, I enumerated as bitmasks.
    std::vector<Point> points() const;
};

/// Searches bases v0 in index order, then tops u above v0 in index order, then
/// the partitions of supp(u - v0) into d offsets. Throws BudgetExceeded.
std::optional<BooleanAlgebraWitness> find_boolean_algebra(const Family& family, int d,
                                                          std::uint64_t node_budget = 10'000'000);

/// Boolean algebras of dimension d in F + {top} whose top element is `top`.
std::optional<BooleanAlgebraWitness> find_boolean_algebra_with_top(const Family& family, const Point& top, int d);

bool verify_boolean_algebra(const Family& family, const BooleanAlgebraWitness& witness);

struct JoinTriple {
    Point u, v, w;  ///< u = v join w, all distinct
};

/// First pair (v, w) in index order whose join lies in F and differs from both.
std::optional<JoinTriple> find_join_triple(const Family& family, Exec exec = Exec::parallel);

/// Join triples in F + {top} with u = top.
std::optional<JoinTriple> find_join_triple_with_top(const Family& family, const Point& top);

struct BadElements {
    std::vector<Point> x_bad;  ///< no (a', b) in F with a' < a
    std::vector<Point> y_bad;  ///< no (a, b') in F with b' < b
    std::vector<Point> neither;
};

/// Throws ShapeError unless F lives in a 2-dimensional grid.
BadElements find_bad_elements_2d(const Family& family);

/// The element (a, b) that is neither x-bad nor y-bad gives
/// (a, b) = (a', b) join (a, b') with a' < a and b' < b the smallest such.
JoinTriple join_triple_from_element(const Family& family, const Point& element);

/// Replays the k + l argument: if |F| > k + l, returns the triple built from
/// the first element that is neither x-bad nor y-bad.
std::optional<JoinTriple> replay_join_bound(const Family& family);

/// Block sizes b_0 = 1 < b_1 < ... < b_h along the last axis, each dividing
/// the next. Level i of the lifting argument uses b_i = s^i.
struct ScaleLadder {
    std::vector<std::int64_t> blocks;

    static ScaleLadder powers(int s, int h);
    int levels() const noexcept { return static_cast<int>(blocks.size()) - 1; }
};

/// Witnesses on x's row (x in F, last coordinate a) at level i: the smallest
/// t with t ->_i a (below) or a ->_i t (above) and the point in F; 0 if none.
int witness_below(const Family& family, const ScaleLadder& ladder, const Point& x, int level);
int witness_above(const Family& family, const ScaleLadder& ladder, const Point& x, int level);

/// Elements with witnesses above and below at every level.
Family good_elements(const Family& family, const ScaleLadder& ladder, Exec exec = Exec::parallel);

struct DenseExtractionOptions {
    /// Refuse families below the size threshold (ThresholdNotMet). For h >= 2
    /// it exceeds k^d whenever k < 40, so tests on constructed instances
    /// switch this off.
    bool require_threshold = true;
    /// Copy-search settings for the base case.
    SearchOptions search;
};

/// Strong copy of P_l in F subset [k]^d via the good-element / densest-slice
/// recursion. h = height(P), s = floor(k^{1/h}); if s^h < k the search runs on
/// the densest s^h-sided subgrid. Returns none when no slice path succeeds.
/// The result is verified; a failed verification throws ExtractionFailed.
std::optional<Embedding> extract_strong_copy_dense(const Family& family, const Poset& poset, std::size_t l,
                                                   const DenseExtractionOptions& options = {});

/// Lift of a strong copy of P_{l-1} found in slice t of the good elements to a
/// strong copy of P_l in F (the proof's y_i construction). `slice_copy` maps
/// elements to (d-1)-dimensional points.
Embedding lift_slice_copy(const Family& family, const Poset& poset, std::size_t l, const ScaleLadder& ladder,
                          const Embedding& slice_copy, int t);

/// Claim 15 extraction: `blocks` are index points of `grid` that agree in the
/// first d-1 coordinates, sorted by the last one, at least height(P) of them.
/// Finds a strong copy of P_l in the common projection and lifts element z
/// into block number rank(z). Returns none when the projection has no copy.
std::optional<Embedding> find_copy_via_fat_blocks(const BlockGrid& grid, std::span<const Point> blocks,
                                                  const Family& family, const Poset& poset, std::size_t l,
                                                  const SearchOptions& options = {});

/// Same, choosing height(P) of the given row blocks by intersection_select
/// with density alpha = num/den.
std::optional<Embedding> find_copy_via_fat_row(const BlockGrid& grid, std::span<const Point> row_blocks,
                                               const Family& family, const Poset& poset, std::size_t l,
                                               std::uint64_t alpha_num, std::uint64_t alpha_den,
                                               const SearchOptions& options = {});

/// pr(B_u intersected with F) in block-local coordinates [s]^{d-1}.
Family block_projection(const BlockGrid& grid, const Point& block, const Family& family);

}  // namespace pgl
