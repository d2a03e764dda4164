#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <gmpxx.h>

#include "pgl/bitset.hpp"
#include "pgl/detection.hpp"
#include "pgl/exec.hpp"
#include "pgl/grid.hpp"
#include "pgl/poset.hpp"

namespace pgl {

struct ExtremalOptions {
    std::uint64_t node_budget = 50'000'000;   ///< branch-and-bound nodes
    std::uint64_t check_budget = 10'000'000;  ///< nodes per copy check
    std::size_t exhaustive_points = 20;       ///< subset enumeration at or below this grid size
    Exec exec = Exec::parallel;
};

/// Largest family avoiding a structure. When `complete` is false the search
/// ran out of budget and `optimum` is only a lower bound.
struct ExtremalResult {
    GridShape shape;
    std::string structure;  ///< "poset:<name>", "boolean-algebra:<d>" or "join"
    std::string mode;       ///< weak | induced | strong, or "-" for non-poset structures
    std::size_t optimum = 0;
    Family witness;
    bool complete = false;
    std::string method;  ///< exhaustive | branch-and-bound
    SearchStats stats;
};

/// Largest family with no weak/induced/strong copy of P. Exhaustive subset
/// enumeration for small grids, otherwise branch and bound (see README for
/// the upper bound used).
ExtremalResult max_avoiding(const GridShape& shape, const Poset& poset, CopyMode mode,
                            const ExtremalOptions& options = {}, const std::string& name = "P");

/// b(shape, d): largest family with no d-dimensional Boolean algebra.
ExtremalResult max_no_boolean_algebra(const GridShape& shape, int d, const ExtremalOptions& options = {});

/// Largest family with no distinct u = v join w.
ExtremalResult max_no_join(const GridShape& shape, const ExtremalOptions& options = {});

/// Largest subset of `subset` with no chain of c + 1 elements under the strict
/// order `above` (transitively closed). Greene-Kleitman via min-cost flow:
/// the minimum over chain packings of (#chains) * c + (#uncovered points).
std::size_t max_c_family(const std::vector<DynBitset>& above, const DynBitset& subset, std::size_t c);

/// Sum of the c largest binomial coefficients C(n, i): the largest family in
/// [2]^n without a chain of c + 1 elements.
mpz_class erdos_bound(int n, int c);

/// Least d with 2^{d-2} >= r (d + 1).
int smallest_d0(std::uint64_t r);

/// |F| > (8 d0 (h-1) + 4 l h k^{(h-1)/h}) k^{d-1}, decided exactly.
bool exceeds_dense_threshold(std::uint64_t family_size, int d0, int h, std::size_t l, int k, int d);

/// The s and C schedules. The s_i grow doubly exponentially, so they are
/// kept as exact powers of two and C_l as coefficient * 2^{C_exponent}.
struct BoundConstants {
    std::size_t p = 0, h = 0, r = 0, q = 0;
    int d0 = 0;
    /// s_i = 2^{s_exponents[i]} for i = 0..h-1; s_h is the grid side.
    std::vector<mpz_class> s_exponents;
    /// C_l = C_coefficients[l] * 2^{C_exponent}, l = 0..q.
    std::vector<mpq_class> C_coefficients;
    mpz_class C_exponent;
    /// C_q < e^{8h} C_0, certified against a Taylor partial sum of e^{8h}.
    bool cq_certified = false;
    /// log_p(C_q) to six decimals, as a string; empty when p < 2. This is the
    /// exponent proxy for c(h), which the source only pins as 2^{O(h log h)}.
    std::string c_h_proxy;

    /// C_l as one rational; throws SizeError past 2^24 bits.
    mpq_class C(std::size_t l) const;
};

BoundConstants compute_constants(const Poset& poset);

struct NamedBound {
    std::string name;
    std::string formula;
    std::string value;  ///< exact integer or "num/den"; symbolic when irrational
    bool exact = true;
    bool applicable = true;
    std::string note;
};

/// Every closed-form bound for P in [k]^n (or 2^[n] for the Boolean ones).
/// O(.) bounds are scaled by `big_o_constant` and flagged.
std::vector<NamedBound> bound_catalog(const Poset& poset, int n, int k, const mpq_class& big_o_constant = 1);

mpz_class strong_chain_bound(int d, int h, int k);
mpz_class strong_multilevel_bound(int d, int h, int k);

enum class BlockClass { empty, light, fat, medium };
std::string_view to_string(BlockClass c) noexcept;

/// Labels every block of `blocks` (side s_i) against F: empty, then light
/// (|B cap F| p <= s_i^{d-1}), then fat (|pr(B cap F)| p^2 s_{i-1} >= s_i^{d-1}),
/// otherwise medium. Indexed like blocks.index_shape().
std::vector<BlockClass> classify_blocks(const Family& family, const BlockGrid& blocks, std::uint64_t p,
                                        std::uint64_t s_prev);

/// Ground set {0..ground-1} with subsets V_1..V_m, each of size >= alpha |V|.
struct SetSystem {
    std::size_t ground = 0;
    std::vector<DynBitset> sets;
    mpq_class alpha;
};

struct IntersectionSelection {
    std::vector<std::size_t> indices;  ///< h indices, ascending
    DynBitset intersection;
};

/// Intersection selection, constructively: M = ceil(2h/alpha); W = points in at least h of
/// V_1..V_M; each w votes for the lexicographically least h of its sets; the
/// most popular tuple (least on ties) wins. Throws PrecondError unless
/// 0 < alpha < 1/2, m >= 2h/alpha and every |V_i| >= alpha |V|; throws
/// std::logic_error if the (alpha/12)^{h+1} |V| guarantee fails.
IntersectionSelection intersection_select(const SetSystem& system, int h);

}  // namespace pgl
