#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <map>
#include <span>
#include <vector>

#include "pgl/bitset.hpp"

namespace pgl {

inline constexpr std::size_t kDefaultGridCap = std::size_t{1} << 24;

/// Coordinates of a grid point, 1-indexed (x(i) in 1..k_i). The same type
/// carries Boolean-algebra offsets, which are 0-indexed (v(i) in 0..k-1).
/// The defaulted ordering is lexicographic and only used for canonical
/// sorting; the grid order is `compare`.
class Point {
  public:
    Point() = default;
    Point(std::initializer_list<int> coords) : coords_(coords) {}
    explicit Point(std::vector<int> coords) : coords_(std::move(coords)) {}

    std::size_t dim() const noexcept { return coords_.size(); }
    int operator[](std::size_t i) const noexcept { return coords_[i]; }
    int& operator[](std::size_t i) noexcept { return coords_[i]; }
    const std::vector<int>& coords() const noexcept { return coords_; }
    auto begin() const noexcept { return coords_.begin(); }
    auto end() const noexcept { return coords_.end(); }

    friend auto operator<=>(const Point&, const Point&) = default;
    friend bool operator==(const Point&, const Point&) = default;

  private:
    std::vector<int> coords_;
};

/// [k_1] x ... x [k_n] with mixed-radix indexing, coordinate 1 most significant.
class GridShape {
  public:
    GridShape() = default;
    /// Throws ShapeError for sides < 1 and SizeError past `cap` points.
    explicit GridShape(std::vector<int> sides, std::size_t cap = kDefaultGridCap);
    static GridShape uniform(int k, int n, std::size_t cap = kDefaultGridCap);

    std::size_t dim() const noexcept { return sides_.size(); }
    int side(std::size_t i) const noexcept { return sides_[i]; }
    const std::vector<int>& sides() const noexcept { return sides_; }
    std::size_t size() const noexcept { return size_; }
    bool is_uniform() const noexcept;

    bool contains(const Point& x) const noexcept;
    /// Mixed-radix rank of x. Throws RangeError for out-of-range points.
    std::size_t index(const Point& x) const;
    Point point(std::size_t index) const;
    /// Allocation-free decode into `out` (size dim()).
    void decode(std::size_t index, std::span<int> out) const noexcept;
    std::size_t stride(std::size_t axis) const noexcept { return strides_[axis]; }

    friend bool operator==(const GridShape& a, const GridShape& b) { return a.sides_ == b.sides_; }

  private:
    std::vector<int> sides_;
    std::vector<std::size_t> strides_;
    std::size_t size_ = 0;
};

/// A subset of a grid as a bitset over mixed-radix indices.
class Family {
  public:
    Family() = default;
    explicit Family(GridShape shape);
    static Family from_points(GridShape shape, std::span<const Point> points);
    static Family full(GridShape shape);
    /// Throws ShapeMismatch unless bits.size() == shape.size().
    static Family from_bits(GridShape shape, DynBitset bits);

    const GridShape& shape() const noexcept { return shape_; }
    std::size_t size() const noexcept { return bits_.count(); }
    bool empty() const noexcept { return bits_.none(); }

    bool contains(const Point& x) const { return shape_.contains(x) && bits_.test(shape_.index(x)); }
    bool contains_index(std::size_t i) const noexcept { return bits_.test(i); }
    void insert(const Point& x) { bits_.set(shape_.index(x)); }
    void insert_index(std::size_t i) noexcept { bits_.set(i); }
    void erase_index(std::size_t i) noexcept { bits_.reset(i); }

    /// Members in index order.
    std::vector<Point> points() const;
    std::vector<std::size_t> indices() const { return bits_.indices(); }
    const DynBitset& bits() const noexcept { return bits_; }

    friend bool operator==(const Family&, const Family&) = default;

  private:
    GridShape shape_;
    DynBitset bits_;
};

enum class Order { less, greater, equal, incomparable };

/// Componentwise comparison. Throws ShapeMismatch on differing dimensions.
Order compare(const Point& a, const Point& b);
/// a <= b in every coordinate and a != b.
bool precedes(const Point& a, const Point& b);
/// a(i) < b(i) in every coordinate.
bool strictly_precedes(const Point& a, const Point& b);

/// Coordinatewise maximum.
Point join(const Point& v, const Point& w);

/// Offsets are disjoint when no coordinate is nonzero in both.
bool disjoint(const Point& v, const Point& w);

/// Partition of a grid into s x ... x s blocks. Block u (1-indexed over the
/// index grid) is { s*u - v : v in {0..s-1}^n }.
class BlockGrid {
  public:
    BlockGrid(GridShape shape, int side);

    const GridShape& shape() const noexcept { return shape_; }
    const GridShape& index_shape() const noexcept { return index_shape_; }
    int side() const noexcept { return side_; }
    std::size_t block_count() const noexcept { return index_shape_.size(); }

    std::vector<Point> block(const Point& u) const;
    /// Index-grid point of the block holding x.
    Point block_of(const Point& x) const;
    /// Mixed-radix indices (in the full grid) of block u's points.
    std::vector<std::size_t> block_indices(const Point& u) const;

  private:
    GridShape shape_;
    GridShape index_shape_;
    int side_;
};

/// Throws DivisibilityError unless s divides every side.
BlockGrid block_decompose(const GridShape& shape, int s);

/// { x without coordinate `axis` : x in F and x(axis) = t }. `axis` is
/// 0-based, t is 1-based. Throws RangeError.
Family slice(const Family& family, std::size_t axis, int t);

/// Projection along the last coordinate.
Family project_last(const Family& family);

/// Order isomorphism C_1 x ... x C_n -> [|C_1|] x ... x [|C_n|] sending each
/// c_i to its position in C_i.
class NaturalBijection {
  public:
    /// Each chain may be given in any order; throws NotAChain.
    explicit NaturalBijection(std::vector<std::vector<Point>> chains);

    std::size_t arity() const noexcept { return chains_.size(); }
    const std::vector<Point>& chain(std::size_t i) const { return chains_[i]; }
    GridShape target_shape() const;

    /// Throws RangeError if some component is not on its chain.
    Point forward(std::span<const Point> tuple) const;
    std::vector<Point> inverse(const Point& image) const;

    /// The tuple as one point of the product of the ambient grids
    /// (coordinates concatenated in chain order).
    Point concatenated(const Point& image) const;

  private:
    std::vector<std::vector<Point>> chains_;
    std::vector<std::map<Point, int>> position_;
};

/// The chain sorted ascending; throws NotAChain if two points are incomparable
/// or repeated.
std::vector<Point> sort_chain(std::vector<Point> chain);

enum class ScaleRelation { equiv, arrow, neither };

/// a and b share a block of size `block`: ceil(a/block) == ceil(b/block).
bool same_block(std::int64_t a, std::int64_t b, std::int64_t block) noexcept;
/// a ->_i b for block sizes `block` (level i) and `finer` (level i-1):
/// a < b, same level-i block, different level-(i-1) block.
bool arrow(std::int64_t a, std::int64_t b, std::int64_t block, std::int64_t finer) noexcept;

/// Relation of scalars a, b at level i >= 1 of base s (block sizes s^i, s^{i-1}).
ScaleRelation scale_relation(std::int64_t a, std::int64_t b, int i, int s);

/// Point-level version on final coordinates; throws PrecondError when the
/// first n-1 coordinates differ.
ScaleRelation equiv_rel(const Point& x, const Point& y, int i, int s);

}  // namespace pgl
