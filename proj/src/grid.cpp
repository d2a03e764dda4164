#include "pgl/grid.hpp"

#include <algorithm>
#include <numeric>

#include <fmt/format.h>

#include "pgl/errors.hpp"

namespace pgl {

GridShape::GridShape(std::vector<int> sides, std::size_t cap) : sides_(std::move(sides)) {
    if (sides_.empty()) throw ShapeError("grid needs at least one dimension");
    size_ = 1;
    for (int k : sides_) {
        if (k < 1) throw ShapeError(fmt::format("grid side {} is not positive", k));
        if (size_ > cap / static_cast<std::size_t>(k))
            throw SizeError(fmt::format("grid exceeds the cap of {} points", cap));
        size_ *= static_cast<std::size_t>(k);
    }
    strides_.assign(sides_.size(), 1);
    for (std::size_t i = sides_.size() - 1; i-- > 0;)
        strides_[i] = strides_[i + 1] * static_cast<std::size_t>(sides_[i + 1]);
}

GridShape GridShape::uniform(int k, int n, std::size_t cap) {
    if (n < 1) throw ShapeError("grid dimension must be positive");
    return GridShape(std::vector<int>(static_cast<std::size_t>(n), k), cap);
}

bool GridShape::is_uniform() const noexcept {
    return std::all_of(sides_.begin(), sides_.end(), [&](int k) { return k == sides_.front(); });
}

bool GridShape::contains(const Point& x) const noexcept {
    if (x.dim() != dim()) return false;
    for (std::size_t i = 0; i < dim(); ++i)
        if (x[i] < 1 || x[i] > sides_[i]) return false;
    return true;
}

std::size_t GridShape::index(const Point& x) const {
    if (x.dim() != dim()) throw ShapeMismatch("point dimension does not match the grid");
    std::size_t idx = 0;
    for (std::size_t i = 0; i < dim(); ++i) {
        if (x[i] < 1 || x[i] > sides_[i])
            throw RangeError(fmt::format("coordinate {} = {} outside [1, {}]", i + 1, x[i], sides_[i]));
        idx += static_cast<std::size_t>(x[i] - 1) * strides_[i];
    }
    return idx;
}

Point GridShape::point(std::size_t index) const {
    std::vector<int> c(dim());
    decode(index, c);
    return Point(std::move(c));
}

void GridShape::decode(std::size_t index, std::span<int> out) const noexcept {
    for (std::size_t i = 0; i < dim(); ++i) {
        out[i] = static_cast<int>(index / strides_[i]) + 1;
        index %= strides_[i];
    }
}

Family::Family(GridShape shape) : shape_(std::move(shape)), bits_(shape_.size()) {}

Family Family::from_points(GridShape shape, std::span<const Point> points) {
    Family f(std::move(shape));
    for (const auto& x : points) f.insert(x);
    return f;
}

Family Family::full(GridShape shape) {
    Family f(std::move(shape));
    f.bits_.set_all();
    return f;
}

Family Family::from_bits(GridShape shape, DynBitset bits) {
    if (bits.size() != shape.size()) throw ShapeMismatch("bitset length does not match the grid");
    Family f(std::move(shape));
    f.bits_ = std::move(bits);
    return f;
}

std::vector<Point> Family::points() const {
    std::vector<Point> out;
    out.reserve(size());
    bits_.for_each([&](std::size_t i) { out.push_back(shape_.point(i)); });
    return out;
}

Order compare(const Point& a, const Point& b) {
    if (a.dim() != b.dim()) throw ShapeMismatch("points have different dimensions");
    bool le = true, ge = true;
    for (std::size_t i = 0; i < a.dim(); ++i) {
        if (a[i] > b[i]) le = false;
        if (a[i] < b[i]) ge = false;
    }
    if (le && ge) return Order::equal;
    if (le) return Order::less;
    if (ge) return Order::greater;
    return Order::incomparable;
}

bool precedes(const Point& a, const Point& b) { return compare(a, b) == Order::less; }

bool strictly_precedes(const Point& a, const Point& b) {
    if (a.dim() != b.dim()) throw ShapeMismatch("points have different dimensions");
    for (std::size_t i = 0; i < a.dim(); ++i)
        if (a[i] >= b[i]) return false;
    return true;
}

Point join(const Point& v, const Point& w) {
    if (v.dim() != w.dim()) throw ShapeMismatch("points have different dimensions");
    std::vector<int> c(v.dim());
    for (std::size_t i = 0; i < v.dim(); ++i) c[i] = std::max(v[i], w[i]);
    return Point(std::move(c));
}

bool disjoint(const Point& v, const Point& w) {
    if (v.dim() != w.dim()) throw ShapeMismatch("offsets have different dimensions");
    for (std::size_t i = 0; i < v.dim(); ++i)
        if (v[i] != 0 && w[i] != 0) return false;
    return true;
}

namespace {

GridShape index_grid(const GridShape& shape, int side) {
    if (side < 1) throw DivisibilityError("block side must be positive");
    std::vector<int> sides;
    for (int k : shape.sides()) {
        if (k % side != 0) throw DivisibilityError(fmt::format("block side {} does not divide {}", side, k));
        sides.push_back(k / side);
    }
    return GridShape(std::move(sides));
}

}  // namespace

BlockGrid::BlockGrid(GridShape shape, int side)
    : shape_(std::move(shape)), index_shape_(index_grid(shape_, side)), side_(side) {}

std::vector<Point> BlockGrid::block(const Point& u) const {
    std::vector<Point> out;
    for (std::size_t i : block_indices(u)) out.push_back(shape_.point(i));
    return out;
}

std::vector<std::size_t> BlockGrid::block_indices(const Point& u) const {
    if (!index_shape_.contains(u)) throw RangeError("block index outside the index grid");
    const std::size_t n = shape_.dim();
    std::size_t base = 0;
    for (std::size_t i = 0; i < n; ++i)
        base += static_cast<std::size_t>(side_ * (u[i] - 1)) * shape_.stride(i);
    std::vector<std::size_t> out;
    std::vector<int> off(n, 0);
    const GridShape cube = GridShape::uniform(side_, static_cast<int>(n));
    out.reserve(cube.size());
    for (std::size_t c = 0; c < cube.size(); ++c) {
        cube.decode(c, off);
        std::size_t idx = base;
        for (std::size_t i = 0; i < n; ++i) idx += static_cast<std::size_t>(off[i] - 1) * shape_.stride(i);
        out.push_back(idx);
    }
    return out;
}

Point BlockGrid::block_of(const Point& x) const {
    if (!shape_.contains(x)) throw RangeError("point outside the grid");
    std::vector<int> u(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) u[i] = (x[i] + side_ - 1) / side_;
    return Point(std::move(u));
}

BlockGrid block_decompose(const GridShape& shape, int s) { return BlockGrid(shape, s); }

Family slice(const Family& family, std::size_t axis, int t) {
    const GridShape& shape = family.shape();
    if (axis >= shape.dim()) throw RangeError("slice axis out of range");
    if (t < 1 || t > shape.side(axis)) throw RangeError(fmt::format("slice value {} out of range", t));
    if (shape.dim() == 1) throw ShapeError("cannot slice a one-dimensional grid");
    std::vector<int> sides;
    for (std::size_t i = 0; i < shape.dim(); ++i)
        if (i != axis) sides.push_back(shape.side(i));
    Family out{GridShape(sides)};
    std::vector<int> c(shape.dim());
    std::vector<int> r(shape.dim() - 1);
    family.bits().for_each([&](std::size_t idx) {
        shape.decode(idx, c);
        if (c[axis] != t) return;
        std::size_t j = 0;
        for (std::size_t i = 0; i < shape.dim(); ++i)
            if (i != axis) r[j++] = c[i];
        out.insert(Point(r));
    });
    return out;
}

Family project_last(const Family& family) {
    const GridShape& shape = family.shape();
    if (shape.dim() == 1) throw ShapeError("cannot project a one-dimensional grid");
    std::vector<int> sides(shape.sides().begin(), shape.sides().end() - 1);
    Family out{GridShape(sides)};
    const auto last = static_cast<std::size_t>(shape.sides().back());
    family.bits().for_each([&](std::size_t idx) { out.insert_index(idx / last); });
    return out;
}

std::vector<Point> sort_chain(std::vector<Point> chain) {
    auto weight = [](const Point& p) { return std::accumulate(p.begin(), p.end(), 0L); };
    std::sort(chain.begin(), chain.end(), [&](const Point& a, const Point& b) {
        const long wa = weight(a), wb = weight(b);
        return wa != wb ? wa < wb : a < b;
    });
    for (std::size_t i = 1; i < chain.size(); ++i)
        if (!precedes(chain[i - 1], chain[i])) throw NotAChain("points are not totally ordered");
    return chain;
}

NaturalBijection::NaturalBijection(std::vector<std::vector<Point>> chains) {
    for (auto& c : chains) {
        if (c.empty()) throw NotAChain("empty chain");
        chains_.push_back(sort_chain(std::move(c)));
        std::map<Point, int> pos;
        for (std::size_t i = 0; i < chains_.back().size(); ++i)
            pos.emplace(chains_.back()[i], static_cast<int>(i) + 1);
        position_.push_back(std::move(pos));
    }
}

GridShape NaturalBijection::target_shape() const {
    std::vector<int> sides;
    for (const auto& c : chains_) sides.push_back(static_cast<int>(c.size()));
    return GridShape(std::move(sides));
}

Point NaturalBijection::forward(std::span<const Point> tuple) const {
    if (tuple.size() != chains_.size()) throw ShapeMismatch("tuple arity does not match");
    std::vector<int> out(tuple.size());
    for (std::size_t i = 0; i < tuple.size(); ++i) {
        auto it = position_[i].find(tuple[i]);
        if (it == position_[i].end()) throw RangeError("tuple component is not on its chain");
        out[i] = it->second;
    }
    return Point(std::move(out));
}

std::vector<Point> NaturalBijection::inverse(const Point& image) const {
    if (image.dim() != chains_.size()) throw ShapeMismatch("image arity does not match");
    std::vector<Point> out;
    for (std::size_t i = 0; i < chains_.size(); ++i) {
        if (image[i] < 1 || image[i] > static_cast<int>(chains_[i].size()))
            throw RangeError("image coordinate out of range");
        out.push_back(chains_[i][static_cast<std::size_t>(image[i] - 1)]);
    }
    return out;
}

Point NaturalBijection::concatenated(const Point& image) const {
    std::vector<int> c;
    for (const auto& p : inverse(image)) c.insert(c.end(), p.begin(), p.end());
    return Point(std::move(c));
}

bool same_block(std::int64_t a, std::int64_t b, std::int64_t block) noexcept {
    return (a + block - 1) / block == (b + block - 1) / block;
}

bool arrow(std::int64_t a, std::int64_t b, std::int64_t block, std::int64_t finer) noexcept {
    return a < b && same_block(a, b, block) && !same_block(a, b, finer);
}

ScaleRelation scale_relation(std::int64_t a, std::int64_t b, int i, int s) {
    if (i < 1 || s < 2) throw PrecondError("scale level must be >= 1 and base >= 2");
    std::int64_t finer = 1;
    for (int j = 1; j < i; ++j) finer *= s;
    const std::int64_t block = finer * s;
    if (arrow(a, b, block, finer)) return ScaleRelation::arrow;
    if (same_block(a, b, block)) return ScaleRelation::equiv;
    return ScaleRelation::neither;
}

ScaleRelation equiv_rel(const Point& x, const Point& y, int i, int s) {
    if (x.dim() != y.dim() || x.dim() == 0) throw ShapeMismatch("points have different dimensions");
    for (std::size_t j = 0; j + 1 < x.dim(); ++j)
        if (x[j] != y[j]) throw PrecondError("points differ outside the last coordinate");
    return scale_relation(x[x.dim() - 1], y[y.dim() - 1], i, s);
}

}  // namespace pgl
