#include <chrono>
#include <map>
#include <random>

#include "doctest.h"
#include "oracles/brute.hpp"
#include "oracles/planted.hpp"
#include "pgl/decomposition.hpp"
#include "pgl/errors.hpp"
#include "pgl/extremal.hpp"

using namespace pgl;

namespace {

// Strong-chain maxima frozen from tests/oracles/goldens.py (ILP / brute force).
// Key (k, d, h).
const std::map<std::tuple<int, int, int>, std::size_t> kStrongChainGoldens{
    {{2, 2, 2}, 3},  {{2, 2, 3}, 4},   {{2, 2, 4}, 4},   {{3, 2, 2}, 5},  {{3, 2, 3}, 8},  {{3, 2, 4}, 9},
    {{4, 2, 2}, 7},  {{4, 2, 3}, 12},  {{4, 2, 4}, 15},  {{5, 2, 2}, 9},  {{5, 2, 3}, 16}, {{5, 2, 4}, 21},
    {{6, 2, 2}, 11}, {{6, 2, 3}, 20},  {{6, 2, 4}, 27},  {{7, 2, 2}, 13}, {{7, 2, 3}, 24}, {{7, 2, 4}, 33},
    {{8, 2, 2}, 15}, {{8, 2, 3}, 28},  {{8, 2, 4}, 39},  {{2, 3, 2}, 7},  {{2, 3, 3}, 8},  {{2, 3, 4}, 8},
    {{3, 3, 2}, 19}, {{3, 3, 3}, 26},  {{3, 3, 4}, 27},  {{4, 3, 2}, 37}, {{4, 3, 3}, 56}, {{4, 3, 4}, 63},
    {{2, 4, 2}, 15}, {{2, 4, 3}, 16},  {{2, 4, 4}, 16},  {{2, 5, 2}, 31}, {{2, 5, 3}, 32}, {{2, 5, 4}, 32},
    {{2, 6, 2}, 63}, {{2, 6, 3}, 64},  {{2, 6, 4}, 64}};

std::vector<std::vector<bool>> relation_of(const Poset& P) {
    std::vector<std::vector<bool>> r(P.size(), std::vector<bool>(P.size()));
    for (std::size_t a = 0; a < P.size(); ++a)
        for (std::size_t b = 0; b < P.size(); ++b) r[a][b] = P.less(a, b);
    return r;
}

// Largest subset of the grid with no copy, by enumerating every subset.
std::size_t brute_max_avoiding(const std::vector<int>& sides, const Poset& P, int mode) {
    const auto pts = brute::grid_points(sides);
    const auto rel = relation_of(P);
    std::size_t best = 0;
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << pts.size()); ++mask) {
        const auto cnt = static_cast<std::size_t>(__builtin_popcountll(mask));
        if (cnt <= best) continue;
        std::vector<brute::Vec> sel;
        for (std::size_t i = 0; i < pts.size(); ++i)
            if (mask >> i & 1) sel.push_back(pts[i]);
        if (!brute::has_copy(rel, sel, mode)) best = cnt;
    }
    return best;
}

}  // namespace

TEST_CASE("max_avoiding examples") {
    const auto sperner = max_avoiding(GridShape::uniform(2, 2), Poset::chain(2), CopyMode::weak);
    CHECK(sperner.optimum == 2);
    CHECK(sperner.complete);
    CHECK(max_avoiding(GridShape::uniform(2, 4), Poset::chain(3), CopyMode::weak).optimum == 10);
    const auto strong = max_avoiding(GridShape::uniform(2, 2), Poset::chain(2), CopyMode::strong);
    CHECK(strong.optimum == 3);
    CHECK(strong.witness.size() == 3);
    CHECK_THROWS_AS(max_avoiding(GridShape::uniform(2, 2), Poset::antichain(0), CopyMode::weak), PrecondError);
}

TEST_CASE("chain-free maxima equal the width") {
    for (const auto& sides : std::vector<std::vector<int>>{
             {2, 2}, {3, 3}, {2, 2, 2}, {2, 3, 4}, {5, 5}, {3, 3, 3}, {8, 8}, {4, 4, 4}, {2, 2, 2, 2, 2, 2}, {64}}) {
        const GridShape shape(sides);
        const auto r = max_avoiding(shape, Poset::chain(2), CopyMode::weak);
        CAPTURE(shape.size());
        CHECK(r.complete);
        CHECK(r.optimum == grid_width(shape, 0));
    }
}

TEST_CASE("Erdos consecutive binomial sums") {
    for (auto [n, k] : std::vector<std::pair<int, int>>{{2, 2}, {3, 2}, {3, 3}, {4, 2}, {4, 3}, {4, 4}, {2, 3}}) {
        const auto r = max_avoiding(GridShape::uniform(2, n), Poset::chain(static_cast<std::size_t>(k)), CopyMode::weak);
        CHECK(r.complete);
        CHECK(mpz_class(static_cast<unsigned long>(r.optimum)) == erdos_bound(n, k - 1));
    }
    CHECK(erdos_bound(4, 2) == 10);
    CHECK(erdos_bound(3, 5) == 8);
}

TEST_CASE("strong chain maxima match goldens and the d(h-1)k^(d-1) bound") {
    for (const auto& [key, value] : kStrongChainGoldens) {
        const auto [k, d, h] = key;
        const auto r = max_avoiding(GridShape::uniform(k, d), Poset::chain(static_cast<std::size_t>(h)), CopyMode::strong);
        CAPTURE(k);
        CAPTURE(d);
        CAPTURE(h);
        CHECK(r.complete);
        CHECK(r.optimum == value);
        CHECK(mpz_class(static_cast<unsigned long>(r.optimum)) <= strong_chain_bound(d, h, k));
    }
    for (int k = 1; k <= 64; k += 7)
        for (int h = 1; h <= 4; ++h)
            CHECK(max_avoiding(GridShape({k}), Poset::chain(static_cast<std::size_t>(h)), CopyMode::strong).optimum ==
                  static_cast<std::size_t>(std::min(h - 1, k)));
}

TEST_CASE("exact search agrees with subset enumeration") {
    std::mt19937 rng(10);
    const std::vector<std::vector<int>> shapes{{2, 2}, {3, 3}, {2, 2, 2}, {2, 4}, {3}, {2, 3}};
    for (int t = 0; t < 60; ++t) {
        const auto& sides = shapes[rng() % shapes.size()];
        const Poset P = planted::random_poset(rng, 1 + rng() % 3, 0.5);
        const int mode = static_cast<int>(rng() % 3);
        const std::size_t expect = brute_max_avoiding(sides, P, mode);
        ExtremalOptions ex;
        ExtremalOptions bb;
        bb.exhaustive_points = 0;
        bb.exec = t % 2 ? Exec::serial : Exec::parallel;
        const auto a = max_avoiding(GridShape(sides), P, static_cast<CopyMode>(mode), ex);
        const auto b = max_avoiding(GridShape(sides), P, static_cast<CopyMode>(mode), bb);
        CAPTURE(t);
        CHECK(a.method == "exhaustive");
        CHECK(b.method == "branch-and-bound");
        CHECK(a.optimum == expect);
        CHECK(b.optimum == expect);
        CHECK(b.complete);
    }
}

TEST_CASE("branch and bound is schedule independent") {
    ExtremalOptions serial, parallel;
    serial.exhaustive_points = parallel.exhaustive_points = 0;
    serial.exec = Exec::serial;
    const Poset V = Poset::from_pairs({"a", "b", "c"}, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}});
    for (const auto& shape : {GridShape::uniform(3, 2), GridShape::uniform(2, 4), GridShape({2, 3, 3})}) {
        const auto a = max_avoiding(shape, V, CopyMode::induced, serial);
        const auto b = max_avoiding(shape, V, CopyMode::induced, parallel);
        CHECK(a.optimum == b.optimum);
        CHECK(a.witness == b.witness);
    }
}

TEST_CASE("a spent budget yields a labelled lower bound") {
    ExtremalOptions tiny;
    tiny.exhaustive_points = 0;
    tiny.node_budget = 50;
    const Poset V = Poset::from_pairs({"a", "b", "c"}, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}});
    const auto r = max_avoiding(GridShape::uniform(4, 3), V, CopyMode::induced, tiny);
    CHECK_FALSE(r.complete);
    CHECK(r.witness.size() == r.optimum);
    CHECK_FALSE(find_copy(r.witness, V, CopyMode::induced).has_value());
}

TEST_CASE("Boolean algebra and join maxima") {
    CHECK(max_no_boolean_algebra(GridShape::uniform(2, 2), 1).optimum == 2);
    CHECK(max_no_boolean_algebra(GridShape::uniform(2, 3), 1).optimum == 3);
    CHECK(max_no_boolean_algebra(GridShape::uniform(2, 4), 1).optimum == 6);
    CHECK(max_no_boolean_algebra(GridShape::uniform(3, 2), 2).optimum == 6);
    CHECK(max_no_boolean_algebra(GridShape::uniform(2, 3), 2).optimum == 6);

    const std::map<std::pair<int, int>, std::size_t> join_goldens{
        {{1, 2}, 2}, {{1, 3}, 3}, {{2, 1}, 2}, {{2, 2}, 3}, {{2, 3}, 4}, {{3, 1}, 3}, {{3, 2}, 4}, {{3, 3}, 5}};
    for (const auto& [kl, value] : join_goldens) {
        const auto r = max_no_join(GridShape({kl.first, kl.second}));
        CHECK(r.optimum == value);
        CHECK(r.optimum <= static_cast<std::size_t>(kl.first + kl.second));
    }
    CHECK(max_no_join(GridShape({2})).optimum == 2);
    ExtremalOptions bb;
    bb.exhaustive_points = 0;
    CHECK(max_no_join(GridShape({3, 3}), bb).optimum == 5);
    CHECK(max_no_boolean_algebra(GridShape::uniform(2, 4), 1, bb).optimum == 6);
}

TEST_CASE("Greene-Kleitman bound matches enumeration") {
    std::mt19937 rng(12);
    for (int t = 0; t < 200; ++t) {
        const std::size_t p = 1 + rng() % 10;
        const Poset P = planted::random_poset(rng, p, 0.3);
        std::vector<DynBitset> above;
        for (std::size_t x = 0; x < p; ++x) above.push_back(P.above(x));
        DynBitset all(p);
        all.set_all();
        const std::size_t c = rng() % 4;
        std::size_t best = 0;
        for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << p); ++mask) {
            std::vector<std::vector<bool>> sub;
            std::vector<std::size_t> ids;
            for (std::size_t i = 0; i < p; ++i)
                if (mask >> i & 1) ids.push_back(i);
            sub.assign(ids.size(), std::vector<bool>(ids.size()));
            for (std::size_t a = 0; a < ids.size(); ++a)
                for (std::size_t b = 0; b < ids.size(); ++b) sub[a][b] = P.less(ids[a], ids[b]);
            if (brute::longest_chain(sub) <= c) best = std::max(best, ids.size());
        }
        CHECK(max_c_family(above, all, c) == best);
    }
}

TEST_CASE("dense extraction threshold arithmetic") {
    CHECK(smallest_d0(1) == 5);
    CHECK(smallest_d0(2) == 6);
    CHECK(smallest_d0(4) == 7);
    // k = 4, h = 2, d0 = 5, l = 1, d = 6: bound (40 + 8 * 2) * 4^5 = 57344.
    CHECK_FALSE(exceeds_dense_threshold(57344, 5, 2, 1, 4, 6));
    CHECK(exceeds_dense_threshold(57345, 5, 2, 1, 4, 6));
    // k = 5 is not a square: (40 + 8 sqrt 5) * 5^5 = 180901.69...
    CHECK_FALSE(exceeds_dense_threshold(180901, 5, 2, 1, 5, 6));
    CHECK(exceeds_dense_threshold(180902, 5, 2, 1, 5, 6));
    CHECK(exceeds_dense_threshold(1, 5, 1, 0, 3, 2));
}

TEST_CASE("compute_constants") {
    const auto c1 = compute_constants(Poset::chain(3));
    CHECK(c1.d0 == 5);
    CHECK(c1.r == 1);
    CHECK(c1.s_exponents.front() == 0);
    CHECK(c1.cq_certified);
    const auto k22 = compute_constants(complete_multilevel(std::vector<int>{2, 2}));
    CHECK(k22.d0 == 6);
    CHECK(k22.q == 2);
    REQUIRE(k22.s_exponents.size() == 2);
    // (100 * 4^3 * 2)^8 = 12800^8 has 110 bits.
    CHECK(k22.s_exponents[1] == 110);
    CHECK(k22.C_exponent == 220);
    CHECK(k22.C_coefficients[0] == 2 * 4 * 64);
    CHECK(k22.C_coefficients[1] == k22.C_coefficients[0] * mpq_class(5));
    CHECK(k22.C(0) == mpq_class(mpz_class(512) << 220));
    std::mt19937 rng(3);
    for (int t = 0; t < 50; ++t) {
        const auto bc = compute_constants(planted::random_poset(rng, 1 + rng() % 7, 0.4));
        CHECK(bc.cq_certified);
        CHECK(bc.s_exponents.front() == 0);
    }
}

TEST_CASE("bound catalog") {
    const Poset c2 = Poset::chain(2);
    auto find = [](const std::vector<NamedBound>& all, const std::string& name) {
        for (const auto& b : all)
            if (b.name == name) return b;
        FAIL("missing bound " << name);
        return NamedBound{};
    };
    CHECK(strong_chain_bound(2, 2, 2) == 4);
    CHECK(strong_multilevel_bound(5, 2, 2) == 320);
    const auto cat = bound_catalog(c2, 4, 2);
    CHECK(find(cat, "strong_chains").value == "32");
    CHECK(find(cat, "sperner").value == "6");
    CHECK(find(cat, "la_boolean").exact == false);
    const auto c3 = bound_catalog(Poset::chain(3), 4, 2);
    CHECK(find(c3, "erdos_height").value == "10");
    CHECK(find(bound_catalog(c2, 5, 2), "strong_multilevel").value == "320");
    CHECK(find(bound_catalog(c2, 5, 2), "strong_multilevel").applicable);
    CHECK_FALSE(find(bound_catalog(c2, 4, 2), "strong_multilevel").applicable);
}

TEST_CASE("block classification") {
    const GridShape g = GridShape::uniform(8, 2);
    const BlockGrid blocks(g, 4);
    Family F(g);
    for (int a = 1; a <= 4; ++a)
        for (int b = 1; b <= 4; ++b) F.insert({a, b});
    F.insert({5, 1});
    for (int b = 5; b <= 8; ++b) F.insert({1, b}), F.insert({2, b}), F.insert({3, b});
    const auto c = classify_blocks(F, blocks, 1, 1);
    CHECK(c[blocks.index_shape().index({1, 1})] == BlockClass::fat);
    CHECK(c[blocks.index_shape().index({2, 2})] == BlockClass::empty);
    const auto c2 = classify_blocks(F, blocks, 2, 1);
    CHECK(c2[blocks.index_shape().index({2, 1})] == BlockClass::light);
    // 12 points, projection 3: 12*2 > 4 so not light; 3*4*1 >= 4 so fat.
    CHECK(c2[blocks.index_shape().index({1, 2})] == BlockClass::fat);
    // With s_prev small and p large, a wide-but-thin block is medium.
    const auto c3 = classify_blocks(F, blocks, 3, 1);
    CHECK(c3[blocks.index_shape().index({1, 2})] == BlockClass::fat);
    Family G(g);
    for (int b = 1; b <= 4; ++b) G.insert({1, b}), G.insert({2, b});
    // 8 points, p = 5: 40 > 4 not light; projection 2: 2*25*s_prev, s_prev = 0 -> medium.
    CHECK(classify_blocks(G, blocks, 5, 0)[0] == BlockClass::medium);
    CHECK(to_string(BlockClass::medium) == "medium");
}

TEST_CASE("intersection selection") {
    SetSystem one{10, {}, mpq_class(1, 4)};
    for (int i = 0; i < 8; ++i) {
        DynBitset s(10);
        for (int j = 0; j <= i % 5 + 2; ++j) s.set(static_cast<std::size_t>(j));
        one.sets.push_back(s);
    }
    const auto sel1 = intersection_select(one, 1);
    CHECK(sel1.indices == std::vector<std::size_t>{4});

    SetSystem same{100, {}, mpq_class(49, 100)};
    DynBitset half(100);
    for (std::size_t j = 0; j < 50; ++j) half.set(j);
    for (int i = 0; i < 10; ++i) same.sets.push_back(half);
    const auto sel2 = intersection_select(same, 2);
    CHECK(sel2.indices.size() == 2);
    CHECK(sel2.intersection == half);

    SetSystem few{100, {half, half}, mpq_class(49, 100)};
    CHECK_THROWS_AS(intersection_select(few, 2), PrecondError);
    SetSystem big_alpha{100, same.sets, mpq_class(1, 2)};
    CHECK_THROWS_AS(intersection_select(big_alpha, 1), PrecondError);
}

TEST_CASE("intersection selection meets its guarantee on random systems") {
    std::mt19937 rng(13);
    for (int t = 0; t < 300; ++t) {
        const int h = 1 + static_cast<int>(rng() % 3);
        const mpq_class alpha(1 + static_cast<long>(rng() % 9), 20);
        const std::size_t ground = 20 + rng() % 200;
        mpq_class need = mpq_class(2 * h) / alpha;
        const std::size_t m = static_cast<std::size_t>(std::ceil(need.get_d())) + rng() % 4;
        SetSystem sys{ground, {}, alpha};
        for (std::size_t i = 0; i < m; ++i) {
            DynBitset s(ground);
            const std::size_t target = static_cast<std::size_t>(std::ceil(mpq_class(alpha * ground).get_d())) + rng() % 10;
            while (s.count() < std::min(target, ground)) s.set(rng() % ground);
            sys.sets.push_back(s);
        }
        const auto sel = intersection_select(sys, h);
        mpq_class bound = ground;
        for (int i = 0; i <= h; ++i) bound *= alpha / 12;
        CHECK(mpq_class(static_cast<unsigned long>(sel.intersection.count())) >= bound);
        DynBitset recomputed = sys.sets[sel.indices[0]];
        for (std::size_t i : sel.indices) recomputed &= sys.sets[i];
        CHECK(recomputed == sel.intersection);
    }
}
