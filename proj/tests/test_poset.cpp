#include <algorithm>
#include <numeric>
#include <random>

#include "doctest.h"
#include "oracles/brute.hpp"
#include "pgl/errors.hpp"
#include "pgl/poset.hpp"

using namespace pgl;

namespace {

using Pairs = std::vector<std::pair<std::size_t, std::size_t>>;

Poset diamond() {
    const Pairs r{{0, 1}, {0, 2}, {1, 3}, {2, 3}};
    return Poset::from_pairs({"a", "b", "c", "z"}, r);
}

std::vector<std::vector<bool>> matrix(const Poset& p) {
    std::vector<std::vector<bool>> m(p.size(), std::vector<bool>(p.size()));
    for (std::size_t x = 0; x < p.size(); ++x)
        for (std::size_t y = 0; y < p.size(); ++y) m[x][y] = p.less(x, y);
    return m;
}

Poset random_poset(std::mt19937& rng, std::size_t p, double density) {
    std::vector<std::size_t> perm(p);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::bernoulli_distribution coin(density);
    std::vector<std::vector<bool>> raw(p, std::vector<bool>(p, false));
    for (std::size_t i = 0; i < p; ++i)
        for (std::size_t j = i + 1; j < p; ++j)
            if (coin(rng)) raw[perm[i]][perm[j]] = true;
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < p; ++i) labels.push_back("e" + std::to_string(i));
    return validate_poset(labels, raw);
}

}  // namespace

TEST_CASE("validate_poset closes and rejects cycles") {
    const Pairs abc{{0, 1}, {1, 2}};
    const Poset p = Poset::from_pairs({"a", "b", "c"}, abc);
    CHECK(p.less(0, 2));
    CHECK(p.relation_size() == 3);

    const Pairs cyc{{0, 1}, {1, 0}};
    try {
        Poset::from_pairs({"a", "b"}, cyc);
        FAIL("expected CycleError");
    } catch (const CycleError& e) {
        REQUIRE(e.cycle.size() >= 3);
        CHECK(e.cycle.front() == e.cycle.back());
    }

    const Poset anti = validate_poset({"x", "y", "z"}, std::vector<std::vector<bool>>(3, std::vector<bool>(3)));
    CHECK(width(anti) == 3);
    CHECK(height(anti) == 1);
}

TEST_CASE("from_closed rejects relations that are not transitively closed") {
    std::vector<DynBitset> above(3, DynBitset(3));
    above[0].set(1);
    above[1].set(2);
    CHECK_THROWS_AS(Poset::from_closed({"a", "b", "c"}, above), std::logic_error);
}

TEST_CASE("height and width of small posets") {
    CHECK(height(Poset::chain(1)) == 1);
    CHECK(height(Poset::chain(5)) == 5);
    CHECK(width(Poset::chain(5)) == 1);
    CHECK(width(Poset::antichain(4)) == 4);
    CHECK(height(diamond()) == 3);
    CHECK(width(diamond()) == 2);
}

TEST_CASE("width by matching agrees with exhaustive enumeration") {
    std::mt19937 rng(7);
    for (int t = 0; t < 150; ++t) {
        const std::size_t p = 1 + static_cast<std::size_t>(rng() % 16);
        const Poset P = random_poset(rng, p, 0.1 + 0.1 * (t % 6));
        const auto m = matrix(P);
        CHECK(width(P) == brute::max_antichain(m));
        CHECK(width_by_enumeration(P) == brute::max_antichain(m));
        CHECK(height(P) == brute::longest_chain(m));
    }
}

TEST_CASE("level decomposition") {
    const auto anti = level_decomposition(Poset::antichain(3));
    CHECK(anti.height == 1);
    CHECK(anti.levels.size() == 1);
    CHECK(anti.levels[0].size() == 3);

    const auto ch = level_decomposition(Poset::chain(3));
    CHECK(ch.rank == std::vector<int>{1, 2, 3});

    const Pairs ab{{0, 1}};
    const auto lv = level_decomposition(Poset::from_pairs({"a", "b", "c"}, ab));
    REQUIRE(lv.levels.size() == 2);
    CHECK(lv.levels[0] == std::vector<std::size_t>{0, 2});
    CHECK(lv.levels[1] == std::vector<std::size_t>{1});
}

TEST_CASE("level decomposition invariants on random posets") {
    std::mt19937 rng(11);
    for (int t = 0; t < 200; ++t) {
        const Poset P = random_poset(rng, 1 + rng() % 12, 0.3);
        const auto lv = level_decomposition(P);
        CHECK(static_cast<std::size_t>(lv.height) == height(P));
        for (std::size_t i = 0; i < lv.levels.size(); ++i) {
            for (std::size_t x : lv.levels[i]) {
                CHECK(lv.rank[x] == static_cast<int>(i) + 1);
                for (std::size_t y : lv.levels[i]) CHECK_FALSE(P.less(x, y));
                for (std::size_t j = i + 1; j < lv.levels.size(); ++j)
                    for (std::size_t y : lv.levels[j]) CHECK_FALSE(P.less(y, x));
            }
        }
    }
}

TEST_CASE("complete multilevel posets") {
    const std::vector<int> one{1};
    CHECK(complete_multilevel(one).size() == 1);
    const std::vector<int> two{1, 1};
    const Poset K11 = complete_multilevel(two);
    CHECK(K11.size() == 2);
    CHECK(K11.less(0, 1));
    CHECK(height(K11) == 2);
    const std::vector<int> k22{2, 2};
    const Poset K = complete_multilevel(k22);
    CHECK(height(K) == 2);
    CHECK(width(K) == 2);
    CHECK(K.relation_size() == 4);

    for (std::size_t h = 1; h <= 4; ++h) {
        for (int r = 1; r <= 5; ++r) {
            std::vector<int> sizes;
            for (std::size_t i = 0; i < h; ++i) sizes.push_back(1 + (r + static_cast<int>(i)) % 5);
            const Poset M = complete_multilevel(sizes);
            CHECK(height(M) == h);
            CHECK(width(M) == static_cast<std::size_t>(*std::max_element(sizes.begin(), sizes.end())));
        }
    }
}

TEST_CASE("cartesian products") {
    const std::vector<Poset> cc{Poset::chain(2), Poset::chain(2)};
    const Poset B2 = cartesian_product(cc);
    CHECK(B2.size() == 4);
    CHECK(B2.relation_size() == 5);
    CHECK(width(B2) == 2);

    const std::vector<Poset> ac{Poset::antichain(2), Poset::chain(2)};
    const Poset AC = cartesian_product(ac);
    CHECK(AC.size() == 4);
    CHECK(width(AC) == 2);
    CHECK(height(AC) == 2);
    CHECK(AC.relation_size() == 2);

    const std::vector<Poset> kl{Poset::chain(3), Poset::chain(4)};
    const Poset G = cartesian_product(kl);
    const auto pts = brute::grid_points({3, 4});
    for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = 0; b < pts.size(); ++b) CHECK(G.less(a, b) == brute::lt(pts[a], pts[b]));

    ProductOptions tight;
    tight.max_elements = 10;
    CHECK_THROWS_AS(cartesian_product(kl, tight), SizeError);
}

TEST_CASE("interpolation sequence examples") {
    const Pairs v{{0, 1}, {0, 2}};
    const Poset V = Poset::from_pairs({"a", "b", "c"}, v);
    const auto sv = interpolation_sequence(V);
    CHECK(sv.q == 1);
    CHECK(sv.step(0) == V);
    CHECK(sv.step(1) == V);

    const Pairs ab{{0, 1}};
    const Poset P = Poset::from_pairs({"a", "b", "c"}, ab);
    const auto sp = interpolation_sequence(P);
    CHECK(sp.q == 2);
    CHECK(sp.order == std::vector<std::size_t>{0, 2, 1});
    CHECK(sp.step(0).comparable_pairs() == Pairs{{0, 1}, {2, 1}});
    CHECK(sp.step(1).comparable_pairs() == Pairs{{0, 1}, {2, 1}});
    CHECK(sp.step(2).comparable_pairs() == Pairs{{0, 1}});
    CHECK(sp.step(2) == P);

    const auto sc = interpolation_sequence(Poset::chain(3));
    for (const auto& step : sc.steps) CHECK(step == Poset::chain(3));
}

TEST_CASE("interpolation sequence invariants on random posets") {
    std::mt19937 rng(3);
    for (int t = 0; t < 200; ++t) {
        const Poset P = random_poset(rng, 1 + rng() % 7, 0.35);
        const auto seq = interpolation_sequence(P);
        REQUIRE(seq.steps.size() == seq.q + 1);
        CHECK(seq.steps.back() == P);
        const auto& lv = seq.levels;
        for (std::size_t x = 0; x < P.size(); ++x)
            for (std::size_t y = 0; y < P.size(); ++y) CHECK(seq.step(0).less(x, y) == (lv.rank[x] < lv.rank[y]));
        for (std::size_t l = 0; l + 1 < seq.steps.size(); ++l) {
            for (std::size_t x = 0; x < P.size(); ++x)
                for (std::size_t y = 0; y < P.size(); ++y)
                    if (seq.step(l + 1).less(x, y)) CHECK(seq.step(l).less(x, y));
            for (std::size_t i = 0; i < l; ++i)
                for (std::size_t j = i + 1; j < P.size(); ++j) {
                    const std::size_t zi = seq.order[i], zj = seq.order[j];
                    CHECK(seq.step(l).less(zi, zj) == P.less(zi, zj));
                }
        }
    }
}
