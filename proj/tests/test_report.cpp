#include <random>

#include "doctest.h"
#include "oracles/planted.hpp"
#include "pgl/errors.hpp"
#include "pgl/report.hpp"

using namespace pgl;
using namespace pgl::report;

TEST_CASE("shape parsing") {
    CHECK(parse_shape("2,3,4").size() == 24);
    CHECK(shape_text(parse_shape("7")) == "7");
    for (const char* bad : {"", ",", "2,", "2,,3", "a", "2;3", "-1", "0", "2, 3", "1234567890"})
        CHECK_THROWS_AS(parse_shape(bad), InputError);
}

TEST_CASE("poset documents round-trip") {
    std::mt19937 rng(21);
    for (int t = 0; t < 100; ++t) {
        const Poset P = planted::random_poset(rng, 1 + rng() % 7, 0.4);
        const Json doc = poset_to_json(P);
        CHECK(poset_from_json(doc) == P);
        CHECK(poset_from_json(Json::parse(doc.dump())) == P);
    }
    const Json v = Json::parse(R"({"elements": ["x", 7], "relations": [["x", 7]]})");
    CHECK(poset_from_json(v).less(0, 1));
    CHECK_THROWS_AS(poset_from_json(Json::parse(R"({"relations": []})")), InputError);
    CHECK_THROWS_AS(poset_from_json(Json::parse(R"({"elements": ["a", "a"]})")), InputError);
    CHECK_THROWS_AS(poset_from_json(Json::parse(R"({"elements": ["a"], "relations": [["a", "b"]]})")), InputError);
    CHECK_THROWS_AS(poset_from_json(Json::parse(R"({"elements": ["a"], "relations": [["a"]]})")), InputError);
    CHECK_THROWS_AS(poset_from_json(Json::parse(R"({"elements": [1.5]})")), InputError);
    CHECK_THROWS_AS(poset_from_json(Json::parse(R"({"elements": ["a", "b"], "relations": [["a", "b"], ["b", "a"]]})")),
                    CycleError);
}

TEST_CASE("family documents round-trip in both formats") {
    std::mt19937 rng(22);
    for (int t = 0; t < 100; ++t) {
        std::vector<int> sides;
        for (std::size_t i = 0, n = 1 + rng() % 4; i < n; ++i) sides.push_back(1 + static_cast<int>(rng() % 6));
        const GridShape shape(sides);
        Family f(shape);
        for (std::size_t i = 0; i < shape.size(); ++i)
            if (rng() % 3 == 0) f.insert_index(i);
        CHECK(family_from_json(family_to_json(f)) == f);
        CHECK(family_from_binary(family_to_binary(f)) == f);
    }
    const Family f = Family::from_points(GridShape({2, 2}), std::vector<Point>{{1, 2}, {2, 1}});
    std::string bin = family_to_binary(f);
    CHECK(bin.size() == 8 + 8 + 16 + 8);
    CHECK_THROWS_AS(family_from_binary(bin.substr(0, bin.size() - 1)), InputError);
    CHECK_THROWS_AS(family_from_binary(bin + "x"), InputError);
    CHECK_THROWS_AS(family_from_binary("PGLFAM02"), InputError);
    bin[bin.size() - 8] = static_cast<char>(0xff);  // bits past the 4-point grid
    CHECK_THROWS_AS(family_from_binary(bin), InputError);
    CHECK_THROWS_AS(family_from_json(Json::parse(R"({"shape": [2, 2], "points": [[3, 1]]})")), InputError);
    CHECK_THROWS_AS(family_from_json(Json::parse(R"({"shape": [2, 2], "points": [[1]]})")), InputError);
    CHECK_THROWS_AS(family_from_json(Json::parse(R"({"shape": [0], "points": []})")), InputError);
}

TEST_CASE("hashing and canonical output") {
    CHECK(fnv1a_hex("") == "fnv1a64:cbf29ce484222325");
    CHECK(fnv1a_hex("a") == "fnv1a64:af63dc4c8601ec8c");
    Report r;
    r.command = "x";
    r.results = Json{{"b", 1}, {"a", Json{{"z", 1}, {"y", 2}}}};
    r.wall_seconds = 12.5;
    r.nodes = 99;
    const std::string s = to_json(r);
    CHECK(s.find("\"a\"") < s.find("\"b\""));
    CHECK(s.find("\"y\"") < s.find("\"z\""));
    CHECK(s.find("12.5") == std::string::npos);
    CHECK(s.find("99") == std::string::npos);
    CHECK(s.back() == '\n');
    CHECK(s.find('\r') == std::string::npos);
}

TEST_CASE("csv mirrors the report table") {
    Report r;
    r.results = Json{{"rows", Json::array({Json{{"k", 1}, {"status", "PASS"}}, Json{{"k", 2}, {"note", "a,b"}}})}};
    CHECK(to_csv(r) == "k,note,status\n1,,PASS\n2,\"a,b\",\n");
    Report w = cmd_width(parse_shape("3,3"));
    CHECK(to_csv(w) == "estimate,estimate_formula,ratio,width\n2.121320,3^1/sqrt(2),1.414214,3\n");
}

TEST_CASE("width and partition commands") {
    const Report w = cmd_width(parse_shape("2,2,2,2"));
    CHECK(w.results["width"] == 6);
    CHECK(w.results["estimate"] == "4.000000");
    CHECK(w.results["ratio"] == "1.500000");
    CHECK_FALSE(cmd_width(parse_shape("2,3")).results.contains("ratio"));

    Json doc;
    const Report p = cmd_partition(parse_shape("4,4"), PartitionMode::chains, 1, {}, &doc);
    CHECK(p.results["chains"] == 4);
    CHECK(p.results["min_size"].get<int>() >= 2);
    CHECK(p.results["verdict"] == "PASS");
    CHECK(doc["chains"].size() == 4);
    const Report g = cmd_partition(parse_shape("2,2,2,2"), PartitionMode::grids, 2, {}, &doc);
    CHECK(g.results["parts"] == 4);
    CHECK(doc["parts"].size() == 4);
    CHECK_THROWS_AS(cmd_partition(parse_shape("2,3"), PartitionMode::grids, 1, {}), PrecondError);
}

TEST_CASE("extremal and detect commands") {
    StructureSpec chain2;
    chain2.poset = Poset::chain(2);
    chain2.mode = CopyMode::strong;
    const Report e = cmd_extremal(parse_shape("2,2"), chain2, {});
    CHECK(e.results["optimum"] == 3);
    CHECK(e.results["complete"] == true);
    CHECK(e.status == Status::ok);
    CHECK(e.results["bounds"].is_array());

    StructureSpec v;
    v.poset = Poset::from_pairs({"a", "b", "c"}, std::vector<std::pair<std::size_t, std::size_t>>{{0, 1}, {0, 2}});
    v.mode = CopyMode::induced;
    const Report cut = cmd_extremal(parse_shape("4,4,4"), v, CommonOptions{100});
    CHECK(cut.status == Status::budget);
    CHECK(cut.results["complete"] == false);

    StructureSpec join;
    join.kind = StructureSpec::Kind::join;
    const Family corner = Family::from_points(GridShape({2, 2}), std::vector<Point>{{1, 2}, {2, 1}, {2, 2}});
    const Report j = cmd_detect(corner, "h", join, {});
    CHECK(j.results["witness"]["u"] == Json::array({2, 2}));
    StructureSpec induced_c2 = chain2;
    induced_c2.mode = CopyMode::induced;
    const Family pair = Family::from_points(GridShape({4, 4}), std::vector<Point>{{1, 2}, {3, 1}});
    CHECK(cmd_detect(pair, "h", induced_c2, {}).results["witness"] == "none");
    StructureSpec ba;
    ba.kind = StructureSpec::Kind::boolean_algebra;
    const Family anti = Family::from_points(GridShape({3, 3}), std::vector<Point>{{1, 3}, {2, 2}, {3, 1}});
    CHECK(cmd_detect(anti, "h", ba, {}).results["found"] == false);
    const Report found = cmd_detect(Family::full(GridShape({2, 2})), "h", ba, {});
    CHECK(found.results["found"] == true);
    CHECK(found.results["witness"]["points"].size() == 2);
}

TEST_CASE("verify-bounds suites") {
    const Report empty = cmd_verify_bounds(Json::parse(R"({"checks": []})"), "h", {});
    CHECK(empty.results["verdict"] == "PASS");
    CHECK(empty.results["rows"].empty());
    CHECK(empty.status == Status::ok);

    const Report l9 = cmd_verify_bounds(
        Json::parse(R"({"checks": [{"check": "strong_chains", "k": {"min": 1, "max": 3}, "d": [1, 2], "h": [1, 2, 3],
                                     "goldens": [{"k": 2, "d": 2, "h": 2, "value": 3}]}]})"),
        "h", {});
    CHECK(l9.results["pass"] == 18);
    CHECK(l9.results["verdict"] == "PASS");
    CHECK(l9.results["rows"][0]["k"] == 1);
    CHECK(l9.results["rows"][1]["h"] == 2);

    const Report wrong = cmd_verify_bounds(
        Json::parse(R"({"checks": [{"check": "join2d", "k": 2, "l": 2, "goldens": [{"k": 2, "l": 2, "value": 4}]}]})"),
        "h", {});
    CHECK(wrong.status == Status::fail);
    CHECK(wrong.results["rows"][0]["status"] == "FAIL");

    const Report l10 = cmd_verify_bounds(
        Json::parse(R"({"checks": [{"check": "strong_multilevel", "k": 3, "d": 2, "h": [1, 2], "r": 1}]})"), "h", {});
    CHECK(l10.results["skip"] == 1);
    CHECK(l10.results["pass"] == 1);

    const Report cut = cmd_verify_bounds(
        Json::parse(R"({"checks": [{"check": "strong_multilevel", "k": 4, "d": 3, "h": 2, "r": 2}]})"), "h", CommonOptions{20});
    CHECK(cut.status == Status::budget);

    for (const char* bad : {R"([])", R"({"checks": [{"k": 1}]})", R"({"checks": [{"check": "nope"}]})",
                            R"({"checks": [{"check": "join2d", "k": 1}]})",
                            R"({"checks": [{"check": "join2d", "k": 1, "l": 1, "m": 2}]})",
                            R"({"checks": [{"check": "join2d", "k": 0, "l": 1}]})",
                            R"({"checks": [{"check": "join2d", "k": "x", "l": 1}]})"})
        CHECK_THROWS_AS(cmd_verify_bounds(Json::parse(bad), "h", {}), InputError);
    CHECK(known_checks().size() == 8);
}

TEST_CASE("reports are reproducible") {
    const Json suite = Json::parse(
        R"({"checks": [{"check": "strong_chains", "k": [2, 3], "d": [2], "h": [2, 3]}, {"check": "join2d", "k": 3, "l": 3}]})");
    const std::string a = to_json(cmd_verify_bounds(suite, "h", {}));
    const std::string b = to_json(cmd_verify_bounds(suite, "h", {}));
    CHECK(a == b);
}
