#include <catch2/catch_amalgamated.hpp>

#include <hsmkit/tables.hpp>

using namespace hsmkit;

namespace {

TableCollection two_binary() {
    TableCollection d;
    d.variables = {{"A", {"yes", "no"}}, {"B", {"yes", "no"}}};
    d.tables.push_back({"default", {"A", "B"}, {34.5, 10.1, 12.5, 42.9}});
    return d;
}

}

TEST_CASE("valid collections pass validation") {
    REQUIRE_NOTHROW(two_binary().validate());
}

TEST_CASE("lookup helpers") {
    TableCollection d = two_binary();
    REQUIRE(d.variable("A").cardinality() == 2);
    REQUIRE_THROWS_AS(d.variable("Z"), ValidationError);
    REQUIRE(d.has_condition("default"));
    REQUIRE_FALSE(d.has_condition("other"));
    REQUIRE(d.cells_in_context({"A", "B"}) == 4);
    REQUIRE(d.cells_in_context({"A"}) == 2);
}

TEST_CASE("cell order is lexicographic with the first-measured variable slowest") {
    TableCollection d = two_binary();
    REQUIRE(d.cell_values({"A", "B"}, 0) == std::vector<std::size_t>{0, 0});
    REQUIRE(d.cell_values({"A", "B"}, 1) == std::vector<std::size_t>{0, 1});
    REQUIRE(d.cell_values({"A", "B"}, 2) == std::vector<std::size_t>{1, 0});
    REQUIRE(d.cell_values({"A", "B"}, 3) == std::vector<std::size_t>{1, 1});
    REQUIRE(d.cell_label({"A", "B"}, 0) == "YY");
    REQUIRE(d.cell_label({"A", "B"}, 1) == "YN");
    REQUIRE(d.cell_label({"A", "B"}, 2) == "NY");
    REQUIRE(d.cell_label({"A", "B"}, 3) == "NN");
}

TEST_CASE("cell decoding handles mixed cardinalities") {
    TableCollection d;
    d.variables = {{"X", {"low", "mid", "high"}}, {"Y", {"yes", "no"}}};
    d.tables.push_back({"default", {"X", "Y"}, std::vector<double>(6, 1.0)});
    REQUIRE_NOTHROW(d.validate());
    REQUIRE(d.cell_values({"X", "Y"}, 4) == std::vector<std::size_t>{2, 0});
    REQUIRE(d.cell_label({"X", "Y"}, 4) == "HY");
    REQUIRE(d.cell_label({"X", "Y"}, 1) == "LN");
}

TEST_CASE("totals, frequencies, and keys") {
    ContextTable t{"death", {"P", "I"}, {2.0, 1.0, 1.0, 0.0}};
    REQUIRE(t.total() == 4.0);
    std::vector<double> f = t.relative_frequencies();
    REQUIRE(f[0] == 0.5);
    REQUIRE(f[3] == 0.0);
    REQUIRE(t.key() == "death/P,I");
    ContextTable empty{"c", {"P"}, {0.0, 0.0}};
    REQUIRE_THROWS_AS(empty.relative_frequencies(), ValidationError);
}

TEST_CASE("validation names the offending table") {
    TableCollection d = two_binary();
    d.tables.push_back({"default", {"A", "B"}, {1.0, 2.0, 3.0}});
    try {
        d.validate();
        FAIL("expected a validation error");
    } catch (const ValidationError& e) {
        std::string msg = e.what();
        REQUIRE(msg.find("table 1") != std::string::npos);
        REQUIRE(msg.find("expected 4") != std::string::npos);
    }
}

TEST_CASE("validation rejects structural problems") {
    TableCollection d = two_binary();
    d.tables[0].condition = "missing";
    REQUIRE_THROWS_AS(d.validate(), ValidationError);

    d = two_binary();
    d.tables[0].counts[2] = -0.5;
    REQUIRE_THROWS_AS(d.validate(), ValidationError);

    d = two_binary();
    d.tables[0].context.clear();
    REQUIRE_THROWS_AS(d.validate(), ValidationError);

    d = two_binary();
    d.variables.push_back({"A", {"yes", "no"}});
    REQUIRE_THROWS_AS(d.validate(), ValidationError);

    d = two_binary();
    d.variables[0].values = {"only"};
    REQUIRE_THROWS_AS(d.validate(), ValidationError);

    d = two_binary();
    d.conditions.clear();
    REQUIRE_THROWS_AS(d.validate(), ValidationError);

    d = two_binary();
    d.variables.clear();
    REQUIRE_THROWS_AS(d.validate(), ValidationError);
}
