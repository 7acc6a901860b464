#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>

#include "flashpim/config_file.hpp"

using namespace flashpim;

TEST_CASE("ini parsing with sections and comments") {
    const std::string text = R"(
# device description
[plane]
n_row = 512           ; overridden row count
n_col = 4096

[tech]
r_s = 6000.0

[model.custom-1b]
n_blocks = 16
d_model = 2048
n_heads = 16
)";
    const ConfigFile c = ConfigFile::parse(text);
    CHECK(c.get_int("plane", "n_row", 0) == 512);
    CHECK(c.get_int("plane", "n_col", 0) == 4096);
    CHECK(c.get_double("tech", "r_s", 0) == 6000.0);
    CHECK(!c.has("plane", "n_stack"));
    CHECK(c.sections_with_prefix("model.") == std::vector<std::string>{"model.custom-1b"});
}

TEST_CASE("all fields optional with calibrated defaults") {
    const ConfigFile empty = ConfigFile::parse("");
    const TechParams t = tech_from_config(empty);
    const TechParams d;
    CHECK(t.horowitz_k == d.horowitz_k);
    CHECK(t.r_bl_per_row == d.r_bl_per_row);

    const PlaneConfig p = plane_from_config(empty);
    CHECK(p.n_row == 256);
    CHECK(p.n_col == 2048);
    CHECK(p.n_stack == 128);
    CHECK(p.bits_per_cell == 4);

    const FlashTopology topo = topology_from_config(empty);
    CHECK(topo.n_channel == 8);
    CHECK(topo.bus_topology == BusTopology::htree);

    // the builtin zoo backs an empty model file
    CHECK(models_from_config(empty).size() == 5);
}

TEST_CASE("partial overrides merge over defaults") {
    const ConfigFile c = ConfigFile::parse("[topology]\nbus_topology = shared\nn_channel = 4\n");
    const FlashTopology topo = topology_from_config(c);
    CHECK(topo.bus_topology == BusTopology::shared);
    CHECK(topo.n_channel == 4);
    CHECK(topo.n_way == 4);  // default preserved
}

TEST_CASE("model sections round trip") {
    const ConfigFile c = ConfigFile::parse(
        "[model.a]\nn_blocks = 2\nd_model = 256\nn_heads = 2\n"
        "[model.b]\nn_blocks = 4\nd_model = 512\nn_heads = 4\nffn_dim = 1024\n");
    const auto models = models_from_config(c);
    REQUIRE(models.size() == 2);
    CHECK(models[0].name == "a");
    CHECK(models[0].ffn_dim == 4 * 256);  // defaulted
    CHECK(models[1].ffn_dim == 1024);
}

TEST_CASE("parse errors carry location information") {
    CHECK_THROWS_WITH_AS(ConfigFile::parse("[plane\nn_row = 1\n", "bad.ini"),
                         doctest::Contains("bad.ini:1"), std::runtime_error);
    CHECK_THROWS_AS(ConfigFile::parse("key_without_equals\n"), std::runtime_error);
    CHECK_THROWS_AS(ConfigFile::load("/nonexistent/path.ini"), std::runtime_error);
    const ConfigFile bad_number = ConfigFile::parse("[tech]\nr_s = not_a_number\n");
    CHECK_THROWS_AS(tech_from_config(bad_number), std::runtime_error);
}

TEST_CASE("int lists") {
    const ConfigFile c = ConfigFile::parse("[sweep]\nn_col = 512, 1024, 2048\n");
    CHECK(c.get_int_list("sweep", "n_col", {}) == std::vector<int>{512, 1024, 2048});
    CHECK(c.get_int_list("sweep", "missing", {7}) == std::vector<int>{7});
}
