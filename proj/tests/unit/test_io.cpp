#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "helpers.hpp"

#include "chiptrap/errors.hpp"
#include "chiptrap/io.hpp"

using namespace chiptrap;
namespace fs = std::filesystem;

TEST_SUITE("io") {

TEST_CASE("yaml config") {
    const RunConfig rc = parse_run_config(R"(
trap:
  d_ext_um: 18.0
calibration:
  enabled: true
  omega_s0_Hz: 180
transitions:
  pairs: [[0, 2], [1, 3], [2, 4]]
ramp:
  kind: optimized
  shape: hann
T_list_ms: [20, 40]
cycle:
  mode: offset
  hold_ms: 5
  phases: 5
)");
    CHECK(rc.trap.d_ext_um == 18.0);
    CHECK(rc.trap.i0_mA == 525.0);
    CHECK(rc.calibrate);
    CHECK(rc.targets.omega_s0 == doctest::Approx(2 * M_PI * 180));
    CHECK(rc.pairs.size() == 3);
    CHECK(rc.ramp == "optimized");
    CHECK(rc.shape == "hann");
    CHECK(rc.T_list_ms == std::vector<double>{20, 40});
    CHECK(rc.cycle.mode == PhaseMode::Offset);
    CHECK(rc.cycle.phases == 5);
}

TEST_CASE("json config") {
    const RunConfig rc = parse_run_config(R"({"spectrum": {"s_points": 51, "n_states": 8}, "transitions": {"pairs": "0:2"}})");
    CHECK(rc.s_points == 51);
    CHECK(rc.n_states == 8);
    CHECK(rc.pairs == std::vector<std::pair<int, int>>{{0, 2}});
}

TEST_CASE("config errors") {
    CHECK_THROWS_AS(parse_run_config("trap: {d_ext: 3}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("bogus: 1"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("ramp: {kind: cubic}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("T_list_ms: [30, 20]"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("transitions: {pairs: '0:1'}"), ConfigError);
    CHECK_NOTHROW(parse_run_config("transitions: {pairs: '0:1', allow_mixed_parity: true}"));
    CHECK_THROWS_AS(parse_run_config("spectrum: {n_states: 40}"), ConfigError);
    CHECK_THROWS_AS(parse_run_config("trap: {B0y_G: .nan}"), InputError);
    CHECK_THROWS_AS(load_run_config("/nonexistent/config.yaml"), ConfigError);
}

TEST_CASE("shipped configs load") {
    const fs::path root = CHIPTRAP_SOURCE_DIR;
    const RunConfig d = load_run_config(root / "configs/default.json");
    CHECK_FALSE(d.calibrate);
    CHECK(d.trap.d_ext_um == doctest::Approx(18.18035).epsilon(1e-6));
    CHECK(d.trap.iext_slope_mA == 2.91);
    const RunConfig n = load_run_config(root / "configs/nominal.json");
    CHECK(n.calibrate);
    CHECK(n.trap.d_ext_um == 10.0);
}

TEST_CASE("command-line list parsers") {
    CHECK(parse_pairs("0:2,1:3") == std::vector<std::pair<int, int>>{{0, 2}, {1, 3}});
    CHECK(parse_pairs("2:4") == std::vector<std::pair<int, int>>{{2, 4}});
    CHECK_THROWS_AS(parse_pairs("0-2"), ConfigError);
    CHECK_THROWS_AS(parse_pairs(""), ConfigError);
    CHECK(parse_number_list("10, 20.5,30") == std::vector<double>{10, 20.5, 30});
    CHECK_THROWS_AS(parse_number_list("10,abc"), ConfigError);
}

TEST_CASE("numbers round-trip") {
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(-0.0) == "0");
    CHECK(format_number(3.0) == "3");
    for (double v : {M_PI, 1e-300, -2.5e17}) CHECK(std::stod(format_number(v)) == v);
}

TEST_CASE("csv layout") {
    CsvTable t;
    t.header = {"a", "b"};
    t.rows = {{1, 0.5}, {2, 0.25}};
    t.comments = {"note"};
    CHECK(to_csv(t) == "# note\na,b\n1,0.5\n2,0.25\n");
}

TEST_CASE("bundle round trip") {
    const auto b = testing::harmonic_bundle([](double s) { return 1000.0 * (1 + s); }, uniform_s_grid(3),
                                            symmetric_grid(8.0, 64), 3);
    const fs::path dir = fs::temp_directory_path() / "chiptrap_bundle_test";
    fs::remove_all(dir);
    save_bundle(b, dir);
    const EigenBundle r = load_bundle(dir);
    REQUIRE(r.sets.size() == b.sets.size());
    CHECK(r.s_grid == b.s_grid);
    CHECK(r.mass_kg == b.mass_kg);
    for (std::size_t j = 0; j < b.sets.size(); ++j) {
        CHECK(r.sets[j].energies == b.sets[j].energies);
        CHECK(r.sets[j].states == b.sets[j].states);
        CHECK(r.sets[j].parity == b.sets[j].parity);
        CHECK(r.sets[j].x_um == b.sets[j].x_um);
    }
    CHECK(r.curves.size() == b.curves.size());
    fs::remove_all(dir);
}

}
