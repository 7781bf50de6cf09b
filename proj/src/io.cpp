#include "chiptrap/io.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "chiptrap/errors.hpp"
#include "json.hpp"

namespace chiptrap {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> default_T_list() {
    std::vector<double> t;
    for (int k = 10; k <= 100; k += 5) t.push_back(k);
    return t;
}

void check_keys(const YAML::Node& node, const std::string& where, std::initializer_list<const char*> allowed) {
    if (!node.IsMap()) throw ConfigError("config: '" + where + "' must be a mapping");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        if (!ok.count(key)) throw ConfigError("config: unknown key '" + key + "' in " + where);
    }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out) {
    if (!node[key]) return;
    try {
        out = node[key].as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(std::string("config: bad value for '") + key + "'");
    }
}

void read_grid(const YAML::Node& node, const std::string& where, GridSpec& g) {
    check_keys(node, where, {"half_width_um", "points", "auto_widen"});
    read(node, "half_width_um", g.half_width_um);
    read(node, "points", g.points);
    read(node, "auto_widen", g.auto_widen);
}

std::pair<int, int> read_pair(const YAML::Node& node) {
    if (node.IsSequence() && node.size() == 2) return {node[0].as<int>(), node[1].as<int>()};
    if (node.IsScalar()) {
        auto p = parse_pairs(node.as<std::string>());
        if (p.size() == 1) return p[0];
    }
    throw ConfigError("config: a transition pair must be 'i:f' or [i, f]");
}

RunConfig from_yaml(const YAML::Node& root) {
    RunConfig rc;
    rc.T_list_ms = default_T_list();
    if (!root || root.IsNull()) return rc;
    check_keys(root, "top level",
               {"trap", "calibration", "grid", "dynamics_grid", "spectrum", "transitions", "ramp", "T_list_ms",
                "potential", "cycle", "threads", "out_dir"});
    if (const auto t = root["trap"]) {
        check_keys(t, "trap",
                   {"I0_mA", "B0y_G", "B0x_G", "Iext_base_mA", "Iext_slope_mA", "Ic_base_mA", "Ic_slope_mA",
                    "d_ext_um", "crossing_height_um", "ic_height_offset_um", "potential_scale_Hz_per_G",
                    "atom_mass_kg"});
        TrapConfig& c = rc.trap;
        read(t, "I0_mA", c.i0_mA);
        read(t, "B0y_G", c.b0y_G);
        read(t, "B0x_G", c.b0x_G);
        read(t, "Iext_base_mA", c.iext_base_mA);
        read(t, "Iext_slope_mA", c.iext_slope_mA);
        read(t, "Ic_base_mA", c.ic_base_mA);
        read(t, "Ic_slope_mA", c.ic_slope_mA);
        read(t, "d_ext_um", c.d_ext_um);
        read(t, "crossing_height_um", c.crossing_height_um);
        read(t, "ic_height_offset_um", c.ic_height_offset_um);
        read(t, "potential_scale_Hz_per_G", c.scale_Hz_per_G);
        read(t, "atom_mass_kg", c.mass_kg);
    }
    if (const auto c = root["calibration"]) {
        check_keys(c, "calibration",
                   {"enabled", "omega_s0_Hz", "omega_s1_Hz", "trap_height_um", "separation_um", "weights"});
        read(c, "enabled", rc.calibrate);
        double f0 = units::rad_to_hz(rc.targets.omega_s0), f1 = units::rad_to_hz(rc.targets.omega_s1);
        read(c, "omega_s0_Hz", f0);
        read(c, "omega_s1_Hz", f1);
        rc.targets.omega_s0 = units::hz_to_rad(f0);
        rc.targets.omega_s1 = units::hz_to_rad(f1);
        read(c, "trap_height_um", rc.targets.trap_height_um);
        read(c, "separation_um", rc.targets.separation_um);
        if (const auto w = c["weights"]) {
            check_keys(w, "calibration.weights", {"omega_s0", "omega_s1", "height", "separation"});
            read(w, "omega_s0", rc.targets.w_omega_s0);
            read(w, "omega_s1", rc.targets.w_omega_s1);
            read(w, "height", rc.targets.w_height);
            read(w, "separation", rc.targets.w_separation);
        }
    }
    if (const auto g = root["grid"]) read_grid(g, "grid", rc.grid);
    if (const auto g = root["dynamics_grid"]) read_grid(g, "dynamics_grid", rc.dynamics_grid);
    if (const auto s = root["spectrum"]) {
        check_keys(s, "spectrum", {"s_points", "n_states"});
        read(s, "s_points", rc.s_points);
        read(s, "n_states", rc.n_states);
    }
    if (const auto tr = root["transitions"]) {
        check_keys(tr, "transitions", {"pairs", "allow_mixed_parity"});
        if (const auto p = tr["pairs"]) {
            rc.pairs.clear();
            if (p.IsScalar()) {
                rc.pairs = parse_pairs(p.as<std::string>());
            } else {
                for (const auto& e : p) rc.pairs.push_back(read_pair(e));
            }
        }
        read(tr, "allow_mixed_parity", rc.allow_mixed_parity);
    }
    if (const auto r = root["ramp"]) {
        check_keys(r, "ramp", {"kind", "shape", "floor_fraction", "optimize_pair", "optimize_T_ms"});
        read(r, "kind", rc.ramp);
        read(r, "shape", rc.shape);
        read(r, "floor_fraction", rc.floor_fraction);
        if (r["optimize_pair"]) rc.optimize_pair = read_pair(r["optimize_pair"]);
        read(r, "optimize_T_ms", rc.optimize_T_ms);
    }
    if (const auto t = root["T_list_ms"]) {
        try {
            rc.T_list_ms = t.as<std::vector<double>>();
        } catch (const YAML::Exception&) {
            throw ConfigError("config: T_list_ms must be a list of numbers");
        }
    }
    if (const auto p = root["potential"]) {
        check_keys(p, "potential", {"s_values"});
        read(p, "s_values", rc.potential_s);
    }
    if (const auto c = root["cycle"]) {
        check_keys(c, "cycle", {"T_ms", "hold_ms", "mode", "phases", "snapshots"});
        read(c, "T_ms", rc.cycle.T_ms);
        read(c, "hold_ms", rc.cycle.hold_ms);
        std::string mode = "imprint";
        read(c, "mode", mode);
        if (mode == "imprint") rc.cycle.mode = PhaseMode::Imprint;
        else if (mode == "offset") rc.cycle.mode = PhaseMode::Offset;
        else throw ConfigError("config: cycle.mode must be 'imprint' or 'offset'");
        read(c, "phases", rc.cycle.phases);
        read(c, "snapshots", rc.cycle.snapshots);
    }
    read(root, "threads", rc.threads);
    read(root, "out_dir", rc.out_dir);
    return rc;
}

}  // namespace

void RunConfig::validate() const {
    try {
        trap.validate();
    } catch (const InputError& e) {
        throw ConfigError(e.what());
    }
    auto fail = [](const std::string& m) { throw ConfigError("config: " + m); };
    if (s_points < 3) fail("spectrum.s_points must be at least 3");
    if (n_states < 2 || n_states > max_states) fail("spectrum.n_states must be in [2, 12]");
    for (const auto* g : {&grid, &dynamics_grid})
        if (!(g->half_width_um > 0.0) || g->points < 8 || g->points % 2) fail("grids need a positive half width and an even number of points");
    for (auto [i, f] : pairs) {
        if (i < 0 || f <= i || f >= n_states) fail("transition pairs need 0 <= i < f < n_states");
        if (!allow_mixed_parity && (i % 2) != (f % 2))
            fail("pair " + std::to_string(i) + ":" + std::to_string(f) + " mixes parities (set allow_mixed_parity for diagnostics)");
    }
    if (pairs.empty()) fail("at least one transition pair is required");
    if (ramp != "linear" && ramp != "optimized" && ramp != "both") fail("ramp.kind must be linear, optimized or both");
    shape_by_name(shape);
    {
        auto [i, f] = optimize_pair;
        if (i < 0 || f <= i || f >= n_states || (i % 2) != (f % 2)) fail("ramp.optimize_pair must be a same-parity pair");
    }
    if (!(floor_fraction > 0.0 && floor_fraction < 1.0)) fail("ramp.floor_fraction must be in (0, 1)");
    if (!(optimize_T_ms > 0.0)) fail("ramp.optimize_T_ms must be positive");
    for (std::size_t k = 0; k < T_list_ms.size(); ++k) {
        if (!(T_list_ms[k] > 0.0) || !std::isfinite(T_list_ms[k])) fail("T values must be positive");
        if (k > 0 && !(T_list_ms[k] > T_list_ms[k - 1])) fail("T values must be ascending");
    }
    for (double s : potential_s)
        if (!(s >= 0.0 && s <= 1.0)) fail("potential.s_values must lie in [0, 1]");
    if (!(cycle.T_ms > 0.0) || !(cycle.hold_ms >= 0.0) || cycle.phases < 1 || cycle.snapshots < 0) fail("invalid cycle section");
    if (cycle.mode == PhaseMode::Offset && !(cycle.hold_ms > 0.0)) fail("cycle.mode offset needs hold_ms > 0");
}

RunConfig parse_run_config(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config: parse error: ") + e.what());
    }
    RunConfig rc = from_yaml(root);
    rc.validate();
    return rc;
}

RunConfig load_run_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_run_config(ss.str());
}

std::vector<std::pair<int, int>> parse_pairs(const std::string& text) {
    std::vector<std::pair<int, int>> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) throw ConfigError("pairs: expected i:f, got '" + item + "'");
        try {
            std::size_t p1 = 0, p2 = 0;
            const std::string a = item.substr(0, colon), b = item.substr(colon + 1);
            const int i = std::stoi(a, &p1), f = std::stoi(b, &p2);
            if (p1 != a.size() || p2 != b.size()) throw std::invalid_argument(item);
            out.emplace_back(i, f);
        } catch (const std::logic_error&) {
            throw ConfigError("pairs: expected i:f, got '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("pairs: empty list");
    return out;
}

std::vector<double> parse_number_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument(item);
        } catch (const std::logic_error&) {
            throw ConfigError("expected a number, got '" + item + "'");
        }
    }
    if (out.empty()) throw ConfigError("empty number list");
    return out;
}

std::string format_number(double v) {
    if (v == 0.0) return "0";  // also folds -0
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string to_csv(const CsvTable& table) {
    std::string out;
    for (const auto& c : table.comments) out += "# " + c + "\n";
    for (std::size_t k = 0; k < table.header.size(); ++k) out += (k ? "," : "") + table.header[k];
    out += "\n";
    for (const auto& row : table.rows) {
        for (std::size_t k = 0; k < row.size(); ++k) {
            if (k) out += ",";
            out += format_number(row[k]);
        }
        out += "\n";
    }
    return out;
}

void write_text(const fs::path& path, const std::string& text) {
    if (path.has_parent_path()) fs::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path.string() + "'");
    out << text;
    if (!out) throw ConfigError("write failed for '" + path.string() + "'");
}

CsvTable potential_table(const PotentialCurve& curve) {
    CsvTable t;
    t.header = {"x_um", "U_over_h_Hz"};
    for (std::size_t i = 0; i < curve.x_um.size(); ++i) t.rows.push_back({curve.x_um[i], units::rad_to_hz(curve.U[i])});
    return t;
}

CsvTable levels_table(const EigenBundle& b) {
    CsvTable t;
    t.header = {"s"};
    for (std::size_t k = 0; k < b.n_states(); ++k) t.header.push_back("E" + std::to_string(k) + "_over_hbar");
    for (std::size_t j = 0; j < b.sets.size(); ++j) {
        std::vector<double> row{b.s_grid[j]};
        row.insert(row.end(), b.sets[j].energies.begin(), b.sets[j].energies.end());
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable coupling_csv(const std::vector<CouplingTable>& tables) {
    if (tables.empty()) throw InputError("coupling_csv: no tables");
    CsvTable t;
    t.header = {"s"};
    for (const auto& tab : tables) t.header.push_back("a_" + std::to_string(tab.initial()) + std::to_string(tab.final_state()));
    for (const auto& tab : tables)
        t.header.push_back("dOmega_" + std::to_string(tab.initial()) + std::to_string(tab.final_state()) + "_rad_s");
    const auto& s = tables.front().s();
    for (std::size_t j = 0; j < s.size(); ++j) {
        std::vector<double> row{s[j]};
        for (const auto& tab : tables) row.push_back(tab.a()[j]);
        for (const auto& tab : tables) row.push_back(tab.domega()[j]);
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable excitation_table(const std::vector<double>& T_s, const std::vector<std::pair<int, int>>& pairs,
                          const std::vector<std::vector<TransitionResult>>& results) {
    CsvTable t;
    t.header = {"T_ms"};
    for (auto [i, f] : pairs) t.header.push_back("P_" + std::to_string(i) + "_" + std::to_string(f));
    t.header.push_back("flag_perturbative");
    for (std::size_t k = 0; k < T_s.size(); ++k) {
        std::vector<double> row{T_s[k] * 1e3};
        bool flag = false;
        for (const auto& r : results) {
            row.push_back(r[k].probability);
            flag = flag || r[k].outside_first_order;
        }
        row.push_back(flag ? 1.0 : 0.0);
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable ramp_table(const Ramp& ramp, int samples) {
    CsvTable t;
    t.header = {"t_s", "s"};
    for (const auto& [time, s] : ramp.sample(samples)) t.rows.push_back({time, s});
    return t;
}

CsvTable fringe_table(const std::vector<CycleResult>& cycles) {
    CsvTable t;
    t.header = {"dphi_rad", "P0", "P1", "P2", "P3", "leakage"};
    for (const auto& c : cycles) {
        std::vector<double> row{c.dphi};
        for (std::size_t k = 0; k < 4; ++k) row.push_back(k < c.populations.P.size() ? c.populations.P[k] : 0.0);
        row.push_back(c.leakage);
        t.rows.push_back(std::move(row));
    }
    return t;
}

CsvTable wavefunction_table(const WavefunctionState& psi) {
    CsvTable t;
    t.header = {"x_um", "re_psi", "im_psi"};
    for (std::size_t i = 0; i < psi.x_um.size(); ++i) t.rows.push_back({psi.x_um[i], psi.psi[i].real(), psi.psi[i].imag()});
    return t;
}

double coupling_identity_residual(const ShapeSolution& shape, const CouplingTable& table, const PulseShape& u_hat) {
    double worst = 0.0;
    for (std::size_t k = 0; k < shape.tau.size(); ++k) {
        const double a = table.a_at(shape.s[k]);
        if (std::abs(a) <= shape.floor) continue;
        const double target = shape.amplitude * u_hat(shape.tau[k]);
        if (target <= 1e-6 * shape.amplitude) continue;
        worst = std::max(worst, std::abs(std::abs(a) * shape.ds_dtau[k] - target) / target);
    }
    return worst;
}

std::string optimizer_report_json(const OptimizedRamp& r, double identity_residual) {
    json j;
    j["pair"] = {r.shape.pair_i, r.shape.pair_f};
    j["shape"] = r.shape.shape;
    j["A"] = r.shape.amplitude;
    j["T0_s"] = r.map.T0;
    j["T_s"] = r.ramp.duration();
    j["floor_fraction"] = r.shape.floor_fraction;
    j["a_floor"] = r.shape.floor;
    j["shooting_iterations"] = r.shape.iterations;
    j["residuals"] = {{"s_tau_endpoint", r.shape.endpoint_residual}, {"coupling_identity_max_rel", identity_residual}};
    return j.dump(2) + "\n";
}

void save_bundle(const EigenBundle& b, const fs::path& dir) {
    fs::create_directories(dir);
    json meta;
    meta["s_grid"] = b.s_grid;
    meta["n_states"] = b.n_states();
    meta["mass_kg"] = b.mass_kg;
    meta["energy_unit"] = "rad/s (E/hbar), relative to min U";
    std::vector<std::string> labels;
    std::vector<int> quantum;
    for (std::size_t k = 0; k < b.n_states(); ++k) {
        labels.emplace_back(to_string(b.sets.front().parity[k]));
        quantum.push_back(static_cast<int>(k));
    }
    meta["labels"] = labels;
    meta["quantum_numbers"] = quantum;
    meta["gauge_flips"] = b.gauge_flips;
    meta["notes"] = b.notes;
    meta["potential_files"] = !b.curves.empty();
    write_text(dir / "meta.json", meta.dump(2) + "\n");
    for (std::size_t j = 0; j < b.sets.size(); ++j) {
        const EigenSet& e = b.sets[j];
        CsvTable t;
        std::string energies;
        for (std::size_t k = 0; k < e.size(); ++k) energies += (k ? "," : "") + format_number(e.energies[k]);
        t.comments.push_back("E_over_hbar_rad_s: " + energies);
        t.header = {"x_um"};
        for (std::size_t k = 0; k < e.size(); ++k) t.header.push_back("phi" + std::to_string(k));
        for (std::size_t i = 0; i < e.x_um.size(); ++i) {
            std::vector<double> row{e.x_um[i]};
            for (std::size_t k = 0; k < e.size(); ++k) row.push_back(e.states[k][i]);
            t.rows.push_back(std::move(row));
        }
        write_text(dir / ("eigs_s" + std::to_string(j) + ".csv"), to_csv(t));
        if (!b.curves.empty()) {
            CsvTable u;
            u.comments.push_back("U_min_over_hbar_rad_s: " + format_number(e.potential_min));
            u.header = {"x_um", "U_over_hbar_rad_s"};
            for (std::size_t i = 0; i < b.curves[j].x_um.size(); ++i) u.rows.push_back({b.curves[j].x_um[i], b.curves[j].U[i]});
            write_text(dir / ("potential_s" + std::to_string(j) + ".csv"), to_csv(u));
        }
    }
}

namespace {

struct ParsedCsv {
    std::vector<std::string> comments;
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

ParsedCsv read_csv(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path.string() + "'");
    ParsedCsv out;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            out.comments.push_back(line.substr(line.find_first_not_of("# ")));
            continue;
        }
        std::stringstream ss(line);
        std::string cell;
        if (out.header.empty()) {
            while (std::getline(ss, cell, ',')) out.header.push_back(cell);
            continue;
        }
        std::vector<double> row;
        while (std::getline(ss, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::logic_error&) {
                throw ConfigError("bad number '" + cell + "' in '" + path.string() + "'");
            }
        }
        if (row.size() != out.header.size()) throw ConfigError("ragged row in '" + path.string() + "'");
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::vector<double> comment_values(const ParsedCsv& csv, const std::string& key, const fs::path& path) {
    for (const auto& c : csv.comments)
        if (c.rfind(key + ":", 0) == 0) return parse_number_list(c.substr(key.size() + 1));
    throw ConfigError("missing '# " + key + ":' line in '" + path.string() + "'");
}

}  // namespace

EigenBundle load_bundle(const fs::path& dir) {
    std::ifstream in(dir / "meta.json");
    if (!in) throw ConfigError("cannot open '" + (dir / "meta.json").string() + "'");
    json meta;
    try {
        in >> meta;
    } catch (const json::exception& e) {
        throw ConfigError(std::string("meta.json: ") + e.what());
    }
    EigenBundle b;
    try {
        b.s_grid = meta.at("s_grid").get<std::vector<double>>();
        b.mass_kg = meta.at("mass_kg").get<double>();
        b.gauge_flips = meta.at("gauge_flips").get<std::vector<std::vector<int>>>();
        b.notes = meta.at("notes").get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw ConfigError(std::string("meta.json: ") + e.what());
    }
    const auto labels = meta.at("labels").get<std::vector<std::string>>();
    const bool with_potential = meta.value("potential_files", false);
    for (std::size_t j = 0; j < b.s_grid.size(); ++j) {
        const fs::path p = dir / ("eigs_s" + std::to_string(j) + ".csv");
        const ParsedCsv csv = read_csv(p);
        EigenSet e;
        e.s = b.s_grid[j];
        e.energies = comment_values(csv, "E_over_hbar_rad_s", p);
        const std::size_t n = e.energies.size();
        if (csv.header.size() != n + 1 || labels.size() != n) throw ConfigError("state count mismatch in '" + p.string() + "'");
        e.states.assign(n, std::vector<double>(csv.rows.size()));
        for (std::size_t i = 0; i < csv.rows.size(); ++i) {
            e.x_um.push_back(csv.rows[i][0]);
            for (std::size_t k = 0; k < n; ++k) e.states[k][i] = csv.rows[i][k + 1];
        }
        for (const auto& l : labels) e.parity.push_back(l == "odd" ? Parity::Odd : Parity::Even);
        if (with_potential) {
            const fs::path pu = dir / ("potential_s" + std::to_string(j) + ".csv");
            const ParsedCsv u = read_csv(pu);
            e.potential_min = comment_values(u, "U_min_over_hbar_rad_s", pu).at(0);
            PotentialCurve c;
            c.s = e.s;
            for (const auto& row : u.rows) {
                c.x_um.push_back(row[0]);
                c.U.push_back(row[1]);
            }
            locate_wells(c);
            b.curves.push_back(std::move(c));
        }
        b.sets.push_back(std::move(e));
    }
    return b;
}

}  // namespace chiptrap
