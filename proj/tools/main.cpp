#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <json.hpp>

#include "flashpim/config_file.hpp"
#include "flashpim/dse.hpp"
#include "flashpim/interconnect.hpp"
#include "flashpim/llm_workload.hpp"
#include "flashpim/tech_model.hpp"
#include "flashpim/tiling.hpp"

using json = nlohmann::ordered_json;
using namespace flashpim;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitEmpty = 1;      // infeasible or empty result
constexpr int kExitUsage = 2;      // bad arguments
constexpr int kExitIo = 3;         // file or parse failure

struct Session {
    TechParams tech;
    PlaneConfig plane;
    FlashTopology topo;
    CoreParams cores;
    std::vector<LlmModel> models;
    std::string trace_path;
};

Session make_session(const std::string& config_path) {
    Session s;
    ConfigFile cfg = config_path.empty() ? ConfigFile::parse("") : ConfigFile::load(config_path);
    s.tech = tech_from_config(cfg);
    s.plane = plane_from_config(cfg);
    s.topo = topology_from_config(cfg);
    s.cores = cores_from_config(cfg);
    s.models = models_from_config(cfg);
    return s;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed: " + path);
}

void emit_json(const std::string& path, const json& j) {
    if (path.empty()) return;
    write_file(path, j.dump(2) + "\n");
}

std::string fmt(double v, const char* spec = "%.6g") {
    char buf[64];
    std::snprintf(buf, sizeof(buf), spec, v);
    return buf;
}

json plan_json(const TilingPlan& plan, const SmvmCost& cost) {
    return json{{"plan", plan.to_string()},
                {"unit_rows", plan.unit_rows},
                {"unit_cols", plan.unit_cols},
                {"row_tiles", plan.row_tile_product()},
                {"col_tiles", plan.col_tile_product()},
                {"inbound_us", cost.inbound_io * 1e6},
                {"pim_us", cost.pim * 1e6},
                {"outbound_us", cost.outbound_io * 1e6},
                {"total_us", cost.total * 1e6}};
}

// ---------------------------------------------------------------- sweep

int cmd_sweep(const Session& s, const std::string& axis_name,
              const std::vector<int>& values, const std::string& out_path,
              const std::string& json_path) {
    SweepAxis axis;
    if (axis_name == "n_row") axis = SweepAxis::n_row;
    else if (axis_name == "n_col") axis = SweepAxis::n_col;
    else if (axis_name == "n_stack") axis = SweepAxis::n_stack;
    else {
        std::cerr << "error: --axis must be one of n_row, n_col, n_stack\n";
        return kExitUsage;
    }
    SweepSpec spec = default_sweep(axis);
    if (!values.empty()) spec.values = values;
    spec.validate();
    const auto rows = run_sweep(spec, s.tech);
    const std::string csv = sweep_to_csv(rows);
    if (out_path.empty()) std::cout << csv;
    else write_file(out_path, csv);

    if (!json_path.empty()) {
        json j{{"axis", axis_name}, {"rows", json::array()}};
        for (const auto& r : rows)
            j["rows"].push_back({{"n_row", r.cfg.n_row},
                                 {"n_col", r.cfg.n_col},
                                 {"n_stack", r.cfg.n_stack},
                                 {"t_pim_us", r.latency.total * 1e6},
                                 {"e_total_nj", r.energy.total * 1e9},
                                 {"density_gb_mm2", r.density}});
        emit_json(json_path, j);
    }
    return kExitOk;
}

// ---------------------------------------------------------------- select

int cmd_select(const Session& s, double budget_us, const std::string& json_path) {
    const auto candidates = default_selection_candidates();
    const auto pick = select_plane(candidates, budget_us * 1e-6, s.tech);
    if (!pick) {
        std::cout << "no candidate meets the " << fmt(budget_us) << " us budget\n";
        return kExitEmpty;
    }
    const auto lat = pim_latency(*pick, s.tech, 8);
    const double den = cell_density(*pick, s.tech);
    std::cout << "selected plane: " << pick->n_row << "x" << pick->n_col << "x"
              << pick->n_stack << "\n"
              << "  pim latency [us]: " << fmt(lat.total * 1e6) << "\n"
              << "  density [Gb/mm2]: " << fmt(den) << "\n";
    emit_json(json_path, json{{"n_row", pick->n_row},
                              {"n_col", pick->n_col},
                              {"n_stack", pick->n_stack},
                              {"pim_latency_us", lat.total * 1e6},
                              {"density_gb_mm2", den},
                              {"budget_us", budget_us}});
    return kExitOk;
}

// ---------------------------------------------------------------- tpot

int cmd_tpot(const Session& s, const std::string& model_name, int ctx, bool baseline,
             bool lm_head, const std::string& out_path, const std::string& json_path) {
    const auto model = find_model(s.models, model_name);
    if (!model) {
        std::cerr << "error: unknown model '" << model_name << "'; available:";
        for (const auto& m : s.models) std::cerr << " " << m.name;
        std::cerr << "\n";
        return kExitEmpty;
    }
    if (ctx < 1) {
        std::cerr << "error: --ctx must be >= 1\n";
        return kExitUsage;
    }

    TpotReport rep;
    if (baseline) {
        FlashTopology conv = s.topo;
        conv.n_way = 4;
        conv.n_die = 4;
        conv.slc_dies_per_way = 0;
        conv.qlc_dies_per_way = 4;
        conv.n_plane = 2;
        conv.bus_topology = BusTopology::shared;
        rep = estimate_tpot_conventional(*model, conv, conventional_plane(), s.tech,
                                         s.cores, ctx);
    } else {
        rep = estimate_tpot(*model, s.topo, s.plane, s.tech, s.cores, ctx, lm_head);
    }

    std::cout << "model " << model->name << ", context " << ctx
              << (baseline ? " (conventional baseline)" : "") << "\n"
              << "  tpot       [ms]: " << fmt(rep.total_tpot * 1e3) << "\n"
              << "  per block  [us]: " << fmt(rep.per_block * 1e6) << "\n"
              << "  array energy/token [mJ]: " << fmt(rep.energy * 1e3) << "\n";

    std::string csv = "op,kind_unit,latency_us\n";
    json ops = json::array();
    for (const auto& [op, t] : rep.per_op) {
        const char* unit = op.unit == ComputeUnit::cores ? "cores"
                           : op.unit == ComputeUnit::qlc_pim ? "qlc_pim"
                                                             : "slc_rpu";
        csv += op.name + "," + unit + "," + fmt(t * 1e6, "%.9g") + "\n";
        ops.push_back({{"name", op.name}, {"unit", unit}, {"latency_us", t * 1e6}});
    }
    if (!out_path.empty()) write_file(out_path, csv);

    emit_json(json_path, json{{"model", model->name},
                              {"l_ctx", ctx},
                              {"baseline", baseline},
                              {"tpot_ms", rep.total_tpot * 1e3},
                              {"per_block_us", rep.per_block * 1e6},
                              {"energy_mj", rep.energy * 1e3},
                              {"per_op", ops}});
    return kExitOk;
}

// ---------------------------------------------------------------- tiling

int cmd_tiling(const Session& s, int M, int N, bool all_dies, bool list_all,
               const std::string& json_path) {
    if (M < 1 || N < 1) {
        std::cerr << "error: --m and --n must be >= 1\n";
        return kExitUsage;
    }
    FlashTopology topo = s.topo;
    if (all_dies) {
        topo.qlc_dies_per_way = topo.n_die;
        topo.slc_dies_per_way = 0;
    }
    const auto best = best_plan(M, N, topo, s.plane, s.tech);
    if (!best) {
        std::cout << "no feasible tiling plan for " << M << "x" << N << "\n";
        return kExitEmpty;
    }
    std::cout << "best plan for " << M << "x" << N << ": " << best->first.to_string() << "\n"
              << "  inbound  [us]: " << fmt(best->second.inbound_io * 1e6) << "\n"
              << "  pim      [us]: " << fmt(best->second.pim * 1e6) << "\n"
              << "  outbound [us]: " << fmt(best->second.outbound_io * 1e6) << "\n"
              << "  total    [us]: " << fmt(best->second.total * 1e6) << "\n";

    json j = plan_json(best->first, best->second);
    j["m"] = M;
    j["n"] = N;
    if (list_all) {
        json all = json::array();
        for (const auto& p : enumerate_plans(M, N, topo, s.plane))
            all.push_back(plan_json(p, cost_smvm(p, topo, s.plane, s.tech)));
        j["plans"] = all;
        std::cout << "  enumerated plans: " << all.size() << "\n";
    }
    emit_json(json_path, j);
    return kExitOk;
}

// ---------------------------------------------------------------- bus

int cmd_bus(const Session& s, const std::string& shape, int planes, bool size_b,
            const std::string& json_path) {
    int M = 0, N = 0;
    if (std::sscanf(shape.c_str(), "%dx%d", &M, &N) != 2 || M < 1 || N < 1) {
        std::cerr << "error: --shape must look like 1024x4096\n";
        return kExitUsage;
    }
    PlaneConfig cfg = s.plane;
    if (size_b) {
        cfg.n_col = 1024;
        cfg.n_stack = 64;
        if (planes == 64) planes = 128;  // matched PIM throughput
    }
    const double pim = pim_latency(cfg, s.tech, 8).total;
    const int row_groups = (M + kUnitRows - 1) / kUnitRows;
    const int replicas = std::max(1, planes / row_groups);
    const int out_cols = (N + replicas - 1) / replicas;
    // exposed payload per op: one mux-phase quantum of INT8 outputs
    const double out_bytes = std::max(1, out_cols / s.topo.mux_ratio);

    const bool trace = !s.trace_path.empty();
    const auto shared = simulate_shared_bus(planes, pim, out_bytes, s.topo, trace);
    const auto htree = simulate_htree(planes, pim, out_bytes, s.topo, true, trace);
    const double reduction = 1.0 - htree.total_s / shared.total_s;

    if (trace) {
        auto events = shared.events;
        events.insert(events.end(), htree.events.begin(), htree.events.end());
        write_trace_csv(events, s.trace_path);
    }

    std::cout << "shape " << M << "x" << N << ", " << planes << " planes, plane "
              << cfg.n_row << "x" << cfg.n_col << "x" << cfg.n_stack << "\n"
              << "  per-plane pim [us]: " << fmt(pim * 1e6) << "\n"
              << "  out bytes per op : " << fmt(out_bytes, "%.0f") << "\n"
              << "  shared bus  [us] : " << fmt(shared.total_s * 1e6) << "\n"
              << "  h-tree      [us] : " << fmt(htree.total_s * 1e6) << "\n"
              << "  reduction   [%]  : " << fmt(reduction * 100, "%.2f") << "\n";

    emit_json(json_path, json{{"shape", shape},
                              {"planes", planes},
                              {"pim_us", pim * 1e6},
                              {"out_bytes_per_plane", out_bytes},
                              {"shared_us", shared.total_s * 1e6},
                              {"htree_us", htree.total_s * 1e6},
                              {"reduction_pct", reduction * 100}});
    return kExitOk;
}

// ---------------------------------------------------------------- area

int cmd_area(const Session& s, const std::string& json_path) {
    const auto r = area_report(s.plane, s.topo, s.tech);
    std::cout << "plane " << s.plane.n_row << "x" << s.plane.n_col << "x" << s.plane.n_stack
              << "\n"
              << "  plane area     [um2]: " << fmt(r.plane_area_mm2 * 1e6) << "\n"
              << "  " << s.topo.n_plane
              << " planes total [mm2]: " << fmt(r.total_pim_area_mm2) << "\n"
              << "  die budget     [mm2]: " << fmt(r.budget_low_mm2) << " - "
              << fmt(r.budget_high_mm2) << "\n"
              << "  hv-peri  " << fmt(r.hv_peri_ratio * 100, "%.2f") << "% ("
              << fmt(r.hv_peri_mm2, "%.6f") << " mm2)\n"
              << "  lv-peri  " << fmt(r.lv_peri_ratio * 100, "%.2f") << "% ("
              << fmt(r.lv_peri_mm2, "%.6f") << " mm2)\n"
              << "  rpu+htree " << fmt(r.rpu_htree_ratio * 100, "%.2f") << "% ("
              << fmt(r.rpu_htree_mm2, "%.6f") << " mm2)\n"
              << "  under-array total: " << fmt(r.peripheral_total_ratio * 100, "%.2f")
              << "%\n";
    emit_json(json_path, json{{"plane_area_mm2", r.plane_area_mm2},
                              {"total_pim_area_mm2", r.total_pim_area_mm2},
                              {"budget_low_mm2", r.budget_low_mm2},
                              {"budget_high_mm2", r.budget_high_mm2},
                              {"hv_peri_ratio", r.hv_peri_ratio},
                              {"lv_peri_ratio", r.lv_peri_ratio},
                              {"rpu_htree_ratio", r.rpu_htree_ratio},
                              {"peripheral_total_ratio", r.peripheral_total_ratio}});
    return kExitOk;
}

// ---------------------------------------------------------------- lifetime

int cmd_lifetime(const Session& s, const std::string& model_name, double tpot_ms,
                 double slc_gib, double pe_cycles, double boost,
                 const std::string& json_path) {
    const auto model = find_model(s.models, model_name);
    if (!model) {
        std::cerr << "error: unknown model '" << model_name << "'; available:";
        for (const auto& m : s.models) std::cerr << " " << m.name;
        std::cerr << "\n";
        return kExitEmpty;
    }
    double tpot = tpot_ms * 1e-3;
    if (tpot_ms <= 0)
        tpot = estimate_tpot(*model, s.topo, s.plane, s.tech, s.cores, 1024).total_tpot;
    const auto r = lifetime_projection(slc_gib * 1024 * 1024 * 1024, tpot, *model,
                                       pe_cycles, boost);
    std::cout << "lifetime under ideal wear leveling: " << fmt(r.years, "%.2f")
              << " years\n"
              << "  slc capacity [GiB]: " << fmt(slc_gib) << "\n"
              << "  p/e cycles x boost: " << fmt(r.pe_cycles, "%.0f") << " x "
              << fmt(r.retention_boost, "%.0f") << "\n"
              << "  tpot          [ms]: " << fmt(r.tpot_s * 1e3) << "\n"
              << "  kv append per token [B]: " << fmt(r.bytes_per_token, "%.0f") << "\n"
              << "  write rate  [MB/s]: " << fmt(r.write_rate_bytes_per_sec / 1e6) << "\n";
    emit_json(json_path, json{{"model", model->name},
                              {"years", r.years},
                              {"slc_capacity_bytes", r.slc_capacity_bytes},
                              {"pe_cycles", r.pe_cycles},
                              {"retention_boost", r.retention_boost},
                              {"tpot_ms", r.tpot_s * 1e3},
                              {"bytes_per_token", r.bytes_per_token},
                              {"write_rate_bytes_per_sec", r.write_rate_bytes_per_sec}});
    return kExitOk;
}

// ---------------------------------------------------------------- kv-overhead

int cmd_kv(const Session& s, const std::string& model_name, int ctx, double gpu_gap_ms,
           const std::string& json_path) {
    const auto model = find_model(s.models, model_name);
    if (!model) {
        std::cerr << "error: unknown model '" << model_name << "'; available:";
        for (const auto& m : s.models) std::cerr << " " << m.name;
        std::cerr << "\n";
        return kExitEmpty;
    }
    if (ctx < 1) {
        std::cerr << "error: --ctx must be >= 1\n";
        return kExitUsage;
    }
    const long long bytes = kv_cache_bytes(*model, ctx);
    const double t = kv_write_overhead(*model, ctx, s.topo);
    const auto tokens = break_even_tokens(t, gpu_gap_ms * 1e-3);
    std::cout << "initial kv cache for " << model->name << " at " << ctx << " tokens\n"
              << "  bytes      [GB]: " << fmt(bytes / 1e9, "%.3f") << "\n"
              << "  write time [ms]: " << fmt(t * 1e3, "%.2f") << "\n";
    if (tokens)
        std::cout << "  break-even tokens at " << fmt(gpu_gap_ms) << " ms/token saving: "
                  << *tokens << "\n";
    else
        std::cout << "  break-even: never amortizes at " << fmt(gpu_gap_ms)
                  << " ms/token\n";
    json j{{"model", model->name},
           {"l_in", ctx},
           {"kv_bytes", bytes},
           {"write_time_ms", t * 1e3},
           {"gpu_gap_ms", gpu_gap_ms}};
    if (tokens) j["break_even_tokens"] = *tokens;
    else j["break_even_tokens"] = nullptr;
    emit_json(json_path, j);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"3D NAND flash PIM latency/energy/density simulator"};
    app.require_subcommand(1);

    std::string config_path, json_path, trace_path;
    app.add_option("--config", config_path, "configuration file (ini)");
    app.add_option("--json", json_path, "write a JSON report to this path");
    app.add_option("--trace", trace_path, "write an event trace CSV (bus command)");

    auto* sweep = app.add_subcommand("sweep", "latency/energy/density sweep -> CSV");
    std::string axis = "n_col", out_path;
    std::vector<int> values;
    sweep->add_option("--axis", axis, "n_row, n_col or n_stack");
    sweep->add_option("--values", values, "override sweep points");
    sweep->add_option("--out", out_path, "CSV output path (default stdout)");

    auto* select = app.add_subcommand("select", "pick the densest plane within a latency budget");
    double budget_us = 2.2;
    select->add_option("--budget-us", budget_us, "PIM latency budget in us");

    auto* tpot = app.add_subcommand("tpot", "per-token generation latency");
    std::string model_name = "opt-30b";
    int ctx = 1024;
    bool baseline = false, lm_head = false;
    tpot->add_option("--model", model_name, "model name from the zoo");
    tpot->add_option("--ctx", ctx, "context length in tokens");
    tpot->add_flag("--baseline", baseline, "conventional-plane shared-bus baseline");
    tpot->add_flag("--lm-head", lm_head, "include the LM head projection");
    tpot->add_option("--out", out_path, "per-op CSV output path");

    auto* tiling = app.add_subcommand("tiling", "search tiling plans for an MxN weight matrix");
    int M = 7168, N = 7168;
    bool qlc_only = false, list_all = false;
    tiling->add_option("--m", M, "weight rows");
    tiling->add_option("--n", N, "weight cols");
    tiling->add_flag("--qlc-only", qlc_only, "restrict to the QLC die partition");
    tiling->add_flag("--all", list_all, "emit every enumerated plan in the JSON report");

    auto* bus = app.add_subcommand("bus", "shared bus vs H-tree for one MVM");
    std::string shape = "1024x1024";
    int planes = 64;
    bool size_b = false;
    bus->add_option("--shape", shape, "MxN, e.g. 1024x4096");
    bus->add_option("--planes", planes, "planes engaged");
    bus->add_flag("--size-b", size_b, "use the 256x1024x64 plane (128 planes)");

    auto* area = app.add_subcommand("area", "plane and die area accounting");

    auto* lifetime = app.add_subcommand("lifetime", "SLC endurance projection");
    double tpot_ms = 0, slc_gib = 32, pe_cycles = 10000, boost = 50;
    lifetime->add_option("--model", model_name, "model name from the zoo");
    lifetime->add_option("--tpot-ms", tpot_ms, "override the estimated TPOT");
    lifetime->add_option("--slc-gib", slc_gib, "SLC capacity in GiB");
    lifetime->add_option("--pe-cycles", pe_cycles, "P/E endurance");
    lifetime->add_option("--boost", boost, "retention-relaxation endurance multiplier");

    auto* kv = app.add_subcommand("kv-overhead", "initial KV cache write cost");
    double gpu_gap_ms = 10.0;
    kv->add_option("--model", model_name, "model name from the zoo");
    kv->add_option("--ctx", ctx, "input token count");
    kv->add_option("--gpu-gap-ms", gpu_gap_ms, "per-token saving vs the GPU baseline");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? kExitOk : kExitUsage;
    }

    try {
        Session s = make_session(config_path);
        s.trace_path = trace_path;
        if (sweep->parsed()) return cmd_sweep(s, axis, values, out_path, json_path);
        if (select->parsed()) return cmd_select(s, budget_us, json_path);
        if (tpot->parsed())
            return cmd_tpot(s, model_name, ctx, baseline, lm_head, out_path, json_path);
        if (tiling->parsed()) return cmd_tiling(s, M, N, !qlc_only, list_all, json_path);
        if (bus->parsed()) return cmd_bus(s, shape, planes, size_b, json_path);
        if (area->parsed()) return cmd_area(s, json_path);
        if (lifetime->parsed())
            return cmd_lifetime(s, model_name, tpot_ms, slc_gib, pe_cycles, boost, json_path);
        if (kv->parsed()) return cmd_kv(s, model_name, ctx, gpu_gap_ms, json_path);
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitIo;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
    return kExitUsage;
}
