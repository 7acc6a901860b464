#include "flashpim/llm_workload.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace flashpim {

namespace {
long long ceil_div_ll(long long a, long long b) { return (a + b - 1) / b; }
}

void LlmModel::validate() const {
    if (n_blocks < 1 || d_model < 1 || n_heads < 1 || ffn_dim < 1)
        throw std::invalid_argument("LlmModel: counts must be >= 1");
    if (d_model % n_heads != 0)
        throw std::invalid_argument("LlmModel: d_model must be divisible by n_heads");
    if (weight_bits != 8 || act_bits != 8)
        throw std::invalid_argument("LlmModel: only W8A8 is supported");
}

long long LlmModel::weight_bytes() const {
    const long long d = d_model;
    const long long per_block = 4 * d * d + 2 * d * static_cast<long long>(ffn_dim);
    return per_block * n_blocks;  // one byte per weight at W8
}

std::vector<OpNode> build_decoder_graph(const LlmModel& model) {
    model.validate();
    const long long d = model.d_model;
    const long long f = model.ffn_dim;
    std::vector<OpNode> g;
    g.push_back({OpKind::layernorm, "ln_attn", d, 1, ComputeUnit::cores});
    g.push_back({OpKind::smvm, "q_proj", d, d, ComputeUnit::qlc_pim});
    g.push_back({OpKind::smvm, "k_proj", d, d, ComputeUnit::qlc_pim});
    g.push_back({OpKind::smvm, "v_proj", d, d, ComputeUnit::qlc_pim});
    g.push_back({OpKind::qkt, "qkt", 0, model.d_head(), ComputeUnit::slc_rpu});
    g.push_back({OpKind::softmax, "softmax", 0, 1, ComputeUnit::cores});
    g.push_back({OpKind::sv, "sv", 0, model.d_head(), ComputeUnit::slc_rpu});
    g.push_back({OpKind::smvm, "out_proj", d, d, ComputeUnit::qlc_pim});
    g.push_back({OpKind::residual, "residual_attn", d, 1, ComputeUnit::cores});
    g.push_back({OpKind::layernorm, "ln_ffn", d, 1, ComputeUnit::cores});
    g.push_back({OpKind::smvm, "ffn1", d, f, ComputeUnit::qlc_pim});
    g.push_back({OpKind::activation, "activation", f, 1, ComputeUnit::cores});
    g.push_back({OpKind::smvm, "ffn2", f, d, ComputeUnit::qlc_pim});
    g.push_back({OpKind::residual, "residual_ffn", d, 1, ComputeUnit::cores});
    return g;
}

namespace {

double smvm_tiles(const LlmModel&, const OpNode& op, int unit_cols) {
    return static_cast<double>(ceil_div_ll(op.M, kUnitRows)) *
           static_cast<double>(ceil_div_ll(op.N, unit_cols));
}

void check_capacity(const LlmModel& model, const FlashTopology& topo,
                    const PlaneConfig& cfg, int l_ctx) {
    const long long plane_bytes =
        static_cast<long long>(cfg.n_row) * cfg.n_col * cfg.n_stack * cfg.bits_per_cell / 8;
    const long long qlc_bytes = topo.qlc_planes_total() * plane_bytes;
    if (model.weight_bytes() > qlc_bytes)
        throw std::invalid_argument("estimate_tpot: model exceeds QLC capacity");
    const long long slc_plane_bytes =
        static_cast<long long>(cfg.n_row) * cfg.n_col * cfg.n_stack / 8;
    const long long slc_bytes =
        static_cast<long long>(topo.slc_dies_total()) * topo.n_plane * slc_plane_bytes;
    if (kv_cache_bytes(model, l_ctx) > slc_bytes)
        throw std::invalid_argument("estimate_tpot: KV cache exceeds SLC capacity");
}

}  // namespace

TpotReport estimate_tpot(const LlmModel& model, const FlashTopology& topo,
                         const PlaneConfig& cfg, const TechParams& tech,
                         const CoreParams& cores, int l_ctx, bool include_lm_head,
                         int vocab) {
    model.validate();
    topo.validate();
    if (l_ctx < 1) throw std::invalid_argument("estimate_tpot: l_ctx must be >= 1");
    check_capacity(model, topo, cfg, l_ctx);

    const int unit_cols = cfg.n_col / topo.mux_ratio;
    const double pass_energy = energy_components(cfg, tech, kUnitRows).total;

    TpotReport rep;
    rep.l_ctx = l_ctx;
    double block_energy = 0;

    for (OpNode op : build_decoder_graph(model)) {
        double t = 0;
        switch (op.kind) {
            case OpKind::smvm: {
                const auto best = best_plan(static_cast<int>(op.M), static_cast<int>(op.N),
                                            topo, cfg, tech);
                if (!best)
                    throw std::invalid_argument("estimate_tpot: no feasible tiling for " + op.name);
                t = best->second.total;
                block_energy += smvm_tiles(model, op, unit_cols) * 8.0 * pass_energy;
                break;
            }
            case OpKind::qkt: {
                op.M = l_ctx;
                const auto [m, lat] = map_qkt(l_ctx, model.d_head(), model.n_heads, topo, cfg, tech);
                t = lat.total;
                PlaneConfig slc = cfg;
                slc.bits_per_cell = 1;
                block_energy += static_cast<double>(m.plane_pairs) * 2 *
                                energy_components(slc, tech, kUnitRows).total;
                break;
            }
            case OpKind::sv: {
                op.M = l_ctx;
                const auto [m, lat] = map_sv(l_ctx, model.d_head(), model.n_heads, topo, cfg, tech);
                t = lat.total;
                (void)m;
                break;
            }
            case OpKind::layernorm:
                t = cores.elem_time(cores.ln_cycles_per_elem, static_cast<double>(op.M));
                break;
            case OpKind::softmax:
                op.M = static_cast<long long>(model.n_heads) * l_ctx;
                t = cores.elem_time(cores.softmax_cycles_per_elem, static_cast<double>(op.M));
                break;
            case OpKind::activation:
                t = cores.elem_time(cores.act_cycles_per_elem, static_cast<double>(op.M));
                break;
            case OpKind::residual:
                t = cores.elem_time(cores.residual_cycles_per_elem, static_cast<double>(op.M));
                break;
        }
        rep.per_op.push_back({op, t});
        rep.per_block += t;
    }

    rep.total_tpot = model.n_blocks * rep.per_block;
    rep.energy = model.n_blocks * block_energy;

    if (include_lm_head) {
        const auto best = best_plan(model.d_model, vocab, topo, cfg, tech);
        if (!best) throw std::invalid_argument("estimate_tpot: no feasible LM-head tiling");
        OpNode head{OpKind::smvm, "lm_head", model.d_model, vocab, ComputeUnit::qlc_pim};
        rep.per_op.push_back({head, best->second.total});
        rep.total_tpot += best->second.total;
        rep.energy += smvm_tiles(model, head, unit_cols) * 8.0 * pass_energy;
    }
    return rep;
}

TpotReport estimate_tpot_conventional(const LlmModel& model, const FlashTopology& topo,
                                      const PlaneConfig& conventional_cfg,
                                      const TechParams& tech, const CoreParams& cores,
                                      int l_ctx) {
    model.validate();
    topo.validate();
    if (l_ctx < 1) throw std::invalid_argument("estimate_tpot_conventional: l_ctx must be >= 1");

    const int unit_cols = conventional_cfg.n_col / topo.mux_ratio;
    const double t_pim = pim_latency(conventional_cfg, tech, 8).total;
    const double pass_energy = energy_components(conventional_cfg, tech, kUnitRows).total;

    TpotReport rep;
    rep.l_ctx = l_ctx;

    double ops_per_block = 0;
    double cores_per_block = 0;
    for (OpNode op : build_decoder_graph(model)) {
        switch (op.kind) {
            case OpKind::smvm:
                ops_per_block += smvm_tiles(model, op, unit_cols);
                break;
            case OpKind::layernorm:
                cores_per_block += cores.elem_time(cores.ln_cycles_per_elem,
                                                   static_cast<double>(op.M));
                break;
            case OpKind::softmax:
                cores_per_block += cores.elem_time(
                    cores.softmax_cycles_per_elem,
                    static_cast<double>(model.n_heads) * l_ctx);
                break;
            case OpKind::activation:
                cores_per_block += cores.elem_time(cores.act_cycles_per_elem,
                                                   static_cast<double>(op.M));
                break;
            case OpKind::residual:
                cores_per_block += cores.elem_time(cores.residual_cycles_per_elem,
                                                   static_cast<double>(op.M));
                break;
            case OpKind::qkt:
            case OpKind::sv:
                break;  // folded onto the cores below
        }
    }

    // One in-flight array operation per channel.
    const double total_ops = ops_per_block * model.n_blocks;
    const double pim_time = std::ceil(total_ops / topo.n_channel) * t_pim;

    // KV cache served by ordinary page reads through the controller ingress.
    const double kv_bytes = static_cast<double>(kv_cache_bytes(model, l_ctx));
    const double kv_read = kv_bytes / topo.bus_bytes_per_sec;

    // QK^T and SV multiply-accumulates on the cores.
    const double mac_time = cores.elem_time(cores.mac_cycles_per_elem, kv_bytes);

    const double cores_time = cores_per_block * model.n_blocks;

    OpNode smvm_node{OpKind::smvm, "smvm_serialized", 0, 0, ComputeUnit::qlc_pim};
    OpNode kv_node{OpKind::qkt, "kv_page_reads", l_ctx, model.d_head(), ComputeUnit::cores};
    OpNode mac_node{OpKind::sv, "dmvm_on_cores", l_ctx, model.d_head(), ComputeUnit::cores};
    OpNode core_node{OpKind::softmax, "cores_other", 0, 0, ComputeUnit::cores};
    rep.per_op.push_back({smvm_node, pim_time / model.n_blocks});
    rep.per_op.push_back({kv_node, kv_read / model.n_blocks});
    rep.per_op.push_back({mac_node, mac_time / model.n_blocks});
    rep.per_op.push_back({core_node, cores_time / model.n_blocks});
    for (const auto& [node, t] : rep.per_op) rep.per_block += t;
    rep.total_tpot = rep.per_block * model.n_blocks;
    rep.energy = total_ops * 8.0 * pass_energy;
    return rep;
}

long long kv_cache_bytes(const LlmModel& model, int l_tokens) {
    model.validate();
    if (l_tokens < 0) throw std::invalid_argument("kv_cache_bytes: negative token count");
    return 2LL * model.n_blocks * l_tokens * model.d_model;  // 1 byte per value (W8A8)
}

double kv_write_overhead(const LlmModel& model, int l_in, const FlashTopology& topo) {
    topo.validate();
    if (l_in == 0) return 0.0;
    return static_cast<double>(kv_cache_bytes(model, l_in)) / topo.slc_write_bytes_per_sec;
}

std::optional<long long> break_even_tokens(double kv_overhead_s, double per_token_saving_s) {
    if (per_token_saving_s <= 0) return std::nullopt;
    if (kv_overhead_s <= 0) return 0;
    return static_cast<long long>(std::ceil(kv_overhead_s / per_token_saving_s - 1e-9));
}

LifetimeReport lifetime_projection(double slc_capacity_bytes, double tpot_s,
                                   const LlmModel& model, double pe_cycles,
                                   double retention_boost) {
    model.validate();
    if (!(slc_capacity_bytes > 0) || !(tpot_s > 0) || !(pe_cycles > 0) ||
        !(retention_boost > 0))
        throw std::invalid_argument("lifetime_projection: inputs must be > 0");
    LifetimeReport r;
    r.slc_capacity_bytes = slc_capacity_bytes;
    r.pe_cycles = pe_cycles;
    r.retention_boost = retention_boost;
    r.tpot_s = tpot_s;
    r.bytes_per_token = 2.0 * model.n_blocks * model.d_model;
    r.write_rate_bytes_per_sec = r.bytes_per_token / tpot_s;
    const double lifetime_s =
        pe_cycles * retention_boost * slc_capacity_bytes / r.write_rate_bytes_per_sec;
    r.years = lifetime_s / (365.25 * 24 * 3600);
    return r;
}

std::vector<LlmModel> builtin_model_zoo() {
    // Public OPT decoder dimensions; FFN is the standard 4x expansion.
    return {
        {"opt-6.7b", 32, 4096, 32, 16384},
        {"opt-13b", 40, 5120, 40, 20480},
        {"opt-30b", 48, 7168, 56, 28672},
        {"opt-66b", 64, 9216, 72, 36864},
        {"opt-175b", 96, 12288, 96, 49152},
    };
}

std::optional<LlmModel> find_model(const std::vector<LlmModel>& zoo, const std::string& name) {
    for (const auto& m : zoo)
        if (m.name == name) return m;
    return std::nullopt;
}

}  // namespace flashpim
