#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flashpim/interconnect.hpp"
#include "flashpim/tech_model.hpp"
#include "flashpim/tiling.hpp"

namespace flashpim {

struct LlmModel {
    std::string name;
    int n_blocks = 0;
    int d_model = 0;
    int n_heads = 0;
    int ffn_dim = 0;
    int weight_bits = 8;
    int act_bits = 8;

    int d_head() const { return d_model / n_heads; }
    long long weight_bytes() const;  // decoder weights at weight_bits
    void validate() const;
};

enum class OpKind { layernorm, smvm, qkt, softmax, sv, activation, residual };
enum class ComputeUnit { cores, qlc_pim, slc_rpu };

struct OpNode {
    OpKind kind = OpKind::smvm;
    std::string name;
    // smvm: (M, N) weight shape; qkt/sv: (L, d_h) with L filled at
    // estimation time; cores ops: M = element count, N = 1
    long long M = 0;
    long long N = 0;
    ComputeUnit unit = ComputeUnit::cores;
};

/// Controller-core cost model (LN, softmax, activation, residual adds,
/// and the dMVM fallback of the conventional baseline).
struct CoreParams {
    int n_cores = 4;
    double clock_hz = 2.0e9;
    double ln_cycles_per_elem = 4.0;
    double softmax_cycles_per_elem = 2.0;
    double act_cycles_per_elem = 1.0;
    double residual_cycles_per_elem = 1.0;
    double mac_cycles_per_elem = 0.5;

    double elem_time(double cycles_per_elem, double n_elems) const {
        return cycles_per_elem * n_elems / (n_cores * clock_hz);
    }
};

struct TpotReport {
    std::vector<std::pair<OpNode, double>> per_op;  // one decoder block
    double per_block = 0;
    double total_tpot = 0;
    double energy = 0;  // array-level energy per token, J
    int l_ctx = 0;
};

struct LifetimeReport {
    double years = 0;
    double bytes_per_token = 0;
    double write_rate_bytes_per_sec = 0;
    double slc_capacity_bytes = 0;
    double pe_cycles = 0;
    double retention_boost = 0;
    double tpot_s = 0;
};

/// One decoder block: LN, Q/K/V projections, QK^T, softmax, SV, output
/// projection, LN, FFN pair with activation, residual adds on cores.
std::vector<OpNode> build_decoder_graph(const LlmModel& model);

/// End-to-end single-batch time per output token on the PIM device.
TpotReport estimate_tpot(const LlmModel& model, const FlashTopology& topo,
                         const PlaneConfig& cfg, const TechParams& tech,
                         const CoreParams& cores, int l_ctx,
                         bool include_lm_head = false, int vocab = 50272);

/// Naive baseline: conventional plane size on a conventional shared-bus
/// device, one in-flight array operation per channel, KV served by page
/// reads, dMVM folded onto the controller cores.
TpotReport estimate_tpot_conventional(const LlmModel& model, const FlashTopology& topo,
                                      const PlaneConfig& conventional_cfg,
                                      const TechParams& tech, const CoreParams& cores,
                                      int l_ctx);

long long kv_cache_bytes(const LlmModel& model, int l_tokens);

/// Initial KV fill time over the aggregated SLC write bandwidth.
double kv_write_overhead(const LlmModel& model, int l_in, const FlashTopology& topo);

/// ceil(overhead / saving); nullopt when the saving is non-positive
/// (the overhead never amortizes).
std::optional<long long> break_even_tokens(double kv_overhead_s, double per_token_saving_s);

LifetimeReport lifetime_projection(double slc_capacity_bytes, double tpot_s,
                                   const LlmModel& model, double pe_cycles = 10000,
                                   double retention_boost = 50);

/// Built-in OPT-family entries used when no model file is given.
std::vector<LlmModel> builtin_model_zoo();
std::optional<LlmModel> find_model(const std::vector<LlmModel>& zoo, const std::string& name);

}  // namespace flashpim
