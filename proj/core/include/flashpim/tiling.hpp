#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "flashpim/interconnect.hpp"
#include "flashpim/plane_pim.hpp"
#include "flashpim/tech_model.hpp"

namespace flashpim {

enum class TileMethod { none, row, col };

inline constexpr int kUnitRows = 128;  // weight rows per unit tile

/// Tiling method and mapped tile count per hierarchy level, ordered
/// channel / way / die / plane. Serializes to the "N(1)/C(2)/C(7)/R(56)"
/// notation.
struct TilingPlan {
    struct Level {
        TileMethod method = TileMethod::none;
        int count = 1;
    };
    std::array<Level, 4> per_level;  // [channel, way, die, plane]
    int unit_rows = kUnitRows;
    int unit_cols = 0;  // n_col / mux_ratio

    int row_tile_product() const;
    int col_tile_product() const;
    std::string to_string() const;
    static std::optional<TilingPlan> parse(const std::string& text, int unit_cols);
};

struct SmvmCost {
    double inbound_io = 0;
    double pim = 0;
    double outbound_io = 0;
    double total = 0;  // max(inbound, pim) + outbound: first two overlap
};

enum class DmvmKind { qkt, sv };

struct DmvmMapping {
    DmvmKind kind = DmvmKind::qkt;
    int heads_per_die = 1;
    int seq_len = 0;
    int head_dim = 0;
    int plane_pairs = 0;
};

struct DmvmLatency {
    double inbound = 0;
    double kv_read = 0;
    double outbound = 0;
    double total = 0;
};

/// All tiling plans whose tile-count products cover an M x N weight
/// matrix on the given hierarchy. Empty result means no feasible plan.
std::vector<TilingPlan> enumerate_plans(int M, int N, const FlashTopology& topo,
                                        const PlaneConfig& cfg);

/// Three-stage pipeline cost of one static MVM under a plan.
/// Inbound overlaps PIM; outbound drains the in-die network (H-tree or
/// shared bus per the topology), then the channel buses, then the
/// controller ingress DMA.
SmvmCost cost_smvm(const TilingPlan& plan, const FlashTopology& topo,
                   const PlaneConfig& cfg, const TechParams& tech);

std::optional<std::pair<TilingPlan, SmvmCost>> best_plan(int M, int N,
                                                         const FlashTopology& topo,
                                                         const PlaneConfig& cfg,
                                                         const TechParams& tech);

/// q (1 x d_h) against non-transposed K (L x d_h) as L vector-vector
/// products in plane-pair page buffers; the KV read replaces the PIM
/// stage of the pipeline.
std::pair<DmvmMapping, DmvmLatency> map_qkt(int L, int d_h, int n_heads,
                                            const FlashTopology& topo,
                                            const PlaneConfig& cfg,
                                            const TechParams& tech);

/// Row-wise product: each score element scattered to a plane for a
/// vector-scalar multiplication with one V row; partial rows accumulate
/// through the H-tree RPUs.
std::pair<DmvmMapping, DmvmLatency> map_sv(int L, int d_h, int n_heads,
                                           const FlashTopology& topo,
                                           const PlaneConfig& cfg,
                                           const TechParams& tech);

/// Functional dMVM paths (exercised through the RPU emulation).
std::vector<int64_t> qkt_compute(const std::vector<int32_t>& q,
                                 const std::vector<std::vector<int32_t>>& K);
std::vector<int64_t> sv_compute(const std::vector<int32_t>& S,
                                const std::vector<std::vector<int32_t>>& V);

/// Functional tiled sMVM: runs every unit tile through the ideal-ADC
/// plane emulation under the plan's coverage map, accumulating row tiles
/// and concatenating column tiles. Zero-padding covers ragged edges.
std::vector<int64_t> tiled_mvm(const Mat8& w, const InputVector& x,
                               const TilingPlan& plan, const PlaneConfig& cfg);

}  // namespace flashpim
