#include "flashpim/tiling.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <stdexcept>

namespace flashpim {

namespace {

int ceil_div(int a, int b) { return (a + b - 1) / b; }

int ceil_log2(int n) {
    int l = 0;
    int v = 1;
    while (v < n) {
        v <<= 1;
        ++l;
    }
    return l;
}

char method_char(TileMethod m) {
    switch (m) {
        case TileMethod::none: return 'N';
        case TileMethod::row: return 'R';
        case TileMethod::col: return 'C';
    }
    return '?';
}

}  // namespace

int TilingPlan::row_tile_product() const {
    int p = 1;
    for (const auto& l : per_level)
        if (l.method == TileMethod::row) p *= l.count;
    return p;
}

int TilingPlan::col_tile_product() const {
    int p = 1;
    for (const auto& l : per_level)
        if (l.method == TileMethod::col) p *= l.count;
    return p;
}

std::string TilingPlan::to_string() const {
    char buf[96];
    std::snprintf(buf, sizeof(buf), "%c(%d)/%c(%d)/%c(%d)/%c(%d)",
                  method_char(per_level[0].method), per_level[0].count,
                  method_char(per_level[1].method), per_level[1].count,
                  method_char(per_level[2].method), per_level[2].count,
                  method_char(per_level[3].method), per_level[3].count);
    return buf;
}

std::optional<TilingPlan> TilingPlan::parse(const std::string& text, int unit_cols) {
    TilingPlan plan;
    plan.unit_cols = unit_cols;
    size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
        if (pos >= text.size()) return std::nullopt;
        const char m = text[pos++];
        TileMethod method;
        if (m == 'N' || m == 'n') method = TileMethod::none;
        else if (m == 'R' || m == 'r') method = TileMethod::row;
        else if (m == 'C' || m == 'c') method = TileMethod::col;
        else return std::nullopt;
        int count = 1;
        if (pos < text.size() && text[pos] == '(') {
            const size_t close = text.find(')', pos);
            if (close == std::string::npos) return std::nullopt;
            count = std::atoi(text.substr(pos + 1, close - pos - 1).c_str());
            pos = close + 1;
        }
        if (count < 1) return std::nullopt;
        plan.per_level[i] = {method, count};
        if (i < 3) {
            if (pos >= text.size() || text[pos] != '/') return std::nullopt;
            ++pos;
        }
    }
    if (pos != text.size()) return std::nullopt;
    for (const auto& l : plan.per_level)
        if (l.method == TileMethod::none && l.count != 1) return std::nullopt;
    return plan;
}

std::vector<TilingPlan> enumerate_plans(int M, int N, const FlashTopology& topo,
                                        const PlaneConfig& cfg) {
    topo.validate();
    if (M < 1 || N < 1)
        throw std::invalid_argument("enumerate_plans: M, N must be >= 1");
    const int unit_cols = cfg.n_col / topo.mux_ratio;
    if (unit_cols < 1)
        throw std::invalid_argument("enumerate_plans: n_col smaller than mux ratio");
    const int R = ceil_div(M, kUnitRows);
    const int C = ceil_div(N, unit_cols);
    const int resources[4] = {topo.n_channel, topo.n_way, topo.n_die, topo.n_plane};

    std::vector<TilingPlan> plans;

    // Every level is none, row, or col; a level with count 1 is canonically
    // 'none', so row/col levels carry factors >= 2.
    std::array<TileMethod, 4> methods{};
    std::function<void(int)> assign = [&](int level) {
        if (level == 4) {
            std::vector<int> row_levels, col_levels;
            for (int i = 0; i < 4; ++i) {
                if (methods[i] == TileMethod::row) row_levels.push_back(i);
                else if (methods[i] == TileMethod::col) col_levels.push_back(i);
            }
            if (row_levels.empty() && R != 1) return;
            if (col_levels.empty() && C != 1) return;

            std::vector<std::vector<int>> row_factorizations, col_factorizations;
            std::vector<int> current;
            std::function<void(const std::vector<int>&, int, size_t, std::vector<std::vector<int>>&)>
                factor = [&](const std::vector<int>& levels, int remaining, size_t idx,
                             std::vector<std::vector<int>>& out) {
                    if (idx == levels.size()) {
                        if (remaining == 1) out.push_back(current);
                        return;
                    }
                    const int cap = resources[levels[idx]];
                    for (int f = 2; f <= remaining && f <= cap; ++f) {
                        if (remaining % f != 0) continue;
                        current.push_back(f);
                        factor(levels, remaining / f, idx + 1, out);
                        current.pop_back();
                    }
                };
            if (row_levels.empty()) row_factorizations.push_back({});
            else factor(row_levels, R, 0, row_factorizations);
            if (col_levels.empty()) col_factorizations.push_back({});
            else factor(col_levels, C, 0, col_factorizations);

            for (const auto& rf : row_factorizations) {
                for (const auto& cf : col_factorizations) {
                    TilingPlan p;
                    p.unit_cols = unit_cols;
                    size_t ri = 0, ci = 0;
                    for (int i = 0; i < 4; ++i) {
                        if (methods[i] == TileMethod::row)
                            p.per_level[i] = {TileMethod::row, rf[ri++]};
                        else if (methods[i] == TileMethod::col)
                            p.per_level[i] = {TileMethod::col, cf[ci++]};
                        else
                            p.per_level[i] = {TileMethod::none, 1};
                    }
                    plans.push_back(p);
                }
            }
            return;
        }
        for (TileMethod m : {TileMethod::none, TileMethod::row, TileMethod::col}) {
            methods[level] = m;
            assign(level + 1);
        }
    };
    assign(0);

    std::sort(plans.begin(), plans.end(), [](const TilingPlan& a, const TilingPlan& b) {
        return a.to_string() < b.to_string();
    });
    return plans;
}

SmvmCost cost_smvm(const TilingPlan& plan, const FlashTopology& topo,
                   const PlaneConfig& cfg, const TechParams& tech) {
    topo.validate();
    const auto& lv = plan.per_level;
    for (const auto& l : lv)
        if (l.count < 1) throw std::invalid_argument("cost_smvm: bad tile count");

    const int channels = lv[0].count;
    const int ways = lv[1].count;
    const int dies = lv[2].count;
    const int planes_per_die = lv[3].count;

    const double bw = topo.bus_bytes_per_sec;
    SmvmCost cost;

    // Inbound: the input vector is scattered across row-split levels and
    // broadcast along column splits; within a channel one bus occupancy
    // serves all listeners, channels fan out in parallel.
    const int padded_rows = plan.row_tile_product() * plan.unit_rows;
    const int ch_row_factor = (lv[0].method == TileMethod::row) ? lv[0].count : 1;
    cost.inbound_io = (static_cast<double>(padded_rows) / ch_row_factor) / bw;

    // PIM: the plan engages one plane per tile, all planes run in parallel.
    cost.pim = pim_latency(cfg, tech, 8).total;

    // Outbound. In-die drain at partial width, then channel buses, then
    // the controller's single ingress DMA with per-channel drain setup.
    const double tile_partial = static_cast<double>(plan.unit_cols) * topo.partial_bytes;
    const double tile_final = static_cast<double>(plan.unit_cols) * topo.final_bytes;

    double drain;
    if (topo.bus_topology == BusTopology::htree)
        drain = (ceil_log2(planes_per_die) + 1) * (tile_partial / bw);
    else
        drain = planes_per_die * (tile_partial / bw);

    const bool row_above_plane = lv[0].method == TileMethod::row ||
                                 lv[1].method == TileMethod::row ||
                                 lv[2].method == TileMethod::row;
    const int die_out_tiles = (lv[3].method == TileMethod::row) ? 1 : planes_per_die;
    const double die_tile_bytes = row_above_plane ? tile_partial : tile_final;

    const double ch_payload = static_cast<double>(ways) * dies * die_out_tiles * die_tile_bytes;
    const double total_bytes = static_cast<double>(channels) * ch_payload;
    cost.outbound_io = drain + channels * topo.channel_setup_s + total_bytes / bw;

    cost.total = std::max(cost.inbound_io, cost.pim) + cost.outbound_io;
    return cost;
}

std::optional<std::pair<TilingPlan, SmvmCost>> best_plan(int M, int N,
                                                         const FlashTopology& topo,
                                                         const PlaneConfig& cfg,
                                                         const TechParams& tech) {
    const auto plans = enumerate_plans(M, N, topo, cfg);
    if (plans.empty()) return std::nullopt;
    std::optional<std::pair<TilingPlan, SmvmCost>> best;
    for (const auto& p : plans) {
        const SmvmCost c = cost_smvm(p, topo, cfg, tech);
        if (!best || c.total < best->second.total ||
            (c.total == best->second.total && p.to_string() < best->first.to_string()))
            best = {p, c};
    }
    return best;
}

namespace {

PlaneConfig slc_plane(const PlaneConfig& cfg) {
    PlaneConfig slc = cfg;
    slc.bits_per_cell = 1;
    return slc;
}

struct DmvmGeom {
    int heads_per_die;
    int plane_pairs;
    int pages_per_plane;
    int channels_used;
};

DmvmGeom dmvm_geometry(int L, int d_h, int n_heads, const FlashTopology& topo,
                       const PlaneConfig& cfg) {
    if (L < 1 || d_h < 1 || n_heads < 1)
        throw std::invalid_argument("dmvm: L, d_h, n_heads must be >= 1");
    const int slc_dies = topo.slc_dies_total();
    if (slc_dies < 1) throw std::invalid_argument("dmvm: topology has no SLC dies");
    DmvmGeom g;
    g.heads_per_die = ceil_div(n_heads, slc_dies);
    if (g.heads_per_die > 2)
        throw std::invalid_argument("dmvm: more than two heads per SLC die");
    g.plane_pairs = topo.n_plane / 2;
    if (g.plane_pairs < 1) throw std::invalid_argument("dmvm: need at least 2 planes");

    const long long die_capacity_bytes =
        static_cast<long long>(topo.n_plane) * cfg.n_row * cfg.n_col * cfg.n_stack / 8;
    const long long kv_bytes_per_die = 2LL * L * d_h * g.heads_per_die;
    if (kv_bytes_per_die > die_capacity_bytes)
        throw std::invalid_argument("dmvm: KV cache exceeds SLC die capacity");

    const int page_bytes = cfg.n_col / 8;
    const int rows_per_pair = ceil_div(L, g.plane_pairs) * g.heads_per_die;
    g.pages_per_plane = std::max(1, ceil_div(rows_per_pair * d_h, page_bytes));
    g.channels_used = std::min(topo.n_channel, n_heads);
    return g;
}

}  // namespace

std::pair<DmvmMapping, DmvmLatency> map_qkt(int L, int d_h, int n_heads,
                                            const FlashTopology& topo,
                                            const PlaneConfig& cfg,
                                            const TechParams& tech) {
    topo.validate();
    const DmvmGeom g = dmvm_geometry(L, d_h, n_heads, topo, cfg);
    const double bw = topo.bus_bytes_per_sec;

    DmvmMapping m{DmvmKind::qkt, g.heads_per_die, L, d_h, g.plane_pairs};
    DmvmLatency lat;

    const int heads_per_channel = ceil_div(n_heads, g.channels_used);
    lat.inbound = heads_per_channel * static_cast<double>(d_h) / bw + topo.channel_setup_s;
    lat.kv_read = g.pages_per_plane * page_read_latency(slc_plane(cfg), tech);
    const double score_bytes = static_cast<double>(n_heads) * L * topo.final_bytes;
    lat.outbound = score_bytes / bw + g.channels_used * topo.channel_setup_s;
    lat.total = std::max(lat.inbound, lat.kv_read) + lat.outbound;
    return {m, lat};
}

std::pair<DmvmMapping, DmvmLatency> map_sv(int L, int d_h, int n_heads,
                                           const FlashTopology& topo,
                                           const PlaneConfig& cfg,
                                           const TechParams& tech) {
    topo.validate();
    const DmvmGeom g = dmvm_geometry(L, d_h, n_heads, topo, cfg);
    const double bw = topo.bus_bytes_per_sec;

    DmvmMapping m{DmvmKind::sv, g.heads_per_die, L, d_h, g.plane_pairs};
    DmvmLatency lat;

    const int heads_per_channel = ceil_div(n_heads, g.channels_used);
    lat.inbound = heads_per_channel * static_cast<double>(L) * topo.final_bytes / bw +
                  topo.channel_setup_s;
    lat.kv_read = g.pages_per_plane * page_read_latency(slc_plane(cfg), tech);
    const double out_bytes = static_cast<double>(n_heads) * d_h * 4;  // INT32 rows
    lat.outbound = out_bytes / bw + g.channels_used * topo.channel_setup_s;
    lat.total = std::max(lat.inbound, lat.kv_read) + lat.outbound;
    return {m, lat};
}

namespace {

// Pairwise tree accumulation of int32 vectors through RPU ALU passes.
std::vector<int32_t> rpu_tree_sum(std::vector<std::vector<int32_t>> operands) {
    RpuOp alu{RpuMode::alu, 16, 0};
    while (operands.size() > 1) {
        std::vector<std::vector<int32_t>> next;
        for (size_t i = 0; i + 1 < operands.size(); i += 2)
            next.push_back(rpu_apply(alu, operands[i], operands[i + 1]));
        if (operands.size() % 2 == 1) next.push_back(operands.back());
        operands = std::move(next);
    }
    return operands.front();
}

void check_int16(int32_t v, const char* what) {
    if (v < -32768 || v > 32767)
        throw std::invalid_argument(std::string(what) + ": operand exceeds INT16 range");
}

}  // namespace

std::vector<int64_t> qkt_compute(const std::vector<int32_t>& q,
                                 const std::vector<std::vector<int32_t>>& K) {
    if (K.empty()) throw std::invalid_argument("qkt_compute: empty K");
    RpuOp alu{RpuMode::alu, 16, 0};
    std::vector<int64_t> scores;
    scores.reserve(K.size());
    for (const auto& row : K) {
        if (row.size() != q.size())
            throw std::invalid_argument("qkt_compute: dimension mismatch");
        std::vector<int32_t> acc(q.size());
        for (size_t i = 0; i < q.size(); ++i) {
            check_int16(q[i], "qkt_compute");
            check_int16(row[i], "qkt_compute");
            acc[i] = q[i] * row[i];
        }
        // lane-halving accumulation through the RPU adders
        while (acc.size() > 1) {
            const size_t half = acc.size() / 2;
            std::vector<int32_t> a(acc.begin(), acc.begin() + half);
            std::vector<int32_t> b(acc.begin() + half, acc.begin() + 2 * half);
            std::vector<int32_t> merged = rpu_apply(alu, a, b);
            if (acc.size() % 2 == 1) merged.push_back(acc.back());
            acc = std::move(merged);
        }
        scores.push_back(acc[0]);
    }
    return scores;
}

std::vector<int64_t> sv_compute(const std::vector<int32_t>& S,
                                const std::vector<std::vector<int32_t>>& V) {
    if (S.size() != V.size())
        throw std::invalid_argument("sv_compute: dimension mismatch");
    if (V.empty()) throw std::invalid_argument("sv_compute: empty V");
    const size_t d = V[0].size();
    std::vector<std::vector<int32_t>> partials;
    partials.reserve(S.size());
    for (size_t l = 0; l < S.size(); ++l) {
        if (V[l].size() != d) throw std::invalid_argument("sv_compute: ragged V");
        check_int16(S[l], "sv_compute");
        std::vector<int32_t> row(d);
        for (size_t j = 0; j < d; ++j) {
            check_int16(V[l][j], "sv_compute");
            row[j] = S[l] * V[l][j];
        }
        partials.push_back(std::move(row));
    }
    const auto acc = rpu_tree_sum(std::move(partials));
    return std::vector<int64_t>(acc.begin(), acc.end());
}

std::vector<int64_t> tiled_mvm(const Mat8& w, const InputVector& x,
                               const TilingPlan& plan, const PlaneConfig& cfg) {
    x.validate();
    if (static_cast<int>(x.values.size()) != w.rows)
        throw std::invalid_argument("tiled_mvm: dimension mismatch");
    const int R = ceil_div(w.rows, plan.unit_rows);
    const int C = ceil_div(w.cols, plan.unit_cols);
    if (plan.row_tile_product() != R || plan.col_tile_product() != C)
        throw std::invalid_argument("tiled_mvm: plan does not cover the tile grid");

    const AdcModel ideal{9, AdcMode::ideal, 1920};
    std::vector<int64_t> out(w.cols, 0);
    for (int rt = 0; rt < R; ++rt) {
        const int r0 = rt * plan.unit_rows;
        const int rows = std::min(plan.unit_rows, w.rows - r0);
        InputVector xs;
        xs.bit_width = x.bit_width;
        xs.values.assign(x.values.begin() + r0, x.values.begin() + r0 + rows);
        for (int ct = 0; ct < C; ++ct) {
            const int c0 = ct * plan.unit_cols;
            const int cols = std::min(plan.unit_cols, w.cols - c0);
            Mat8 block = make_mat8(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) block.at(r, c) = w.at(r0 + r, c0 + c);
            const auto partial = pim_dot_product(pack_weights(block), xs, ideal);
            for (int c = 0; c < cols; ++c) out[c0 + c] += partial[c];  // row tiles accumulate
        }
    }
    return out;
}

}  // namespace flashpim
