#include "flashpim/dse.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace flashpim {

void SweepSpec::validate() const {
    if (values.empty()) throw std::invalid_argument("SweepSpec: values must be nonempty");
    for (size_t i = 1; i < values.size(); ++i)
        if (values[i] <= values[i - 1])
            throw std::invalid_argument("SweepSpec: values must be ascending");
}

PlaneConfig sweep_baseline() {
    PlaneConfig base;
    base.n_row = 256;
    base.n_col = 1024;
    base.n_stack = 128;
    base.bits_per_cell = 4;
    return base;
}

SweepSpec default_sweep(SweepAxis axis) {
    SweepSpec s;
    s.axis = axis;
    s.base = sweep_baseline();
    switch (axis) {
        case SweepAxis::n_row: s.values = {64, 128, 256, 512, 1024}; break;
        case SweepAxis::n_col: s.values = {512, 1024, 2048, 4096, 8192}; break;
        case SweepAxis::n_stack: s.values = {32, 64, 128, 256}; break;
    }
    return s;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const TechParams& tech) {
    spec.validate();
    std::vector<SweepRow> rows;
    rows.reserve(spec.values.size());
    for (int v : spec.values) {
        SweepRow row;
        row.cfg = spec.base;
        switch (spec.axis) {
            case SweepAxis::n_row: row.cfg.n_row = v; break;
            case SweepAxis::n_col: row.cfg.n_col = v; break;
            case SweepAxis::n_stack: row.cfg.n_stack = v; break;
        }
        row.latency = pim_latency(row.cfg, tech, 8);
        row.energy = energy_components(row.cfg, tech, std::min(128, row.cfg.n_row));
        row.density = cell_density(row.cfg, tech);
        rows.push_back(row);
    }
    return rows;
}

std::string sweep_to_csv(const std::vector<SweepRow>& rows) {
    std::string out =
        "n_row,n_col,n_stack,bits_per_cell,"
        "t_dec_wl_us,t_dec_bls_us,t_pre_us,t_sense_us,t_accum_us,t_dis_us,t_pim_us,"
        "e_pre_nj,e_dec_bls_nj,e_dec_wl_nj,e_sense_nj,e_accum_nj,e_total_nj,"
        "density_gb_mm2\n";
    char line[512];
    for (const auto& r : rows) {
        std::snprintf(line, sizeof(line),
                      "%d,%d,%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n",
                      r.cfg.n_row, r.cfg.n_col, r.cfg.n_stack, r.cfg.bits_per_cell,
                      r.latency.t_dec_wl * 1e6, r.latency.t_dec_bls * 1e6,
                      r.latency.t_pre * 1e6, r.latency.t_sense * 1e6,
                      r.latency.t_accum * 1e6, r.latency.t_dis * 1e6,
                      r.latency.total * 1e6, r.energy.e_pre * 1e9,
                      r.energy.e_dec_bls * 1e9, r.energy.e_dec_wl * 1e9,
                      r.energy.e_sense * 1e9, r.energy.e_accum * 1e9,
                      r.energy.total * 1e9, r.density);
        out += line;
    }
    return out;
}

std::optional<PlaneConfig> select_plane(const std::vector<PlaneConfig>& candidates,
                                        double latency_budget_s, const TechParams& tech) {
    if (candidates.empty())
        throw std::invalid_argument("select_plane: empty candidate list");
    std::optional<PlaneConfig> best;
    double best_density = -1;
    double best_latency = 0;
    for (const auto& c : candidates) {
        const double lat = pim_latency(c, tech, 8).total;
        if (lat > latency_budget_s) continue;
        const double den = cell_density(c, tech);
        if (den > best_density || (den == best_density && lat < best_latency)) {
            best = c;
            best_density = den;
            best_latency = lat;
        }
    }
    return best;
}

std::vector<PlaneConfig> default_selection_candidates() {
    std::vector<PlaneConfig> out;
    for (SweepAxis axis : {SweepAxis::n_row, SweepAxis::n_col, SweepAxis::n_stack}) {
        const SweepSpec s = default_sweep(axis);
        for (int v : s.values) {
            PlaneConfig c = s.base;
            switch (axis) {
                case SweepAxis::n_row: c.n_row = v; break;
                case SweepAxis::n_col: c.n_col = v; break;
                case SweepAxis::n_stack: c.n_stack = v; break;
            }
            const bool dup = std::any_of(out.begin(), out.end(), [&](const PlaneConfig& o) {
                return o.n_row == c.n_row && o.n_col == c.n_col && o.n_stack == c.n_stack;
            });
            if (!dup) out.push_back(c);
        }
    }
    return out;
}

AreaReport area_report(const PlaneConfig& cfg, const FlashTopology& topo,
                       const TechParams& tech) {
    topo.validate();
    AreaReport r;
    r.plane_area_mm2 = plane_area_m2(cfg, tech) * 1e6;
    r.total_pim_area_mm2 = r.plane_area_mm2 * topo.n_plane;
    // measured under-array circuit shares of the plane footprint
    r.hv_peri_ratio = 0.2162;
    r.lv_peri_ratio = 0.2316;
    r.rpu_htree_ratio = 0.0039;
    r.hv_peri_mm2 = r.hv_peri_ratio * r.plane_area_mm2;
    r.lv_peri_mm2 = r.lv_peri_ratio * r.plane_area_mm2;
    r.rpu_htree_mm2 = r.rpu_htree_ratio * r.plane_area_mm2;
    r.peripheral_total_ratio = r.hv_peri_ratio + r.lv_peri_ratio + r.rpu_htree_ratio;
    return r;
}

}  // namespace flashpim
