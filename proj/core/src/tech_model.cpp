#include "flashpim/tech_model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace flashpim {

void PlaneConfig::validate(int rows_per_block) const {
    if (n_row < 1 || n_col < 1 || n_stack < 1)
        throw std::invalid_argument("PlaneConfig: dimensions must be >= 1");
    if (bits_per_cell != 1 && bits_per_cell != 4)
        throw std::invalid_argument("PlaneConfig: bits_per_cell must be 1 or 4");
    if (rows_per_block > 0 && n_row % rows_per_block != 0)
        throw std::invalid_argument("PlaneConfig: n_row must be a multiple of " +
                                    std::to_string(rows_per_block) + " rows per block");
}

void TechParams::validate() const {
    const double pos[] = {r_bl_per_row, c_bl_per_row, r_bls_per_col, c_bls_per_col,
                          c_cell_per_col, c_stair_per_stack, c_string, c_inv, r_s,
                          v_pre, v_pass, v_read, t_sense, t_dis, t_accum,
                          e_sense_per_col, e_accum_per_col, horowitz_k,
                          l_cell_per_col, l_staircase_per_stack, w_per_row};
    for (double v : pos)
        if (!(v > 0.0))
            throw std::invalid_argument("TechParams: R/C/L/W/t/V/E values must be > 0");
    if (alpha_input < 0.0 || alpha_input > 1.0)
        throw std::invalid_argument("TechParams: alpha_input must be in [0,1]");
    if (e_accum_mux_slope_per_col < 0.0)
        throw std::invalid_argument("TechParams: e_accum_mux_slope_per_col must be >= 0");
}

double horowitz_delay(const TechParams& tech, double tau) {
    if (tau < 0.0)
        throw std::domain_error("horowitz_delay: negative time constant");
    return tech.horowitz_k * tau * std::sqrt(tau);
}

RcSet derive_rc(const PlaneConfig& cfg, const TechParams& tech) {
    cfg.validate(tech.rows_per_block);
    tech.validate();
    RcSet rc;
    rc.r_bl = tech.r_bl_per_row * cfg.n_row;
    rc.c_bl = tech.c_bl_per_row * cfg.n_row;
    rc.r_bls = tech.r_bls_per_col * cfg.n_col;
    rc.c_bls = tech.c_bls_per_col * cfg.n_col;
    rc.c_cell = tech.c_cell_per_col * cfg.n_col;
    rc.c_stair = tech.c_stair_per_stack * cfg.n_stack;
    return rc;
}

LatencyBreakdown latency_components(const PlaneConfig& cfg, const TechParams& tech) {
    const RcSet rc = derive_rc(cfg, tech);
    LatencyBreakdown lb;
    lb.t_pre = horowitz_delay(tech, tech.r_s * cfg.n_col * tech.c_inv) +
               horowitz_delay(tech, rc.r_bl * (rc.c_bl / 2.0 + tech.c_string));
    lb.t_dec_bls = horowitz_delay(tech, rc.r_bls * rc.c_bls / 2.0);
    lb.t_dec_wl = horowitz_delay(tech, tech.r_s * (rc.c_cell + rc.c_stair));
    lb.t_sense = tech.t_sense;
    lb.t_accum = tech.t_accum;
    lb.t_dis = tech.t_dis;
    lb.total = lb.t_dec_wl + std::max(lb.t_dec_bls, lb.t_pre) + lb.t_sense +
               lb.t_accum + lb.t_dis;
    return lb;
}

double page_read_latency(const PlaneConfig& cfg, const TechParams& tech) {
    const LatencyBreakdown lb = latency_components(cfg, tech);
    return lb.t_dec_wl + std::max(lb.t_dec_bls, lb.t_pre) + lb.t_sense + lb.t_dis;
}

LatencyBreakdown pim_latency(const PlaneConfig& cfg, const TechParams& tech,
                             int b_input) {
    if (b_input < 1)
        throw std::invalid_argument("pim_latency: b_input must be >= 1");
    LatencyBreakdown lb = latency_components(cfg, tech);
    lb.total = lb.t_dec_wl +
               (std::max(lb.t_dec_bls, lb.t_pre) + lb.t_sense + lb.t_accum + lb.t_dis) *
                   static_cast<double>(b_input);
    return lb;
}

EnergyBreakdown energy_components(const PlaneConfig& cfg, const TechParams& tech,
                                  int n_row_active) {
    const RcSet rc = derive_rc(cfg, tech);
    if (n_row_active < 1 || n_row_active > cfg.n_row)
        throw std::invalid_argument("energy_components: n_row_active must be in [1, n_row]");
    EnergyBreakdown eb;
    eb.e_pre = cfg.n_col * tech.v_pre * tech.v_pre *
               (rc.c_bl + tech.c_string * n_row_active * (1.0 - tech.alpha_input));
    eb.e_dec_bls = n_row_active * tech.v_pass * tech.v_pass * rc.c_bls;
    eb.e_dec_wl = (tech.v_read * tech.v_read + tech.v_pass * tech.v_pass) *
                  (rc.c_cell + rc.c_stair);
    eb.e_sense = tech.e_sense_per_col * cfg.n_col;
    eb.e_accum = tech.e_accum_per_col * cfg.n_col *
                 (1.0 + tech.e_accum_mux_slope_per_col * cfg.n_col);
    eb.total = eb.e_pre + eb.e_dec_bls + eb.e_dec_wl + eb.e_sense + eb.e_accum;
    return eb;
}

double plane_area_m2(const PlaneConfig& cfg, const TechParams& tech) {
    cfg.validate(tech.rows_per_block);
    const double l_cell = tech.l_cell_per_col * cfg.n_col;
    const double l_stair = tech.l_staircase_per_stack * cfg.n_stack;
    const double w = tech.w_per_row * cfg.n_row;
    return w * (l_cell + l_stair);
}

double cell_density(const PlaneConfig& cfg, const TechParams& tech) {
    const double l_cell = tech.l_cell_per_col * cfg.n_col;
    const double l_stair = tech.l_staircase_per_stack * cfg.n_stack;
    const double w = tech.w_per_row * cfg.n_row;
    const double bits_per_m2 =
        static_cast<double>(cfg.n_col) * cfg.n_stack * cfg.bits_per_cell /
        (l_cell + l_stair) * (cfg.n_row / w);
    const double gib = 1073741824.0;  // 2^30
    return bits_per_m2 / gib / 1e6;   // -> Gb/mm^2 (binary Gb)
}

PlaneConfig conventional_plane() {
    PlaneConfig c;
    c.n_row = 5600;   // 1400 blocks x 4 rows per block
    c.n_col = 32768;  // 4KB page
    c.n_stack = 128;
    c.bits_per_cell = 4;
    return c;
}

}  // namespace flashpim
