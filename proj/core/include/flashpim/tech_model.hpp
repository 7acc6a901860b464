#pragma once

#include <cstdint>

namespace flashpim {

/// Geometric configuration of one 3D NAND plane.
/// n_row counts bitline-select lines (rows of strings), n_col counts
/// bitlines (page width in bits), n_stack counts vertical WL layers.
struct PlaneConfig {
    int n_row = 256;
    int n_col = 2048;
    int n_stack = 128;
    int bits_per_cell = 4;  // 1 = SLC, 4 = QLC

    void validate(int rows_per_block = 4) const;
};

/// Per-unit electrical and geometric parameters plus fixed latencies.
/// All values SI. Defaults are calibrated; see configs/default.ini.
struct TechParams {
    // resistances / capacitances per structural unit
    double r_bl_per_row = 326.19;       // ohm/row
    double c_bl_per_row = 2.0e-16;      // F/row
    double r_bls_per_col = 24.6942;     // ohm/col
    double c_bls_per_col = 2.0e-17;     // F/col
    double c_cell_per_col = 1.36585e-15;   // F/col, WL cell-region load
    double c_stair_per_stack = 8.19510e-15; // F/stack, staircase load
    double c_string = 2.0e-16;          // F, one string's load on a BL
    double c_inv = 1.26042e-15;         // F, one precharge transistor gate
    double r_s = 5000.0;                // ohm, pass/switch transistor

    // voltages
    double v_pre = 1.0;
    double v_pass = 6.0;
    double v_read = 2.0;

    // flat latencies
    double t_sense = 85e-9;
    double t_dis = 43e-9;
    double t_accum = 65e-9;

    // per-column energies; accumulation carries a MUX-load multiplier
    // linear in n_col (e_accum_mux_slope_per_col)
    double e_sense_per_col = 5.0e-14;
    double e_accum_per_col = 2.5e-14;
    double e_accum_mux_slope_per_col = 4.8828125e-4;  // 1/2048

    double horowitz_k = 3.0e4;  // calibration constant of h(tau)=k*tau^1.5

    // geometry
    double l_cell_per_col = 3.713684e-8;      // m/col
    double l_staircase_per_stack = 2.376758e-6;  // m/stack
    double w_per_row = 2.0e-7;                // m/row

    double alpha_input = 0.5;  // input bit sparsity, in [0,1]

    int rows_per_block = 4;

    void validate() const;
};

/// Lumped RC values derived from a plane configuration.
struct RcSet {
    double r_bl = 0;
    double c_bl = 0;
    double r_bls = 0;
    double c_bls = 0;
    double c_cell = 0;
    double c_stair = 0;
};

struct LatencyBreakdown {
    double t_dec_wl = 0;
    double t_dec_bls = 0;
    double t_pre = 0;
    double t_sense = 0;
    double t_accum = 0;
    double t_dis = 0;
    double total = 0;
};

struct EnergyBreakdown {
    double e_pre = 0;
    double e_dec_bls = 0;
    double e_dec_wl = 0;
    double e_sense = 0;
    double e_accum = 0;
    double total = 0;
};

/// h(tau) = horowitz_k * tau^1.5. Throws std::domain_error for tau < 0.
double horowitz_delay(const TechParams& tech, double tau);

RcSet derive_rc(const PlaneConfig& cfg, const TechParams& tech);

/// Component latencies for one array operation. `total` is the
/// single-bit-pass PIM composition (pim_latency with b_input = 1).
LatencyBreakdown latency_components(const PlaneConfig& cfg, const TechParams& tech);

/// t_decWL + max(t_decBLS, t_pre) + t_sense + t_dis
double page_read_latency(const PlaneConfig& cfg, const TechParams& tech);

/// t_decWL + (max(t_decBLS, t_pre) + t_sense + t_accum + t_dis) * b_input
LatencyBreakdown pim_latency(const PlaneConfig& cfg, const TechParams& tech,
                             int b_input);

/// Energies for one PIM bit pass (or one page read) with n_row_active
/// simultaneously driven rows.
EnergyBreakdown energy_components(const PlaneConfig& cfg, const TechParams& tech,
                                  int n_row_active = 128);

/// Cell density in binary Gb (2^30 bits) per mm^2.
double cell_density(const PlaneConfig& cfg, const TechParams& tech);

/// Plane footprint W * (L_cell + L_staircase) in m^2.
double plane_area_m2(const PlaneConfig& cfg, const TechParams& tech);

/// Conventional plane size used as the baseline configuration:
/// 1400 blocks x 4 rows, 4KB page, 128 stacks.
PlaneConfig conventional_plane();

}  // namespace flashpim
