#pragma once

#include <optional>
#include <string>
#include <vector>

#include "flashpim/interconnect.hpp"
#include "flashpim/tech_model.hpp"

namespace flashpim {

enum class SweepAxis { n_row, n_col, n_stack };

struct SweepSpec {
    SweepAxis axis = SweepAxis::n_col;
    std::vector<int> values;  // nonempty, ascending
    PlaneConfig base;         // the two fixed dimensions

    void validate() const;
};

struct SweepRow {
    PlaneConfig cfg;
    LatencyBreakdown latency;  // 8-bit-input PIM composition
    EnergyBreakdown energy;    // one bit pass, 128 active rows
    double density = 0;        // Gb/mm^2
};

struct AreaReport {
    double plane_area_mm2 = 0;
    double total_pim_area_mm2 = 0;
    double budget_low_mm2 = 5.6;
    double budget_high_mm2 = 7.5;
    double hv_peri_ratio = 0;
    double lv_peri_ratio = 0;
    double rpu_htree_ratio = 0;
    double hv_peri_mm2 = 0;
    double lv_peri_mm2 = 0;
    double rpu_htree_mm2 = 0;
    double peripheral_total_ratio = 0;
};

SweepSpec default_sweep(SweepAxis axis);

/// Baseline configuration the sweeps pivot around (256 x 1024 x 128).
PlaneConfig sweep_baseline();

std::vector<SweepRow> run_sweep(const SweepSpec& spec, const TechParams& tech);

/// CSV with unit-carrying headers, '.' decimal separator.
std::string sweep_to_csv(const std::vector<SweepRow>& rows);

/// Highest-density candidate meeting the PIM latency budget (8-bit
/// inputs); ties break toward lower latency. Empty when no candidate
/// meets the budget.
std::optional<PlaneConfig> select_plane(const std::vector<PlaneConfig>& candidates,
                                        double latency_budget_s, const TechParams& tech);

/// Union of the three default sweeps: the plane-selection search space.
std::vector<PlaneConfig> default_selection_candidates();

/// Footprint of the PIM arrays of one die plus the fixed peripheral
/// ratios of the under-array circuits.
AreaReport area_report(const PlaneConfig& cfg, const FlashTopology& topo,
                       const TechParams& tech);

}  // namespace flashpim
