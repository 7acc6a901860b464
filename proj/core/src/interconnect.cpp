#include "flashpim/interconnect.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace flashpim {

void FlashTopology::validate() const {
    if (n_channel < 1 || n_way < 1 || n_die < 1 || n_plane < 1)
        throw std::invalid_argument("FlashTopology: counts must be >= 1");
    if (slc_dies_per_way + qlc_dies_per_way != n_die)
        throw std::invalid_argument("FlashTopology: slc + qlc dies must equal n_die");
    if (slc_dies_per_way < 0 || qlc_dies_per_way < 0)
        throw std::invalid_argument("FlashTopology: die partition must be non-negative");
    if (!(bus_bytes_per_sec > 0) || !(rpu_clock_hz > 0) || !(slc_write_bytes_per_sec > 0))
        throw std::invalid_argument("FlashTopology: rates must be > 0");
    if (mux_ratio < 1)
        throw std::invalid_argument("FlashTopology: mux_ratio must be >= 1");
    if (partial_bytes < 1 || final_bytes < 1)
        throw std::invalid_argument("FlashTopology: transfer widths must be >= 1");
    if (channel_setup_s < 0)
        throw std::invalid_argument("FlashTopology: channel_setup_s must be >= 0");
}

BusSimResult simulate_shared_bus(int n_planes, double per_plane_pim_s,
                                 double out_bytes_per_plane, const FlashTopology& topo,
                                 bool record_trace) {
    topo.validate();
    if (n_planes < 1)
        throw std::invalid_argument("simulate_shared_bus: n_planes must be >= 1");
    const double t_io = topo.transfer_s(out_bytes_per_plane);
    BusSimResult res;
    double bus_free = 0;
    for (int p = 0; p < n_planes; ++p) {
        const double pim_start = p * t_io;  // stagger by one transfer slot
        const double pim_end = pim_start + per_plane_pim_s;
        const double xfer_start = std::max(pim_end, bus_free);
        const double xfer_end = xfer_start + t_io;
        bus_free = xfer_end;
        res.total_s = xfer_end;
        if (record_trace) {
            res.events.push_back({"pim", p, pim_start, pim_end});
            res.events.push_back({"xfer", p, xfer_start, xfer_end});
        }
    }
    return res;
}

BusSimResult simulate_htree(int n_planes, double per_plane_pim_s,
                            double out_bytes_per_plane, const FlashTopology& topo,
                            bool reduce, bool record_trace) {
    topo.validate();
    if (n_planes < 1)
        throw std::invalid_argument("simulate_htree: n_planes must be >= 1");

    int padded = 1;
    int levels = 0;
    while (padded < n_planes) {
        padded <<= 1;
        ++levels;
    }

    const double t_io = topo.transfer_s(out_bytes_per_plane);
    BusSimResult res;

    if (record_trace)
        for (int p = 0; p < n_planes; ++p)
            res.events.push_back({"pim", p, 0.0, per_plane_pim_s});

    if (reduce) {
        // One vector per link per level; the level completes when its
        // slowest link finishes. Padded leaves contribute zero vectors
        // at no cost. RPU accumulation streams behind the transfer.
        double t = per_plane_pim_s + t_io;  // leaf vectors onto level-1 links
        if (record_trace)
            res.events.push_back({"xfer", 0, per_plane_pim_s, t});
        for (int l = 0; l < levels; ++l) {
            const double start = t;
            t += t_io;
            if (record_trace) res.events.push_back({"reduce", l + 1, start, t});
        }
        res.total_s = t;
    } else {
        // Stream mode: every leaf vector crosses the root link.
        double t = per_plane_pim_s;
        for (int p = 0; p < n_planes; ++p) {
            const double start = std::max(t, per_plane_pim_s);
            const double end = start + t_io;
            if (record_trace) res.events.push_back({"xfer", p, start, end});
            t = end;
        }
        res.total_s = t;
    }
    return res;
}

std::vector<int32_t> rpu_apply(const RpuOp& op, const std::vector<int32_t>& a,
                               const std::vector<int32_t>& b) {
    if (op.mode == RpuMode::stream) return a;
    if (a.size() != b.size())
        throw std::invalid_argument("rpu_apply: operand length mismatch");
    if (op.vector_len > 0 && a.size() != static_cast<size_t>(op.vector_len))
        throw std::invalid_argument("rpu_apply: operand length != vector_len");
    std::vector<int32_t> out(a.size());
    for (size_t i = 0; i < a.size(); ++i) {
        const int64_t s = static_cast<int64_t>(a[i]) + b[i];
        if (s > std::numeric_limits<int32_t>::max() || s < std::numeric_limits<int32_t>::min())
            throw std::overflow_error("rpu_apply: 32-bit accumulator saturation");
        out[i] = static_cast<int32_t>(s);
    }
    return out;
}

std::string trace_to_csv(const std::vector<TransferEvent>& events) {
    std::string out = "event,plane,start_ns,end_ns\n";
    char line[128];
    for (const auto& e : events) {
        std::snprintf(line, sizeof(line), "%s,%d,%.4f,%.4f\n", e.kind.c_str(), e.plane,
                      e.start * 1e9, e.end * 1e9);
        out += line;
    }
    return out;
}

void write_trace_csv(const std::vector<TransferEvent>& events, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("write_trace_csv: cannot open " + path);
    f << trace_to_csv(events);
}

}  // namespace flashpim
