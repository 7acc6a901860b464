#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace flashpim {

enum class BusTopology { shared, htree };

/// Channel/way/die/plane hierarchy with bus and RPU parameters.
/// Defaults follow the reference device: 8 channels, 4 ways per channel,
/// 8 dies per way (2 SLC + 6 QLC), 256 planes per die, 2 GB/s buses,
/// 250 MHz RPUs.
struct FlashTopology {
    int n_channel = 8;
    int n_way = 4;
    int n_die = 8;    // per way
    int n_plane = 256;  // per die
    double bus_bytes_per_sec = 2.0e9;
    BusTopology bus_topology = BusTopology::htree;
    int slc_dies_per_way = 2;
    int qlc_dies_per_way = 6;
    double rpu_clock_hz = 2.5e8;
    int mux_ratio = 4;

    // controller-side costs of draining a channel through the single
    // ingress DMA engine
    double channel_setup_s = 2.0e-7;

    // transfer widths per element: partial sums move at RPU width,
    // completed outputs requantize to activation width
    int partial_bytes = 2;
    int final_bytes = 1;

    double slc_write_bytes_per_sec = 5.9e9;  // aggregated sequential write

    void validate() const;

    int dies_total() const { return n_channel * n_way * n_die; }
    int slc_dies_total() const { return n_channel * n_way * slc_dies_per_way; }
    int qlc_dies_total() const { return n_channel * n_way * qlc_dies_per_way; }
    long long qlc_planes_total() const {
        return static_cast<long long>(qlc_dies_total()) * n_plane;
    }
    double transfer_s(double bytes) const { return bytes / bus_bytes_per_sec; }
};

struct TransferEvent {
    std::string kind;  // "pim", "xfer", "reduce"
    int plane = 0;     // source plane id (tree level encoded for reduce)
    double start = 0;
    double end = 0;
};

enum class RpuMode { alu, stream };

struct RpuOp {
    RpuMode mode = RpuMode::alu;
    int operand_width = 16;  // bits of the multiplier datapath
    int vector_len = 0;
};

struct BusSimResult {
    double total_s = 0;
    std::vector<TransferEvent> events;
};

/// Pipelined PIM over a single shared bus: plane i starts PIM at
/// i * t_io so output transfers serialize back to back.
BusSimResult simulate_shared_bus(int n_planes, double per_plane_pim_s,
                                 double out_bytes_per_plane,
                                 const FlashTopology& topo,
                                 bool record_trace = false);

/// Pipelined PIM over the in-die H-tree. With reduce, RPUs pairwise
/// accumulate at each level so one vector leaves the root; in stream
/// mode all leaf vectors pass through unmodified. Levels forward
/// store-and-forward at link bandwidth; RPU throughput is hidden.
/// Non-power-of-two plane counts pad with zero-contributing leaves.
BusSimResult simulate_htree(int n_planes, double per_plane_pim_s,
                            double out_bytes_per_plane, const FlashTopology& topo,
                            bool reduce, bool record_trace = false);

/// ALU mode: elementwise a+b with 32-bit accumulation, overflow is an
/// error. Stream mode: returns a unchanged.
std::vector<int32_t> rpu_apply(const RpuOp& op, const std::vector<int32_t>& a,
                               const std::vector<int32_t>& b);

void write_trace_csv(const std::vector<TransferEvent>& events, const std::string& path);
std::string trace_to_csv(const std::vector<TransferEvent>& events);

}  // namespace flashpim
