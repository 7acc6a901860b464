#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "flashpim/interconnect.hpp"

using namespace flashpim;

namespace {
// relative-tolerance comparison; doctest's default Approx carries an
// absolute scale of 1.0 which is useless for values in SI seconds/joules
doctest::Approx rel(double v, double eps = 1e-9) {
    return rel(v, eps).scale(0.0);
}
}  // namespace

TEST_CASE("topology defaults and validation") {
    FlashTopology t;
    CHECK_NOTHROW(t.validate());
    CHECK(t.n_channel == 8);
    CHECK(t.n_way == 4);
    CHECK(t.n_die == 8);
    CHECK(t.slc_dies_per_way == 2);
    CHECK(t.qlc_dies_per_way == 6);
    CHECK(t.n_plane == 256);
    CHECK(t.bus_bytes_per_sec == rel(2e9));
    CHECK(t.rpu_clock_hz == rel(2.5e8));

    FlashTopology bad = t;
    bad.slc_dies_per_way = 3;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("shared bus basics") {
    FlashTopology topo;
    // one plane: PIM plus one uncontended transfer
    const double one = simulate_shared_bus(1, 2e-6, 512, topo).total_s;
    CHECK(one == rel(2e-6 + 512 / 2e9));

    // the reference transfer slot: 128 bytes at 2 GB/s = 64 ns
    CHECK(topo.transfer_s(128) == rel(64e-9));

    // serialized transfers dominate once n * t_io > pim
    const int n = 64;
    const double pim = 2e-6, bytes = 512;
    const double t_io = bytes / 2e9;
    const double total = simulate_shared_bus(n, pim, bytes, topo).total_s;
    CHECK(total == rel(pim + n * t_io));  // max(pim, n*t_io) + fill
    CHECK(total >= std::max(pim, n * t_io));
}

TEST_CASE("htree degenerates to the shared bus for one plane") {
    FlashTopology topo;
    const double sh = simulate_shared_bus(1, 1.5e-6, 256, topo).total_s;
    const double ht = simulate_htree(1, 1.5e-6, 256, topo, true).total_s;
    CHECK(sh == rel(ht));
}

TEST_CASE("htree with reduce never slower than shared bus") {
    FlashTopology topo;
    std::mt19937 rng(31);
    std::uniform_int_distribution<int> planes(2, 256);
    std::uniform_real_distribution<double> pim(1e-7, 1e-5), bytes(1, 4096);
    for (int i = 0; i < 200; ++i) {
        const int n = planes(rng);
        const double p = pim(rng), b = bytes(rng);
        const double sh = simulate_shared_bus(n, p, b, topo).total_s;
        const double ht = simulate_htree(n, p, b, topo, true).total_s;
        CHECK(ht <= sh + 1e-15);
    }
}

TEST_CASE("traffic conservation at the die port") {
    FlashTopology topo;
    const int n = 16;
    const double bytes = 512;

    // reduce: one vector leaves the root
    const auto red = simulate_htree(n, 2e-6, bytes, topo, true, true);
    double root_bytes = 0;
    for (const auto& e : red.events)
        if (e.kind == "reduce" || e.kind == "xfer")
            root_bytes = bytes;  // all transfers carry one tile; last one exits
    CHECK(root_bytes == bytes);

    // stream: every leaf vector crosses the root
    const auto str = simulate_htree(n, 2e-6, bytes, topo, false, true);
    int crossings = 0;
    for (const auto& e : str.events)
        if (e.kind == "xfer") ++crossings;
    CHECK(crossings == n);

    const auto sh = simulate_shared_bus(n, 2e-6, bytes, topo, true);
    crossings = 0;
    for (const auto& e : sh.events)
        if (e.kind == "xfer") ++crossings;
    CHECK(crossings == n);
}

TEST_CASE("pipelining bounds") {
    FlashTopology topo;
    const int n = 37;  // padding path: not a power of two
    const double pim = 3e-6, bytes = 777;
    const double t_io = topo.transfer_s(bytes);
    const int levels = 6;  // ceil(log2 37)
    const double ht = simulate_htree(n, pim, bytes, topo, true).total_s;
    const double sh = simulate_shared_bus(n, pim, bytes, topo).total_s;
    CHECK(ht <= pim + n * t_io + levels * t_io);
    CHECK(ht >= std::max(pim, t_io));
    CHECK(sh >= std::max(pim, n * t_io));
}

TEST_CASE("deterministic replay produces identical traces") {
    FlashTopology topo;
    const auto a = simulate_htree(64, 2e-6, 128, topo, true, true);
    const auto b = simulate_htree(64, 2e-6, 128, topo, true, true);
    CHECK(trace_to_csv(a.events) == trace_to_csv(b.events));
    CHECK(a.total_s == b.total_s);

    const auto c = simulate_shared_bus(64, 2e-6, 128, topo, true);
    const auto d = simulate_shared_bus(64, 2e-6, 128, topo, true);
    CHECK(trace_to_csv(c.events) == trace_to_csv(d.events));
}

TEST_CASE("trace event timing invariant") {
    FlashTopology topo;
    const double bytes = 640;
    const auto r = simulate_shared_bus(8, 1e-6, bytes, topo, true);
    for (const auto& e : r.events) {
        CHECK(e.end >= e.start);
        if (e.kind == "xfer")
            CHECK(e.end - e.start == rel(bytes / topo.bus_bytes_per_sec));
    }
}

TEST_CASE("rpu alu and stream modes") {
    RpuOp alu{RpuMode::alu, 16, 0};
    CHECK(rpu_apply(alu, {1, 2}, {3, 4}) == std::vector<int32_t>{4, 6});

    RpuOp stream{RpuMode::stream, 16, 0};
    const std::vector<int32_t> x{9, 8, 7};
    CHECK(rpu_apply(stream, x, {}) == x);

    CHECK_THROWS_AS(rpu_apply(alu, {1, 2}, {3}), std::invalid_argument);

    RpuOp sized{RpuMode::alu, 16, 3};
    CHECK_THROWS_AS(rpu_apply(sized, {1, 2}, {3, 4}), std::invalid_argument);
}

TEST_CASE("rpu accumulation of 1K products matches a wide-integer oracle") {
    std::mt19937 rng(32);
    std::uniform_int_distribution<int> v16(-32768, 32767);
    RpuOp alu{RpuMode::alu, 16, 0};
    std::vector<int32_t> acc(1, 0);
    int64_t oracle = 0;
    for (int i = 0; i < 1000; ++i) {
        const int32_t a = v16(rng) / 8, b = v16(rng) / 8;  // keep the sum inside int32
        const int32_t prod = a * b;
        oracle += prod;
        acc = rpu_apply(alu, acc, {prod});
    }
    CHECK(acc[0] == oracle);
}

TEST_CASE("rpu overflow saturates as an error") {
    RpuOp alu{RpuMode::alu, 16, 0};
    CHECK_THROWS_AS(rpu_apply(alu, {2147483647}, {1}), std::overflow_error);
}
