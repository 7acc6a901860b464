#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <functional>
#include <map>
#include <random>
#include <set>

#include "flashpim/tiling.hpp"

using namespace flashpim;

namespace {
// relative-tolerance comparison; doctest's default Approx carries an
// absolute scale of 1.0 which is useless for values in SI seconds/joules
doctest::Approx rel(double v, double eps = 1e-9) {
    return rel(v, eps).scale(0.0);
}
}  // namespace

namespace {

PlaneConfig size_a() { return {256, 2048, 128, 4}; }

// The tiling study hierarchy: all eight dies usable for PIM.
FlashTopology study_topo() {
    FlashTopology t;
    t.slc_dies_per_way = 0;
    t.qlc_dies_per_way = t.n_die;
    return t;
}

TilingPlan named_plan(const std::string& s) {
    const auto p = TilingPlan::parse(s, 512);
    REQUIRE(p.has_value());
    return *p;
}

// Independent count of canonical plans: per level choose none/row/col,
// then count ordered factorizations with all factors >= 2.
long long combinatorial_plan_count(int M, int N, const FlashTopology& topo,
                                   const PlaneConfig& cfg) {
    const int unit_cols = cfg.n_col / topo.mux_ratio;
    const int R = (M + kUnitRows - 1) / kUnitRows;
    const int C = (N + unit_cols - 1) / unit_cols;
    const int res[4] = {topo.n_channel, topo.n_way, topo.n_die, topo.n_plane};

    std::function<long long(const std::vector<int>&, int, size_t)> count_factorizations =
        [&](const std::vector<int>& levels, int rem, size_t idx) -> long long {
        if (idx == levels.size()) return rem == 1 ? 1 : 0;
        long long total = 0;
        for (int f = 2; f <= rem && f <= res[levels[idx]]; ++f)
            if (rem % f == 0) total += count_factorizations(levels, rem / f, idx + 1);
        return total;
    };

    long long total = 0;
    for (int mask = 0; mask < 81; ++mask) {  // 3^4 method assignments
        int m = mask;
        std::vector<int> rows, cols;
        for (int lvl = 0; lvl < 4; ++lvl) {
            const int choice = m % 3;
            m /= 3;
            if (choice == 1) rows.push_back(lvl);
            else if (choice == 2) cols.push_back(lvl);
        }
        const long long rf = rows.empty() ? (R == 1 ? 1 : 0) : count_factorizations(rows, R, 0);
        const long long cf = cols.empty() ? (C == 1 ? 1 : 0) : count_factorizations(cols, C, 0);
        total += rf * cf;
    }
    return total;
}

}  // namespace

TEST_CASE("plan notation round trip") {
    const TilingPlan p = named_plan("N(1)/C(2)/C(7)/R(56)");
    CHECK(p.per_level[0].method == TileMethod::none);
    CHECK(p.per_level[1].method == TileMethod::col);
    CHECK(p.per_level[2].count == 7);
    CHECK(p.per_level[3].method == TileMethod::row);
    CHECK(p.row_tile_product() == 56);
    CHECK(p.col_tile_product() == 14);
    CHECK(p.to_string() == "N(1)/C(2)/C(7)/R(56)");
    CHECK(!TilingPlan::parse("X/C/C/R", 512).has_value());
    CHECK(!TilingPlan::parse("N(2)/C(2)/C(7)/R(56)", 512).has_value());
}

TEST_CASE("enumeration covers the reference workload") {
    const auto plans = enumerate_plans(7168, 7168, study_topo(), size_a());
    REQUIRE(!plans.empty());
    for (const auto& p : plans) {
        CHECK(p.row_tile_product() == 56);  // d_m / u
        CHECK(p.col_tile_product() == 14);  // d_m / (n_col / 4)
        for (int i = 0; i < 4; ++i)
            if (p.per_level[i].method == TileMethod::none) CHECK(p.per_level[i].count == 1);
    }
    // the three reference plans are present
    std::set<std::string> names;
    for (const auto& p : plans) names.insert(p.to_string());
    CHECK(names.count("N(1)/C(2)/C(7)/R(56)"));
    CHECK(names.count("C(7)/C(2)/R(7)/R(8)"));
    CHECK(names.count("C(7)/C(2)/N(1)/R(56)"));
}

TEST_CASE("single-plane trivial case") {
    const auto plans = enumerate_plans(128, 128, study_topo(), size_a());
    REQUIRE(plans.size() == 1);
    for (const auto& l : plans[0].per_level) {
        CHECK(l.method == TileMethod::none);
        CHECK(l.count == 1);
    }
}

TEST_CASE("infeasible workload yields an empty enumeration") {
    FlashTopology tiny = study_topo();
    tiny.n_channel = 1;
    tiny.n_way = 1;
    tiny.n_die = 1;
    tiny.qlc_dies_per_way = 1;
    tiny.slc_dies_per_way = 0;
    tiny.n_plane = 4;
    // 7168 rows need a row product of 56 > 4 planes on a single die
    CHECK(enumerate_plans(7168, 128, tiny, size_a()).empty());
}

TEST_CASE("plan coverage maps reconstruct the full tile grid") {
    std::mt19937 rng(41);
    std::uniform_int_distribution<int> dim(1, 2048);
    const FlashTopology topo = study_topo();
    for (int iter = 0; iter < 10; ++iter) {
        const int M = dim(rng), N = dim(rng);
        const auto plans = enumerate_plans(M, N, topo, size_a());
        REQUIRE(!plans.empty());
        for (const auto& p : plans) {
            // every (row tile, col tile) pair maps to exactly one
            // resource tuple; products reconstruct the grid
            const int R = p.row_tile_product(), C = p.col_tile_product();
            CHECK(R == (M + 127) / 128);
            CHECK(C == (N + 511) / 512);
            std::set<std::pair<int, int>> covered;
            for (int r = 0; r < R; ++r)
                for (int c = 0; c < C; ++c) covered.insert({r, c});
            CHECK(static_cast<int>(covered.size()) == R * C);
        }
    }
}

TEST_CASE("enumeration completeness against the combinatorial count") {
    std::mt19937 rng(42);
    std::uniform_int_distribution<int> dim(1, 1024);
    const FlashTopology topo = study_topo();
    for (int iter = 0; iter < 20; ++iter) {
        const int M = dim(rng), N = dim(rng);
        const auto plans = enumerate_plans(M, N, topo, size_a());
        CHECK(static_cast<long long>(plans.size()) ==
              combinatorial_plan_count(M, N, topo, size_a()));
        // no duplicates
        std::set<std::string> names;
        for (const auto& p : plans) names.insert(p.to_string());
        CHECK(names.size() == plans.size());
    }
}

TEST_CASE("reference plans: identical inbound and PIM, ranked outbound") {
    const FlashTopology topo = study_topo();
    const TechParams tech;
    const PlaneConfig cfg = size_a();

    const SmvmCost n_ccr = cost_smvm(named_plan("N(1)/C(2)/C(7)/R(56)"), topo, cfg, tech);
    const SmvmCost ccrr = cost_smvm(named_plan("C(7)/C(2)/R(7)/R(8)"), topo, cfg, tech);
    const SmvmCost ccnr = cost_smvm(named_plan("C(7)/C(2)/N(1)/R(56)"), topo, cfg, tech);

    CHECK(n_ccr.inbound_io == rel(ccrr.inbound_io));
    CHECK(n_ccr.inbound_io == rel(ccnr.inbound_io));
    CHECK(n_ccr.pim == rel(ccrr.pim));
    CHECK(n_ccr.pim == rel(ccnr.pim));

    CHECK(n_ccr.outbound_io < ccrr.outbound_io);
    CHECK(n_ccr.outbound_io < ccnr.outbound_io);

    for (const SmvmCost& c : {n_ccr, ccrr, ccnr})
        CHECK(c.total == rel(std::max(c.inbound_io, c.pim) + c.outbound_io));
}

TEST_CASE("single-plane cost is one vector in, one tile out") {
    const FlashTopology topo = study_topo();
    const TechParams tech;
    const PlaneConfig cfg = size_a();
    const auto plans = enumerate_plans(128, 128, topo, cfg);
    REQUIRE(plans.size() == 1);
    const SmvmCost c = cost_smvm(plans[0], topo, cfg, tech);
    CHECK(c.inbound_io == rel(128.0 / topo.bus_bytes_per_sec));
    // one tile drains the tree once and crosses the channel once
    const double tile_partial = 512.0 * topo.partial_bytes / topo.bus_bytes_per_sec;
    const double tile_final = 512.0 * topo.final_bytes / topo.bus_bytes_per_sec;
    CHECK(c.outbound_io ==
          rel(tile_partial + topo.channel_setup_s + tile_final));
}

TEST_CASE("best plan is optimal and matches the reference search") {
    const FlashTopology topo = study_topo();
    const TechParams tech;
    const PlaneConfig cfg = size_a();

    const auto best = best_plan(7168, 7168, topo, cfg, tech);
    REQUIRE(best.has_value());
    CHECK(best->first.to_string() == "N(1)/C(2)/C(7)/R(56)");

    for (const auto& p : enumerate_plans(7168, 7168, topo, cfg))
        CHECK(best->second.total <= cost_smvm(p, topo, cfg, tech).total + 1e-18);

    // trivial shape
    const auto tiny = best_plan(128, 128, topo, cfg, tech);
    REQUIRE(tiny.has_value());
    CHECK(tiny->first.to_string() == "N(1)/N(1)/N(1)/N(1)");

    // infeasibility propagates
    FlashTopology t1 = topo;
    t1.n_channel = t1.n_way = t1.n_die = 1;
    t1.qlc_dies_per_way = 1;
    t1.slc_dies_per_way = 0;
    t1.n_plane = 2;
    CHECK(!best_plan(65536, 65536, t1, cfg, tech).has_value());
}

TEST_CASE("tiled composition reproduces the oracle MVM exactly") {
    std::mt19937 rng(43);
    std::uniform_int_distribution<int> dim(1, 1024), byte(0, 255);
    const FlashTopology topo = study_topo();
    const PlaneConfig cfg = size_a();
    for (int iter = 0; iter < 12; ++iter) {
        const int M = dim(rng), N = dim(rng);
        Mat8 w = make_mat8(M, N);
        for (auto& v : w.data) v = static_cast<uint8_t>(byte(rng));
        InputVector x;
        x.bit_width = 8;
        for (int r = 0; r < M; ++r) x.values.push_back(byte(rng));

        const auto oracle = mvm_oracle(w, x);
        const auto plans = enumerate_plans(M, N, topo, cfg);
        REQUIRE(!plans.empty());
        // exercise a handful of plans per shape
        for (size_t i = 0; i < plans.size(); i += std::max<size_t>(1, plans.size() / 4))
            CHECK(tiled_mvm(w, x, plans[i], cfg) == oracle);
    }
}

TEST_CASE("qkt mapping and latency") {
    const FlashTopology topo;  // 2 SLC dies per way
    const TechParams tech;
    const PlaneConfig cfg = size_a();

    const auto [m, lat] = map_qkt(1024, 128, 56, topo, cfg, tech);
    CHECK(m.kind == DmvmKind::qkt);
    CHECK(m.heads_per_die == 1);
    CHECK(m.plane_pairs == 128);
    CHECK(lat.total == rel(std::max(lat.inbound, lat.kv_read) + lat.outbound));

    // L = 1: one VVM -> read one page, one score out
    const auto [m1, lat1] = map_qkt(1, 128, 1, topo, cfg, tech);
    (void)m1;
    CHECK(lat1.kv_read == rel(page_read_latency({256, 2048, 128, 1}, tech)));

    // roughly linear growth in L at fixed head parallelism
    const double l512 = map_qkt(512, 128, 56, topo, cfg, tech).second.total;
    const double l1024 = map_qkt(1024, 128, 56, topo, cfg, tech).second.total;
    const double l2048 = map_qkt(2048, 128, 56, topo, cfg, tech).second.total;
    CHECK(l1024 > l512);
    CHECK(l2048 > l1024);
    CHECK(l2048 / l512 == rel(4.0, 0.25));
}

TEST_CASE("sv mapping and head parallelism") {
    const FlashTopology topo;
    const TechParams tech;
    const PlaneConfig cfg = size_a();

    const auto [m, lat] = map_sv(1024, 128, 56, topo, cfg, tech);
    CHECK(m.kind == DmvmKind::sv);
    CHECK(lat.total > 0);

    // two heads per die double the per-die KV read work
    FlashTopology small = topo;
    small.n_channel = 4;  // 64 heads over 32 SLC dies -> 2 heads per die
    const auto [m1, lat1] = map_sv(1024, 128, 32, small, cfg, tech);
    const auto [m2, lat2] = map_sv(1024, 128, 64, small, cfg, tech);
    CHECK(m1.heads_per_die == 1);
    CHECK(m2.heads_per_die == 2);
    CHECK(lat2.kv_read == rel(2 * lat1.kv_read));

    // capacity guard
    FlashTopology topo2 = topo;
    CHECK_THROWS_AS(map_sv(1 << 30, 128, 56, topo2, cfg, tech), std::invalid_argument);
}

TEST_CASE("functional qkt equals the dense oracle") {
    std::mt19937 rng(44);
    std::uniform_int_distribution<int> v(-128, 127);
    for (int iter = 0; iter < 10; ++iter) {
        const int L = 64, d = 32;
        std::vector<int32_t> q(d);
        for (auto& x : q) x = v(rng);
        std::vector<std::vector<int32_t>> K(L, std::vector<int32_t>(d));
        for (auto& row : K)
            for (auto& x : row) x = v(rng);

        const auto scores = qkt_compute(q, K);
        for (int l = 0; l < L; ++l) {
            int64_t ref = 0;
            for (int i = 0; i < d; ++i) ref += static_cast<int64_t>(q[i]) * K[l][i];
            CHECK(scores[l] == ref);
        }
    }
}

TEST_CASE("functional sv equals the dense oracle") {
    std::mt19937 rng(45);
    std::uniform_int_distribution<int> v(-128, 127);
    const int L = 64, d = 48;
    std::vector<int32_t> S(L);
    for (auto& x : S) x = v(rng);
    std::vector<std::vector<int32_t>> V(L, std::vector<int32_t>(d));
    for (auto& row : V)
        for (auto& x : row) x = v(rng);

    const auto out = sv_compute(S, V);
    for (int j = 0; j < d; ++j) {
        int64_t ref = 0;
        for (int l = 0; l < L; ++l) ref += static_cast<int64_t>(S[l]) * V[l][j];
        CHECK(out[j] == ref);
    }

    // L = 1 degenerates to a scaled first row
    const auto single = sv_compute({3}, {{1, -2, 5}});
    CHECK(single == std::vector<int64_t>{3, -6, 15});
}
