#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "airsync/config.hpp"
#include "airsync/errors.hpp"
#include "airsync/scenario.hpp"

#include <algorithm>
#include <cmath>

using namespace airsync;

namespace
{

// One TA half-step of light path: 8000 ticks.
constexpr double kGridMeters = 78.125;

ClockSpec fixed_clock(double theta0, double skew = 0.0)
{
    return ClockSpec{ParamDist::fixed(theta0), ParamDist::fixed(skew), ParamDist::fixed(0.0), ParamDist::fixed(0.0)};
}

NodeSpec node(std::string id, NodeRole role, Position pos, std::string attach = {},
              std::optional<ClockSpec> clock = std::nullopt)
{
    return NodeSpec{std::move(id), role, pos, std::move(attach), std::move(clock)};
}

/// One BS and UEs on the TA grid, every source of error switched off.
ScenarioConfig ideal_config(int ues = 2)
{
    ScenarioConfig c;
    c.name = "ideal";
    c.duration = 500 * kTicksPerMs;
    c.warmup = kTicksPerMs;
    c.nodes.push_back(node("bs1", NodeRole::BaseStation, {0, 0}));
    for (int i = 0; i < ues; ++i)
    {
        c.nodes.push_back(node("ue" + std::to_string(i + 1), NodeRole::Ue, {kGridMeters * (3 + 5 * i), 0}, "bs1",
                               fixed_clock(123456.0 * (i + 1))));
    }
    c.plan.sib.si_window = 0;
    c.plan.sib.granularity = 0;
    return c;
}

Ticks max_abs_error(const RawTrace& t)
{
    Ticks m = 0;
    for (const OffsetSample& s : t.samples)
    {
        m = std::max<Ticks>(m, std::llabs(s.error));
    }
    return m;
}

RawTrace run(const ScenarioConfig& c)
{
    const Scenario sc = build_scenario(c);
    return run_scenario(sc, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
}

} // namespace

TEST_CASE("single-cell construction adds the reference")
{
    const Scenario sc = build_scenario(ideal_config(2));
    CHECK(sc.nodes.size() == 4);
    CHECK(sc.node(sc.reference).role == NodeRole::ReferenceSource);
    CHECK(sc.node(sc.reference).name == "ref");
    CHECK(sc.base_stations.size() == 1);
    CHECK(sc.find("ue2").has_value());
    CHECK(sc.node(*sc.find("ue1")).link_delay == 3 * 8000);
    CHECK(sc.node(*sc.find("ue2")).link_delay == 8 * 8000);
    CHECK(sc.pairwise_nodes.size() == 2);
}

TEST_CASE("topology errors name the offending field")
{
    ScenarioConfig c = ideal_config(2);
    c.nodes[2].attach.clear();
    try
    {
        (void)build_scenario(c);
        FAIL("expected InvalidConfig");
    }
    catch (const InvalidConfig& e)
    {
        CHECK(e.path() == "nodes[2].attach");
    }

    c = ideal_config(1);
    c.nodes[1].attach = "nowhere";
    CHECK_THROWS_AS(build_scenario(c), InvalidConfig);

    c = ideal_config(1);
    c.nodes.push_back(node("leg", NodeRole::LegacyDevice, {}, "bs1"));
    try
    {
        (void)build_scenario(c);
        FAIL("expected InvalidConfig");
    }
    catch (const InvalidConfig& e)
    {
        CHECK(e.path() == "nodes[2].attach");
    }

    c = ideal_config(1);
    c.nodes.push_back(node("r1", NodeRole::ReferenceSource, {}));
    c.nodes.push_back(node("r2", NodeRole::ReferenceSource, {}));
    CHECK_THROWS_AS(build_scenario(c), InvalidConfig);

    c = ideal_config(1);
    c.nodes.push_back(node("ue1", NodeRole::Ue, {}, "bs1"));
    CHECK_THROWS_AS(build_scenario(c), InvalidConfig);

    c = ideal_config(1);
    c.plan.resync_period = 100 * kTicksPerMs; // not a multiple of the 80 ms SIB period
    CHECK_THROWS_AS(build_scenario(c), InvalidConfig);
}

TEST_CASE("heterogeneous preset expands to an 8-node graph")
{
    const ScenarioConfig c = load_scenario_config(std::string(AIRSYNC_CONFIG_DIR) + "/heterogeneous.json");
    const Scenario sc = build_scenario(c);
    CHECK(sc.nodes.size() == 8);
    CHECK(sc.base_stations.size() == 2);
    CHECK(std::count_if(sc.nodes.begin(), sc.nodes.end(),
                        [](const Node& n) { return n.role == NodeRole::LegacyDevice; }) == 2);
    CHECK(std::count_if(sc.nodes.begin(), sc.nodes.end(), [](const Node& n) { return n.role == NodeRole::Gateway; }) ==
          1);
}

TEST_CASE("construction is pure and seed dependent")
{
    ScenarioConfig c = ideal_config(3);
    for (NodeSpec& n : c.nodes)
    {
        n.clock.reset();
    }
    const Scenario a = build_scenario(c);
    const Scenario b = build_scenario(c);
    for (std::size_t i = 0; i < a.nodes.size(); ++i)
    {
        CHECK(a.nodes[i].clock.params.theta0 == b.nodes[i].clock.params.theta0);
        CHECK(a.nodes[i].clock.params.skew == b.nodes[i].clock.params.skew);
    }
    c.seed = 2;
    const Scenario d = build_scenario(c);
    CHECK(a.node(*a.find("ue1")).clock.params.theta0 != d.node(*d.find("ue1")).clock.params.theta0);

    // Default device clocks fall inside +/-1 ms and +/-10 ppm.
    for (const Node& n : a.nodes)
    {
        if (n.role == NodeRole::Ue)
        {
            CHECK(std::llabs(n.clock.params.theta0) <= kTicksPerMs);
            CHECK(std::fabs(n.clock.params.skew) <= 10e-6);
        }
    }
}

TEST_CASE("ideal case: every device error is zero at every sample")
{
    const RawTrace t = run(ideal_config(3));
    REQUIRE_FALSE(t.samples.empty());
    CHECK(max_abs_error(t) == 0);
    CHECK(t.ta_updates == 3); // one 500 ms timer expiry per UE
}

TEST_CASE("ideal case stays exact across TA timer updates")
{
    ScenarioConfig c = ideal_config(2);
    c.duration = 2 * kTicksPerSecond;
    const RawTrace t = run(c);
    CHECK(t.ta_updates == 2 * 4);
    CHECK(max_abs_error(t) == 0);
}

TEST_CASE("1 ppm skew with 100 ms resync peaks near 100 ns")
{
    ScenarioConfig c = ideal_config(1);
    c.nodes[1].clock = fixed_clock(5000.0, 1e-6);
    c.plan.resync_period = 100 * kTicksPerMs;
    c.plan.sib.periodicity = 100 * kTicksPerMs;
    c.duration = kTicksPerSecond;
    const RawTrace t = run(c);
    std::size_t checked = 0;
    for (std::size_t i = 1; i < t.syncs.size(); ++i)
    {
        CHECK(std::llabs(t.syncs[i].pre_error - 3072) <= 2);
        ++checked;
    }
    CHECK(checked == 9);
    CHECK(std::llabs(max_abs_error(t) - 3072) <= 2);
}

TEST_CASE("losing every sync message leaves clocks free-running")
{
    ScenarioConfig c = ideal_config(1);
    c.nodes[1].clock = fixed_clock(777.0, 2e-6);
    c.link.loss_prob = 1.0;
    const Scenario sc = build_scenario(c);
    const RawTrace t = run_scenario(sc, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
    CHECK(std::none_of(t.syncs.begin(), t.syncs.end(), [](const SyncRecord& r) { return !r.lost; }));
    CHECK_FALSE(t.syncs.empty());
    const NodeId ue = *sc.find("ue1");
    const ClockState free = sc.node(ue).clock;
    for (const OffsetSample& s : t.samples)
    {
        REQUIRE(s.error == (s.node == ue ? clock_error(free, s.t_true) : 0));
    }
}

TEST_CASE("PMU fault stamps")
{
    RngStream ra(1, "a"), rb(1, "b");
    const FaultGeometry mid{300.0, 600.0, kSpeedOfLight};
    const SimTime at = SimTime::from_ms(10);
    FaultStamps s = pmu_fault_event(ClockState::ideal(), ClockState::ideal(), at, mid, ra, rb);
    CHECK(s.t_a == s.t_b);
    CHECK(s.t_a - at.as_signed() == kTicksPerUs);

    const FaultGeometry end{0.0, 600.0, kSpeedOfLight};
    s = pmu_fault_event(ClockState::ideal(), ClockState::ideal(), at, end, ra, rb);
    CHECK(s.t_a == at.as_signed());
    CHECK(s.t_b - at.as_signed() == 2 * kTicksPerUs);

    const ClockState b_ahead = ClockState::with_params(ClockParams{kTicksPerUs, 0, 0, 0});
    s = pmu_fault_event(ClockState::ideal(), b_ahead, at, mid, ra, rb);
    CHECK(s.t_b - s.t_a == kTicksPerUs);

    CHECK_THROWS_AS(pmu_fault_event(ClockState::ideal(), ClockState::ideal(), at, FaultGeometry{700.0, 600.0}, ra, rb),
                    InvalidGeometry);
    CHECK_THROWS_AS(pmu_fault_event(ClockState::ideal(), ClockState::ideal(), at, FaultGeometry{1.0, 600.0, 0.0}, ra,
                                    rb),
                    InvalidGeometry);
}

TEST_CASE("command deliveries follow the grid plus link delay")
{
    ScenarioConfig c = ideal_config(2);
    c.workload = WorkloadSpec{kTicksPerMs, {}, std::nullopt};
    const Scenario sc = build_scenario(c);
    const RawTrace t = run_scenario(sc, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
    REQUIRE(t.deliveries.size() > 900);
    for (const Delivery& d : t.deliveries)
    {
        REQUIRE(d.sent_at.as_signed() == d.cycle * kTicksPerMs);
        REQUIRE(d.t_true - d.sent_at == sc.node(d.node).link_delay);
        REQUIRE(d.local == d.t_true.as_signed());
    }

    c.link.extra_delay = DelayDist::uniform(0, 5000);
    const Scenario sc2 = build_scenario(c);
    const RawTrace t2 = run_scenario(sc2, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
    for (const Delivery& d : t2.deliveries)
    {
        const Ticks extra = (d.t_true - d.sent_at) - sc2.node(d.node).link_delay;
        REQUIRE(extra >= 0);
        REQUIRE(extra <= 5000);
    }
}

TEST_CASE("two-BS fixed error adds to the TA residuals")
{
    RngStream geo(21, "geometry");
    for (int trial = 0; trial < 50; ++trial)
    {
        ScenarioConfig c;
        c.duration = 200 * kTicksPerMs;
        c.warmup = 50 * kTicksPerMs;
        c.plan.bs_alignment.mode = BsAlignment::Mode::FixedError;
        c.plan.bs_alignment.fixed_error = kTicksPerUs;
        c.nodes.push_back(node("bs1", NodeRole::BaseStation, {0, 0}));
        c.nodes.push_back(node("bs2", NodeRole::BaseStation, {2000, 0}));
        c.nodes.push_back(node("ue1", NodeRole::Ue, {geo.uniform01() * 1500, geo.uniform01() * 1500}, "bs1",
                               fixed_clock(1e5)));
        c.nodes.push_back(node("ue2", NodeRole::Ue, {2000 + geo.uniform01() * 1500, geo.uniform01() * 1500}, "bs2",
                               fixed_clock(-1e5)));
        const Scenario sc = build_scenario(c);
        const RawTrace t = run_scenario(sc, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
        auto residual = [&](const char* name) {
            const Ticks tau = sc.node(*sc.find(name)).link_delay;
            return tau - (tau / 8000) * 8000;
        };
        const Ticks expected = kTicksPerUs + residual("ue1") - residual("ue2");
        const NodeId u1 = *sc.find("ue1");
        const NodeId u2 = *sc.find("ue2");
        for (std::size_t i = 0; i + 1 < t.samples.size(); ++i)
        {
            if (t.samples[i].node == u1 && t.samples[i + 1].node == u2)
            {
                REQUIRE(std::llabs((t.samples[i + 1].error - t.samples[i].error) - expected) <= 1);
            }
        }
    }
}

TEST_CASE("gateway relays its time to legacy devices")
{
    ScenarioConfig c = ideal_config(0);
    c.nodes.push_back(node("gw", NodeRole::Gateway, {kGridMeters * 4, 0}, "bs1", fixed_clock(-4444)));
    c.nodes.push_back(node("leg1", NodeRole::LegacyDevice, {}, "gw", fixed_clock(999)));
    c.nodes.push_back(node("leg2", NodeRole::LegacyDevice, {}, "gw", fixed_clock(-999)));
    const Scenario sc = build_scenario(c);
    const RawTrace t = run_scenario(sc, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
    CHECK(std::count_if(t.syncs.begin(), t.syncs.end(), [](const SyncRecord& r) { return r.kind == SyncKind::GwRelay; }) ==
          2 * 7);
    CHECK(max_abs_error(t) == 0);
}

TEST_CASE("two-way enablers converge with symmetric links")
{
    for (const Enabler e : {Enabler::RibsUe, Enabler::DedicatedTwoWay})
    {
        ScenarioConfig c = ideal_config(2);
        c.plan.enabler = e;
        c.plan.resync_period = 10 * kTicksPerMs;
        c.warmup = 5 * kTicksPerMs;
        c.link.extra_delay = DelayDist::fixed(3000);
        const RawTrace t = run(c);
        CHECK(max_abs_error(t) == 0);
    }

    ScenarioConfig c = ideal_config(1);
    c.plan.enabler = Enabler::DedicatedTwoWay;
    c.plan.resync_period = 10 * kTicksPerMs;
    c.warmup = 5 * kTicksPerMs;
    c.link.extra_delay = DelayDist::uniform(0, 20000);
    const RawTrace t = run(c);
    CHECK(max_abs_error(t) <= 10000);
    CHECK(max_abs_error(t) > 0);
}

TEST_CASE("runs are deterministic")
{
    const ScenarioConfig c = load_scenario_config(std::string(AIRSYNC_CONFIG_DIR) + "/heterogeneous.json");
    const RawTrace a = run(c);
    const RawTrace b = run(c);
    CHECK(a.trace_digest == b.trace_digest);
    CHECK(a.events_dispatched == b.events_dispatched);
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
    {
        REQUIRE(a.samples[i].error == b.samples[i].error);
    }
}

TEST_CASE("RIBS inter-BS alignment keeps the second cell close")
{
    ScenarioConfig c = ideal_config(0);
    c.nodes.push_back(node("bs2", NodeRole::BaseStation, {kGridMeters * 10, 0}));
    c.nodes.push_back(node("ue1", NodeRole::Ue, {kGridMeters * 12, 0}, "bs2", fixed_clock(1234)));
    c.plan.bs_alignment.mode = BsAlignment::Mode::Ribs;
    c.plan.bs_alignment.ribs_mode = RibsMode::ListenOnly;
    c.warmup = 10 * kTicksPerMs;
    const Scenario sc = build_scenario(c);
    const RawTrace t = run_scenario(sc, SimTime(static_cast<std::uint64_t>(c.duration)), c.seed);
    const NodeId bs2 = *sc.find("bs2");
    Ticks drift = 0;
    for (const OffsetSample& s : t.samples)
    {
        if (s.node == bs2)
        {
            drift = std::max<Ticks>(drift, std::llabs(s.error + 80000));
        }
    }
    // Listening leaves the propagation delay (80000 ticks) plus BS skew (<= 50 ppb) over 0.5 s.
    CHECK(drift <= 800);
}
