#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "airsync/errors.hpp"
#include "airsync/ota.hpp"

#include <cmath>
#include <vector>

using namespace airsync;

namespace
{

ClockState offset_clock(Ticks theta0, double sigma = 0.0)
{
    return ClockState::with_params(ClockParams{theta0, 0.0, 0.0, sigma});
}

/// Residual of the TA one-way estimate for a noiseless round trip.
Ticks ta_residual(Ticks tau)
{
    return tau - one_way_delay_estimate(TaState(compute_ta_initial(2 * tau).value()));
}

} // namespace

TEST_CASE("TA initial command")
{
    CHECK(compute_ta_initial(0).value() == 0);
    CHECK(compute_ta_initial(15999).value() == 0);
    CHECK(compute_ta_initial(16000).value() == 1);
    CHECK(compute_ta_initial(2 * propagation_ticks(3000.0)).value() == 614400 / 16000);
    CHECK(compute_ta_initial(2 * propagation_ticks(3000.0)).value() == 38);
    CHECK(compute_ta_initial(1283LL * 16000 * 10).value() == kTaInitialMax);
    CHECK(compute_ta_initial(0).kind() == TaKind::Initial);
    CHECK_THROWS_AS(compute_ta_initial(-1), std::invalid_argument);
    CHECK(TaCommand::initial(38).advance_ticks() == 38 * 16000);
    CHECK_THROWS_AS(TaCommand::initial(1283), std::invalid_argument);
    CHECK_THROWS_AS(TaCommand::initial(-1), std::invalid_argument);
}

TEST_CASE("TA update command")
{
    CHECK(compute_ta_update(0).value() == 31);
    CHECK(compute_ta_update(16000).value() == 32);
    CHECK(compute_ta_update(-8 * 16000).value() == 31 - 8);
    CHECK(compute_ta_update(8000).value() == 32);
    CHECK(compute_ta_update(-8000).value() == 30);
    CHECK(compute_ta_update(7999).value() == 31);
    CHECK(compute_ta_update(100 * 16000).value() == 63);
    CHECK(compute_ta_update(-100 * 16000).value() == 0);
    CHECK(compute_ta_update(0).kind() == TaKind::Update);
    CHECK(TaCommand::update(32).advance_ticks() == 16000);
    CHECK(TaCommand::update(0).advance_ticks() == -31 * 16000);
    CHECK_THROWS_AS(TaCommand::update(64), std::invalid_argument);
}

TEST_CASE("TA state composition")
{
    TaState s;
    s.apply(TaCommand::initial(10));
    CHECK(s.index() == 10);
    s.apply(TaCommand::update(33));
    CHECK(s.index() == 12);
    s.apply(TaCommand::update(31));
    CHECK(s.index() == 12);
    s.apply(TaCommand::update(0));
    CHECK(s.index() == 0);
    s.apply(TaCommand::initial(5));
    CHECK(s.index() == 5);

    CHECK(resolve_ta_index(TaCommand::update(30), 1) == 0);
    CHECK_THROWS_AS(resolve_ta_index(TaCommand::update(29), 1), NegativeTaState);
    CHECK_THROWS_AS(one_way_delay_estimate(TaCommand::update(0), 3), NegativeTaState);
    CHECK(resolve_ta_index(TaCommand::initial(7), 100) == 7);
}

TEST_CASE("TA one-way estimate")
{
    CHECK(one_way_delay_estimate(TaCommand::initial(0), 0) == 0);
    CHECK(one_way_delay_estimate(TaCommand::initial(1), 0) == 8000);
    CHECK(ticks_to_ns(8000) == doctest::Approx(260.4).epsilon(1e-3));

    const Ticks tau = propagation_ticks(3000.0);
    CHECK(tau == 10 * kTicksPerUs);
    const Ticks est = one_way_delay_estimate(TaCommand::initial(compute_ta_initial(2 * tau).value()), 0);
    CHECK(est == 38 * 8000);
    CHECK(ticks_to_us(est) == doctest::Approx(9.896).epsilon(1e-4));
    CHECK(ticks_to_ns(tau - est) == doctest::Approx(104.17).epsilon(1e-3));
}

TEST_CASE("TA timer values")
{
    for (const int v : kTaTimerValuesMs)
    {
        CHECK_NOTHROW(TaTimerConfig{v}.validate());
    }
    CHECK_THROWS_AS(TaTimerConfig{1000}.validate(), std::invalid_argument);
    CHECK(TaTimerConfig{10240}.period() == 10240 * kTicksPerMs);
}

TEST_CASE("TA residual lies in [0, 8Ts) over full steps, exhaustively")
{
    Ticks max_residual = -1;
    for (const Ticks base : {Ticks{0}, Ticks{16000}, 38 * Ticks{16000}, 640 * Ticks{16000}})
    {
        for (Ticks off = 0; off < 16000; ++off)
        {
            const Ticks r = ta_residual(base + off);
            REQUIRE(r >= 0);
            REQUIRE(r < 8000);
            max_residual = std::max(max_residual, r);
        }
    }
    CHECK(max_residual == 7999);
}

TEST_CASE("measure_rtt")
{
    RngStream rng(4, "rtt");
    CHECK(measure_rtt(12345, 0.0, 0.0, rng) == 24690);
    for (int i = 0; i < 1000; ++i)
    {
        const Ticks r = measure_rtt(100000, 0.0, 1.0, rng);
        REQUIRE(std::llabs(r - 200000) == 16000);
    }
    CHECK(measure_rtt(0, 0.0, 1.0, rng) >= 0);

    constexpr int n = 100000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i)
    {
        const auto x = static_cast<double>(measure_rtt(1'000'000, 3072.0, 0.0, rng) - 2'000'000);
        sum += x;
        sq += x * x;
    }
    const double mean = sum / n;
    CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(3072.0).epsilon(0.05));
    CHECK_THROWS_AS(measure_rtt(-1, 0.0, 0.0, rng), std::invalid_argument);
    CHECK_THROWS_AS(measure_rtt(1, 0.0, 1.5, rng), std::invalid_argument);
}

TEST_CASE("broadcast time quantization")
{
    CHECK(quantize_broadcast_time(123456789, 0) == 123456789);
    CHECK(quantize_broadcast_time(parse_time_value("123.4567ms"), 10 * kTicksPerMs) == 120 * kTicksPerMs);
    CHECK(quantize_broadcast_time(120 * kTicksPerMs, 10 * kTicksPerMs) == 120 * kTicksPerMs);
    CHECK(quantize_broadcast_time(-1, 10) == -10);
    CHECK(quantize_broadcast_time(-10, 10) == -10);
    CHECK_THROWS_AS(quantize_broadcast_time(5, -1), std::invalid_argument);
}

TEST_CASE("SIB config validation")
{
    SibConfig sib;
    CHECK_NOTHROW(sib.validate());
    sib.si_window = sib.periodicity + 1;
    CHECK_THROWS_AS(sib.validate(), std::invalid_argument);
    sib.si_window = 0;
    sib.granularity = -5;
    CHECK_THROWS_AS(sib.validate(), std::invalid_argument);
}

TEST_CASE("SIB16 cycle with every error source removed is exact")
{
    RngStream rng(5, "sib/ideal");
    const SibConfig sib{0, 80 * kTicksPerMs, 0, StampMode::AtTransmit};
    for (int k = 1; k <= 50; ++k)
    {
        const Ticks tau = k * 8000; // on the 8Ts grid
        const TaState ta(compute_ta_initial(2 * tau).value());
        const SyncOutcome out =
            sib16_sync_cycle(ClockState::ideal(), offset_clock(-777777), sib, ta, tau, SimTime::from_ms(100), rng);
        REQUIRE(out.post_error == 0);
        REQUIRE(out.pre_error == -777777);
        REQUIRE(out.clock.last_sync_at.has_value());
    }
}

TEST_CASE("SIB16 10 ms granularity: error magnitude in [0, 10 ms) with mean near 5 ms")
{
    RngStream rng(6, "sib/10ms");
    const Ticks g = 10 * kTicksPerMs;
    const SibConfig sib{g, 80 * kTicksPerMs, 40 * kTicksPerMs, StampMode::AtTransmit};
    const TaState ta(0);
    constexpr int n = 20000;
    double sum = 0;
    for (int i = 0; i < n; ++i)
    {
        const SimTime created(static_cast<std::uint64_t>(rng.uniform_int(0, 1000 * kTicksPerMs)));
        const SyncOutcome out = sib16_sync_cycle(ClockState::ideal(), offset_clock(12345), sib, ta, 0, created, rng);
        REQUIRE(out.post_error <= 0);
        REQUIRE(-out.post_error < g);
        sum += static_cast<double>(-out.post_error);
    }
    CHECK(sum / n / static_cast<double>(kTicksPerMs) == doctest::Approx(5.0).epsilon(0.03));
}

TEST_CASE("SIB16 1 us granularity bound holds over one TA step")
{
    RngStream rng(7, "sib/1us");
    const Ticks g = kTicksPerUs;
    const SibConfig sib{g, 80 * kTicksPerMs, 40 * kTicksPerMs, StampMode::AtTransmit};
    Ticks worst = 0;
    for (Ticks off = 0; off < 16000; ++off)
    {
        const Ticks tau = 5 * 16000 + off;
        const TaState ta(compute_ta_initial(2 * tau).value());
        const SimTime created(static_cast<std::uint64_t>(off) * 1'234'567);
        const SyncOutcome out = sib16_sync_cycle(ClockState::ideal(), offset_clock(-5), sib, ta, tau, created, rng);
        worst = std::max<Ticks>(worst, std::llabs(out.post_error));
    }
    CHECK(worst <= g + 8000);
    CHECK(worst > g / 2);
}

TEST_CASE("SIB16 error decomposes into isolated sources")
{
    const SimTime created = SimTime::from_ms(333) + 4321;

    SUBCASE("quantization only")
    {
        RngStream sched(1, "s"), bs(1, "b"), ue(1, "u");
        const Ticks g = 7 * kTicksPerUs;
        const SibConfig sib{g, 80 * kTicksPerMs, 0, StampMode::AtTransmit};
        const Sib16Broadcast b = sib16_broadcast(ClockState::ideal(), sib, created, sched, bs);
        const SyncOutcome out = sib16_receive(offset_clock(99), b, TaState(0), 0, ue);
        CHECK(out.post_error == -(created.as_signed() % g));
    }
    SUBCASE("scheduling delay only, stamped at schedule")
    {
        RngStream sched(2, "s"), bs(2, "b"), ue(2, "u");
        RngStream replay = sched;
        const SibConfig sib{0, 80 * kTicksPerMs, 40 * kTicksPerMs, StampMode::AtSchedule};
        const Sib16Broadcast b = sib16_broadcast(ClockState::ideal(), sib, created, sched, bs);
        const Ticks delay = replay.uniform_int(0, sib.si_window);
        CHECK(b.transmitted_at - b.created_at == delay);
        const SyncOutcome out = sib16_receive(offset_clock(-99), b, TaState(0), 0, ue);
        CHECK(out.post_error == -delay);
    }
    SUBCASE("scheduling delay vanishes when stamped at transmit")
    {
        RngStream sched(3, "s"), bs(3, "b"), ue(3, "u");
        const SibConfig sib{0, 80 * kTicksPerMs, 40 * kTicksPerMs, StampMode::AtTransmit};
        const Sib16Broadcast b = sib16_broadcast(ClockState::ideal(), sib, created, sched, bs);
        CHECK(sib16_receive(offset_clock(-99), b, TaState(0), 0, ue).post_error == 0);
    }
    SUBCASE("TA residual only")
    {
        RngStream sched(4, "s"), bs(4, "b"), ue(4, "u");
        const SibConfig sib{0, 80 * kTicksPerMs, 0, StampMode::AtTransmit};
        const Ticks tau = propagation_ticks(1234.5);
        const Sib16Broadcast b = sib16_broadcast(ClockState::ideal(), sib, created, sched, bs);
        const SyncOutcome out = sib16_receive(offset_clock(5), b, TaState(compute_ta_initial(2 * tau).value()), tau, ue);
        CHECK(out.post_error == -ta_residual(tau));
    }
    SUBCASE("BS stamp noise only")
    {
        RngStream sched(5, "s"), bs(5, "b"), ue(5, "u");
        RngStream replay = bs;
        const SibConfig sib{0, 80 * kTicksPerMs, 0, StampMode::AtTransmit};
        const Sib16Broadcast b = sib16_broadcast(offset_clock(0, 300.0), sib, created, sched, bs);
        const Ticks noise = std::llround(replay.normal(300.0));
        CHECK(sib16_receive(offset_clock(5), b, TaState(0), 0, ue).post_error == noise);
    }
}

TEST_CASE("SIB16 needs a TA state")
{
    RngStream rng(8, "sib/nota");
    CHECK_THROWS_AS(sib16_sync_cycle(ClockState::ideal(), ClockState::ideal(), SibConfig{}, std::nullopt, 0,
                                     SimTime(0), rng),
                    NoTaState);
}

TEST_CASE("two-way offset examples")
{
    auto e = twoway_offset({0, 30, 40, 70});
    CHECK(e.offset == 0);
    CHECK(e.mean_path_delay == 30);
    e = twoway_offset({100, 150, 160, 190});
    CHECK(e.offset == 10);
    CHECK(e.mean_path_delay == 40);
    e = twoway_offset({0, 40, 50, 70});
    CHECK(e.offset == 10);
    CHECK(e.mean_path_delay == 30);
    CHECK_FALSE(e.offset_half_tick);

    e = twoway_offset({0, 41, 50, 70});
    CHECK(e.offset == 10);
    CHECK(e.offset_half_tick);
    CHECK(e.delay_half_tick);
    e = twoway_offset({0, 0, 50, 101});
    CHECK(e.offset == -25);
    CHECK(e.offset_half_tick);

    CHECK_THROWS_AS(twoway_offset({100, 0, 0, 99}), CausalityViolation);
}

TEST_CASE("two-way recovers symmetric offsets exactly (property)")
{
    RngStream rng(9, "twoway/sym");
    for (int i = 0; i < 20000; ++i)
    {
        const Ticks theta = rng.uniform_int(-40 * kTicksPerMs, 40 * kTicksPerMs);
        const Ticks d = rng.uniform_int(0, 500 * kTicksPerUs);
        const ExchangePath path{d, d, rng.uniform_int(0, kTicksPerMs), 0, 0};
        const SimTime start(static_cast<std::uint64_t>(rng.uniform_int(0, 100 * kTicksPerSecond)));
        const Exchange ex = simulate_exchange(ClockState::ideal(), offset_clock(theta), start, path, rng, rng);
        const TwoWayEstimate est = twoway_offset(ex.record);
        REQUIRE(est.offset == theta);
        REQUIRE(est.mean_path_delay == d);
        REQUIRE_FALSE(est.offset_half_tick);
    }
}

TEST_CASE("two-way asymmetry error is half the asymmetry (property)")
{
    RngStream rng(10, "twoway/asym");
    for (int i = 0; i < 20000; ++i)
    {
        const Ticks theta = rng.uniform_int(-kTicksPerMs, kTicksPerMs);
        const Ticks dl = rng.uniform_int(0, 100 * kTicksPerUs);
        const Ticks ul = rng.uniform_int(0, 100 * kTicksPerUs);
        const ExchangePath path{dl, ul, 1000, 0, 0};
        const Exchange ex = simulate_exchange(offset_clock(rng.uniform_int(-50, 50)), offset_clock(theta), SimTime(5000),
                                              path, rng, rng);
        const TwoWayEstimate est = twoway_offset(ex.record);
        const Ticks truth = theta - (ex.record.t1 - 5000);
        const Ticks num = (ex.record.t2 - ex.record.t1) - (ex.record.t4 - ex.record.t3);
        REQUIRE(2 * est.offset + (est.offset_half_tick ? (num > 0 ? 1 : -1) : 0) == num);
        REQUIRE(num - 2 * truth == dl - ul);
    }
}

TEST_CASE("two-way sync with scheduling delays leaves half the asymmetry")
{
    RngStream a(11, "a"), b(11, "b");
    const ExchangePath path{3000, 3000, kTicksPerMs, 900, 100};
    const SyncOutcome out = twoway_sync(ClockState::ideal(), offset_clock(-424242), SimTime(0), path, a, b);
    CHECK(out.post_error == -(900 - 100) / 2);
    CHECK(out.pre_error == -424242);
}

TEST_CASE("RIBS alignment modes")
{
    RngStream rng(12, "ribs");
    const Ticks d = propagation_ticks(300.0);
    const ClockState a = offset_clock(777);
    const ClockState b = offset_clock(-31337);

    const RibsOutcome listen = ribs_align(RibsMode::ListenOnly, a, b, RibsLink::symmetric(d), std::nullopt,
                                          SimTime(1000), rng);
    CHECK(listen.residual == -d);
    CHECK(std::llabs(listen.residual) == kTicksPerUs);

    const RibsOutcome two =
        ribs_align(RibsMode::TwoWay, a, b, RibsLink::symmetric(d), std::nullopt, SimTime(1000), rng);
    CHECK(two.residual == 0);

    RibsLink asym = RibsLink::symmetric(d);
    asym.a_to_b = d + 2000;
    CHECK(ribs_align(RibsMode::TwoWay, a, b, asym, std::nullopt, SimTime(1000), rng).residual == -1000);

    const TaState helper(compute_ta_initial(2 * d).value());
    const RibsOutcome ta =
        ribs_align(RibsMode::ListenWithTaCompensation, a, b, RibsLink::symmetric(d), helper, SimTime(1000), rng);
    CHECK(ta.residual <= 0);
    CHECK(-ta.residual < 8000);
    CHECK(ta.residual == -ta_residual(d));

    CHECK_THROWS_AS(ribs_align(RibsMode::ListenWithTaCompensation, a, b, RibsLink::symmetric(d), std::nullopt,
                               SimTime(0), rng),
                    MissingHelper);
}

TEST_CASE("RIBS with TA compensation stays within 8Ts for any distance")
{
    RngStream rng(13, "ribs/sweep");
    for (int i = 0; i < 5000; ++i)
    {
        const Ticks d = rng.uniform_int(0, 20 * kTicksPerUs);
        const TaState helper(compute_ta_initial(2 * d).value());
        const RibsOutcome out = ribs_align(RibsMode::ListenWithTaCompensation, ClockState::ideal(), offset_clock(55555),
                                           RibsLink::symmetric(d), helper, SimTime(0), rng);
        REQUIRE(out.residual <= 0);
        REQUIRE(out.residual > -8000);
    }
}

TEST_CASE("GW relay passes the gateway error through")
{
    RngStream rng(14, "gw");
    ClockState gw = offset_clock(6144);
    gw.last_sync_at = SimTime(0);
    CHECK(gw_relay_sync(gw, offset_clock(-99999), 0.0, SimTime(100), rng).post_error == 6144);

    ClockState perfect = ClockState::ideal();
    perfect.last_sync_at = SimTime(0);
    CHECK(gw_relay_sync(perfect, offset_clock(12), 0.0, SimTime(100), rng).post_error == 0);

    CHECK_THROWS_AS(gw_relay_sync(ClockState::ideal(), ClockState::ideal(), 0.0, SimTime(0), rng), GwNotSynced);
}

TEST_CASE("GW relay error statistics")
{
    RngStream rng(15, "gw/stats");
    ClockState gw = offset_clock(6144); // 200 ns
    gw.last_sync_at = SimTime(0);
    const double sigma = 921.6;         // 30 ns
    constexpr int n = 10000;
    double sum = 0, sq = 0;
    for (int i = 0; i < n; ++i)
    {
        const auto e = static_cast<double>(gw_relay_sync(gw, ClockState::ideal(), sigma, SimTime(10), rng).post_error);
        sum += e;
        sq += e * e;
    }
    const double mean = sum / n;
    CHECK(mean == doctest::Approx(6144.0).epsilon(0.01));
    CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(sigma).epsilon(0.05));
}
