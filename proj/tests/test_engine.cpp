#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "airsync/engine.hpp"
#include "airsync/errors.hpp"
#include "airsync/rng.hpp"
#include "airsync/sim_time.hpp"

#include <cmath>
#include <limits>
#include <vector>

using namespace airsync;

TEST_CASE("tick constants are exact")
{
    CHECK(kTs == 1000);
    CHECK(kTaStep == 16000);
    CHECK(SimTime::from_ms(1).ticks() == 30'720'000u);
    CHECK(SimTime::from_ms(40).ticks() == 40u * 30'720'000u);
    CHECK(SimTime::from_seconds_exact(1).ticks() == 30'720'000'000u);
    // Ts = 1 / (15000 * 2048) s.
    CHECK(kTicksPerSecond == 15000LL * 2048 * kTs);
    CHECK(propagation_ticks(300.0) == kTicksPerUs);
    CHECK(propagation_ticks(3000.0) == 10 * kTicksPerUs);
}

TEST_CASE("time value parsing is exact or rejected")
{
    CHECK(parse_time_value("1ms") == kTicksPerMs);
    CHECK(parse_time_value("10ms") == 10 * kTicksPerMs);
    CHECK(parse_time_value("1us") == kTicksPerUs);
    CHECK(parse_time_value("0.5us") == kTicksPerUs / 2);
    CHECK(parse_time_value("2s") == 2 * kTicksPerSecond);
    CHECK(parse_time_value("-1ms") == -kTicksPerMs);
    CHECK(parse_time_value("30ticks") == 30);
    CHECK(parse_time_value("100ns") == 3072);
    CHECK(parse_time_value("123.4567ms") == 3'792'589'824);
    CHECK_THROWS_AS(parse_time_value("1ns"), std::invalid_argument);
    CHECK_THROWS_AS(parse_time_value("0.5ticks"), std::invalid_argument);
    CHECK_THROWS_AS(parse_time_value("10"), std::invalid_argument);
    CHECK_THROWS_AS(parse_time_value("10 parsecs"), std::invalid_argument);
    CHECK_THROWS_AS(parse_time_value(""), std::invalid_argument);
}

TEST_CASE("checked arithmetic raises Overflow")
{
    constexpr Ticks big = std::numeric_limits<Ticks>::max();
    CHECK_THROWS_AS(checked_add(big, 1), Overflow);
    CHECK_THROWS_AS(checked_mul(big / 2, 3), Overflow);
    CHECK(checked_add(-5, 3) == -2);
    CHECK_THROWS_AS(SimTime(std::numeric_limits<std::uint64_t>::max()).plus(1), Overflow);
    CHECK_THROWS_AS(SimTime(5).plus(-6), Overflow);
    CHECK_THROWS_AS(SimTime(std::numeric_limits<std::uint64_t>::max()).as_signed(), Overflow);
}

struct Recorder
{
    std::vector<Event> seen;
    Engine engine{[this](const Event& e) { seen.push_back(e); }};
};

TEST_CASE("zero-delay event dispatches before later events")
{
    Recorder r;
    r.engine.schedule(SimTime(100), 1, EventKind::Custom);
    r.engine.schedule(SimTime(0), 2, EventKind::Custom);
    CHECK(r.engine.run_until(SimTime(1000)) == 2);
    REQUIRE(r.seen.size() == 2);
    CHECK(r.seen[0].target == 2);
    CHECK(r.seen[1].target == 1);
}

TEST_CASE("equal fire times dispatch in insertion order")
{
    Recorder r;
    for (NodeId i = 0; i < 50; ++i)
    {
        r.engine.schedule(SimTime(7), i, EventKind::Custom);
    }
    r.engine.run_until(SimTime(7));
    REQUIRE(r.seen.size() == 50);
    for (NodeId i = 0; i < 50; ++i)
    {
        CHECK(r.seen[i].target == i);
        if (i > 0)
        {
            CHECK(r.seen[i].sequence > r.seen[i - 1].sequence);
        }
    }
}

TEST_CASE("scheduling in the past raises PastEvent")
{
    Engine e;
    e.run_until(SimTime(10));
    CHECK_THROWS_AS(e.schedule(SimTime(9), 0, EventKind::Custom), PastEvent);
    CHECK_NOTHROW(e.schedule(SimTime(10), 0, EventKind::Custom));
    CHECK_THROWS_AS(e.run_until(SimTime(5)), PastEvent);
}

TEST_CASE("event ids are unique and increasing")
{
    Engine e;
    EventId prev = e.schedule(SimTime(3), 0, EventKind::Custom);
    for (int i = 0; i < 100; ++i)
    {
        const EventId id = e.schedule(SimTime(static_cast<std::uint64_t>(100 - i)), 0, EventKind::Custom);
        CHECK(id > prev);
        prev = id;
    }
}

TEST_CASE("run_until on an empty queue advances now")
{
    Engine e;
    CHECK(e.run_until(SimTime::from_seconds_exact(1)) == 0);
    CHECK(e.now() == SimTime::from_seconds_exact(1));
}

TEST_CASE("run_until dispatches only events at or before t_end")
{
    Recorder r;
    r.engine.schedule(SimTime(1), 0, EventKind::Custom);
    r.engine.schedule(SimTime(2), 0, EventKind::Custom);
    r.engine.schedule(SimTime(3), 0, EventKind::Custom);
    r.engine.schedule(SimTime(4), 0, EventKind::Custom);
    CHECK(r.engine.run_until(SimTime(3)) == 3);
    CHECK(r.engine.pending() == 1);
    CHECK(r.engine.now() == SimTime(3));
    CHECK(r.engine.run_until(SimTime(4)) == 1);
}

TEST_CASE("periodic timer every 10240 ms over 60 s fires floor(60000/10240) times")
{
    const Ticks period = 10240 * kTicksPerMs;
    std::size_t fired = 0;
    Engine e;
    e.set_handler([&](const Event& ev) {
        ++fired;
        e.schedule(ev.fire_at + period, ev.target, ev.kind);
    });
    e.schedule(SimTime::zero() + period, 0, EventKind::TaTimer);
    e.run_until(SimTime::from_seconds_exact(60));
    CHECK(fired == static_cast<std::size_t>(60000 / 10240));
}

TEST_CASE("cancelled events are skipped")
{
    Recorder r;
    const EventId a = r.engine.schedule(SimTime(5), 1, EventKind::Custom);
    r.engine.schedule(SimTime(6), 2, EventKind::Custom);
    r.engine.cancel(a);
    CHECK(r.engine.pending() == 1);
    r.engine.cancel(a);
    CHECK(r.engine.pending() == 1);
    CHECK(r.engine.run_until(SimTime(10)) == 1);
    REQUIRE(r.seen.size() == 1);
    CHECK(r.seen[0].target == 2);
}

TEST_CASE("dispatch times never decrease under random scheduling")
{
    RngStream rng(99, "engine/property");
    std::vector<std::uint64_t> times;
    Engine e;
    e.set_handler([&](const Event& ev) {
        times.push_back(ev.fire_at.ticks());
        if (times.size() < 5000)
        {
            e.schedule(ev.fire_at + rng.uniform_int(0, 50), 0, EventKind::Custom);
            if (rng.bernoulli(0.3))
            {
                e.schedule(ev.fire_at, 0, EventKind::Custom);
            }
        }
    });
    for (int i = 0; i < 20; ++i)
    {
        e.schedule(SimTime(static_cast<std::uint64_t>(rng.uniform_int(0, 100))), 0, EventKind::Custom);
    }
    e.run_until(SimTime(1'000'000));
    REQUIRE(times.size() >= 5000);
    for (std::size_t i = 1; i < times.size(); ++i)
    {
        REQUIRE(times[i] >= times[i - 1]);
    }
}

TEST_CASE("trace digest is reproducible and order sensitive")
{
    auto run = [](bool swap) {
        Engine e([](const Event&) {});
        e.schedule(SimTime(1), swap ? 2 : 1, EventKind::Custom);
        e.schedule(SimTime(1), swap ? 1 : 2, EventKind::Custom);
        e.run_until(SimTime(2));
        return e.trace_digest();
    };
    CHECK(run(false) == run(false));
    CHECK(run(false) != run(true));
}

TEST_CASE("streams are deterministic per seed and label")
{
    RngStream a = derive_stream(1, "ue3/ta_noise");
    RngStream b = derive_stream(1, "ue3/ta_noise");
    for (int i = 0; i < 1000; ++i)
    {
        REQUIRE(a.next_u64() == b.next_u64());
    }

    auto first_draws = [](std::uint64_t seed, const char* label) {
        RngStream s = derive_stream(seed, label);
        std::vector<std::uint64_t> v;
        for (int i = 0; i < 16; ++i)
        {
            v.push_back(s.next_u64());
        }
        return v;
    };
    CHECK(first_draws(1, "x") != first_draws(2, "x"));
    CHECK(first_draws(1, "a") != first_draws(1, "b"));
}

TEST_CASE("distinct labels give uncorrelated streams")
{
    RngStream a = derive_stream(5, "a");
    RngStream b = derive_stream(5, "b");
    constexpr int n = 100000;
    double sa = 0, sb = 0, sab = 0, saa = 0, sbb = 0;
    for (int i = 0; i < n; ++i)
    {
        const double x = a.uniform01();
        const double y = b.uniform01();
        sa += x;
        sb += y;
        sab += x * y;
        saa += x * x;
        sbb += y * y;
    }
    const double cov = sab / n - (sa / n) * (sb / n);
    const double corr = cov / std::sqrt((saa / n - (sa / n) * (sa / n)) * (sbb / n - (sb / n) * (sb / n)));
    CHECK(std::fabs(corr) < 0.02);
    CHECK(sa / n == doctest::Approx(0.5).epsilon(0.01));
}

TEST_CASE("sampler moments")
{
    RngStream s(11, "moments");
    constexpr int n = 100000;
    double sum = 0, sq = 0;
    int ones = 0;
    std::int64_t lo = 100, hi = -100;
    for (int i = 0; i < n; ++i)
    {
        const double x = s.normal(3.0);
        sum += x;
        sq += x * x;
        ones += s.bernoulli(0.25) ? 1 : 0;
        const auto k = s.uniform_int(-3, 3);
        lo = std::min(lo, k);
        hi = std::max(hi, k);
    }
    const double mean = sum / n;
    CHECK(std::fabs(mean) < 0.05);
    CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(3.0).epsilon(0.05));
    CHECK(static_cast<double>(ones) / n == doctest::Approx(0.25).epsilon(0.05));
    CHECK(lo == -3);
    CHECK(hi == 3);
    CHECK_THROWS(s.normal(-1.0));
}
