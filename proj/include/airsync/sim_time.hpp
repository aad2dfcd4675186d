#pragma once

#include <compare>
#include <cstdint>
#include <limits>
#include <string>

namespace airsync
{

/// Signed tick count: offsets, errors, delays.
using Ticks = std::int64_t;

/// 1 tick = 1 / 30.72 GHz. LTE Ts = 1 / (15000 * 2048) s is exactly 1000 ticks.
inline constexpr Ticks kTicksPerSecond = 30'720'000'000;
inline constexpr Ticks kTicksPerMs = 30'720'000;
inline constexpr Ticks kTicksPerUs = 30'720;
inline constexpr Ticks kTs = 1000;
inline constexpr Ticks kTaStep = 16 * kTs;

/// Speed of light used for all radio propagation delays (m/s).
inline constexpr double kSpeedOfLight = 3.0e8;

/// A point on the reference (true) timeline.
///
/// Scheduling arithmetic is integer-only; overflow is a hard error rather than
/// wraparound.
class SimTime
{
public:
    constexpr SimTime() = default;
    constexpr explicit SimTime(std::uint64_t ticks) : ticks_(ticks) {}

    static constexpr SimTime zero() { return SimTime{}; }
    static SimTime from_ms(std::uint64_t ms);
    static SimTime from_seconds_exact(std::uint64_t s);

    constexpr std::uint64_t ticks() const { return ticks_; }
    /// Signed view; throws Overflow above INT64_MAX.
    Ticks as_signed() const;
    double seconds() const { return static_cast<double>(ticks_) / static_cast<double>(kTicksPerSecond); }

    /// Adds a signed tick delta; throws Overflow on wrap or underflow below zero.
    SimTime plus(Ticks delta) const;

    friend constexpr auto operator<=>(SimTime, SimTime) = default;

private:
    std::uint64_t ticks_ = 0;
};

SimTime operator+(SimTime t, Ticks delta);
Ticks operator-(SimTime a, SimTime b);

Ticks checked_add(Ticks a, Ticks b);
Ticks checked_mul(Ticks a, Ticks b);

/// I/O-boundary conversions.
inline double ticks_to_ns(Ticks t) { return static_cast<double>(t) / 30.72; }
inline double ticks_to_us(Ticks t) { return static_cast<double>(t) / static_cast<double>(kTicksPerUs); }
inline double ticks_to_seconds(Ticks t) { return static_cast<double>(t) / static_cast<double>(kTicksPerSecond); }

/// Rounds seconds to the nearest tick.
Ticks seconds_to_ticks(double seconds);

/// Line-of-sight propagation delay for a distance in meters, rounded to the nearest tick.
Ticks propagation_ticks(double meters, double speed_mps = kSpeedOfLight);

/// Parses "<decimal><unit>" with unit in {s, ms, us, ns, ticks}. The value
/// must be an exact integer number of ticks; throws std::invalid_argument
/// otherwise (e.g. "1ns" is 30.72 ticks and is rejected).
Ticks parse_time_value(const std::string& text);

} // namespace airsync
