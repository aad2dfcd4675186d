#pragma once

#include "airsync/rng.hpp"
#include "airsync/sim_time.hpp"

#include <optional>
#include <span>

namespace airsync
{

/// Oscillator parameters of one node.
struct ClockParams
{
    Ticks theta0 = 0;              ///< initial phase offset
    double skew = 0.0;             ///< fractional frequency offset (1e-6 = 1 ppm)
    double drift = 0.0;            ///< aging, fractional frequency change per second
    double stamp_noise_sigma = 0.0; ///< timestamp noise std dev, ticks

    /// Throws std::invalid_argument if |skew| >= 1e-3 or sigma < 0.
    void validate() const;
};

/// A clock plus the corrections applied to it so far.
///
/// Reading the clock is a pure function of (params, corrections, true time).
struct ClockState
{
    ClockParams params;
    Ticks correction = 0;
    double skew_correction = 0.0;
    std::optional<SimTime> last_sync_at;

    static ClockState ideal() { return ClockState{}; }
    static ClockState with_params(const ClockParams& p)
    {
        p.validate();
        ClockState s;
        s.params = p;
        return s;
    }
};

/// theta0 + correction + (1 + skew - skew_correction) * t + (drift / 2) * t^2,
/// the quadratic term in seconds. Rounded to the nearest tick; the floating
/// path costs < 1 tick over horizons up to 1e4 s. Throws Overflow.
Ticks local_time(const ClockState& state, SimTime t_true);

/// local_time minus the reference reading at the same instant.
Ticks clock_error(const ClockState& state, SimTime t_true);

/// local_time plus a Gaussian timestamping error, rounded to a tick.
Ticks stamp(const ClockState& state, SimTime t_true, RngStream& rng);

/// Step correction: a later reading at the same instant is exactly `delta` lower.
ClockState apply_offset_correction(ClockState state, Ticks delta);

/// Adds `delta_skew` to the frequency correction, stepping `correction` so the
/// reading at `at` stays continuous (within one tick).
ClockState apply_skew_correction(ClockState state, double delta_skew, SimTime at);

struct SkewSample
{
    Ticks sync_time; ///< local time of the measurement
    Ticks offset;    ///< measured offset at that time
};

/// Least-squares slope of offset versus time. Throws InsufficientSamples unless
/// there are at least two samples at distinct times.
double estimate_skew(std::span<const SkewSample> samples);

} // namespace airsync
