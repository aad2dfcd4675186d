#include "airsync/clock.hpp"

#include "airsync/errors.hpp"

#include <cmath>
#include <stdexcept>

namespace airsync
{

void ClockParams::validate() const
{
    if (!(std::fabs(skew) < 1e-3))
    {
        throw std::invalid_argument("clock skew must satisfy |skew| < 1e-3");
    }
    if (!std::isfinite(drift))
    {
        throw std::invalid_argument("clock drift must be finite");
    }
    if (!(stamp_noise_sigma >= 0.0) || !std::isfinite(stamp_noise_sigma))
    {
        throw std::invalid_argument("stamp noise sigma must be >= 0");
    }
}

Ticks local_time(const ClockState& state, SimTime t_true)
{
    const Ticks t = t_true.as_signed();
    const double rate_error = state.params.skew - state.skew_correction;
    const double t_sec = t_true.seconds();
    const double excess = rate_error * static_cast<double>(t) +
                          0.5 * state.params.drift * t_sec * t_sec * static_cast<double>(kTicksPerSecond);
    if (!std::isfinite(excess) || std::fabs(excess) > 9.0e18)
    {
        throw Overflow("local_time: frequency term exceeds the tick range");
    }
    Ticks out = checked_add(state.params.theta0, state.correction);
    out = checked_add(out, t);
    return checked_add(out, std::llround(excess));
}

Ticks clock_error(const ClockState& state, SimTime t_true)
{
    return checked_add(local_time(state, t_true), -t_true.as_signed());
}

Ticks stamp(const ClockState& state, SimTime t_true, RngStream& rng)
{
    const double noise = rng.normal(state.params.stamp_noise_sigma);
    return checked_add(local_time(state, t_true), std::llround(noise));
}

ClockState apply_offset_correction(ClockState state, Ticks delta)
{
    state.correction = checked_add(state.correction, -delta);
    return state;
}

ClockState apply_skew_correction(ClockState state, double delta_skew, SimTime at)
{
    state.skew_correction += delta_skew;
    state.correction = checked_add(state.correction, std::llround(delta_skew * static_cast<double>(at.as_signed())));
    return state;
}

double estimate_skew(std::span<const SkewSample> samples)
{
    if (samples.size() < 2)
    {
        throw InsufficientSamples("estimate_skew: need at least 2 samples, got " + std::to_string(samples.size()));
    }
    // Center on the first sample so large absolute times do not cancel.
    const Ticks x0 = samples.front().sync_time;
    const Ticks y0 = samples.front().offset;
    double mean_x = 0.0;
    double mean_y = 0.0;
    for (const auto& s : samples)
    {
        mean_x += static_cast<double>(s.sync_time - x0);
        mean_y += static_cast<double>(s.offset - y0);
    }
    const auto n = static_cast<double>(samples.size());
    mean_x /= n;
    mean_y /= n;

    double sxx = 0.0;
    double sxy = 0.0;
    for (const auto& s : samples)
    {
        const double dx = static_cast<double>(s.sync_time - x0) - mean_x;
        const double dy = static_cast<double>(s.offset - y0) - mean_y;
        sxx += dx * dx;
        sxy += dx * dy;
    }
    if (sxx == 0.0)
    {
        throw InsufficientSamples("estimate_skew: samples share a single sync time");
    }
    return sxy / sxx;
}

} // namespace airsync
