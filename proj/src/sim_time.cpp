#include "airsync/sim_time.hpp"

#include "airsync/errors.hpp"

#include <cctype>
#include <cmath>
#include <stdexcept>

namespace airsync
{

SimTime SimTime::from_ms(std::uint64_t ms)
{
    if (ms > std::numeric_limits<std::uint64_t>::max() / kTicksPerMs)
    {
        throw Overflow("SimTime::from_ms: " + std::to_string(ms) + " ms exceeds the tick range");
    }
    return SimTime{ms * static_cast<std::uint64_t>(kTicksPerMs)};
}

SimTime SimTime::from_seconds_exact(std::uint64_t s)
{
    if (s > std::numeric_limits<std::uint64_t>::max() / kTicksPerSecond)
    {
        throw Overflow("SimTime::from_seconds_exact: " + std::to_string(s) + " s exceeds the tick range");
    }
    return SimTime{s * static_cast<std::uint64_t>(kTicksPerSecond)};
}

Ticks SimTime::as_signed() const
{
    if (ticks_ > static_cast<std::uint64_t>(std::numeric_limits<Ticks>::max()))
    {
        throw Overflow("SimTime does not fit a signed tick count");
    }
    return static_cast<Ticks>(ticks_);
}

SimTime SimTime::plus(Ticks delta) const
{
    if (delta >= 0)
    {
        const auto d = static_cast<std::uint64_t>(delta);
        if (ticks_ > std::numeric_limits<std::uint64_t>::max() - d)
        {
            throw Overflow("SimTime overflow");
        }
        return SimTime{ticks_ + d};
    }
    // -(INT64_MIN) is not representable as Ticks; go through unsigned.
    const auto d = static_cast<std::uint64_t>(-(delta + 1)) + 1u;
    if (d > ticks_)
    {
        throw Overflow("SimTime underflow below zero");
    }
    return SimTime{ticks_ - d};
}

SimTime operator+(SimTime t, Ticks delta) { return t.plus(delta); }

Ticks operator-(SimTime a, SimTime b) { return checked_add(a.as_signed(), -b.as_signed()); }

Ticks checked_add(Ticks a, Ticks b)
{
    Ticks out = 0;
    if (__builtin_add_overflow(a, b, &out))
    {
        throw Overflow("tick addition overflow");
    }
    return out;
}

Ticks checked_mul(Ticks a, Ticks b)
{
    Ticks out = 0;
    if (__builtin_mul_overflow(a, b, &out))
    {
        throw Overflow("tick multiplication overflow");
    }
    return out;
}

Ticks seconds_to_ticks(double seconds)
{
    const double t = seconds * static_cast<double>(kTicksPerSecond);
    if (!std::isfinite(t) || std::fabs(t) >= 9.2e18)
    {
        throw Overflow("seconds_to_ticks: value out of range");
    }
    return std::llround(t);
}

Ticks propagation_ticks(double meters, double speed_mps)
{
    if (!(meters >= 0.0) || !(speed_mps > 0.0))
    {
        throw std::invalid_argument("propagation_ticks: distance must be >= 0 and speed > 0");
    }
    return seconds_to_ticks(meters / speed_mps);
}

namespace
{
__extension__ typedef __int128 i128;
}

Ticks parse_time_value(const std::string& text)
{
    std::size_t i = 0;
    bool negative = false;
    if (i < text.size() && (text[i] == '-' || text[i] == '+'))
    {
        negative = text[i] == '-';
        ++i;
    }

    i128 mantissa = 0;
    int decimals = 0;
    bool seen_digit = false;
    bool seen_point = false;
    for (; i < text.size(); ++i)
    {
        const char c = text[i];
        if (std::isdigit(static_cast<unsigned char>(c)))
        {
            mantissa = mantissa * 10 + (c - '0');
            if (mantissa > static_cast<i128>(1) << 100)
            {
                throw std::invalid_argument("time value '" + text + "' has too many digits");
            }
            seen_digit = true;
            if (seen_point)
            {
                ++decimals;
            }
        }
        else if (c == '.' && !seen_point)
        {
            seen_point = true;
        }
        else
        {
            break;
        }
    }
    if (!seen_digit)
    {
        throw std::invalid_argument("time value '" + text + "' has no numeric part");
    }

    std::string unit = text.substr(i);
    while (!unit.empty() && unit.front() == ' ')
    {
        unit.erase(unit.begin());
    }

    i128 num = 0;
    i128 den = 1;
    if (unit == "s")
    {
        num = kTicksPerSecond;
    }
    else if (unit == "ms")
    {
        num = kTicksPerMs;
    }
    else if (unit == "us")
    {
        num = kTicksPerUs;
    }
    else if (unit == "ns")
    {
        num = 3072;
        den = 100;
    }
    else if (unit == "ticks" || unit == "tick")
    {
        num = 1;
    }
    else
    {
        throw std::invalid_argument("time value '" + text + "' needs a unit suffix (s, ms, us, ns, ticks)");
    }

    for (int k = 0; k < decimals; ++k)
    {
        den *= 10;
    }
    const i128 scaled = mantissa * num;
    if (scaled % den != 0)
    {
        throw std::invalid_argument("time value '" + text + "' is not an integer number of ticks (1 tick = 1/30.72 GHz)");
    }
    const i128 ticks = scaled / den;
    if (ticks > std::numeric_limits<Ticks>::max())
    {
        throw std::invalid_argument("time value '" + text + "' exceeds the tick range");
    }
    return negative ? -static_cast<Ticks>(ticks) : static_cast<Ticks>(ticks);
}

} // namespace airsync
