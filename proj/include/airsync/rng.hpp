#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

namespace airsync
{

/// A labelled random stream split off a root seed.
///
/// The same (root_seed, label) pair always yields the same sequence; distinct
/// labels are seeded through independent hash paths. Samplers always consume
/// a fixed number of raw draws so that varying a parameter (a sigma, a
/// probability) never shifts the downstream sequence.
class RngStream
{
public:
    RngStream(std::uint64_t root_seed, std::string label);

    std::uint64_t root_seed() const { return root_seed_; }
    const std::string& label() const { return label_; }

    std::uint64_t next_u64() { return engine_(); }
    /// Uniform on [0, 1).
    double uniform01();
    /// Uniform integer on [lo, hi], inclusive.
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);
    /// Standard normal draw scaled by sigma (sigma == 0 still consumes a draw).
    double normal(double sigma);
    bool bernoulli(double p);

private:
    std::uint64_t root_seed_;
    std::string label_;
    std::mt19937_64 engine_;
    std::normal_distribution<double> standard_normal_{0.0, 1.0};
};

RngStream derive_stream(std::uint64_t root_seed, std::string_view label);

} // namespace airsync
