#include "airsync/rng.hpp"

#include <stdexcept>

namespace airsync
{
namespace
{

std::uint64_t fnv1a64(std::string_view s)
{
    std::uint64_t h = 0xcbf29ce484222325ull;
    for (const char c : s)
    {
        h ^= static_cast<unsigned char>(c);
        h *= 0x100000001b3ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t x)
{
    x += 0x9e3779b97f4a7c15ull;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
    return x ^ (x >> 31);
}

std::mt19937_64 seeded_engine(std::uint64_t root_seed, std::string_view label)
{
    const std::uint64_t a = splitmix64(root_seed);
    const std::uint64_t b = splitmix64(fnv1a64(label) ^ a);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

} // namespace

RngStream::RngStream(std::uint64_t root_seed, std::string label)
    : root_seed_(root_seed), label_(std::move(label)), engine_(seeded_engine(root_seed_, label_))
{
}

double RngStream::uniform01()
{
    // 53 high bits -> [0, 1)
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::int64_t RngStream::uniform_int(std::int64_t lo, std::int64_t hi)
{
    if (hi < lo)
    {
        throw std::invalid_argument("RngStream::uniform_int: hi < lo");
    }
    std::uniform_int_distribution<std::int64_t> dist(lo, hi);
    return dist(engine_);
}

double RngStream::normal(double sigma)
{
    if (sigma < 0.0)
    {
        throw std::invalid_argument("RngStream::normal: negative sigma");
    }
    return standard_normal_(engine_) * sigma;
}

bool RngStream::bernoulli(double p)
{
    if (!(p >= 0.0 && p <= 1.0))
    {
        throw std::invalid_argument("RngStream::bernoulli: probability outside [0, 1]");
    }
    return uniform01() < p;
}

RngStream derive_stream(std::uint64_t root_seed, std::string_view label)
{
    return RngStream(root_seed, std::string(label));
}

} // namespace airsync
