#pragma once

#include "airsync/metrics.hpp"
#include "airsync/report.hpp"
#include "airsync/scenario.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace airsync
{

struct RunResult
{
    Scenario scenario;
    RawTrace trace;
    MetricsReport report;
};

/// Builds, runs and measures one scenario with config.seed.
RunResult simulate(const ScenarioConfig& config);

struct SweepSpec
{
    std::string parameter; ///< dotted config path
    std::vector<nlohmann::json> values;
    int repetitions = 1;
};

/// {"parameter": "...", "values": [...], "repetitions": n}; InvalidConfig on bad shape.
SweepSpec parse_sweep_spec(const nlohmann::json& doc);

struct SweepResult
{
    Table rows;    ///< one row per (value, repetition)
    Table summary; ///< mean per value, sorted by the numeric value of the parameter
};

/// Repetition r of every value runs with seed base_seed + r, so the values
/// share common random numbers. Runs are spread over worker threads; the
/// result does not depend on the thread count.
SweepResult run_sweep(const nlohmann::json& base_config, const SweepSpec& spec, std::uint64_t base_seed,
                      unsigned threads = 0);

} // namespace airsync
