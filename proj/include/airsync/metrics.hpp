#pragma once

#include "airsync/scenario.hpp"
#include "airsync/sim_time.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace airsync
{

/// Nearest-rank percentiles.
struct Percentiles
{
    Ticks p50 = 0;
    Ticks p95 = 0;
    Ticks p99 = 0;
    Ticks max = 0;
    std::size_t count = 0;
};

Percentiles percentiles_of(std::vector<Ticks> values);

struct PairwiseStats
{
    Percentiles per_instant; ///< max |e_i - e_j| over node pairs, one value per instant
};

/// Throws InsufficientNodes unless some instant carries >= 2 of `nodes`
/// (empty `nodes`: every node present in the samples).
PairwiseStats pairwise_offset_stats(std::span<const OffsetSample> samples, std::span<const NodeId> nodes = {});

struct JitterStats
{
    Percentiles abs_deviation;
    Ticks min_deviation = 0;
    Ticks max_deviation = 0;
    Ticks peak_to_peak = 0;
};

/// Deviation of each local delivery instant from the nearest grid point.
/// Without a configured grid phase, the phase is the median deviation per target.
JitterStats jitter_stats(std::span<const Delivery> deliveries, const Workload& workload);

struct FaultEstimate
{
    double position_m = 0.0;
    bool out_of_range = false;
};

/// x = (L - v * (tB - tA)) / 2, clamped to [0, L].
FaultEstimate fault_location_estimate(Ticks t_a, Ticks t_b, double line_length_m, double wave_speed_mps);

/// Width of the estimate interval for inter-PMU error in [-bound, +bound]: v * bound.
double localization_uncertainty(Ticks sync_error_bound, double wave_speed_mps);

struct RequirementPreset
{
    std::string name;
    std::optional<Ticks> per_device_bound; ///< "+/-X" accuracy against the reference
    Ticks device_sync_bound = 0;           ///< pairwise budget, 2X for a +/-X preset
    std::optional<Ticks> jitter_bound;
    std::string notes;
};

const std::vector<RequirementPreset>& builtin_presets();
std::optional<RequirementPreset> find_preset(std::string_view name);

struct NodeMetrics
{
    NodeId id = 0;
    std::string name;
    NodeRole role = NodeRole::Ue;
    Percentiles abs_error;
    double mean_error = 0.0;
    std::optional<Ticks> peak_presync_error; ///< max |error| right before a resync, first sync excluded
    std::size_t syncs_applied = 0;
    std::size_t syncs_lost = 0;
};

struct FaultMetrics
{
    Ticks t_a = 0;
    Ticks t_b = 0;
    double true_position_m = 0.0;
    FaultEstimate estimate;
    double deviation_m = 0.0;
    std::optional<double> uncertainty_width_m;
};

struct Verdict
{
    std::string preset;
    bool pass = false;
    Ticks measured_pairwise = 0;
    Ticks device_sync_bound = 0;
    std::optional<Ticks> measured_jitter;
    std::optional<Ticks> jitter_bound;
};

struct MetricsReport
{
    std::vector<NodeMetrics> nodes;
    Percentiles device_abs_error; ///< pooled over the pairwise node set
    std::optional<PairwiseStats> pairwise;
    std::optional<JitterStats> jitter;
    std::optional<FaultMetrics> fault;
    std::vector<Verdict> verdicts;

    std::uint64_t events_dispatched = 0;
    std::uint64_t trace_digest = 0;
    std::size_t samples = 0;
    std::size_t syncs_applied = 0;
    std::size_t syncs_lost = 0;
    std::size_t deliveries = 0;
    std::uint64_t ta_updates = 0;

    Ticks max_pairwise() const { return pairwise ? pairwise->per_instant.max : 0; }
};

/// Pass iff max pairwise offset <= device_sync_bound and, when the preset has a
/// jitter bound, measured jitter peak-to-peak <= jitter_bound (no deliveries: fail).
std::vector<Verdict> check_requirements(const MetricsReport& report, std::span<const RequirementPreset> presets);

/// Computes every statistic and the verdicts for the scenario's configured presets.
/// Throws std::invalid_argument on an unknown preset name.
MetricsReport build_report(const Scenario& scenario, const RawTrace& trace);

} // namespace airsync
