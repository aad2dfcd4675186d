#pragma once

#include "airsync/clock.hpp"
#include "airsync/engine.hpp"
#include "airsync/ota.hpp"
#include "airsync/rng.hpp"
#include "airsync/sim_time.hpp"

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace airsync
{

enum class NodeRole
{
    ReferenceSource,
    BaseStation,
    Ue,
    Gateway,
    LegacyDevice,
    Pmu,
};

const char* to_string(NodeRole role);
std::optional<NodeRole> parse_role(std::string_view text);

/// Ue, Gateway and Pmu synchronize over the air to their base station.
bool is_ota_slave(NodeRole role);
/// End devices whose mutual offset matters: Ue, Gateway, LegacyDevice, Pmu.
bool is_device(NodeRole role);

struct Position
{
    double x = 0.0;
    double y = 0.0;
};

double distance(Position a, Position b);

/// Scalar parameter drawn once per node at build time.
struct ParamDist
{
    enum class Kind
    {
        Fixed,
        Uniform,
        Normal,
    };

    Kind kind = Kind::Fixed;
    double a = 0.0; ///< value | lower bound | mean
    double b = 0.0; ///< unused | upper bound | sigma

    static ParamDist fixed(double v) { return {Kind::Fixed, v, 0.0}; }
    static ParamDist uniform(double lo, double hi) { return {Kind::Uniform, lo, hi}; }
    static ParamDist normal(double mean, double sigma) { return {Kind::Normal, mean, sigma}; }

    double draw(RngStream& rng) const;
};

/// theta0 and stamp_noise are in ticks; skew and drift are dimensionless.
struct ClockSpec
{
    ParamDist theta0;
    ParamDist skew;
    ParamDist drift;
    ParamDist stamp_noise;
};

/// Built-in per-role defaults: devices +/-1 ms phase and +/-10 ppm, base
/// stations +/-1 ms and +/-50 ppb, the reference ideal.
ClockSpec default_clock_spec(NodeRole role);

/// Extra message delay (scheduling, queueing) in ticks.
struct DelayDist
{
    enum class Kind
    {
        None,
        Fixed,
        Uniform,
    };

    Kind kind = Kind::None;
    Ticks lo = 0;
    Ticks hi = 0;

    static DelayDist none() { return {}; }
    static DelayDist fixed(Ticks d) { return {Kind::Fixed, d, d}; }
    static DelayDist uniform(Ticks lo, Ticks hi) { return {Kind::Uniform, lo, hi}; }

    /// Always consumes exactly one raw draw.
    Ticks draw(RngStream& rng) const;
};

struct LinkModel
{
    double propagation_speed = kSpeedOfLight;
    DelayDist extra_delay;         ///< dedicated signaling and command deliveries
    double loss_prob = 0.0;        ///< per sync message
    double rtt_noise_sigma = 0.0;  ///< BS round-trip estimation noise, ticks
    double wrong_bin_prob = 0.0;   ///< probability of a +/-16Ts TA bin error

    Ticks propagation(Position a, Position b) const;
};

enum class Enabler
{
    TaSib16,
    RibsUe,
    DedicatedTwoWay,
};

const char* to_string(Enabler enabler);

struct BsAlignment
{
    enum class Mode
    {
        Perfect,    ///< every BS locked to the reference
        Ribs,       ///< non-anchor BSs periodically aligned to the anchor over the air
        FixedError, ///< non-anchor BSs locked with a constant offset
    };

    Mode mode = Mode::Perfect;
    RibsMode ribs_mode = RibsMode::ListenOnly;
    Ticks fixed_error = 0;
    Ticks period = kTicksPerSecond;
    Ticks asymmetry = 0; ///< extra anchor->BS delay on the inter-BS link
};

struct SyncPlan
{
    Enabler enabler = Enabler::TaSib16;
    Ticks resync_period = 80 * kTicksPerMs;
    TaTimerConfig ta_timer;
    SibConfig sib;
    BsAlignment bs_alignment;
    Ticks turnaround = kTicksPerMs; ///< responder hold time in two-way exchanges
};

struct NodeSpec
{
    std::string id;
    NodeRole role = NodeRole::Ue;
    Position position;
    std::string attach; ///< BS for OTA slaves, GW for legacy devices
    std::optional<ClockSpec> clock;
};

struct WorkloadSpec
{
    Ticks command_period = kTicksPerMs;
    std::vector<std::string> targets; ///< empty: every Ue
    std::optional<Ticks> ideal_grid_phase;
};

struct FaultGeometry
{
    double fault_position_m = 0.0;
    double line_length_m = 0.0;
    double wave_speed_mps = kSpeedOfLight;

    /// Throws InvalidGeometry.
    void validate() const;
};

struct FaultSpec
{
    std::string pmu_a;
    std::string pmu_b;
    Ticks at = 0;
    FaultGeometry geometry;
    /// When set, the report adds the uncertainty width for this +/- bound.
    std::optional<Ticks> sync_error_bound;
};

struct ScenarioConfig
{
    int schema_version = 1;
    std::string name;
    std::uint64_t seed = 1;
    Ticks duration = kTicksPerSecond;
    Ticks sampling_period = kTicksPerMs;
    Ticks warmup = 0; ///< no offset samples before this instant
    std::vector<NodeSpec> nodes;
    std::map<NodeRole, ClockSpec> clock_defaults;
    LinkModel link;
    SyncPlan plan;
    double gw_local_sigma = 0.0; ///< legacy-domain error std dev, ticks
    std::optional<WorkloadSpec> workload;
    std::optional<FaultSpec> fault;
    std::vector<std::string> presets;
    std::vector<std::string> pairwise_nodes; ///< empty: every device
};

struct Node
{
    NodeId id = 0;
    std::string name;
    NodeRole role = NodeRole::Ue;
    Position position;
    std::optional<NodeId> attach;
    ClockState clock;
    /// One-way propagation to the attach point (BS: to the anchor BS).
    Ticks link_delay = 0;
};

struct Workload
{
    Ticks command_period = kTicksPerMs;
    std::vector<NodeId> targets;
    std::optional<Ticks> ideal_grid_phase;
};

struct Scenario
{
    ScenarioConfig config;
    std::vector<Node> nodes;
    NodeId reference = 0;
    std::vector<NodeId> base_stations;
    std::optional<NodeId> anchor_bs;
    std::vector<NodeId> pairwise_nodes;
    std::optional<Workload> workload;

    const Node& node(NodeId id) const { return nodes.at(id); }
    std::optional<NodeId> find(std::string_view name) const;
};

/// Validates the topology and draws every clock from its distribution using
/// streams derived from config.seed. Throws InvalidConfig with a field path.
/// A ReferenceSource named "ref" is added when the config lists none.
Scenario build_scenario(const ScenarioConfig& config);

// ---------------------------------------------------------------------------
// Trace

/// Error of a node's clock reading against the reference.
struct OffsetSample
{
    SimTime t_true;
    NodeId node = 0;
    Ticks error = 0;
};

enum class SyncKind
{
    TaSib16,
    RibsUe,
    DedicatedTwoWay,
    GwRelay,
    BsAlignment,
};

const char* to_string(SyncKind kind);

struct SyncRecord
{
    SimTime t_true;
    NodeId node = 0;
    SyncKind kind = SyncKind::TaSib16;
    bool lost = false;
    Ticks pre_error = 0;
    Ticks post_error = 0;
    Ticks delta = 0;
};

struct Delivery
{
    SimTime sent_at;
    SimTime t_true;
    NodeId node = 0;
    Ticks local = 0; ///< device reading at delivery
    std::int64_t cycle = 0;
};

struct FaultStamps
{
    SimTime arrival_a;
    SimTime arrival_b;
    Ticks t_a = 0;
    Ticks t_b = 0;
};

struct FaultRecord
{
    SimTime at;
    NodeId pmu_a = 0;
    NodeId pmu_b = 0;
    FaultStamps stamps;
};

struct RawTrace
{
    std::vector<OffsetSample> samples;
    std::vector<SyncRecord> syncs;
    std::vector<Delivery> deliveries;
    std::optional<FaultRecord> fault;
    std::uint64_t events_dispatched = 0;
    std::uint64_t trace_digest = 0;
    std::uint64_t ta_updates = 0;
    std::vector<ClockState> final_clocks;
};

/// Runs BS alignment, periodic OTA sync, GW relay, workload deliveries and the
/// optional fault event up to `duration`.
RawTrace run_scenario(const Scenario& scenario, SimTime duration, std::uint64_t root_seed);

/// Travelling waves reach PMU-A after x / v and PMU-B after (L - x) / v; each
/// PMU stamps the arrival with its own clock. Throws InvalidGeometry.
FaultStamps pmu_fault_event(const ClockState& pmu_a, const ClockState& pmu_b, SimTime fault_at,
                            const FaultGeometry& geometry, RngStream& a_stamps, RngStream& b_stamps);

} // namespace airsync
