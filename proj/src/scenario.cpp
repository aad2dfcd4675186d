#include "airsync/scenario.hpp"

#include "airsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace airsync
{

const char* to_string(NodeRole role)
{
    switch (role)
    {
    case NodeRole::ReferenceSource: return "reference";
    case NodeRole::BaseStation: return "bs";
    case NodeRole::Ue: return "ue";
    case NodeRole::Gateway: return "gateway";
    case NodeRole::LegacyDevice: return "legacy";
    case NodeRole::Pmu: return "pmu";
    }
    return "unknown";
}

std::optional<NodeRole> parse_role(std::string_view text)
{
    for (const NodeRole r : {NodeRole::ReferenceSource, NodeRole::BaseStation, NodeRole::Ue, NodeRole::Gateway,
                             NodeRole::LegacyDevice, NodeRole::Pmu})
    {
        if (text == to_string(r))
        {
            return r;
        }
    }
    return std::nullopt;
}

bool is_ota_slave(NodeRole role)
{
    return role == NodeRole::Ue || role == NodeRole::Gateway || role == NodeRole::Pmu;
}

bool is_device(NodeRole role)
{
    return is_ota_slave(role) || role == NodeRole::LegacyDevice;
}

double distance(Position a, Position b)
{
    return std::hypot(a.x - b.x, a.y - b.y);
}

double ParamDist::draw(RngStream& rng) const
{
    switch (kind)
    {
    case Kind::Fixed: return a;
    case Kind::Uniform: return a + (b - a) * rng.uniform01();
    case Kind::Normal: return a + rng.normal(b);
    }
    return a;
}

ClockSpec default_clock_spec(NodeRole role)
{
    const double ms = static_cast<double>(kTicksPerMs);
    switch (role)
    {
    case NodeRole::ReferenceSource: return ClockSpec{};
    case NodeRole::BaseStation:
        return ClockSpec{ParamDist::uniform(-ms, ms), ParamDist::uniform(-50e-9, 50e-9), ParamDist::fixed(0.0),
                         ParamDist::fixed(0.0)};
    default:
        return ClockSpec{ParamDist::uniform(-ms, ms), ParamDist::uniform(-10e-6, 10e-6), ParamDist::fixed(0.0),
                         ParamDist::fixed(0.0)};
    }
}

Ticks DelayDist::draw(RngStream& rng) const
{
    const double u = rng.uniform01();
    switch (kind)
    {
    case Kind::None: return 0;
    case Kind::Fixed: return lo;
    case Kind::Uniform: return std::min(hi, lo + static_cast<Ticks>(u * static_cast<double>(hi - lo + 1)));
    }
    return 0;
}

Ticks LinkModel::propagation(Position a, Position b) const
{
    return propagation_ticks(distance(a, b), propagation_speed);
}

const char* to_string(Enabler enabler)
{
    switch (enabler)
    {
    case Enabler::TaSib16: return "ta_sib16";
    case Enabler::RibsUe: return "ribs_ue";
    case Enabler::DedicatedTwoWay: return "dedicated_two_way";
    }
    return "unknown";
}

const char* to_string(SyncKind kind)
{
    switch (kind)
    {
    case SyncKind::TaSib16: return "ta_sib16";
    case SyncKind::RibsUe: return "ribs_ue";
    case SyncKind::DedicatedTwoWay: return "dedicated_two_way";
    case SyncKind::GwRelay: return "gw_relay";
    case SyncKind::BsAlignment: return "bs_alignment";
    }
    return "unknown";
}

void FaultGeometry::validate() const
{
    if (!(line_length_m > 0.0) || !std::isfinite(line_length_m))
    {
        throw InvalidGeometry("line length must be > 0");
    }
    if (!(wave_speed_mps > 0.0) || !std::isfinite(wave_speed_mps))
    {
        throw InvalidGeometry("wave speed must be > 0");
    }
    if (!(fault_position_m >= 0.0 && fault_position_m <= line_length_m))
    {
        throw InvalidGeometry("fault position must lie on the line [0, L]");
    }
}

std::optional<NodeId> Scenario::find(std::string_view name) const
{
    for (const Node& n : nodes)
    {
        if (n.name == name)
        {
            return n.id;
        }
    }
    return std::nullopt;
}

namespace
{

std::string node_path(std::size_t i, const char* field)
{
    return "nodes[" + std::to_string(i) + "]." + field;
}

void validate_plan(const ScenarioConfig& cfg)
{
    const SyncPlan& plan = cfg.plan;
    if (cfg.duration <= 0)
    {
        throw InvalidConfig("duration", "must be > 0");
    }
    if (cfg.sampling_period <= 0)
    {
        throw InvalidConfig("sampling_period", "must be > 0");
    }
    if (cfg.warmup < 0 || cfg.warmup >= cfg.duration)
    {
        throw InvalidConfig("warmup", "must lie in [0, duration)");
    }
    if (plan.resync_period <= 0)
    {
        throw InvalidConfig("sync_plan.resync_period", "must be > 0");
    }
    try
    {
        plan.ta_timer.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw InvalidConfig("sync_plan.ta_timer", e.what());
    }
    try
    {
        plan.sib.validate();
    }
    catch (const std::invalid_argument& e)
    {
        throw InvalidConfig("sync_plan.sib", e.what());
    }
    if (plan.enabler == Enabler::TaSib16 && plan.resync_period % plan.sib.periodicity != 0)
    {
        throw InvalidConfig("sync_plan.resync_period", "must be a multiple of sync_plan.sib.periodicity");
    }
    if (plan.turnaround < 0)
    {
        throw InvalidConfig("sync_plan.turnaround", "must be >= 0");
    }
    if (plan.bs_alignment.mode == BsAlignment::Mode::Ribs && plan.bs_alignment.period <= 0)
    {
        throw InvalidConfig("sync_plan.bs_alignment.period", "must be > 0");
    }
    const LinkModel& link = cfg.link;
    if (!(link.loss_prob >= 0.0 && link.loss_prob <= 1.0))
    {
        throw InvalidConfig("link.loss_prob", "must lie in [0, 1]");
    }
    if (!(link.wrong_bin_prob >= 0.0 && link.wrong_bin_prob <= 1.0))
    {
        throw InvalidConfig("link.wrong_bin_prob", "must lie in [0, 1]");
    }
    if (!(link.rtt_noise_sigma >= 0.0))
    {
        throw InvalidConfig("link.rtt_noise_sigma", "must be >= 0");
    }
    if (!(link.propagation_speed > 0.0))
    {
        throw InvalidConfig("link.propagation_speed", "must be > 0");
    }
    if (link.extra_delay.lo < 0 || link.extra_delay.hi < link.extra_delay.lo)
    {
        throw InvalidConfig("link.extra_delay", "needs 0 <= lo <= hi");
    }
    if (!(cfg.gw_local_sigma >= 0.0))
    {
        throw InvalidConfig("gateway.local_domain_error_sigma", "must be >= 0");
    }
}

ClockState draw_clock(const ClockSpec& spec, std::uint64_t seed, const std::string& name, std::size_t index)
{
    auto stream = [&](const char* param) { return derive_stream(seed, name + "/clock/" + param); };
    RngStream theta_rng = stream("theta0");
    RngStream skew_rng = stream("skew");
    RngStream drift_rng = stream("drift");
    RngStream noise_rng = stream("noise");
    ClockParams p;
    p.theta0 = std::llround(spec.theta0.draw(theta_rng));
    p.skew = spec.skew.draw(skew_rng);
    p.drift = spec.drift.draw(drift_rng);
    p.stamp_noise_sigma = std::max(0.0, spec.stamp_noise.draw(noise_rng));
    try
    {
        return ClockState::with_params(p);
    }
    catch (const std::invalid_argument& e)
    {
        throw InvalidConfig(node_path(index, "clock"), e.what());
    }
}

} // namespace

Scenario build_scenario(const ScenarioConfig& config)
{
    if (config.schema_version != 1)
    {
        throw InvalidConfig("schema_version", "unsupported version " + std::to_string(config.schema_version));
    }
    validate_plan(config);

    Scenario sc;
    sc.config = config;

    std::vector<NodeSpec> specs = config.nodes;
    const auto refs = std::count_if(specs.begin(), specs.end(),
                                    [](const NodeSpec& n) { return n.role == NodeRole::ReferenceSource; });
    if (refs > 1)
    {
        throw InvalidConfig("nodes", "exactly one reference source allowed, found " + std::to_string(refs));
    }
    if (refs == 0)
    {
        NodeSpec ref;
        ref.id = "ref";
        ref.role = NodeRole::ReferenceSource;
        specs.insert(specs.begin(), ref);
    }
    const std::size_t index_shift = refs == 0 ? 1 : 0;
    auto cfg_index = [&](std::size_t i) { return i - index_shift; };

    std::set<std::string> seen;
    for (std::size_t i = 0; i < specs.size(); ++i)
    {
        const NodeSpec& s = specs[i];
        if (s.id.empty())
        {
            throw InvalidConfig(node_path(cfg_index(i), "id"), "must be non-empty");
        }
        if (!seen.insert(s.id).second)
        {
            throw InvalidConfig(node_path(cfg_index(i), "id"), "duplicate node id '" + s.id + "'");
        }
        Node n;
        n.id = static_cast<NodeId>(i);
        n.name = s.id;
        n.role = s.role;
        n.position = s.position;
        sc.nodes.push_back(n);
        if (s.role == NodeRole::ReferenceSource)
        {
            sc.reference = n.id;
        }
        if (s.role == NodeRole::BaseStation)
        {
            sc.base_stations.push_back(n.id);
        }
    }
    if (!sc.base_stations.empty())
    {
        sc.anchor_bs = sc.base_stations.front();
    }

    for (std::size_t i = 0; i < specs.size(); ++i)
    {
        const NodeSpec& s = specs[i];
        Node& n = sc.nodes[i];
        std::optional<NodeRole> required;
        if (is_ota_slave(s.role))
        {
            required = NodeRole::BaseStation;
        }
        else if (s.role == NodeRole::LegacyDevice)
        {
            required = NodeRole::Gateway;
        }
        if (required)
        {
            if (s.attach.empty())
            {
                throw InvalidConfig(node_path(cfg_index(i), "attach"),
                                    std::string("a ") + to_string(s.role) + " must attach to a " +
                                        to_string(*required));
            }
            const auto target = sc.find(s.attach);
            if (!target)
            {
                throw InvalidConfig(node_path(cfg_index(i), "attach"), "unknown node '" + s.attach + "'");
            }
            if (sc.nodes[*target].role != *required)
            {
                throw InvalidConfig(node_path(cfg_index(i), "attach"),
                                    "'" + s.attach + "' is not a " + std::string(to_string(*required)));
            }
            n.attach = *target;
        }
        else if (!s.attach.empty() && s.role == NodeRole::BaseStation)
        {
            const auto target = sc.find(s.attach);
            if (!target || sc.nodes[*target].role != NodeRole::ReferenceSource)
            {
                throw InvalidConfig(node_path(cfg_index(i), "attach"),
                                    "a base station may only attach to the reference source");
            }
            n.attach = *target;
        }

        ClockSpec spec = default_clock_spec(s.role);
        if (auto it = config.clock_defaults.find(s.role); it != config.clock_defaults.end())
        {
            spec = it->second;
        }
        if (s.clock)
        {
            spec = *s.clock;
        }
        if (s.role == NodeRole::ReferenceSource)
        {
            spec = ClockSpec{};
        }
        n.clock = draw_clock(spec, config.seed, s.id, cfg_index(i));
    }

    // BS timing relative to the reference.
    const BsAlignment& align = config.plan.bs_alignment;
    for (const NodeId bs : sc.base_stations)
    {
        Node& n = sc.nodes[bs];
        const bool anchor = sc.anchor_bs && bs == *sc.anchor_bs;
        if (align.mode == BsAlignment::Mode::Ribs && !anchor)
        {
            n.link_delay = config.link.propagation(n.position, sc.nodes[*sc.anchor_bs].position);
            continue;
        }
        ClockParams locked;
        locked.stamp_noise_sigma = n.clock.params.stamp_noise_sigma;
        if (align.mode == BsAlignment::Mode::FixedError && !anchor)
        {
            locked.theta0 = align.fixed_error;
        }
        n.clock = ClockState::with_params(locked);
        if (!anchor)
        {
            n.link_delay = config.link.propagation(n.position, sc.nodes[*sc.anchor_bs].position);
        }
    }
    for (Node& n : sc.nodes)
    {
        if (is_ota_slave(n.role))
        {
            n.link_delay = config.link.propagation(n.position, sc.nodes[*n.attach].position);
        }
    }

    if (config.pairwise_nodes.empty())
    {
        for (const Node& n : sc.nodes)
        {
            if (is_device(n.role))
            {
                sc.pairwise_nodes.push_back(n.id);
            }
        }
    }
    else
    {
        for (std::size_t i = 0; i < config.pairwise_nodes.size(); ++i)
        {
            const auto id = sc.find(config.pairwise_nodes[i]);
            if (!id)
            {
                throw InvalidConfig("metrics.pairwise_nodes[" + std::to_string(i) + "]",
                                    "unknown node '" + config.pairwise_nodes[i] + "'");
            }
            sc.pairwise_nodes.push_back(*id);
        }
    }

    if (config.workload)
    {
        const WorkloadSpec& w = *config.workload;
        if (w.command_period <= 0)
        {
            throw InvalidConfig("workload.command_period", "must be > 0");
        }
        Workload wl;
        wl.command_period = w.command_period;
        wl.ideal_grid_phase = w.ideal_grid_phase;
        if (w.targets.empty())
        {
            for (const Node& n : sc.nodes)
            {
                if (n.role == NodeRole::Ue)
                {
                    wl.targets.push_back(n.id);
                }
            }
        }
        for (std::size_t i = 0; i < w.targets.size(); ++i)
        {
            const auto id = sc.find(w.targets[i]);
            const std::string path = "workload.targets[" + std::to_string(i) + "]";
            if (!id)
            {
                throw InvalidConfig(path, "unknown node '" + w.targets[i] + "'");
            }
            if (!is_ota_slave(sc.nodes[*id].role))
            {
                throw InvalidConfig(path, "'" + w.targets[i] + "' is not attached over the air");
            }
            wl.targets.push_back(*id);
        }
        sc.workload = wl;
    }

    if (config.fault)
    {
        const FaultSpec& f = *config.fault;
        for (const auto& [field, name] : {std::pair{"fault.pmu_a", f.pmu_a}, std::pair{"fault.pmu_b", f.pmu_b}})
        {
            const auto id = sc.find(name);
            if (!id)
            {
                throw InvalidConfig(field, "unknown node '" + name + "'");
            }
            if (!is_device(sc.nodes[*id].role))
            {
                throw InvalidConfig(field, "'" + name + "' is not a device");
            }
        }
        try
        {
            f.geometry.validate();
        }
        catch (const InvalidGeometry& e)
        {
            throw InvalidConfig("fault", e.what());
        }
        if (f.at < 0 || f.at >= config.duration)
        {
            throw InvalidConfig("fault.at", "must lie in [0, duration)");
        }
    }

    if (sc.base_stations.empty() &&
        std::any_of(sc.nodes.begin(), sc.nodes.end(), [](const Node& n) { return is_ota_slave(n.role); }))
    {
        throw InvalidConfig("nodes", "OTA devices need at least one base station");
    }
    return sc;
}

FaultStamps pmu_fault_event(const ClockState& pmu_a, const ClockState& pmu_b, SimTime fault_at,
                            const FaultGeometry& geometry, RngStream& a_stamps, RngStream& b_stamps)
{
    geometry.validate();
    FaultStamps out;
    out.arrival_a = fault_at + seconds_to_ticks(geometry.fault_position_m / geometry.wave_speed_mps);
    out.arrival_b =
        fault_at + seconds_to_ticks((geometry.line_length_m - geometry.fault_position_m) / geometry.wave_speed_mps);
    out.t_a = stamp(pmu_a, out.arrival_a, a_stamps);
    out.t_b = stamp(pmu_b, out.arrival_b, b_stamps);
    return out;
}

// ---------------------------------------------------------------------------
// Run loop

namespace
{

struct NodeStreams
{
    RngStream stamps;
    RngStream ta;
    RngStream loss;
    RngStream sched;
    RngStream workload;
    RngStream relay;

    NodeStreams(std::uint64_t seed, const std::string& name)
        : stamps(derive_stream(seed, name + "/stamp")), ta(derive_stream(seed, name + "/ta")),
          loss(derive_stream(seed, name + "/loss")), sched(derive_stream(seed, name + "/sched")),
          workload(derive_stream(seed, name + "/workload")), relay(derive_stream(seed, name + "/relay"))
    {
    }
};

class ScenarioRun
{
public:
    ScenarioRun(const Scenario& sc, std::uint64_t seed) : sc_(sc), plan_(sc.config.plan), link_(sc.config.link)
    {
        clocks_.reserve(sc.nodes.size());
        streams_.reserve(sc.nodes.size());
        for (const Node& n : sc.nodes)
        {
            clocks_.push_back(n.clock);
            streams_.emplace_back(seed, n.name);
        }
        ta_.resize(sc.nodes.size());
        engine_.set_handler([this](const Event& ev) { dispatch(ev); });
    }

    RawTrace run(SimTime duration)
    {
        schedule_initial(duration);
        engine_.run_until(duration);
        trace_.events_dispatched = engine_.dispatched_total();
        trace_.trace_digest = engine_.trace_digest();
        trace_.final_clocks = clocks_;
        return std::move(trace_);
    }

private:
    void schedule_initial(SimTime duration)
    {
        const SimTime t0 = SimTime::zero();
        if (plan_.bs_alignment.mode == BsAlignment::Mode::Ribs)
        {
            for (const NodeId bs : sc_.base_stations)
            {
                if (bs != *sc_.anchor_bs)
                {
                    engine_.schedule(t0, bs, EventKind::BsAlignment);
                }
            }
        }
        for (const Node& n : sc_.nodes)
        {
            if (is_ota_slave(n.role))
            {
                engine_.schedule(t0, n.id, EventKind::RandomAccess);
                engine_.schedule(t0 + plan_.ta_timer.period(), n.id, EventKind::TaTimer);
            }
        }
        if (plan_.enabler == Enabler::TaSib16)
        {
            for (const NodeId bs : sc_.base_stations)
            {
                engine_.schedule(t0, bs, EventKind::SibBroadcast);
            }
        }
        else
        {
            for (const Node& n : sc_.nodes)
            {
                if (is_ota_slave(n.role))
                {
                    engine_.schedule(t0, n.id, EventKind::TwoWayStart);
                }
            }
        }
        engine_.schedule(SimTime(static_cast<std::uint64_t>(sc_.config.warmup)), sc_.reference, EventKind::Sample);
        if (sc_.workload)
        {
            const Ticks p = sc_.workload->command_period;
            const Ticks first_cycle = (sc_.config.warmup + p - 1) / p;
            engine_.schedule(SimTime(static_cast<std::uint64_t>(first_cycle * p)), sc_.reference,
                             EventKind::CommandSend, first_cycle);
        }
        if (sc_.config.fault && SimTime(static_cast<std::uint64_t>(sc_.config.fault->at)) <= duration)
        {
            engine_.schedule(SimTime(static_cast<std::uint64_t>(sc_.config.fault->at)), sc_.reference,
                             EventKind::Fault);
        }
    }

    void dispatch(const Event& ev)
    {
        switch (ev.kind)
        {
        case EventKind::RandomAccess: on_random_access(ev); break;
        case EventKind::TaTimer: on_ta_timer(ev); break;
        case EventKind::BsAlignment: on_bs_alignment(ev); break;
        case EventKind::SibBroadcast: on_sib_broadcast(ev); break;
        case EventKind::SibReceive: on_sib_receive(ev); break;
        case EventKind::TwoWayStart: on_twoway_start(ev); break;
        case EventKind::TwoWayComplete: on_twoway_complete(ev); break;
        case EventKind::GwRelay: on_gw_relay(ev); break;
        case EventKind::Sample: on_sample(ev); break;
        case EventKind::CommandSend: on_command_send(ev); break;
        case EventKind::CommandDeliver: on_command_deliver(ev); break;
        case EventKind::Fault: on_fault(ev); break;
        case EventKind::Custom: break;
        }
    }

    SimTime now() const { return engine_.now(); }
    const Node& node(NodeId id) const { return sc_.nodes[id]; }

    int measured_ta_index(NodeId id)
    {
        const Ticks rtt = measure_rtt(node(id).link_delay, link_.rtt_noise_sigma, link_.wrong_bin_prob, streams_[id].ta);
        return compute_ta_initial(rtt).value();
    }

    void on_random_access(const Event& ev)
    {
        TaState state;
        state.apply(TaCommand::initial(measured_ta_index(ev.target)));
        ta_[ev.target] = state;
    }

    void on_ta_timer(const Event& ev)
    {
        const int fresh = measured_ta_index(ev.target);
        if (ta_[ev.target])
        {
            const Ticks misalignment = static_cast<Ticks>(fresh - ta_[ev.target]->index()) * kTaStep;
            ta_[ev.target]->apply(compute_ta_update(misalignment));
            ++trace_.ta_updates;
        }
        engine_.schedule(now() + plan_.ta_timer.period(), ev.target, EventKind::TaTimer);
    }

    void on_bs_alignment(const Event& ev)
    {
        const NodeId bs = ev.target;
        const NodeId anchor = *sc_.anchor_bs;
        const Ticks d = node(bs).link_delay;
        RibsLink ribs = RibsLink::symmetric(d);
        ribs.a_to_b = checked_add(d, plan_.bs_alignment.asymmetry);
        ribs.turnaround = plan_.turnaround;
        std::optional<TaState> helper;
        if (plan_.bs_alignment.ribs_mode == RibsMode::ListenWithTaCompensation)
        {
            // Helper UE co-located with the target BS, timing-advanced toward the anchor.
            const Ticks rtt = measure_rtt(d, link_.rtt_noise_sigma, link_.wrong_bin_prob, streams_[bs].ta);
            helper = TaState(compute_ta_initial(rtt).value());
        }
        const Ticks pre = clock_error(clocks_[bs], now());
        const RibsOutcome out =
            ribs_align(plan_.bs_alignment.ribs_mode, clocks_[anchor], clocks_[bs], ribs, helper, now(), streams_[bs].stamps);
        clocks_[bs] = out.bs_b;
        trace_.syncs.push_back(
            SyncRecord{out.applied_at, bs, SyncKind::BsAlignment, false, pre, clock_error(out.bs_b, out.applied_at), out.delta});
        engine_.schedule(now() + plan_.bs_alignment.period, bs, EventKind::BsAlignment);
    }

    void on_sib_broadcast(const Event& ev)
    {
        const NodeId bs = ev.target;
        const Sib16Broadcast b = sib16_broadcast(clocks_[bs], plan_.sib, now(), streams_[bs].sched, streams_[bs].stamps);
        const auto index = static_cast<std::int64_t>(broadcasts_.size());
        broadcasts_.push_back(b);
        for (const Node& n : sc_.nodes)
        {
            if (!is_ota_slave(n.role) || n.attach != bs)
            {
                continue;
            }
            if (streams_[n.id].loss.bernoulli(link_.loss_prob))
            {
                record_lost(n.id, SyncKind::TaSib16, b.transmitted_at + n.link_delay);
                continue;
            }
            engine_.schedule(b.transmitted_at + n.link_delay, n.id, EventKind::SibReceive, index);
        }
        engine_.schedule(now() + plan_.resync_period, bs, EventKind::SibBroadcast);
    }

    void on_sib_receive(const Event& ev)
    {
        const NodeId id = ev.target;
        const Sib16Broadcast& b = broadcasts_[static_cast<std::size_t>(ev.arg)];
        const SyncOutcome out = sib16_receive(clocks_[id], b, ta_[id], node(id).link_delay, streams_[id].stamps);
        apply_outcome(id, SyncKind::TaSib16, out);
    }

    void on_twoway_start(const Event& ev)
    {
        const NodeId id = ev.target;
        const NodeId bs = *node(id).attach;
        NodeStreams& s = streams_[id];
        const bool lost_down = s.loss.bernoulli(link_.loss_prob);
        const bool lost_up = s.loss.bernoulli(link_.loss_prob);
        const Ticks sched_down = link_.extra_delay.draw(s.sched);
        const Ticks sched_up = link_.extra_delay.draw(s.sched);
        ExchangePath path;
        path.downlink_delay = node(id).link_delay;
        path.uplink_delay = node(id).link_delay;
        path.turnaround = plan_.turnaround;
        if (plan_.enabler == Enabler::DedicatedTwoWay)
        {
            path.downlink_sched = sched_down;
            path.uplink_sched = sched_up;
        }
        const Exchange ex = simulate_exchange(clocks_[bs], clocks_[id], now(), path, streams_[bs].stamps, s.stamps);
        const SyncKind kind = plan_.enabler == Enabler::DedicatedTwoWay ? SyncKind::DedicatedTwoWay : SyncKind::RibsUe;
        if (lost_down || lost_up)
        {
            record_lost(id, kind, ex.completed_at);
        }
        else
        {
            const auto index = static_cast<std::int64_t>(exchanges_.size());
            exchanges_.push_back(twoway_offset(ex.record).offset);
            engine_.schedule(ex.completed_at, id, EventKind::TwoWayComplete, index);
        }
        engine_.schedule(now() + plan_.resync_period, id, EventKind::TwoWayStart);
    }

    void on_twoway_complete(const Event& ev)
    {
        const NodeId id = ev.target;
        SyncOutcome out;
        out.applied_at = now();
        out.pre_error = clock_error(clocks_[id], now());
        out.delta = exchanges_[static_cast<std::size_t>(ev.arg)];
        out.clock = apply_offset_correction(clocks_[id], out.delta);
        out.clock.last_sync_at = now();
        out.post_error = clock_error(out.clock, now());
        apply_outcome(id, plan_.enabler == Enabler::DedicatedTwoWay ? SyncKind::DedicatedTwoWay : SyncKind::RibsUe, out);
    }

    void apply_outcome(NodeId id, SyncKind kind, const SyncOutcome& out)
    {
        clocks_[id] = out.clock;
        trace_.syncs.push_back(SyncRecord{out.applied_at, id, kind, false, out.pre_error, out.post_error, out.delta});
        if (node(id).role == NodeRole::Gateway)
        {
            for (const Node& n : sc_.nodes)
            {
                if (n.role == NodeRole::LegacyDevice && n.attach == id)
                {
                    engine_.schedule(now(), n.id, EventKind::GwRelay);
                }
            }
        }
    }

    void record_lost(NodeId id, SyncKind kind, SimTime at)
    {
        trace_.syncs.push_back(SyncRecord{at, id, kind, true, 0, 0, 0});
    }

    void on_gw_relay(const Event& ev)
    {
        const NodeId id = ev.target;
        const NodeId gw = *node(id).attach;
        const SyncOutcome out = gw_relay_sync(clocks_[gw], clocks_[id], sc_.config.gw_local_sigma, now(), streams_[id].relay);
        clocks_[id] = out.clock;
        trace_.syncs.push_back(SyncRecord{now(), id, SyncKind::GwRelay, false, out.pre_error, out.post_error, out.delta});
    }

    void on_sample(const Event&)
    {
        for (const Node& n : sc_.nodes)
        {
            if (n.role != NodeRole::ReferenceSource)
            {
                trace_.samples.push_back(OffsetSample{now(), n.id, clock_error(clocks_[n.id], now())});
            }
        }
        engine_.schedule(now() + sc_.config.sampling_period, sc_.reference, EventKind::Sample);
    }

    void on_command_send(const Event& ev)
    {
        for (const NodeId target : sc_.workload->targets)
        {
            const Ticks extra = link_.extra_delay.draw(streams_[target].workload);
            engine_.schedule(now() + checked_add(node(target).link_delay, extra), target, EventKind::CommandDeliver,
                             ev.arg);
        }
        engine_.schedule(now() + sc_.workload->command_period, sc_.reference, EventKind::CommandSend, ev.arg + 1);
    }

    void on_command_deliver(const Event& ev)
    {
        const SimTime sent(static_cast<std::uint64_t>(ev.arg * sc_.workload->command_period));
        trace_.deliveries.push_back(
            Delivery{sent, now(), ev.target, stamp(clocks_[ev.target], now(), streams_[ev.target].stamps), ev.arg});
    }

    void on_fault(const Event&)
    {
        const FaultSpec& f = *sc_.config.fault;
        const NodeId a = *sc_.find(f.pmu_a);
        const NodeId b = *sc_.find(f.pmu_b);
        FaultRecord rec;
        rec.at = now();
        rec.pmu_a = a;
        rec.pmu_b = b;
        rec.stamps = pmu_fault_event(clocks_[a], clocks_[b], now(), f.geometry, streams_[a].stamps, streams_[b].stamps);
        trace_.fault = rec;
    }

    const Scenario& sc_;
    const SyncPlan& plan_;
    const LinkModel& link_;
    Engine engine_;
    std::vector<ClockState> clocks_;
    std::vector<NodeStreams> streams_;
    std::vector<std::optional<TaState>> ta_;
    std::vector<Sib16Broadcast> broadcasts_;
    std::vector<Ticks> exchanges_;
    RawTrace trace_;
};

} // namespace

RawTrace run_scenario(const Scenario& scenario, SimTime duration, std::uint64_t root_seed)
{
    if (duration.ticks() == 0)
    {
        throw std::invalid_argument("run_scenario: duration must be > 0");
    }
    ScenarioRun run(scenario, root_seed);
    return run.run(duration);
}

} // namespace airsync
