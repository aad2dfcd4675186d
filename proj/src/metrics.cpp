#include "airsync/metrics.hpp"

#include "airsync/errors.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

namespace airsync
{

Percentiles percentiles_of(std::vector<Ticks> values)
{
    Percentiles out;
    out.count = values.size();
    if (values.empty())
    {
        return out;
    }
    std::sort(values.begin(), values.end());
    auto rank = [&](double q) {
        const auto n = static_cast<double>(values.size());
        const auto k = static_cast<std::size_t>(std::ceil(q * n));
        return values[std::clamp<std::size_t>(k, 1, values.size()) - 1];
    };
    out.p50 = rank(0.50);
    out.p95 = rank(0.95);
    out.p99 = rank(0.99);
    out.max = values.back();
    return out;
}

PairwiseStats pairwise_offset_stats(std::span<const OffsetSample> samples, std::span<const NodeId> nodes)
{
    const std::set<NodeId> wanted(nodes.begin(), nodes.end());
    std::map<SimTime, std::pair<Ticks, Ticks>> range; // instant -> (min, max)
    std::map<SimTime, std::size_t> members;
    for (const OffsetSample& s : samples)
    {
        if (!wanted.empty() && !wanted.contains(s.node))
        {
            continue;
        }
        auto [it, inserted] = range.try_emplace(s.t_true, s.error, s.error);
        if (!inserted)
        {
            it->second.first = std::min(it->second.first, s.error);
            it->second.second = std::max(it->second.second, s.error);
        }
        ++members[s.t_true];
    }
    std::vector<Ticks> per_instant;
    for (const auto& [t, mm] : range)
    {
        if (members[t] >= 2)
        {
            per_instant.push_back(mm.second - mm.first);
        }
    }
    if (per_instant.empty())
    {
        throw InsufficientNodes("pairwise_offset_stats: no instant with two or more sampled nodes");
    }
    return PairwiseStats{percentiles_of(std::move(per_instant))};
}

namespace
{

/// Maps x onto [-period/2, period/2).
Ticks wrap(Ticks x, Ticks period)
{
    const Ticks half = period / 2;
    Ticks r = (x + half) % period;
    if (r < 0)
    {
        r += period;
    }
    return r - half;
}

} // namespace

JitterStats jitter_stats(std::span<const Delivery> deliveries, const Workload& workload)
{
    if (deliveries.size() < 2)
    {
        throw std::invalid_argument("jitter_stats: need at least 2 deliveries");
    }
    const Ticks period = workload.command_period;
    if (period <= 0)
    {
        throw std::invalid_argument("jitter_stats: command period must be > 0");
    }

    std::map<NodeId, std::vector<Ticks>> by_node;
    for (const Delivery& d : deliveries)
    {
        by_node[d.node].push_back(d.local);
    }

    std::vector<Ticks> residuals;
    residuals.reserve(deliveries.size());
    for (const auto& [node, locals] : by_node)
    {
        Ticks phase = workload.ideal_grid_phase.value_or(0);
        if (!workload.ideal_grid_phase)
        {
            // Centre on the first delivery so the median is taken away from the wrap point.
            const Ticks ref = wrap(locals.front(), period);
            std::vector<Ticks> rel;
            rel.reserve(locals.size());
            for (const Ticks l : locals)
            {
                rel.push_back(wrap(l - ref, period));
            }
            std::nth_element(rel.begin(), rel.begin() + static_cast<std::ptrdiff_t>((rel.size() - 1) / 2), rel.end());
            phase = ref + rel[(rel.size() - 1) / 2];
        }
        for (const Ticks l : locals)
        {
            residuals.push_back(wrap(l - phase, period));
        }
    }

    JitterStats out;
    const auto [lo, hi] = std::minmax_element(residuals.begin(), residuals.end());
    out.min_deviation = *lo;
    out.max_deviation = *hi;
    out.peak_to_peak = *hi - *lo;
    std::vector<Ticks> abs_dev;
    abs_dev.reserve(residuals.size());
    for (const Ticks r : residuals)
    {
        abs_dev.push_back(r < 0 ? -r : r);
    }
    out.abs_deviation = percentiles_of(std::move(abs_dev));
    return out;
}

FaultEstimate fault_location_estimate(Ticks t_a, Ticks t_b, double line_length_m, double wave_speed_mps)
{
    if (!(line_length_m > 0.0) || !(wave_speed_mps > 0.0))
    {
        throw std::invalid_argument("fault_location_estimate: L and v must be > 0");
    }
    const double dt = ticks_to_seconds(t_b - t_a);
    const double x = (line_length_m - wave_speed_mps * dt) / 2.0;
    FaultEstimate out;
    out.out_of_range = x < 0.0 || x > line_length_m;
    out.position_m = std::clamp(x, 0.0, line_length_m);
    return out;
}

double localization_uncertainty(Ticks sync_error_bound, double wave_speed_mps)
{
    if (sync_error_bound < 0 || !(wave_speed_mps > 0.0))
    {
        throw std::invalid_argument("localization_uncertainty: bound must be >= 0 and v > 0");
    }
    return wave_speed_mps * ticks_to_seconds(sync_error_bound);
}

const std::vector<RequirementPreset>& builtin_presets()
{
    static const std::vector<RequirementPreset> presets{
        {"tsn-factory", 500 * kTicksPerUs / 1000, kTicksPerUs, kTicksPerUs,
         "1 ms cycle, 99.999% reliability; +/-500 ns per device, 1 us jitter"},
        {"grid-fault-protection", std::nullopt, 20 * kTicksPerUs, std::nullopt,
         "line differential protection; relays within 20 us; latency < 10 ms, reliability > 99.99%"},
        {"grid-monitoring", kTicksPerUs, 2 * kTicksPerUs, std::nullopt,
         "PMU fault location below 300 m; latency 500-1000 ms, reliability ~99%"},
        {"lte-tdd-small", 3 * kTicksPerUs / 2, 3 * kTicksPerUs, std::nullopt, "LTE-TDD, cell radius <= 3 km"},
        {"lte-tdd-large", 5 * kTicksPerUs, 10 * kTicksPerUs, std::nullopt, "LTE-TDD, cell radius > 3 km"},
        {"mbms", 5 * kTicksPerUs, 10 * kTicksPerUs, std::nullopt, "LTE-MBMS intercell time difference"},
    };
    return presets;
}

std::optional<RequirementPreset> find_preset(std::string_view name)
{
    for (const auto& p : builtin_presets())
    {
        if (p.name == name)
        {
            return p;
        }
    }
    return std::nullopt;
}

std::vector<Verdict> check_requirements(const MetricsReport& report, std::span<const RequirementPreset> presets)
{
    std::vector<Verdict> out;
    for (const RequirementPreset& p : presets)
    {
        Verdict v;
        v.preset = p.name;
        v.measured_pairwise = report.max_pairwise();
        v.device_sync_bound = p.device_sync_bound;
        v.jitter_bound = p.jitter_bound;
        if (report.jitter)
        {
            v.measured_jitter = report.jitter->peak_to_peak;
        }
        v.pass = report.pairwise.has_value() && v.measured_pairwise <= p.device_sync_bound;
        if (p.jitter_bound)
        {
            v.pass = v.pass && v.measured_jitter && *v.measured_jitter <= *p.jitter_bound;
        }
        out.push_back(v);
    }
    return out;
}

MetricsReport build_report(const Scenario& scenario, const RawTrace& trace)
{
    MetricsReport report;
    report.events_dispatched = trace.events_dispatched;
    report.trace_digest = trace.trace_digest;
    report.samples = trace.samples.size();
    report.deliveries = trace.deliveries.size();
    report.ta_updates = trace.ta_updates;

    std::vector<std::vector<Ticks>> abs_by_node(scenario.nodes.size());
    std::vector<double> sum_by_node(scenario.nodes.size(), 0.0);
    for (const OffsetSample& s : trace.samples)
    {
        abs_by_node[s.node].push_back(s.error < 0 ? -s.error : s.error);
        sum_by_node[s.node] += static_cast<double>(s.error);
    }

    std::vector<NodeMetrics> nodes(scenario.nodes.size());
    for (const SyncRecord& r : trace.syncs)
    {
        NodeMetrics& m = nodes[r.node];
        if (r.lost)
        {
            ++m.syncs_lost;
            ++report.syncs_lost;
            continue;
        }
        if (m.syncs_applied > 0)
        {
            const Ticks pre = r.pre_error < 0 ? -r.pre_error : r.pre_error;
            m.peak_presync_error = std::max(m.peak_presync_error.value_or(0), pre);
        }
        ++m.syncs_applied;
        ++report.syncs_applied;
    }

    std::vector<Ticks> pooled;
    for (const Node& n : scenario.nodes)
    {
        if (n.role == NodeRole::ReferenceSource)
        {
            continue;
        }
        NodeMetrics& m = nodes[n.id];
        m.id = n.id;
        m.name = n.name;
        m.role = n.role;
        if (!abs_by_node[n.id].empty())
        {
            m.mean_error = sum_by_node[n.id] / static_cast<double>(abs_by_node[n.id].size());
        }
        if (std::find(scenario.pairwise_nodes.begin(), scenario.pairwise_nodes.end(), n.id) !=
            scenario.pairwise_nodes.end())
        {
            pooled.insert(pooled.end(), abs_by_node[n.id].begin(), abs_by_node[n.id].end());
        }
        m.abs_error = percentiles_of(std::move(abs_by_node[n.id]));
        report.nodes.push_back(std::move(m));
    }
    report.device_abs_error = percentiles_of(std::move(pooled));

    if (scenario.pairwise_nodes.size() >= 2)
    {
        try
        {
            report.pairwise = pairwise_offset_stats(trace.samples, scenario.pairwise_nodes);
        }
        catch (const InsufficientNodes&)
        {
            // No common sampling instant (e.g. warmup covers the whole run).
        }
    }

    if (scenario.workload && trace.deliveries.size() >= 2)
    {
        report.jitter = jitter_stats(trace.deliveries, *scenario.workload);
    }

    if (trace.fault && scenario.config.fault)
    {
        const FaultSpec& f = *scenario.config.fault;
        FaultMetrics fm;
        fm.t_a = trace.fault->stamps.t_a;
        fm.t_b = trace.fault->stamps.t_b;
        fm.true_position_m = f.geometry.fault_position_m;
        fm.estimate = fault_location_estimate(fm.t_a, fm.t_b, f.geometry.line_length_m, f.geometry.wave_speed_mps);
        fm.deviation_m = fm.estimate.position_m - fm.true_position_m;
        if (f.sync_error_bound)
        {
            fm.uncertainty_width_m = localization_uncertainty(*f.sync_error_bound, f.geometry.wave_speed_mps);
        }
        report.fault = fm;
    }

    std::vector<RequirementPreset> presets;
    for (const std::string& name : scenario.config.presets)
    {
        const auto p = find_preset(name);
        if (!p)
        {
            throw std::invalid_argument("unknown requirement preset '" + name + "'");
        }
        presets.push_back(*p);
    }
    report.verdicts = check_requirements(report, presets);
    return report;
}

} // namespace airsync
