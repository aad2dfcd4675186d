#include "airsync/sweep.hpp"

#include "airsync/config.hpp"
#include "airsync/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <future>
#include <map>
#include <thread>

namespace airsync
{

using nlohmann::json;

RunResult simulate(const ScenarioConfig& config)
{
    RunResult r{build_scenario(config), {}, {}};
    r.trace = run_scenario(r.scenario, SimTime(static_cast<std::uint64_t>(config.duration)), config.seed);
    r.report = build_report(r.scenario, r.trace);
    return r;
}

SweepSpec parse_sweep_spec(const json& doc)
{
    if (!doc.is_object())
    {
        throw InvalidConfig("<sweep>", "expected an object");
    }
    SweepSpec spec;
    for (auto it = doc.begin(); it != doc.end(); ++it)
    {
        if (it.key() != "parameter" && it.key() != "values" && it.key() != "repetitions")
        {
            throw InvalidConfig("sweep." + it.key(), "unknown key");
        }
    }
    if (!doc.contains("parameter") || !doc["parameter"].is_string())
    {
        throw InvalidConfig("sweep.parameter", "expected a dotted config path");
    }
    spec.parameter = doc["parameter"].get<std::string>();
    if (!doc.contains("values") || !doc["values"].is_array())
    {
        throw InvalidConfig("sweep.values", "expected an array");
    }
    spec.values = doc["values"].get<std::vector<json>>();
    if (spec.values.empty())
    {
        throw InvalidConfig("sweep.values", "must not be empty");
    }
    if (doc.contains("repetitions"))
    {
        if (!doc["repetitions"].is_number_integer() || doc["repetitions"].get<int>() < 1)
        {
            throw InvalidConfig("sweep.repetitions", "expected an integer >= 1");
        }
        spec.repetitions = doc["repetitions"].get<int>();
    }
    return spec;
}

namespace
{

/// Numeric sort key of a swept value: numbers as-is, time strings in ticks.
std::optional<double> sort_key(const json& v)
{
    if (v.is_number())
    {
        return v.get<double>();
    }
    if (v.is_string())
    {
        try
        {
            return static_cast<double>(parse_time_value(v.get<std::string>()));
        }
        catch (const std::exception&)
        {
        }
    }
    return std::nullopt;
}

std::string value_label(const json& v)
{
    return v.is_string() ? v.get<std::string>() : v.dump();
}

const std::vector<std::string> kMetricColumns = {
    "device_p50_abs_error_ns", "device_p99_abs_error_ns", "device_max_abs_error_ns", "pairwise_max_ns",
    "jitter_peak_to_peak_ns",  "fault_estimate_m",        "fault_uncertainty_width_m", "verdicts_passed",
    "verdicts_total"};

std::vector<Cell> metric_cells(const MetricsReport& r)
{
    std::vector<Cell> c;
    c.emplace_back(ticks_to_ns(r.device_abs_error.p50));
    c.emplace_back(ticks_to_ns(r.device_abs_error.p99));
    c.emplace_back(ticks_to_ns(r.device_abs_error.max));
    c.push_back(r.pairwise ? Cell{ticks_to_ns(r.pairwise->per_instant.max)} : Cell{});
    c.push_back(r.jitter ? Cell{ticks_to_ns(r.jitter->peak_to_peak)} : Cell{});
    c.push_back(r.fault ? Cell{r.fault->estimate.position_m} : Cell{});
    c.push_back(r.fault && r.fault->uncertainty_width_m ? Cell{*r.fault->uncertainty_width_m} : Cell{});
    const auto passed = std::count_if(r.verdicts.begin(), r.verdicts.end(), [](const Verdict& v) { return v.pass; });
    c.emplace_back(static_cast<std::int64_t>(passed));
    c.emplace_back(static_cast<std::int64_t>(r.verdicts.size()));
    return c;
}

double as_double(const Cell& c)
{
    if (const auto* i = std::get_if<std::int64_t>(&c))
    {
        return static_cast<double>(*i);
    }
    return std::get<double>(c);
}

} // namespace

SweepResult run_sweep(const json& base_config, const SweepSpec& spec, std::uint64_t base_seed, unsigned threads)
{
    if (spec.values.empty())
    {
        throw InvalidConfig("sweep.values", "must not be empty");
    }
    // Resolve every config up front so a bad path or value fails before any run.
    struct Job
    {
        std::size_t value_index;
        int repetition;
        ScenarioConfig config;
    };
    std::vector<Job> jobs;
    for (std::size_t v = 0; v < spec.values.size(); ++v)
    {
        json doc = base_config;
        set_config_path(doc, spec.parameter, spec.values[v]);
        ScenarioConfig cfg;
        try
        {
            cfg = parse_scenario_config(doc);
            (void)build_scenario(cfg);
        }
        catch (const InvalidConfig& e)
        {
            throw InvalidConfig(e.path(), e.message() + " (sweep value " + value_label(spec.values[v]) + ")");
        }
        for (int rep = 0; rep < spec.repetitions; ++rep)
        {
            cfg.seed = base_seed + static_cast<std::uint64_t>(rep);
            jobs.push_back(Job{v, rep, cfg});
        }
    }

    if (threads == 0)
    {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));

    std::vector<MetricsReport> reports(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i = next++; i < jobs.size(); i = next++)
        {
            reports[i] = simulate(jobs[i].config).report;
        }
    };
    std::vector<std::future<void>> pool;
    for (unsigned t = 0; t < threads; ++t)
    {
        pool.push_back(std::async(std::launch::async, worker));
    }
    std::exception_ptr failure;
    for (auto& f : pool)
    {
        try
        {
            f.get();
        }
        catch (...)
        {
            if (!failure)
            {
                failure = std::current_exception();
            }
        }
    }
    if (failure)
    {
        std::rethrow_exception(failure);
    }

    SweepResult out;
    out.rows.columns = {"parameter", "value", "repetition", "seed"};
    out.rows.columns.insert(out.rows.columns.end(), kMetricColumns.begin(), kMetricColumns.end());
    std::vector<std::vector<std::vector<Cell>>> per_value(spec.values.size());
    for (std::size_t i = 0; i < jobs.size(); ++i)
    {
        const Job& j = jobs[i];
        std::vector<Cell> row{spec.parameter, value_label(spec.values[j.value_index]),
                              static_cast<std::int64_t>(j.repetition), static_cast<std::int64_t>(j.config.seed)};
        const auto metrics = metric_cells(reports[i]);
        row.insert(row.end(), metrics.begin(), metrics.end());
        out.rows.add(row);
        per_value[j.value_index].push_back(metrics);
    }

    std::vector<std::size_t> order(spec.values.size());
    for (std::size_t i = 0; i < order.size(); ++i)
    {
        order[i] = i;
    }
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ka = sort_key(spec.values[a]);
        const auto kb = sort_key(spec.values[b]);
        if (ka && kb)
        {
            return *ka < *kb;
        }
        return ka.has_value() && !kb.has_value();
    });

    out.summary.columns = {"parameter", "value", "repetitions"};
    for (const auto& c : kMetricColumns)
    {
        out.summary.columns.push_back("mean_" + c);
    }
    for (const std::size_t v : order)
    {
        std::vector<Cell> row{spec.parameter, value_label(spec.values[v]), static_cast<std::int64_t>(spec.repetitions)};
        for (std::size_t m = 0; m < kMetricColumns.size(); ++m)
        {
            double sum = 0.0;
            std::size_t n = 0;
            for (const auto& cells : per_value[v])
            {
                if (!std::holds_alternative<std::monostate>(cells[m]))
                {
                    sum += as_double(cells[m]);
                    ++n;
                }
            }
            row.push_back(n ? Cell{sum / static_cast<double>(n)} : Cell{});
        }
        out.summary.add(row);
    }
    return out;
}

} // namespace airsync
