#include "airsync/cli.hpp"

#include "airsync/config.hpp"
#include "airsync/errors.hpp"
#include "airsync/metrics.hpp"
#include "airsync/report.hpp"
#include "airsync/sweep.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <array>
#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>

namespace airsync
{

using nlohmann::json;
namespace fs = std::filesystem;

std::uint64_t resolve_seed(std::optional<std::uint64_t> cli_seed, const char* env_value, std::uint64_t config_seed)
{
    if (cli_seed)
    {
        return *cli_seed;
    }
    if (env_value && *env_value)
    {
        const std::string s(env_value);
        std::uint64_t v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        {
            throw std::invalid_argument("AIRSYNC_SEED must be an unsigned integer, got '" + s + "'");
        }
        return v;
    }
    return config_seed;
}

namespace
{

struct CommonOptions
{
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string out;
    std::string format = "csv";
};

std::uint64_t seed_from(const CommonOptions& o, std::uint64_t config_seed)
{
    try
    {
        return resolve_seed(o.seed, std::getenv("AIRSYNC_SEED"), config_seed);
    }
    catch (const std::invalid_argument& e)
    {
        throw InvalidConfig("AIRSYNC_SEED", e.what());
    }
}

OutputFormat to_format(const std::string& f)
{
    return f == "json" ? OutputFormat::Json : OutputFormat::Csv;
}

json read_json_file(const std::string& path, const std::string& what)
{
    std::ifstream in(path);
    if (!in)
    {
        throw InvalidConfig("<" + what + ">", "cannot read '" + path + "'");
    }
    try
    {
        return json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw InvalidConfig("<" + what + ">", std::string("malformed JSON: ") + e.what());
    }
}

std::string ns_text(Ticks t)
{
    std::array<char, 48> buf{};
    std::snprintf(buf.data(), buf.size(), "%.1f ns", ticks_to_ns(t));
    return buf.data();
}

int cmd_run(const CommonOptions& o, bool trace, std::ostream& out)
{
    ScenarioConfig cfg = parse_scenario_config(read_json_file(o.config, "config"));
    cfg.seed = seed_from(o, cfg.seed);
    (void)build_scenario(cfg);
    const fs::path dir(o.out);
    prepare_output_dir(dir);

    const RunResult r = simulate(cfg);
    const OutputFormat fmt = to_format(o.format);
    const Provenance prov{cfg.seed, config_to_json(cfg)};
    std::vector<std::string> files{std::string("report.") + extension(fmt)};
    write_table(dir / files[0], fmt, report_table(r.scenario, r.report), prov);
    if (trace)
    {
        files.push_back(std::string("trace.") + extension(fmt));
        write_table(dir / files.back(), fmt, trace_table(r.scenario, r.trace), prov);
    }
    write_manifest(dir, "run", prov, fmt, files);

    out << "scenario " << (cfg.name.empty() ? "<unnamed>" : cfg.name) << " seed " << cfg.seed << ": "
        << r.report.events_dispatched << " events, " << r.report.samples << " samples\n";
    out << "device |error| p99 " << ns_text(r.report.device_abs_error.p99) << ", max pairwise "
        << ns_text(r.report.max_pairwise()) << '\n';
    for (const Verdict& v : r.report.verdicts)
    {
        out << "preset " << v.preset << ": " << (v.pass ? "PASS" : "FAIL") << " (pairwise "
            << ns_text(v.measured_pairwise) << " vs " << ns_text(v.device_sync_bound);
        if (v.jitter_bound)
        {
            out << ", jitter " << (v.measured_jitter ? ns_text(*v.measured_jitter) : std::string("n/a")) << " vs "
                << ns_text(*v.jitter_bound);
        }
        out << ")\n";
    }
    out << "wrote " << (dir / files[0]).string() << '\n';
    return kExitOk;
}

int cmd_sweep(const CommonOptions& o, const std::string& sweep_arg, unsigned threads, std::ostream& out)
{
    const json base = read_json_file(o.config, "config");
    const ScenarioConfig base_cfg = parse_scenario_config(base);
    json spec_doc;
    const auto first = sweep_arg.find_first_not_of(" \t\n");
    if (first != std::string::npos && sweep_arg[first] == '{')
    {
        try
        {
            spec_doc = json::parse(sweep_arg);
        }
        catch (const json::parse_error& e)
        {
            throw InvalidConfig("<sweep>", std::string("malformed JSON: ") + e.what());
        }
    }
    else
    {
        spec_doc = read_json_file(sweep_arg, "sweep");
    }
    const SweepSpec spec = parse_sweep_spec(spec_doc);
    const std::uint64_t seed = seed_from(o, base_cfg.seed);

    const fs::path dir(o.out);
    // Validate every sweep point before touching the output directory.
    const SweepResult result = [&] {
        for (const json& v : spec.values)
        {
            json doc = base;
            set_config_path(doc, spec.parameter, v);
            (void)build_scenario(parse_scenario_config(doc));
        }
        prepare_output_dir(dir);
        return run_sweep(base, spec, seed, threads);
    }();

    const OutputFormat fmt = to_format(o.format);
    const Provenance prov{seed, json{{"base", config_to_json(base_cfg)}, {"sweep", spec_doc}}};
    const std::vector<std::string> files{std::string("sweep_rows.") + extension(fmt),
                                         std::string("sweep_summary.") + extension(fmt)};
    write_table(dir / files[0], fmt, result.rows, prov);
    write_table(dir / files[1], fmt, result.summary, prov);
    write_manifest(dir, "sweep", prov, fmt, files);
    out << "sweep " << spec.parameter << ": " << spec.values.size() << " values x " << spec.repetitions
        << " repetitions\n";
    out << "wrote " << (dir / files[1]).string() << '\n';
    return kExitOk;
}

std::string bound_text(const std::optional<Ticks>& t)
{
    return t ? ns_text(*t) : std::string("-");
}

int cmd_presets(bool as_json, std::ostream& out)
{
    const auto& presets = builtin_presets();
    if (as_json)
    {
        json arr = json::array();
        for (const RequirementPreset& p : presets)
        {
            json j{{"name", p.name}, {"device_sync_bound_ns", ticks_to_ns(p.device_sync_bound)}, {"notes", p.notes}};
            j["per_device_bound_ns"] = p.per_device_bound ? json(ticks_to_ns(*p.per_device_bound)) : json(nullptr);
            j["jitter_bound_ns"] = p.jitter_bound ? json(ticks_to_ns(*p.jitter_bound)) : json(nullptr);
            arr.push_back(j);
        }
        out << arr.dump(2) << '\n';
        return kExitOk;
    }
    std::size_t width = 4;
    for (const RequirementPreset& p : presets)
    {
        width = std::max(width, p.name.size());
    }
    auto pad = [](std::string s, std::size_t w) { return s.size() < w ? s + std::string(w - s.size(), ' ') : s; };
    out << pad("name", width) << "  " << pad("per-device", 12) << "  " << pad("pairwise", 12) << "  "
        << pad("jitter", 12) << "  notes\n";
    for (const RequirementPreset& p : presets)
    {
        out << pad(p.name, width) << "  " << pad(bound_text(p.per_device_bound), 12) << "  "
            << pad(ns_text(p.device_sync_bound), 12) << "  " << pad(bound_text(p.jitter_bound), 12) << "  " << p.notes
            << '\n';
    }
    return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o)
{
    cmd->add_option("--config", o.config, "Scenario config (JSON)")->required();
    cmd->add_option("--seed", o.seed, "Root seed (overrides AIRSYNC_SEED and the config)");
    cmd->add_option("--out", o.out, "Output directory (created; must be empty)")->required();
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}));
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Over-the-air time synchronization simulator", "airsync"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kToolName) + " " + kToolVersion);

    CommonOptions run_opts;
    bool trace = false;
    CLI::App* run = app.add_subcommand("run", "Simulate one scenario and write its report");
    add_common(run, run_opts);
    run->add_flag("--trace", trace, "Also export the raw event trace");

    CommonOptions sweep_opts;
    std::string sweep_arg;
    unsigned threads = 0;
    CLI::App* sweep = app.add_subcommand("sweep", "Vary one config parameter over a list of values");
    add_common(sweep, sweep_opts);
    sweep->add_option("--sweep", sweep_arg, "Sweep spec file or inline JSON")->required();
    sweep->add_option("--threads", threads, "Worker threads (0: hardware concurrency)");

    bool presets_json = false;
    CLI::App* presets = app.add_subcommand("presets", "Built-in requirement presets");
    presets->require_subcommand(1);
    CLI::App* list = presets->add_subcommand("list", "List presets and their bounds");
    list->add_flag("--json", presets_json, "Machine-readable output");

    try
    {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    }
    catch (const CLI::ParseError& e)
    {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try
    {
        if (run->parsed())
        {
            return cmd_run(run_opts, trace, out);
        }
        if (sweep->parsed())
        {
            return cmd_sweep(sweep_opts, sweep_arg, threads, out);
        }
        if (list->parsed())
        {
            return cmd_presets(presets_json, out);
        }
    }
    catch (const InvalidConfig& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    catch (const std::exception& e)
    {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return kExitUsage;
}

} // namespace airsync
