#include "airsync/report.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <ostream>
#include <stdexcept>

namespace airsync
{

using nlohmann::json;

void Table::add(std::vector<Cell> row)
{
    if (row.size() != columns.size())
    {
        throw std::logic_error("Table::add: row width does not match the header");
    }
    rows.push_back(std::move(row));
}

std::string format_cell(const Cell& cell)
{
    std::array<char, 64> buf{};
    if (const auto* i = std::get_if<std::int64_t>(&cell))
    {
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *i);
        return std::string(buf.data(), res.ptr);
    }
    if (const auto* d = std::get_if<double>(&cell))
    {
        const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), *d);
        return std::string(buf.data(), res.ptr);
    }
    if (const auto* s = std::get_if<std::string>(&cell))
    {
        return *s;
    }
    return {};
}

json cell_to_json(const Cell& cell)
{
    if (const auto* i = std::get_if<std::int64_t>(&cell))
    {
        return *i;
    }
    if (const auto* d = std::get_if<double>(&cell))
    {
        return *d;
    }
    if (const auto* s = std::get_if<std::string>(&cell))
    {
        return *s;
    }
    return nullptr;
}

const char* extension(OutputFormat format)
{
    return format == OutputFormat::Csv ? "csv" : "json";
}

namespace
{

std::string csv_escape(const std::string& s)
{
    if (s.find_first_of(",\"\n") == std::string::npos)
    {
        return s;
    }
    std::string out = "\"";
    for (const char c : s)
    {
        if (c == '"')
        {
            out += '"';
        }
        out += c;
    }
    return out + "\"";
}

Cell ns(Ticks t)
{
    return ticks_to_ns(t);
}

Cell count(std::uint64_t n)
{
    return static_cast<std::int64_t>(n);
}

void add_percentiles(Table& t, const std::string& section, const std::string& node, const std::string& prefix,
                     const Percentiles& p)
{
    t.add({section, node, prefix + "p50_ns", ns(p.p50)});
    t.add({section, node, prefix + "p95_ns", ns(p.p95)});
    t.add({section, node, prefix + "p99_ns", ns(p.p99)});
    t.add({section, node, prefix + "max_ns", ns(p.max)});
    t.add({section, node, prefix + "count", count(p.count)});
}

std::string hex64(std::uint64_t v)
{
    std::array<char, 17> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v, 16);
    std::string s(buf.data(), res.ptr);
    return std::string(16 - s.size(), '0') + s;
}

} // namespace

void write_csv(std::ostream& out, const Table& table, const Provenance& prov)
{
    out << "# tool: " << kToolName << ' ' << kToolVersion << '\n';
    out << "# seed: " << prov.seed << '\n';
    out << "# config: " << prov.config.dump() << '\n';
    for (std::size_t i = 0; i < table.columns.size(); ++i)
    {
        out << (i ? "," : "") << csv_escape(table.columns[i]);
    }
    out << '\n';
    for (const auto& row : table.rows)
    {
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            out << (i ? "," : "") << csv_escape(format_cell(row[i]));
        }
        out << '\n';
    }
}

void write_json(std::ostream& out, const Table& table, const Provenance& prov)
{
    json rows = json::array();
    for (const auto& row : table.rows)
    {
        json obj = json::object();
        for (std::size_t i = 0; i < row.size(); ++i)
        {
            obj[table.columns[i]] = cell_to_json(row[i]);
        }
        rows.push_back(std::move(obj));
    }
    json doc{{"tool", kToolName},   {"version", kToolVersion},  {"seed", prov.seed},
             {"config", prov.config}, {"columns", table.columns}, {"rows", std::move(rows)}};
    out << doc.dump(2) << '\n';
}

void write_table(const std::filesystem::path& file, OutputFormat format, const Table& table, const Provenance& prov)
{
    std::ofstream out(file, std::ios::binary);
    if (!out)
    {
        throw std::runtime_error("cannot write '" + file.string() + "'");
    }
    if (format == OutputFormat::Csv)
    {
        write_csv(out, table, prov);
    }
    else
    {
        write_json(out, table, prov);
    }
    if (!out)
    {
        throw std::runtime_error("write failed for '" + file.string() + "'");
    }
}

Table report_table(const Scenario& scenario, const MetricsReport& r)
{
    Table t;
    t.columns = {"section", "node", "metric", "value"};

    t.add({"summary", "", "scenario", scenario.config.name});
    t.add({"summary", "", "events_dispatched", count(r.events_dispatched)});
    t.add({"summary", "", "trace_digest", hex64(r.trace_digest)});
    t.add({"summary", "", "samples", count(r.samples)});
    t.add({"summary", "", "syncs_applied", count(r.syncs_applied)});
    t.add({"summary", "", "syncs_lost", count(r.syncs_lost)});
    t.add({"summary", "", "deliveries", count(r.deliveries)});
    t.add({"summary", "", "ta_updates", count(r.ta_updates)});

    for (const NodeMetrics& n : r.nodes)
    {
        t.add({"node", n.name, "role", std::string(to_string(n.role))});
        add_percentiles(t, "node", n.name, "abs_error_", n.abs_error);
        t.add({"node", n.name, "mean_error_ns", n.mean_error / (static_cast<double>(kTicksPerUs) / 1000.0)});
        if (n.peak_presync_error)
        {
            t.add({"node", n.name, "peak_presync_error_ns", ns(*n.peak_presync_error)});
        }
        t.add({"node", n.name, "syncs_applied", count(n.syncs_applied)});
        t.add({"node", n.name, "syncs_lost", count(n.syncs_lost)});
    }

    add_percentiles(t, "device", "", "abs_error_", r.device_abs_error);
    if (r.pairwise)
    {
        add_percentiles(t, "pairwise", "", "offset_", r.pairwise->per_instant);
    }
    if (r.jitter)
    {
        add_percentiles(t, "jitter", "", "abs_deviation_", r.jitter->abs_deviation);
        t.add({"jitter", "", "min_deviation_ns", ns(r.jitter->min_deviation)});
        t.add({"jitter", "", "max_deviation_ns", ns(r.jitter->max_deviation)});
        t.add({"jitter", "", "peak_to_peak_ns", ns(r.jitter->peak_to_peak)});
    }
    if (r.fault)
    {
        const FaultMetrics& f = *r.fault;
        t.add({"fault", "", "t_a_ticks", f.t_a});
        t.add({"fault", "", "t_b_ticks", f.t_b});
        t.add({"fault", "", "true_position_m", f.true_position_m});
        t.add({"fault", "", "estimate_m", f.estimate.position_m});
        t.add({"fault", "", "deviation_m", f.deviation_m});
        t.add({"fault", "", "out_of_range", static_cast<std::int64_t>(f.estimate.out_of_range)});
        if (f.uncertainty_width_m)
        {
            t.add({"fault", "", "uncertainty_width_m", *f.uncertainty_width_m});
        }
    }
    for (const Verdict& v : r.verdicts)
    {
        t.add({"verdict", v.preset, "pass", static_cast<std::int64_t>(v.pass)});
        t.add({"verdict", v.preset, "measured_pairwise_ns", ns(v.measured_pairwise)});
        t.add({"verdict", v.preset, "device_sync_bound_ns", ns(v.device_sync_bound)});
        if (v.jitter_bound)
        {
            t.add({"verdict", v.preset, "jitter_bound_ns", ns(*v.jitter_bound)});
            t.add({"verdict", v.preset, "measured_jitter_ns", v.measured_jitter ? ns(*v.measured_jitter) : Cell{}});
        }
    }
    return t;
}

Table trace_table(const Scenario& scenario, const RawTrace& trace)
{
    Table t;
    t.columns = {"record", "t_true_ticks", "node", "kind", "lost", "error_ticks", "pre_error_ticks", "post_error_ticks",
                 "delta_ticks", "sent_ticks", "local_ticks", "cycle"};
    const Cell none;
    for (const OffsetSample& s : trace.samples)
    {
        t.add({"sample", s.t_true.as_signed(), scenario.node(s.node).name, none, none, s.error, none, none, none, none,
               none, none});
    }
    for (const SyncRecord& s : trace.syncs)
    {
        t.add({"sync", s.t_true.as_signed(), scenario.node(s.node).name, std::string(to_string(s.kind)),
               static_cast<std::int64_t>(s.lost), none, s.pre_error, s.post_error, s.delta, none, none, none});
    }
    for (const Delivery& d : trace.deliveries)
    {
        t.add({"delivery", d.t_true.as_signed(), scenario.node(d.node).name, none, none, none, none, none, none,
               d.sent_at.as_signed(), d.local, d.cycle});
    }
    return t;
}

void prepare_output_dir(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (fs::exists(dir))
    {
        if (!fs::is_directory(dir))
        {
            throw std::runtime_error("output path '" + dir.string() + "' is not a directory");
        }
        if (!fs::is_empty(dir))
        {
            throw std::runtime_error("output directory '" + dir.string() + "' is not empty; refusing to overwrite");
        }
        return;
    }
    fs::create_directories(dir);
}

void write_manifest(const std::filesystem::path& dir, const std::string& command, const Provenance& prov,
                    OutputFormat format, const std::vector<std::string>& files)
{
    const json doc{{"tool", kToolName},     {"version", kToolVersion}, {"command", command},
                   {"seed", prov.seed},     {"format", extension(format)}, {"files", files},
                   {"config", prov.config}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    out << doc.dump(2) << '\n';
    if (!out)
    {
        throw std::runtime_error("cannot write manifest in '" + dir.string() + "'");
    }
}

} // namespace airsync
