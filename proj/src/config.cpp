#include "airsync/config.hpp"

#include "airsync/errors.hpp"
#include "airsync/metrics.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace airsync
{

using nlohmann::json;

namespace
{

/// Object view that rejects keys nobody asked for.
class Reader
{
public:
    Reader(const json& j, std::string path) : j_(j), path_(std::move(path))
    {
        if (!j_.is_object())
        {
            throw InvalidConfig(path_.empty() ? "<root>" : path_, "expected an object");
        }
    }

    ~Reader() = default;
    Reader(const Reader&) = delete;
    Reader& operator=(const Reader&) = delete;

    bool has(const std::string& key)
    {
        known_.insert(key);
        return j_.contains(key);
    }

    const json& at(const std::string& key)
    {
        known_.insert(key);
        if (!j_.contains(key))
        {
            throw InvalidConfig(child(key), "required field missing");
        }
        return j_.at(key);
    }

    std::string child(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it)
        {
            if (!known_.contains(it.key()))
            {
                throw InvalidConfig(child(it.key()), "unknown key");
            }
        }
    }

private:
    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

Ticks parse_ticks(const json& j, const std::string& path)
{
    if (j.is_number_integer())
    {
        return j.get<Ticks>();
    }
    if (j.is_number_float())
    {
        const double v = j.get<double>();
        if (std::floor(v) == v && std::fabs(v) < 9.0e18)
        {
            return static_cast<Ticks>(v);
        }
        throw InvalidConfig(path, "tick counts must be integers");
    }
    if (j.is_string())
    {
        try
        {
            return parse_time_value(j.get<std::string>());
        }
        catch (const std::invalid_argument& e)
        {
            throw InvalidConfig(path, e.what());
        }
    }
    throw InvalidConfig(path, "expected a time value (integer ticks or a string such as \"10ms\")");
}

Ticks parse_nonneg_ticks(const json& j, const std::string& path)
{
    const Ticks t = parse_ticks(j, path);
    if (t < 0)
    {
        throw InvalidConfig(path, "must be >= 0");
    }
    return t;
}

/// Statistical tick quantity (sigma): may be fractional when given as a number.
double parse_tick_scale(const json& j, const std::string& path)
{
    if (j.is_number())
    {
        return j.get<double>();
    }
    return static_cast<double>(parse_ticks(j, path));
}

double parse_ratio(const json& j, const std::string& path)
{
    if (j.is_number())
    {
        return j.get<double>();
    }
    if (j.is_string())
    {
        const std::string s = j.get<std::string>();
        std::size_t used = 0;
        double v = 0.0;
        try
        {
            v = std::stod(s, &used);
        }
        catch (const std::exception&)
        {
            throw InvalidConfig(path, "cannot parse '" + s + "'");
        }
        const std::string unit = s.substr(used);
        if (unit == "ppm")
        {
            return v * 1e-6;
        }
        if (unit == "ppb")
        {
            return v * 1e-9;
        }
        if (unit.empty())
        {
            return v;
        }
        throw InvalidConfig(path, "unknown ratio unit '" + unit + "' (use ppm or ppb)");
    }
    throw InvalidConfig(path, "expected a number or a ppm/ppb string");
}

double parse_number(const json& j, const std::string& path)
{
    if (!j.is_number())
    {
        throw InvalidConfig(path, "expected a number");
    }
    return j.get<double>();
}

double parse_probability(const json& j, const std::string& path)
{
    const double p = parse_number(j, path);
    if (!(p >= 0.0 && p <= 1.0))
    {
        throw InvalidConfig(path, "must lie in [0, 1]");
    }
    return p;
}

std::string parse_string(const json& j, const std::string& path)
{
    if (!j.is_string())
    {
        throw InvalidConfig(path, "expected a string");
    }
    return j.get<std::string>();
}

template <typename ScalarFn>
ParamDist parse_dist(const json& j, const std::string& path, ScalarFn scalar)
{
    if (!j.is_object())
    {
        return ParamDist::fixed(scalar(j, path));
    }
    Reader r(j, path);
    ParamDist d;
    int kinds = 0;
    for (const char* key : {"uniform", "normal"})
    {
        if (!r.has(key))
        {
            continue;
        }
        ++kinds;
        const json& pair = r.at(key);
        const std::string p = r.child(key);
        if (!pair.is_array() || pair.size() != 2)
        {
            throw InvalidConfig(p, "expected a two-element array");
        }
        const double a = scalar(pair[0], p + "[0]");
        const double b = scalar(pair[1], p + "[1]");
        if (std::string(key) == "uniform")
        {
            if (b < a)
            {
                throw InvalidConfig(p, "upper bound below lower bound");
            }
            d = ParamDist::uniform(a, b);
        }
        else
        {
            if (b < 0)
            {
                throw InvalidConfig(p + "[1]", "sigma must be >= 0");
            }
            d = ParamDist::normal(a, b);
        }
    }
    r.finish();
    if (kinds != 1)
    {
        throw InvalidConfig(path, "expected exactly one of 'uniform' or 'normal'");
    }
    return d;
}

ClockSpec parse_clock_spec(const json& j, const std::string& path, const ClockSpec& base)
{
    Reader r(j, path);
    ClockSpec spec = base;
    auto ticks_scalar = [](const json& v, const std::string& p) { return parse_tick_scale(v, p); };
    auto ratio_scalar = [](const json& v, const std::string& p) { return parse_ratio(v, p); };
    if (r.has("theta0"))
    {
        spec.theta0 = parse_dist(r.at("theta0"), r.child("theta0"), ticks_scalar);
    }
    if (r.has("skew"))
    {
        spec.skew = parse_dist(r.at("skew"), r.child("skew"), ratio_scalar);
    }
    if (r.has("drift"))
    {
        spec.drift = parse_dist(r.at("drift"), r.child("drift"), ratio_scalar);
    }
    if (r.has("stamp_noise"))
    {
        spec.stamp_noise = parse_dist(r.at("stamp_noise"), r.child("stamp_noise"), ticks_scalar);
    }
    r.finish();
    return spec;
}

NodeRole parse_role_field(const json& j, const std::string& path)
{
    const std::string s = parse_string(j, path);
    const auto role = parse_role(s);
    if (!role)
    {
        throw InvalidConfig(path, "unknown role '" + s + "' (reference, bs, ue, gateway, legacy, pmu)");
    }
    return *role;
}

DelayDist parse_delay(const json& j, const std::string& path)
{
    if (j.is_string() && j.get<std::string>() == "none")
    {
        return DelayDist::none();
    }
    Reader r(j, path);
    DelayDist d;
    int kinds = 0;
    if (r.has("fixed"))
    {
        ++kinds;
        d = DelayDist::fixed(parse_nonneg_ticks(r.at("fixed"), r.child("fixed")));
    }
    if (r.has("uniform"))
    {
        ++kinds;
        const json& pair = r.at("uniform");
        const std::string p = r.child("uniform");
        if (!pair.is_array() || pair.size() != 2)
        {
            throw InvalidConfig(p, "expected a two-element array");
        }
        const Ticks lo = parse_nonneg_ticks(pair[0], p + "[0]");
        const Ticks hi = parse_nonneg_ticks(pair[1], p + "[1]");
        if (hi < lo)
        {
            throw InvalidConfig(p, "upper bound below lower bound");
        }
        d = DelayDist::uniform(lo, hi);
    }
    r.finish();
    if (kinds != 1)
    {
        throw InvalidConfig(path, "expected \"none\", {\"fixed\": t} or {\"uniform\": [lo, hi]}");
    }
    return d;
}

template <typename E, std::size_t N>
E parse_enum(const json& j, const std::string& path, const std::array<std::pair<const char*, E>, N>& table)
{
    const std::string s = parse_string(j, path);
    std::string choices;
    for (const auto& [name, value] : table)
    {
        if (s == name)
        {
            return value;
        }
        choices += choices.empty() ? name : std::string(", ") + name;
    }
    throw InvalidConfig(path, "unknown value '" + s + "' (expected one of: " + choices + ")");
}

constexpr std::array<std::pair<const char*, Enabler>, 3> kEnablers{
    {{"ta_sib16", Enabler::TaSib16}, {"ribs_ue", Enabler::RibsUe}, {"dedicated_two_way", Enabler::DedicatedTwoWay}}};
constexpr std::array<std::pair<const char*, StampMode>, 2> kStampModes{
    {{"at_schedule", StampMode::AtSchedule}, {"at_transmit", StampMode::AtTransmit}}};
constexpr std::array<std::pair<const char*, BsAlignment::Mode>, 3> kAlignModes{{{"perfect", BsAlignment::Mode::Perfect},
                                                                                {"ribs", BsAlignment::Mode::Ribs},
                                                                                {"fixed_error", BsAlignment::Mode::FixedError}}};
constexpr std::array<std::pair<const char*, RibsMode>, 3> kRibsModes{{{"listen_only", RibsMode::ListenOnly},
                                                                      {"listen_with_ta", RibsMode::ListenWithTaCompensation},
                                                                      {"two_way", RibsMode::TwoWay}}};

template <typename E, std::size_t N>
const char* enum_name(E value, const std::array<std::pair<const char*, E>, N>& table)
{
    for (const auto& [name, v] : table)
    {
        if (v == value)
        {
            return name;
        }
    }
    return "unknown";
}

SibConfig parse_sib(const json& j, const std::string& path)
{
    Reader r(j, path);
    SibConfig sib;
    if (r.has("granularity"))
    {
        sib.granularity = parse_nonneg_ticks(r.at("granularity"), r.child("granularity"));
    }
    if (r.has("periodicity"))
    {
        sib.periodicity = parse_ticks(r.at("periodicity"), r.child("periodicity"));
        if (sib.periodicity <= 0)
        {
            throw InvalidConfig(r.child("periodicity"), "must be > 0");
        }
    }
    if (r.has("si_window"))
    {
        sib.si_window = parse_nonneg_ticks(r.at("si_window"), r.child("si_window"));
    }
    if (r.has("stamp_mode"))
    {
        sib.stamp_mode = parse_enum(r.at("stamp_mode"), r.child("stamp_mode"), kStampModes);
    }
    r.finish();
    if (sib.si_window > sib.periodicity)
    {
        throw InvalidConfig(path + ".si_window", "must not exceed the periodicity");
    }
    return sib;
}

BsAlignment parse_alignment(const json& j, const std::string& path)
{
    Reader r(j, path);
    BsAlignment a;
    a.mode = parse_enum(r.at("mode"), r.child("mode"), kAlignModes);
    if (r.has("error"))
    {
        a.fixed_error = parse_ticks(r.at("error"), r.child("error"));
    }
    if (r.has("ribs_mode"))
    {
        a.ribs_mode = parse_enum(r.at("ribs_mode"), r.child("ribs_mode"), kRibsModes);
    }
    if (r.has("period"))
    {
        a.period = parse_ticks(r.at("period"), r.child("period"));
    }
    if (r.has("asymmetry"))
    {
        a.asymmetry = parse_ticks(r.at("asymmetry"), r.child("asymmetry"));
    }
    r.finish();
    return a;
}

SyncPlan parse_plan(const json& j, const std::string& path)
{
    Reader r(j, path);
    SyncPlan plan;
    if (r.has("enabler"))
    {
        plan.enabler = parse_enum(r.at("enabler"), r.child("enabler"), kEnablers);
    }
    if (r.has("resync_period"))
    {
        plan.resync_period = parse_ticks(r.at("resync_period"), r.child("resync_period"));
    }
    if (r.has("ta_timer_ms"))
    {
        const json& t = r.at("ta_timer_ms");
        if (!t.is_number_integer())
        {
            throw InvalidConfig(r.child("ta_timer_ms"), "expected an integer number of milliseconds");
        }
        plan.ta_timer.period_ms = t.get<int>();
        try
        {
            plan.ta_timer.validate();
        }
        catch (const std::invalid_argument& e)
        {
            throw InvalidConfig(r.child("ta_timer_ms"), e.what());
        }
    }
    if (r.has("turnaround"))
    {
        plan.turnaround = parse_nonneg_ticks(r.at("turnaround"), r.child("turnaround"));
    }
    if (r.has("sib"))
    {
        plan.sib = parse_sib(r.at("sib"), r.child("sib"));
    }
    if (r.has("bs_alignment"))
    {
        plan.bs_alignment = parse_alignment(r.at("bs_alignment"), r.child("bs_alignment"));
    }
    r.finish();
    return plan;
}

LinkModel parse_link(const json& j, const std::string& path)
{
    Reader r(j, path);
    LinkModel link;
    if (r.has("propagation_speed"))
    {
        link.propagation_speed = parse_number(r.at("propagation_speed"), r.child("propagation_speed"));
        if (!(link.propagation_speed > 0))
        {
            throw InvalidConfig(r.child("propagation_speed"), "must be > 0");
        }
    }
    if (r.has("extra_delay"))
    {
        link.extra_delay = parse_delay(r.at("extra_delay"), r.child("extra_delay"));
    }
    if (r.has("loss_prob"))
    {
        link.loss_prob = parse_probability(r.at("loss_prob"), r.child("loss_prob"));
    }
    if (r.has("rtt_noise_sigma"))
    {
        link.rtt_noise_sigma = parse_tick_scale(r.at("rtt_noise_sigma"), r.child("rtt_noise_sigma"));
        if (!(link.rtt_noise_sigma >= 0))
        {
            throw InvalidConfig(r.child("rtt_noise_sigma"), "must be >= 0");
        }
    }
    if (r.has("wrong_bin_prob"))
    {
        link.wrong_bin_prob = parse_probability(r.at("wrong_bin_prob"), r.child("wrong_bin_prob"));
    }
    r.finish();
    return link;
}

Position parse_position(const json& j, const std::string& path)
{
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
    {
        throw InvalidConfig(path, "expected [x, y] in meters");
    }
    return Position{j[0].get<double>(), j[1].get<double>()};
}

std::vector<std::string> parse_string_list(const json& j, const std::string& path)
{
    if (!j.is_array())
    {
        throw InvalidConfig(path, "expected an array of strings");
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < j.size(); ++i)
    {
        out.push_back(parse_string(j[i], path + "[" + std::to_string(i) + "]"));
    }
    return out;
}

json dist_to_json(const ParamDist& d)
{
    switch (d.kind)
    {
    case ParamDist::Kind::Fixed: return d.a;
    case ParamDist::Kind::Uniform: return json{{"uniform", {d.a, d.b}}};
    case ParamDist::Kind::Normal: return json{{"normal", {d.a, d.b}}};
    }
    return nullptr;
}

json clock_spec_to_json(const ClockSpec& c)
{
    return json{{"theta0", dist_to_json(c.theta0)},
                {"skew", dist_to_json(c.skew)},
                {"drift", dist_to_json(c.drift)},
                {"stamp_noise", dist_to_json(c.stamp_noise)}};
}

json delay_to_json(const DelayDist& d)
{
    switch (d.kind)
    {
    case DelayDist::Kind::None: return "none";
    case DelayDist::Kind::Fixed: return json{{"fixed", d.lo}};
    case DelayDist::Kind::Uniform: return json{{"uniform", {d.lo, d.hi}}};
    }
    return "none";
}

} // namespace

ScenarioConfig parse_scenario_config(const json& doc)
{
    Reader r(doc, "");
    ScenarioConfig cfg;

    const json& version = r.at("schema_version");
    if (!version.is_number_integer() || version.get<int>() != kSchemaVersion)
    {
        throw InvalidConfig("schema_version", "unsupported schema version (expected 1)");
    }
    cfg.schema_version = kSchemaVersion;

    if (r.has("name"))
    {
        cfg.name = parse_string(r.at("name"), "name");
    }
    if (r.has("seed"))
    {
        const json& s = r.at("seed");
        if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
        {
            throw InvalidConfig("seed", "expected a non-negative integer");
        }
        cfg.seed = s.get<std::uint64_t>();
    }
    cfg.duration = parse_ticks(r.at("duration"), "duration");
    if (r.has("sampling_period"))
    {
        cfg.sampling_period = parse_ticks(r.at("sampling_period"), "sampling_period");
    }
    if (r.has("warmup"))
    {
        cfg.warmup = parse_nonneg_ticks(r.at("warmup"), "warmup");
    }

    if (r.has("clock_defaults"))
    {
        Reader d(r.at("clock_defaults"), "clock_defaults");
        for (const NodeRole role : {NodeRole::BaseStation, NodeRole::Ue, NodeRole::Gateway, NodeRole::LegacyDevice,
                                    NodeRole::Pmu})
        {
            const std::string key = to_string(role);
            if (d.has(key))
            {
                cfg.clock_defaults[role] = parse_clock_spec(d.at(key), d.child(key), default_clock_spec(role));
            }
        }
        d.finish();
    }

    const json& nodes = r.at("nodes");
    if (!nodes.is_array())
    {
        throw InvalidConfig("nodes", "expected an array");
    }
    for (std::size_t i = 0; i < nodes.size(); ++i)
    {
        const std::string path = "nodes[" + std::to_string(i) + "]";
        Reader n(nodes[i], path);
        NodeSpec spec;
        spec.id = parse_string(n.at("id"), n.child("id"));
        spec.role = parse_role_field(n.at("role"), n.child("role"));
        if (n.has("position"))
        {
            spec.position = parse_position(n.at("position"), n.child("position"));
        }
        if (n.has("attach"))
        {
            spec.attach = parse_string(n.at("attach"), n.child("attach"));
        }
        if (n.has("clock"))
        {
            ClockSpec base = default_clock_spec(spec.role);
            if (auto it = cfg.clock_defaults.find(spec.role); it != cfg.clock_defaults.end())
            {
                base = it->second;
            }
            spec.clock = parse_clock_spec(n.at("clock"), n.child("clock"), base);
        }
        n.finish();
        cfg.nodes.push_back(std::move(spec));
    }

    if (r.has("link"))
    {
        cfg.link = parse_link(r.at("link"), "link");
    }
    if (r.has("sync_plan"))
    {
        cfg.plan = parse_plan(r.at("sync_plan"), "sync_plan");
    }
    if (r.has("gateway"))
    {
        Reader g(r.at("gateway"), "gateway");
        if (g.has("local_domain_error_sigma"))
        {
            cfg.gw_local_sigma = parse_tick_scale(g.at("local_domain_error_sigma"), g.child("local_domain_error_sigma"));
            if (!(cfg.gw_local_sigma >= 0))
            {
                throw InvalidConfig(g.child("local_domain_error_sigma"), "must be >= 0");
            }
        }
        g.finish();
    }
    if (r.has("workload"))
    {
        Reader w(r.at("workload"), "workload");
        WorkloadSpec wl;
        if (w.has("command_period"))
        {
            wl.command_period = parse_ticks(w.at("command_period"), w.child("command_period"));
            if (wl.command_period <= 0)
            {
                throw InvalidConfig(w.child("command_period"), "must be > 0");
            }
        }
        if (w.has("targets"))
        {
            wl.targets = parse_string_list(w.at("targets"), w.child("targets"));
        }
        if (w.has("ideal_grid_phase"))
        {
            wl.ideal_grid_phase = parse_ticks(w.at("ideal_grid_phase"), w.child("ideal_grid_phase"));
        }
        w.finish();
        cfg.workload = wl;
    }
    if (r.has("fault"))
    {
        Reader f(r.at("fault"), "fault");
        FaultSpec fs;
        fs.pmu_a = parse_string(f.at("pmu_a"), f.child("pmu_a"));
        fs.pmu_b = parse_string(f.at("pmu_b"), f.child("pmu_b"));
        fs.at = parse_nonneg_ticks(f.at("at"), f.child("at"));
        fs.geometry.line_length_m = parse_number(f.at("line_length"), f.child("line_length"));
        fs.geometry.fault_position_m = parse_number(f.at("position"), f.child("position"));
        if (f.has("wave_speed"))
        {
            fs.geometry.wave_speed_mps = parse_number(f.at("wave_speed"), f.child("wave_speed"));
        }
        if (f.has("sync_error_bound"))
        {
            fs.sync_error_bound = parse_nonneg_ticks(f.at("sync_error_bound"), f.child("sync_error_bound"));
        }
        f.finish();
        try
        {
            fs.geometry.validate();
        }
        catch (const InvalidGeometry& e)
        {
            throw InvalidConfig("fault", e.what());
        }
        cfg.fault = fs;
    }
    if (r.has("presets"))
    {
        cfg.presets = parse_string_list(r.at("presets"), "presets");
        for (std::size_t i = 0; i < cfg.presets.size(); ++i)
        {
            if (!find_preset(cfg.presets[i]))
            {
                throw InvalidConfig("presets[" + std::to_string(i) + "]", "unknown preset '" + cfg.presets[i] + "'");
            }
        }
    }
    if (r.has("metrics"))
    {
        Reader m(r.at("metrics"), "metrics");
        if (m.has("pairwise_nodes"))
        {
            cfg.pairwise_nodes = parse_string_list(m.at("pairwise_nodes"), m.child("pairwise_nodes"));
        }
        m.finish();
    }
    r.finish();
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
    {
        throw InvalidConfig("<file>", "cannot read config file '" + path + "'");
    }
    json doc;
    try
    {
        doc = json::parse(in);
    }
    catch (const json::parse_error& e)
    {
        throw InvalidConfig("<file>", std::string("malformed JSON: ") + e.what());
    }
    return parse_scenario_config(doc);
}

json config_to_json(const ScenarioConfig& c)
{
    json doc;
    doc["schema_version"] = c.schema_version;
    doc["name"] = c.name;
    doc["seed"] = c.seed;
    doc["duration"] = c.duration;
    doc["sampling_period"] = c.sampling_period;
    doc["warmup"] = c.warmup;

    json defaults = json::object();
    for (const auto& [role, spec] : c.clock_defaults)
    {
        defaults[to_string(role)] = clock_spec_to_json(spec);
    }
    doc["clock_defaults"] = defaults;

    json nodes = json::array();
    for (const NodeSpec& n : c.nodes)
    {
        json j{{"id", n.id}, {"role", to_string(n.role)}, {"position", {n.position.x, n.position.y}}};
        if (!n.attach.empty())
        {
            j["attach"] = n.attach;
        }
        if (n.clock)
        {
            j["clock"] = clock_spec_to_json(*n.clock);
        }
        nodes.push_back(j);
    }
    doc["nodes"] = nodes;

    doc["link"] = json{{"propagation_speed", c.link.propagation_speed},
                       {"extra_delay", delay_to_json(c.link.extra_delay)},
                       {"loss_prob", c.link.loss_prob},
                       {"rtt_noise_sigma", c.link.rtt_noise_sigma},
                       {"wrong_bin_prob", c.link.wrong_bin_prob}};

    const SyncPlan& p = c.plan;
    doc["sync_plan"] = json{
        {"enabler", enum_name(p.enabler, kEnablers)},
        {"resync_period", p.resync_period},
        {"ta_timer_ms", p.ta_timer.period_ms},
        {"turnaround", p.turnaround},
        {"sib",
         {{"granularity", p.sib.granularity},
          {"periodicity", p.sib.periodicity},
          {"si_window", p.sib.si_window},
          {"stamp_mode", enum_name(p.sib.stamp_mode, kStampModes)}}},
        {"bs_alignment",
         {{"mode", enum_name(p.bs_alignment.mode, kAlignModes)},
          {"error", p.bs_alignment.fixed_error},
          {"ribs_mode", enum_name(p.bs_alignment.ribs_mode, kRibsModes)},
          {"period", p.bs_alignment.period},
          {"asymmetry", p.bs_alignment.asymmetry}}}};

    doc["gateway"] = json{{"local_domain_error_sigma", c.gw_local_sigma}};
    if (c.workload)
    {
        json w{{"command_period", c.workload->command_period}, {"targets", c.workload->targets}};
        if (c.workload->ideal_grid_phase)
        {
            w["ideal_grid_phase"] = *c.workload->ideal_grid_phase;
        }
        doc["workload"] = w;
    }
    if (c.fault)
    {
        json f{{"pmu_a", c.fault->pmu_a},
               {"pmu_b", c.fault->pmu_b},
               {"at", c.fault->at},
               {"line_length", c.fault->geometry.line_length_m},
               {"position", c.fault->geometry.fault_position_m},
               {"wave_speed", c.fault->geometry.wave_speed_mps}};
        if (c.fault->sync_error_bound)
        {
            f["sync_error_bound"] = *c.fault->sync_error_bound;
        }
        doc["fault"] = f;
    }
    doc["presets"] = c.presets;
    doc["metrics"] = json{{"pairwise_nodes", c.pairwise_nodes}};
    return doc;
}

void set_config_path(json& doc, const std::string& path, const json& value)
{
    if (path.empty())
    {
        throw InvalidConfig("<sweep>", "empty parameter path");
    }
    std::vector<std::string> segments;
    std::stringstream ss(path);
    for (std::string seg; std::getline(ss, seg, '.');)
    {
        if (seg.empty())
        {
            throw InvalidConfig(path, "empty path segment");
        }
        segments.push_back(seg);
    }

    json* cur = &doc;
    for (std::size_t i = 0; i < segments.size(); ++i)
    {
        const std::string& seg = segments[i];
        const bool last = i + 1 == segments.size();
        if (cur->is_array())
        {
            json* next = nullptr;
            const bool numeric = seg.find_first_not_of("0123456789") == std::string::npos;
            if (numeric)
            {
                const auto idx = std::stoul(seg);
                if (idx < cur->size())
                {
                    next = &(*cur)[idx];
                }
            }
            else
            {
                for (auto& el : *cur)
                {
                    if (el.is_object() && el.contains("id") && el["id"] == seg)
                    {
                        next = &el;
                        break;
                    }
                }
            }
            if (!next)
            {
                throw InvalidConfig(path, "segment '" + seg + "' does not match an array element");
            }
            cur = next;
        }
        else if (cur->is_object() || cur->is_null())
        {
            if (cur->is_null())
            {
                *cur = json::object();
            }
            cur = &(*cur)[seg];
        }
        else
        {
            throw InvalidConfig(path, "segment '" + seg + "' descends into a scalar");
        }
        if (last)
        {
            *cur = value;
        }
    }
}

} // namespace airsync
