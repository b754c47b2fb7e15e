#include "vpmac/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

namespace vpmac {
namespace {

using nlohmann::json;

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + ": expected an object");
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items())
        if (!ok.contains(key)) throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
T get_or(const json& j, const char* key, T fallback, const std::string& where) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw ConfigError(where + "." + key + ": " + e.what());
    }
}

template <typename T>
T require(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw ConfigError(where + ": missing required key '" + key + "'");
    return get_or<T>(j, key, T{}, where);
}

json profile_json(const Profile& p) { return p.head(); }

json utility_json(const UtilitySpec& u) {
    if (u.kind == UtilityKind::SumThroughput) return {{"kind", "sum_throughput"}};
    return {{"kind", "energy_weighted"}, {"energy_cost", u.energy_cost}};
}

UtilitySpec utility_from_json(const json& j) {
    const std::string where = "utility";
    check_keys(j, {"kind", "energy_cost"}, where);
    const auto kind = require<std::string>(j, "kind", where);
    UtilitySpec u;
    if (kind == "sum_throughput") {
        u.kind = UtilityKind::SumThroughput;
        if (j.contains("energy_cost")) throw ConfigError("utility: sum_throughput takes no energy_cost");
    } else if (kind == "energy_weighted") {
        u.kind = UtilityKind::EnergyWeightedThroughput;
        u.energy_cost = require<double>(j, "energy_cost", where);
        if (!(u.energy_cost >= 0.0)) throw ConfigError("utility.energy_cost must be >= 0");
    } else {
        throw ConfigError("utility.kind: unknown kind '" + kind + "' (sum_throughput, energy_weighted)");
    }
    return u;
}

json design_json(const DesignInputs& d) {
    json j = {{"epsilon_v", d.epsilon_v}, {"b_margin", d.b_margin}};
    if (d.x_star) j["x_star"] = *d.x_star;
    if (d.b) j["b"] = *d.b;
    return j;
}

DesignInputs design_from_json(const json& top) {
    DesignInputs d;
    if (top.contains("utility")) d.utility = utility_from_json(top.at("utility"));
    if (!top.contains("design")) return d;
    const json& j = top.at("design");
    const std::string where = "design";
    check_keys(j, {"epsilon_v", "b_margin", "x_star", "b"}, where);
    d.epsilon_v = get_or<double>(j, "epsilon_v", d.epsilon_v, where);
    d.b_margin = get_or<double>(j, "b_margin", d.b_margin, where);
    if (j.contains("x_star")) d.x_star = require<double>(j, "x_star", where);
    if (j.contains("b")) d.b = require<double>(j, "b", where);
    if (d.x_star.has_value() != d.b.has_value()) throw ConfigError("design: x_star and b must be given together");
    if (!d.x_star && !(d.b_margin > 0.0))
        throw ConfigError("design.b_margin must be > 0: b has to strictly exceed max{1, x* - gamma_ev}");
    if (!(d.epsilon_v >= 0.0)) throw ConfigError("design.epsilon_v must be >= 0");
    return d;
}

json schedule_json(const StepSchedule& s) {
    if (const auto* c = std::get_if<ConstantStep>(&s)) return {{"kind", "constant"}, {"alpha", c->alpha}};
    const auto& d = std::get<DiminishingStep>(s);
    return {{"kind", "diminishing"}, {"a", d.a}, {"c", d.c}};
}

StepSchedule schedule_from_json(const json& j) {
    const std::string where = "schedule";
    const auto kind = require<std::string>(j, "kind", where);
    if (kind == "constant") {
        check_keys(j, {"kind", "alpha"}, where);
        return ConstantStep{require<double>(j, "alpha", where)};
    }
    if (kind == "diminishing") {
        check_keys(j, {"kind", "a", "c"}, where);
        return DiminishingStep{require<double>(j, "a", where), require<double>(j, "c", where)};
    }
    throw ConfigError("schedule.kind: unknown kind '" + kind + "' (constant, diminishing)");
}

json estimator_json(const EstimatorConfig& e) {
    if (const auto* w = std::get_if<WindowEstimator>(&e.kind))
        return {{"kind", "window"}, {"slots", w->slots}, {"initial_value", e.initial_value}};
    return {{"kind", "ema"}, {"weight", std::get<EmaEstimator>(e.kind).weight}, {"initial_value", e.initial_value}};
}

EstimatorConfig estimator_from_json(const json& j) {
    const std::string where = "estimator";
    EstimatorConfig e;
    const auto kind = require<std::string>(j, "kind", where);
    if (kind == "ema") {
        check_keys(j, {"kind", "weight", "initial_value"}, where);
        e.kind = EmaEstimator{get_or<double>(j, "weight", EmaEstimator{}.weight, where)};
    } else if (kind == "window") {
        check_keys(j, {"kind", "slots", "initial_value"}, where);
        e.kind = WindowEstimator{require<std::uint32_t>(j, "slots", where)};
    } else {
        throw ConfigError("estimator.kind: unknown kind '" + kind + "' (ema, window)");
    }
    e.initial_value = get_or<double>(j, "initial_value", e.initial_value, where);
    return e;
}

json events_json(const std::vector<PopulationEvent>& events) {
    json arr = json::array();
    for (const auto& ev : events)
        arr.push_back({{"slot", ev.slot}, {ev.change == PopulationChange::Join ? "join" : "leave", ev.count}});
    return arr;
}

std::vector<PopulationEvent> events_from_json(const json& j) {
    if (!j.is_array()) throw ConfigError("events: expected an array");
    std::vector<PopulationEvent> out;
    for (std::size_t i = 0; i < j.size(); ++i) {
        const std::string where = "events[" + std::to_string(i) + "]";
        const json& e = j[i];
        check_keys(e, {"slot", "join", "leave"}, where);
        if (e.contains("join") == e.contains("leave"))
            throw ConfigError(where + ": exactly one of 'join' or 'leave' is required");
        PopulationEvent ev;
        ev.slot = require<std::uint64_t>(e, "slot", where);
        ev.change = e.contains("join") ? PopulationChange::Join : PopulationChange::Leave;
        ev.count = require<std::size_t>(e, e.contains("join") ? "join" : "leave", where);
        out.push_back(ev);
    }
    return out;
}

OutputSpec output_from_json(const json& top, const std::string& fallback_name) {
    OutputSpec o;
    o.name = fallback_name;
    if (!top.contains("output")) return o;
    const json& j = top.at("output");
    check_keys(j, {"dir", "name"}, "output");
    o.dir = get_or<std::string>(j, "dir", o.dir, "output");
    o.name = get_or<std::string>(j, "name", o.name, "output");
    return o;
}

RunConfig run_config_from_json(const json& j) {
    check_keys(j, {"schema", "channel", "utility", "design", "mode", "schedule", "estimator", "utility_ema_weight",
                   "horizon", "initial_users", "initial_p", "seed", "events", "seeds", "stride", "summary_window",
                   "output"},
               "scenario");
    RunConfig cfg;
    Scenario& sc = cfg.scenario;
    if (!j.contains("channel")) throw ConfigError("scenario: missing required key 'channel'");
    sc.channel = channel_from_json(j.at("channel"));
    sc.design = design_from_json(j);
    if (j.contains("mode")) {
        try {
            sc.mode = feedback_mode_from_string(j.at("mode").get<std::string>());
        } catch (const std::exception& e) {
            throw ConfigError(std::string("mode: ") + e.what());
        }
    }
    if (j.contains("schedule")) sc.schedule = schedule_from_json(j.at("schedule"));
    if (j.contains("estimator")) sc.estimator = estimator_from_json(j.at("estimator"));
    sc.utility_ema_weight = get_or<double>(j, "utility_ema_weight", sc.utility_ema_weight, "scenario");
    sc.horizon = require<std::uint64_t>(j, "horizon", "scenario");
    sc.initial_users = require<std::size_t>(j, "initial_users", "scenario");
    sc.initial_p = get_or<double>(j, "initial_p", sc.initial_p, "scenario");
    sc.seed = get_or<std::uint64_t>(j, "seed", sc.seed, "scenario");
    if (j.contains("events")) sc.events = events_from_json(j.at("events"));
    sc.stride = get_or<std::uint64_t>(j, "stride", sc.stride, "scenario");
    sc.summary_window = get_or<std::uint64_t>(j, "summary_window", sc.summary_window, "scenario");
    cfg.seeds = get_or<std::size_t>(j, "seeds", cfg.seeds, "scenario");
    if (cfg.seeds < 1) throw ConfigError("scenario.seeds must be at least 1");
    cfg.output = output_from_json(j, "run");
    try {
        validate(sc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("scenario: ") + e.what());
    }
    return cfg;
}

TableJob table_from_json(const json& j) {
    check_keys(j, {"schema", "channel", "utility", "design", "baseline", "k_min", "k_max", "output"}, "table");
    TableJob job;
    if (!j.contains("channel")) throw ConfigError("table: missing required key 'channel'");
    job.channel = channel_from_json(j.at("channel"));
    job.design = design_from_json(j);
    const auto baseline = get_or<std::string>(j, "baseline", "hajek", "table");
    if (baseline == "hajek")
        job.baseline = Baseline::Hajek;
    else if (baseline == "idle_target")
        job.baseline = Baseline::IdleTarget;
    else
        throw ConfigError("table.baseline: unknown baseline '" + baseline + "' (hajek, idle_target)");
    job.k_min = get_or<std::size_t>(j, "k_min", job.k_min, "table");
    job.k_max = get_or<std::size_t>(j, "k_max", job.k_max, "table");
    if (job.k_min < 1 || job.k_max < job.k_min) throw ConfigError("table: need 1 <= k_min <= k_max");
    job.output = output_from_json(j, "table");
    return job;
}

}  // namespace

json to_json(const ChannelModel& channel) {
    return std::visit(
        [](const auto& ch) -> json {
            using T = std::decay_t<decltype(ch)>;
            if constexpr (std::is_same_v<T, CollisionChannel>) {
                return {{"type", "collision"}};
            } else if constexpr (std::is_same_v<T, ThresholdFadingChannel>) {
                json states = json::array();
                for (const auto& s : ch.states) states.push_back({{"probability", s.probability}, {"capacity", s.capacity}});
                return {{"type", "threshold_fading"}, {"states", states}};
            } else {
                return {{"type", "parametric"},
                        {"c_real", profile_json(ch.params.real)},
                        {"c_real_tail", ch.params.real.tail()},
                        {"c_virtual", profile_json(ch.params.virt)},
                        {"c_virtual_tail", ch.params.virt.tail()}};
            }
        },
        channel);
}

ChannelModel channel_from_json(const json& j) {
    const std::string where = "channel";
    if (!j.is_object() || j.empty()) throw ConfigError("channel: empty channel spec (need at least 'type')");
    const auto type = require<std::string>(j, "type", where);
    ChannelModel model;
    if (type == "collision") {
        check_keys(j, {"type"}, where);
        model = CollisionChannel{};
    } else if (type == "threshold_fading") {
        check_keys(j, {"type", "states"}, where);
        const json& states = j.contains("states") ? j.at("states") : json::array();
        if (!states.is_array() || states.empty()) throw ConfigError("channel.states: need a non-empty array");
        ThresholdFadingChannel ch;
        for (std::size_t i = 0; i < states.size(); ++i) {
            const std::string w = "channel.states[" + std::to_string(i) + "]";
            check_keys(states[i], {"probability", "capacity"}, w);
            const auto cap = require<std::int64_t>(states[i], "capacity", w);
            if (cap < 0) throw ConfigError(w + ".capacity must be a non-negative integer");
            ch.states.push_back({require<double>(states[i], "probability", w), static_cast<std::uint32_t>(cap)});
        }
        model = std::move(ch);
    } else if (type == "parametric") {
        check_keys(j, {"type", "c_real", "c_real_tail", "c_virtual", "c_virtual_tail"}, where);
        try {
            model = ParametricChannel{ChannelParams(
                Profile(require<std::vector<double>>(j, "c_real", where), get_or<double>(j, "c_real_tail", 0.0, where)),
                Profile(require<std::vector<double>>(j, "c_virtual", where),
                        get_or<double>(j, "c_virtual_tail", 0.0, where)))};
        } catch (const std::invalid_argument& e) {
            throw ConfigError(std::string("channel: ") + e.what());
        }
    } else {
        throw ConfigError("channel.type: unknown type '" + type + "' (collision, threshold_fading, parametric)");
    }
    try {
        validate(model);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("channel: ") + e.what());
    }
    return model;
}

json to_json(const RunConfig& cfg) {
    const Scenario& sc = cfg.scenario;
    return {{"schema", kScenarioSchema},
            {"channel", to_json(sc.channel)},
            {"utility", utility_json(sc.design.utility)},
            {"design", design_json(sc.design)},
            {"mode", std::string(to_string(sc.mode))},
            {"schedule", schedule_json(sc.schedule)},
            {"estimator", estimator_json(sc.estimator)},
            {"utility_ema_weight", sc.utility_ema_weight},
            {"horizon", sc.horizon},
            {"initial_users", sc.initial_users},
            {"initial_p", sc.initial_p},
            {"seed", sc.seed},
            {"events", events_json(sc.events)},
            {"seeds", cfg.seeds},
            {"stride", sc.stride},
            {"summary_window", sc.summary_window},
            {"output", {{"dir", cfg.output.dir}, {"name", cfg.output.name}}}};
}

json to_json(const TableJob& job) {
    return {{"schema", kTableSchema},
            {"channel", to_json(job.channel)},
            {"utility", utility_json(job.design.utility)},
            {"design", design_json(job.design)},
            {"baseline", job.baseline == Baseline::Hajek ? "hajek" : "idle_target"},
            {"k_min", job.k_min},
            {"k_max", job.k_max},
            {"output", {{"dir", job.output.dir}, {"name", job.output.name}}}};
}

json to_json(const Job& job) {
    return std::visit([](const auto& j) { return to_json(j); }, job);
}

Job job_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("config: expected a JSON object");
    const auto schema = require<std::string>(j, "schema", "config");
    if (schema == kScenarioSchema) return run_config_from_json(j);
    if (schema == kTableSchema) return table_from_json(j);
    throw ConfigError("config.schema: unsupported schema '" + schema + "' (expected " + kScenarioSchema + " or " +
                      kTableSchema + ")");
}

Job load_job(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path.string());
    json j;
    try {
        j = json::parse(in, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw ConfigError(path.string() + ": " + e.what());
    }
    return job_from_json(j);
}

namespace {

ThresholdFadingChannel example_fading_channel() { return ThresholdFadingChannel{{{0.3, 4}, {0.7, 6}}}; }

RunConfig fading_run(std::string name, FeedbackMode mode, std::uint64_t seed) {
    RunConfig cfg;
    Scenario& sc = cfg.scenario;
    sc.channel = example_fading_channel();
    sc.design.utility = {UtilityKind::EnergyWeightedThroughput, 0.3};
    sc.design.epsilon_v = 0.01;
    sc.design.b_margin = 0.01;
    sc.mode = mode;
    sc.schedule = ConstantStep{0.05};
    sc.estimator = EstimatorConfig{EmaEstimator{1.0 / 300.0}, 1.0};
    sc.utility_ema_weight = 1.0 / 300.0;
    sc.horizon = 3000;
    sc.initial_users = 8;
    sc.initial_p = 0.0;
    sc.seed = seed;
    sc.summary_window = 500;
    cfg.seeds = 10;
    cfg.output.name = std::move(name);
    return cfg;
}

}  // namespace

Job preset(std::string_view name) {
    if (name == "ex1") {
        TableJob job;
        job.channel = CollisionChannel{};
        job.design.utility = {UtilityKind::SumThroughput, 0.0};
        job.baseline = Baseline::Hajek;
        job.output.name = "ex1";
        return job;
    }
    if (name == "ex2") {
        TableJob job;
        job.channel = example_fading_channel();
        job.design.utility = {UtilityKind::EnergyWeightedThroughput, 0.3};
        job.baseline = Baseline::IdleTarget;
        job.output.name = "ex2";
        return job;
    }
    if (name == "ex3") return fading_run("ex3", FeedbackMode::ReceiverContention, 301);
    if (name == "ex4") return fading_run("ex4", FeedbackMode::OneStep, 401);
    if (name == "ex5") {
        RunConfig cfg = fading_run("ex5", FeedbackMode::OneStep, 501);
        cfg.scenario.horizon = 9000;
        cfg.scenario.summary_window = 1000;
        cfg.scenario.events = {{3001, PopulationChange::Join, 7}, {6001, PopulationChange::Leave, 5}};
        return cfg;
    }
    throw ConfigError("unknown preset '" + std::string(name) + "' (ex1, ex2, ex3, ex4, ex5)");
}

std::vector<std::string> preset_names() { return {"ex1", "ex2", "ex3", "ex4", "ex5"}; }

}  // namespace vpmac
