#include "vpmac/report.hpp"

#include <cstdio>
#include <fstream>

namespace vpmac {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::ofstream open_for_write(const fs::path& path) {
    std::error_code ec;
    if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
    if (ec) throw OutputError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
    std::ofstream out(path);
    if (!out) throw OutputError("cannot open " + path.string() + " for writing");
    return out;
}

void finish(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw OutputError("write failed for " + path.string());
}

void write_header(std::ostream& out, const std::vector<std::string>& columns) {
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
}

json stage_json(const StageSummary& st) {
    return {{"first_slot", st.first_slot}, {"last_slot", st.last_slot}, {"users", st.users},
            {"p_star", st.p_star},         {"p_opt", st.p_opt},         {"U_star", st.u_star},
            {"U_opt", st.u_opt},           {"tail_mean_p", st.tail_mean_p}, {"final_utility_ema", st.final_utility_ema}};
}

json conventions_json() {
    return {{"slot_numbering", "1-based; events apply at the start of their slot"},
            {"recorded_p", "after the slot's probability update"},
            {"leave_selection", "uniform random among active users (seeded)"},
            {"joiner_init", "p = 0, q_k = 1"}};
}

fs::path out_dir(const OutputSpec& o) { return fs::path(o.dir); }

}  // namespace

EquilibriumTable compute_table(const TableJob& job) {
    EquilibriumTable table;
    const ChannelParams params = derive_params(job.channel);
    const DesignInputs& in = job.design;
    table.design = (in.x_star && in.b) ? make_design(params, in.utility, in.epsilon_v, *in.x_star, *in.b)
                                       : build_design(params, in.utility, in.epsilon_v, in.b_margin);
    table.baseline = job.baseline;
    const MacDesign& d = table.design;
    for (std::size_t k = job.k_min; k <= job.k_max; ++k) {
        EquilibriumRow row;
        row.users = k;
        row.p_opt = optimal_p(k, params, d.utility);
        row.p_star = d.equilibrium_p(k);
        row.p_baseline = job.baseline == Baseline::Hajek ? hajek_pa(k) : idle_target_p(k, d.x_star);
        row.u_opt = utility_finite(k, row.p_opt, params, d.utility);
        row.u_star = utility_finite(k, row.p_star, params, d.utility);
        row.u_baseline = utility_finite(k, row.p_baseline, params, d.utility);
        table.rows.push_back(row);
    }
    return table;
}

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

void write_table_csv(const fs::path& path, const EquilibriumTable& table) {
    auto out = open_for_write(path);
    write_header(out, kTableColumns);
    for (const auto& r : table.rows) {
        out << r.users << ',' << format_number(r.p_opt) << ',' << format_number(r.p_star) << ','
            << format_number(r.p_baseline) << ',' << format_number(r.u_opt) << ',' << format_number(r.u_star) << ','
            << format_number(r.u_baseline) << '\n';
    }
    finish(out, path);
}

void write_trace_csv(const fs::path& path, const SimTrace& trace) {
    auto out = open_for_write(path);
    write_header(out, kTraceColumns);
    for (const auto& r : trace.records) {
        out << r.slot << ',' << r.n_active << ',' << format_number(r.mean_p) << ',' << format_number(r.min_p) << ','
            << format_number(r.max_p) << ',' << format_number(r.q_v) << ',' << format_number(r.mean_q_k) << ','
            << (r.virtual_success ? 1 : 0) << ',' << r.n_transmitted << ',' << r.n_success << ','
            << format_number(r.utility_sample) << ',' << format_number(r.utility_ema) << '\n';
    }
    finish(out, path);
}

void write_summary_csv(const fs::path& path, const AggregateTrace& agg) {
    auto out = open_for_write(path);
    write_header(out, kSummaryColumns);
    const auto row = [&](const char* name, const ScalarStats& s) {
        out << name << ',' << agg.n_seeds << ',' << format_number(s.mean) << ',' << format_number(s.stddev) << ','
            << format_number(s.min) << ',' << format_number(s.max) << '\n';
    };
    row("final_mean_p", agg.final_mean_p);
    row("final_utility_ema", agg.final_utility_ema);
    row("utility_ratio", agg.utility_ratio);
    finish(out, path);
}

void write_aggregate_csv(const fs::path& path, const AggregateTrace& agg) {
    auto out = open_for_write(path);
    write_header(out, kAggregateColumns);
    for (std::size_t i = 0; i < agg.slots.size(); ++i) {
        out << agg.slots[i] << ',' << format_number(agg.mean_p.mean[i]) << ',' << format_number(agg.mean_p.stddev[i])
            << ',' << format_number(agg.utility_ema.mean[i]) << ',' << format_number(agg.utility_ema.stddev[i]) << ','
            << format_number(agg.q_v.mean[i]) << ',' << format_number(agg.q_v.stddev[i]) << '\n';
    }
    finish(out, path);
}

json design_json(const MacDesign& d) {
    return {{"x_star", d.x_star},   {"epsilon_v", d.epsilon_v}, {"j_ev", d.j_ev},
            {"gamma_ev", d.gamma_ev}, {"b", d.b},               {"p_max", d.p_max},
            {"q_star_monotone", d.q_star_monotone}, {"warnings", d.warnings}};
}

json table_metadata(const TableJob& job, const EquilibriumTable& table, const std::string& csv_name) {
    return {{"schema", kMetadataSchema},
            {"kind", "table"},
            {"name", job.output.name},
            {"csv", csv_name},
            {"columns", kTableColumns},
            {"baseline", job.baseline == Baseline::Hajek ? "hajek" : "idle_target"},
            {"config", to_json(job)},
            {"design", design_json(table.design)}};
}

json trace_metadata(const RunConfig& cfg, const SimTrace& trace, const std::string& csv_name) {
    const TraceSummary& s = trace.summary;
    json stages = json::array();
    for (const auto& st : s.stages) stages.push_back(stage_json(st));
    json events = json::array();
    for (const auto& ev : trace.scenario.events) events.push_back(ev.slot);
    RunConfig echo = cfg;
    echo.scenario = trace.scenario;
    return {{"schema", kMetadataSchema},
            {"kind", "trace"},
            {"name", cfg.output.name},
            {"csv", csv_name},
            {"columns", kTraceColumns},
            {"seed", trace.scenario.seed},
            {"config", to_json(echo)},
            {"design", design_json(trace.design)},
            {"reference",
             {{"p_star", s.p_star}, {"p_opt", s.p_opt}, {"U_star", s.u_star}, {"U_opt", s.u_opt}, {"users", s.final_users}}},
            {"summary",
             {{"final_mean_p", s.final_mean_p},
              {"final_utility_ema", s.final_utility_ema},
              {"utility_ratio", s.utility_ratio},
              {"equilibrium_ratio", s.equilibrium_ratio}}},
            {"stages", stages},
            {"event_slots", events},
            {"conventions", conventions_json()}};
}

json sweep_metadata(const RunConfig& cfg, const AggregateTrace& agg, const std::vector<std::string>& files) {
    json seeds = json::array();
    for (const auto& r : agg.runs) seeds.push_back(r.scenario.seed);
    json out = trace_metadata(cfg, agg.runs.front(), "");
    out["kind"] = "sweep";
    out["n_seeds"] = agg.n_seeds;
    out["seeds"] = seeds;
    out["files"] = files;
    out["columns"] = {{"summary", kSummaryColumns}, {"aggregate", kAggregateColumns}, {"trace", kTraceColumns}};
    out.erase("csv");
    out.erase("seed");
    out.erase("summary");
    return out;
}

void write_json(const fs::path& path, const json& j) {
    auto out = open_for_write(path);
    out << j.dump(2) << '\n';
    finish(out, path);
}

std::vector<fs::path> emit_table(const TableJob& job) {
    const EquilibriumTable table = compute_table(job);
    const fs::path dir = out_dir(job.output);
    const std::string csv = job.output.name + "_table.csv";
    write_table_csv(dir / csv, table);
    write_json(dir / (job.output.name + "_table.meta.json"), table_metadata(job, table, csv));
    return {dir / csv, dir / (job.output.name + "_table.meta.json")};
}

std::vector<fs::path> emit_run(const RunConfig& cfg) {
    const SimTrace trace = run(cfg.scenario);
    const fs::path dir = out_dir(cfg.output);
    const std::string csv = cfg.output.name + "_trace.csv";
    const std::string meta = cfg.output.name + "_trace.meta.json";
    write_trace_csv(dir / csv, trace);
    write_json(dir / meta, trace_metadata(cfg, trace, csv));
    return {dir / csv, dir / meta};
}

std::vector<fs::path> emit_sweep(const RunConfig& cfg) {
    const AggregateTrace agg = run_many(cfg.scenario, cfg.seeds);
    const fs::path dir = out_dir(cfg.output);
    std::vector<fs::path> written;
    std::vector<std::string> names;
    for (const auto& trace : agg.runs) {
        const std::string stem = cfg.output.name + "_seed" + std::to_string(trace.scenario.seed);
        write_trace_csv(dir / (stem + ".csv"), trace);
        write_json(dir / (stem + ".meta.json"), trace_metadata(cfg, trace, stem + ".csv"));
        written.push_back(dir / (stem + ".csv"));
        written.push_back(dir / (stem + ".meta.json"));
        names.push_back(stem + ".csv");
    }
    const std::string summary = cfg.output.name + "_summary.csv";
    const std::string aggregate = cfg.output.name + "_aggregate.csv";
    write_summary_csv(dir / summary, agg);
    write_aggregate_csv(dir / aggregate, agg);
    names.push_back(summary);
    names.push_back(aggregate);
    const std::string meta = cfg.output.name + "_sweep.meta.json";
    write_json(dir / meta, sweep_metadata(cfg, agg, names));
    written.push_back(dir / summary);
    written.push_back(dir / aggregate);
    written.push_back(dir / meta);
    return written;
}

}  // namespace vpmac
