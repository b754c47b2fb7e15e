// Command-line front end: design constants, equilibrium tables, simulations
// and multi-seed sweeps.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "vpmac/config.hpp"
#include "vpmac/report.hpp"

namespace {

struct CommonOptions {
    std::string config;
    std::string preset;
    std::string out;
    std::optional<std::size_t> seeds;
    std::optional<std::uint64_t> stride;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    auto* cfg = cmd->add_option("--config", opts.config, "Scenario or table config file (JSON)");
    auto* pre = cmd->add_option("--preset", opts.preset, "Built-in job: ex1, ex2, ex3, ex4, ex5");
    cfg->excludes(pre);
    cmd->add_option("--out", opts.out, "Output directory (overrides the config)");
    cmd->add_option("--seeds", opts.seeds, "Number of seeds for sweep")->check(CLI::PositiveNumber);
    cmd->add_option("--stride", opts.stride, "Record every k-th slot")->check(CLI::PositiveNumber);
}

vpmac::Job load(const CommonOptions& opts) {
    if (opts.config.empty() && opts.preset.empty()) throw vpmac::ConfigError("one of --config or --preset is required");
    vpmac::Job job = opts.config.empty() ? vpmac::preset(opts.preset) : vpmac::load_job(opts.config);
    std::visit(
        [&](auto& j) {
            if (!opts.out.empty()) j.output.dir = opts.out;
        },
        job);
    if (auto* run = std::get_if<vpmac::RunConfig>(&job)) {
        if (opts.seeds) run->seeds = *opts.seeds;
        if (opts.stride) run->scenario.stride = *opts.stride;
        vpmac::validate(run->scenario);
    }
    return job;
}

vpmac::RunConfig require_run(vpmac::Job job, const char* verb) {
    auto* run = std::get_if<vpmac::RunConfig>(&job);
    if (run == nullptr) throw vpmac::ConfigError(std::string(verb) + " needs a simulation job; this is a table job (use `table`)");
    return *run;
}

void print_design(const vpmac::MacDesign& d) {
    std::cout << "x_star          " << vpmac::format_number(d.x_star) << '\n'
              << "epsilon_v       " << vpmac::format_number(d.epsilon_v) << '\n'
              << "J_ev            " << d.j_ev << '\n'
              << "gamma_ev        " << vpmac::format_number(d.gamma_ev) << '\n'
              << "b               " << vpmac::format_number(d.b) << '\n'
              << "p_max           " << vpmac::format_number(d.p_max) << '\n'
              << "q_star_monotone " << (d.q_star_monotone ? "yes" : "no") << '\n';
    for (const auto& w : d.warnings) std::cout << "warning: " << w << '\n';
}

void report(const std::vector<std::filesystem::path>& files) {
    for (const auto& f : files) std::cout << "wrote " << f.string() << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Virtual-packet contention MAC: design, tables and slotted simulation"};
    app.require_subcommand(1);

    CommonOptions design_opts, table_opts, run_opts, sweep_opts;
    auto* design = app.add_subcommand("design", "Print design constants for a channel and utility");
    add_common(design, design_opts);
    auto* table = app.add_subcommand("table", "Write the equilibrium/baseline table");
    add_common(table, table_opts);
    auto* run = app.add_subcommand("run", "Simulate one seed and write its trace");
    add_common(run, run_opts);
    auto* sweep = app.add_subcommand("sweep", "Simulate consecutive seeds and write traces plus a summary");
    add_common(sweep, sweep_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (design->parsed()) {
            const vpmac::Job job = load(design_opts);
            if (const auto* t = std::get_if<vpmac::TableJob>(&job)) {
                print_design(vpmac::compute_table(*t).design);
            } else {
                print_design(vpmac::resolve_design(std::get<vpmac::RunConfig>(job).scenario));
            }
        } else if (table->parsed()) {
            const vpmac::Job job = load(table_opts);
            const auto* t = std::get_if<vpmac::TableJob>(&job);
            if (t == nullptr) throw vpmac::ConfigError("table needs a table job (ex1, ex2 or a vpmac.table/1 config)");
            report(vpmac::emit_table(*t));
        } else if (run->parsed()) {
            report(vpmac::emit_run(require_run(load(run_opts), "run")));
        } else if (sweep->parsed()) {
            const vpmac::RunConfig cfg = require_run(load(sweep_opts), "sweep");
            report(vpmac::emit_sweep(cfg));
        }
    } catch (const vpmac::ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const vpmac::OutputError& e) {
        std::cerr << "output error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return EXIT_SUCCESS;
}
