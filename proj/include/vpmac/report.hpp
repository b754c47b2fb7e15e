#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpmac/config.hpp"
#include "vpmac/sim.hpp"

namespace vpmac {

struct EquilibriumRow {
    std::size_t users = 0;
    double p_opt = 0.0;
    double p_star = 0.0;
    double p_baseline = 0.0;
    double u_opt = 0.0;
    double u_star = 0.0;
    double u_baseline = 0.0;
};

struct EquilibriumTable {
    MacDesign design;
    Baseline baseline = Baseline::Hajek;
    std::vector<EquilibriumRow> rows;
};

EquilibriumTable compute_table(const TableJob& job);

/// Raised when an output file cannot be written; the message carries the path.
class OutputError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline const std::vector<std::string> kTableColumns = {"K", "p_opt", "p_star", "p_baseline", "U_opt", "U_star", "U_baseline"};
inline const std::vector<std::string> kTraceColumns = {"slot",  "n_active",      "mean_p", "min_p",
                                                       "max_p", "q_v",           "mean_q_k", "I_v",
                                                       "n_transmitted", "n_success", "utility_sample", "utility_ema"};
inline const std::vector<std::string> kSummaryColumns = {"metric", "n_seeds", "mean", "std", "min", "max"};
inline const std::vector<std::string> kAggregateColumns = {"slot",          "mean_p_mean", "mean_p_std",
                                                           "utility_ema_mean", "utility_ema_std", "q_v_mean",
                                                           "q_v_std"};

/// Floating-point values are printed with 9 significant digits.
std::string format_number(double v);

void write_table_csv(const std::filesystem::path& path, const EquilibriumTable& table);
void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace);
void write_summary_csv(const std::filesystem::path& path, const AggregateTrace& agg);
void write_aggregate_csv(const std::filesystem::path& path, const AggregateTrace& agg);

nlohmann::json design_json(const MacDesign& design);
nlohmann::json table_metadata(const TableJob& job, const EquilibriumTable& table, const std::string& csv_name);
nlohmann::json trace_metadata(const RunConfig& cfg, const SimTrace& trace, const std::string& csv_name);
nlohmann::json sweep_metadata(const RunConfig& cfg, const AggregateTrace& agg, const std::vector<std::string>& files);

void write_json(const std::filesystem::path& path, const nlohmann::json& j);

/// Write outputs for a job into cfg.output.dir and return the files written.
std::vector<std::filesystem::path> emit_table(const TableJob& job);
std::vector<std::filesystem::path> emit_run(const RunConfig& cfg);
std::vector<std::filesystem::path> emit_sweep(const RunConfig& cfg);

}  // namespace vpmac
