#pragma once

#include <cstddef>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "vpmac/sim.hpp"

namespace vpmac {

inline constexpr const char* kScenarioSchema = "vpmac.scenario/1";
inline constexpr const char* kTableSchema = "vpmac.table/1";
inline constexpr const char* kMetadataSchema = "vpmac.run-metadata/1";

struct OutputSpec {
    std::string dir = "out";
    std::string name = "run";
    friend bool operator==(const OutputSpec&, const OutputSpec&) = default;
};

/// A simulation job: one scenario, run under `seeds` consecutive seeds.
struct RunConfig {
    Scenario scenario;
    std::size_t seeds = 1;
    OutputSpec output;
    friend bool operator==(const RunConfig&, const RunConfig&) = default;
};

enum class Baseline { Hajek, IdleTarget };

/// An analytic equilibrium/baseline table over a range of user counts.
struct TableJob {
    ChannelModel channel = CollisionChannel{};
    DesignInputs design;
    Baseline baseline = Baseline::Hajek;
    std::size_t k_min = 1;
    std::size_t k_max = 30;
    OutputSpec output;
    friend bool operator==(const TableJob&, const TableJob&) = default;
};

using Job = std::variant<RunConfig, TableJob>;

/// Thrown for malformed or invalid configuration; the message names the key.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

nlohmann::json to_json(const ChannelModel& channel);
ChannelModel channel_from_json(const nlohmann::json& j);

nlohmann::json to_json(const RunConfig& cfg);
nlohmann::json to_json(const TableJob& job);
nlohmann::json to_json(const Job& job);

/// Dispatches on the "schema" key.  Unknown keys are rejected and scenario
/// invariants are validated before returning.
Job job_from_json(const nlohmann::json& j);
Job load_job(const std::filesystem::path& path);

/// Named reproductions: ex1/ex2 are tables, ex3..ex5 are simulations.
Job preset(std::string_view name);
std::vector<std::string> preset_names();

}  // namespace vpmac
