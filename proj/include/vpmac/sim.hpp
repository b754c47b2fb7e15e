#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "vpmac/channel.hpp"
#include "vpmac/mac.hpp"
#include "vpmac/theory.hpp"

namespace vpmac {

/// Average the indicators over Q slots, then emit and update.
struct WindowEstimator {
    std::uint32_t slots = 100;
    friend bool operator==(const WindowEstimator&, const WindowEstimator&) = default;
};

/// Per-slot exponential moving average; targets update every slot.
struct EmaEstimator {
    double weight = 1.0 / 300.0;
    friend bool operator==(const EmaEstimator&, const EmaEstimator&) = default;
};

struct EstimatorConfig {
    std::variant<WindowEstimator, EmaEstimator> kind = EmaEstimator{};
    double initial_value = 1.0;
    friend bool operator==(const EstimatorConfig&, const EstimatorConfig&) = default;
};

enum class PopulationChange { Join, Leave };

/// Takes effect at the start of `slot` (slots are numbered from 1).
struct PopulationEvent {
    std::uint64_t slot = 1;
    PopulationChange change = PopulationChange::Join;
    std::size_t count = 0;
    friend bool operator==(const PopulationEvent&, const PopulationEvent&) = default;
};

/// Inputs to build_design, or an explicit (x*, b) pair that bypasses the search.
struct DesignInputs {
    UtilitySpec utility;
    double epsilon_v = 0.01;
    double b_margin = 0.01;
    std::optional<double> x_star;
    std::optional<double> b;
    friend bool operator==(const DesignInputs&, const DesignInputs&) = default;
};

struct Scenario {
    ChannelModel channel = CollisionChannel{};
    DesignInputs design;
    FeedbackMode mode = FeedbackMode::ReceiverContention;
    StepSchedule schedule = ConstantStep{0.05};
    EstimatorConfig estimator;
    double utility_ema_weight = 1.0 / 300.0;
    std::uint64_t horizon = 0;
    std::size_t initial_users = 1;
    double initial_p = 0.0;
    std::uint64_t seed = 1;
    std::vector<PopulationEvent> events;
    /// Every stride-th slot is recorded, starting with slot 1.
    std::uint64_t stride = 1;
    /// Number of trailing slots averaged in the final and per-stage summaries.
    std::uint64_t summary_window = 500;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Throws std::invalid_argument with an actionable message.
void validate(const Scenario& scenario);

/// build_design from the inputs, or make_design when x* and b are both given.
MacDesign resolve_design(const Scenario& scenario);

struct SlotRecord {
    std::uint64_t slot = 0;
    std::size_t n_active = 0;
    /// Transmission probabilities after this slot's update.
    double mean_p = 0.0;
    double min_p = 0.0;
    double max_p = 0.0;
    double q_v = 0.0;
    double mean_q_k = 0.0;
    bool virtual_success = false;
    std::size_t n_transmitted = 0;
    std::size_t n_success = 0;
    double utility_sample = 0.0;
    double utility_ema = 0.0;
};

/// One interval between population events.
struct StageSummary {
    std::uint64_t first_slot = 0;
    std::uint64_t last_slot = 0;
    std::size_t users = 0;
    double p_star = 0.0;
    double p_opt = 0.0;
    double u_star = 0.0;
    double u_opt = 0.0;
    /// Mean over users and over the last summary_window slots of the stage.
    double tail_mean_p = 0.0;
    double final_utility_ema = 0.0;
};

struct TraceSummary {
    double final_mean_p = 0.0;
    double final_utility_ema = 0.0;
    std::size_t final_users = 0;
    double p_star = 0.0;
    double p_opt = 0.0;
    double u_star = 0.0;
    double u_opt = 0.0;
    /// final_utility_ema / u_opt
    double utility_ratio = 0.0;
    /// u_star / u_opt
    double equilibrium_ratio = 0.0;
    std::vector<StageSummary> stages;
};

struct SimTrace {
    Scenario scenario;
    MacDesign design;
    std::vector<SlotRecord> records;
    TraceSummary summary;
};

SimTrace run(const Scenario& scenario);

struct SeriesStats {
    std::vector<double> mean;
    std::vector<double> stddev;
};

struct ScalarStats {
    double mean = 0.0;
    double stddev = 0.0;
    double min = 0.0;
    double max = 0.0;
};

struct AggregateTrace {
    std::size_t n_seeds = 0;
    std::vector<std::uint64_t> slots;
    SeriesStats mean_p;
    SeriesStats utility_ema;
    SeriesStats q_v;
    ScalarStats final_mean_p;
    ScalarStats final_utility_ema;
    ScalarStats utility_ratio;
    /// Seeds seed .. seed + n_seeds - 1, in order.
    std::vector<SimTrace> runs;
};

/// Independent runs over consecutive seeds, executed concurrently.
AggregateTrace run_many(const Scenario& scenario, std::size_t n_seeds);

/// Holds every user at p and averages the virtual-packet indicator.
double measure_stationary_qv(double p, std::size_t users, const ChannelModel& channel, std::uint64_t n_slots,
                             std::uint64_t seed);

}  // namespace vpmac
