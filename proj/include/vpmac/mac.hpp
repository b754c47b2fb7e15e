#pragma once

#include <cstdint>
#include <string_view>
#include <variant>

#include "vpmac/theory.hpp"

namespace vpmac {

/// What feedback a user acts on.
enum class FeedbackMode {
    ReceiverContention,  ///< receiver broadcasts its q_v estimate
    TwoStep,             ///< own q_k only; interpret q_v, then invert q_v_star
    OneStep,             ///< own q_k only; use the intermediate estimate directly
};

std::string_view to_string(FeedbackMode mode);
FeedbackMode feedback_mode_from_string(std::string_view name);

struct ConstantStep {
    double alpha = 0.05;
    friend bool operator==(const ConstantStep&, const ConstantStep&) = default;
};

/// alpha(t) = a / (t + c).  Requires a <= c so that alpha(0) <= 1.
struct DiminishingStep {
    double a = 1.0;
    double c = 1.0;
    friend bool operator==(const DiminishingStep&, const DiminishingStep&) = default;
};

using StepSchedule = std::variant<ConstantStep, DiminishingStep>;

void validate(const StepSchedule& schedule);
double step_size(const StepSchedule& schedule, std::uint64_t t);

struct ControllerState {
    double p = 0.0;
    StepSchedule schedule = ConstantStep{};
    /// Number of updates applied so far.
    std::uint64_t t = 0;
};

/// p <- (1 - alpha(t)) p + alpha(t) p_hat, then t <- t + 1.
ControllerState apply_update(ControllerState state, double p_hat);

double target_receiver(double q_v_estimate, const MacDesign& design);
double target_two_step(double p_k, double q_k_estimate, const MacDesign& design);
double target_one_step(double q_k_estimate, const MacDesign& design);

}  // namespace vpmac
