#include "vpmac/mac.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vpmac {

std::string_view to_string(FeedbackMode mode) {
    switch (mode) {
        case FeedbackMode::ReceiverContention: return "receiver";
        case FeedbackMode::TwoStep: return "two_step";
        case FeedbackMode::OneStep: return "one_step";
    }
    return "unknown";
}

FeedbackMode feedback_mode_from_string(std::string_view name) {
    if (name == "receiver") return FeedbackMode::ReceiverContention;
    if (name == "two_step") return FeedbackMode::TwoStep;
    if (name == "one_step") return FeedbackMode::OneStep;
    throw std::invalid_argument("unknown feedback mode '" + std::string(name) +
                                "' (expected receiver, two_step or one_step)");
}

void validate(const StepSchedule& schedule) {
    if (const auto* c = std::get_if<ConstantStep>(&schedule)) {
        if (!(c->alpha > 0.0 && c->alpha < 1.0)) throw std::invalid_argument("constant step must lie in (0, 1)");
    } else {
        const auto& d = std::get<DiminishingStep>(schedule);
        if (!(d.a > 0.0)) throw std::invalid_argument("diminishing step needs a > 0");
        if (!(d.c >= 1.0)) throw std::invalid_argument("diminishing step needs c >= 1");
        if (d.a > d.c) throw std::invalid_argument("diminishing step needs a <= c so that alpha(0) <= 1");
    }
}

double step_size(const StepSchedule& schedule, std::uint64_t t) {
    if (const auto* c = std::get_if<ConstantStep>(&schedule)) return c->alpha;
    const auto& d = std::get<DiminishingStep>(schedule);
    return d.a / (static_cast<double>(t) + d.c);
}

ControllerState apply_update(ControllerState state, double p_hat) {
    const double alpha = step_size(state.schedule, state.t);
    state.p = std::clamp((1.0 - alpha) * state.p + alpha * p_hat, 0.0, 1.0);
    ++state.t;
    return state;
}

double target_receiver(double q_v_estimate, const MacDesign& design) {
    return invert_q_v_star(q_v_estimate, design);
}

double target_two_step(double p_k, double q_k_estimate, const MacDesign& design) {
    const double p_breve = invert_q_star(q_k_estimate, design);
    const double q_v = (1.0 - p_k) * q_k_estimate + p_k * d_star(p_breve, design);
    return invert_q_v_star(q_v, design);
}

double target_one_step(double q_k_estimate, const MacDesign& design) {
    return invert_q_star(q_k_estimate, design);
}

}  // namespace vpmac
