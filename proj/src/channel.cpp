#include "vpmac/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace vpmac {
namespace {

bool is_probability(double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; }

void check_entries(const Profile& profile, const char* name) {
    for (std::size_t j = 0; j < profile.head().size(); ++j) {
        if (!is_probability(profile.head()[j]))
            throw std::invalid_argument(std::string(name) + "[" + std::to_string(j) +
                                        "] is not a probability");
    }
    if (!is_probability(profile.tail()))
        throw std::invalid_argument(std::string(name) + " tail is not a probability");
}

// C_j = sum_s P(s) * 1{j + 1 <= M_s}.  The same profile serves both packet
// kinds: the virtual packet counts as one extra transmission.
Profile threshold_profile(const ThresholdFadingChannel& ch) {
    std::uint32_t max_cap = 0;
    for (const auto& s : ch.states) max_cap = std::max(max_cap, s.capacity);
    std::vector<double> head(max_cap, 0.0);
    for (std::size_t j = 0; j < head.size(); ++j) {
        double c = 0.0;
        for (const auto& s : ch.states)
            if (j + 1 <= s.capacity) c += s.probability;
        head[j] = std::min(c, 1.0);
    }
    return Profile(std::move(head), 0.0);
}

}  // namespace

Profile::Profile(std::vector<double> head, double tail) : head_(std::move(head)), tail_(tail) {}

bool Profile::non_increasing() const {
    for (std::size_t j = 0; j + 1 < head_.size(); ++j)
        if (head_[j] < head_[j + 1]) return false;
    return head_.empty() || head_.back() >= tail_;
}

ChannelParams::ChannelParams(Profile real_profile, Profile virtual_profile)
    : real(std::move(real_profile)), virt(std::move(virtual_profile)) {
    check_entries(real, "c_real");
    check_entries(virt, "c_virtual");
    if (!virt.non_increasing()) throw std::invalid_argument("c_virtual must be non-increasing");
}

void validate(const ChannelModel& model) {
    if (const auto* fading = std::get_if<ThresholdFadingChannel>(&model)) {
        if (fading->states.empty()) throw std::invalid_argument("threshold fading channel has no states");
        double total = 0.0;
        for (const auto& s : fading->states) {
            if (!is_probability(s.probability))
                throw std::invalid_argument("fading state probability outside [0, 1]");
            total += s.probability;
        }
        if (std::abs(total - 1.0) > 1e-12)
            throw std::invalid_argument("fading state probabilities sum to " + std::to_string(total) +
                                        ", expected 1");
    } else if (const auto* param = std::get_if<ParametricChannel>(&model)) {
        // Re-run the ChannelParams checks; the aggregate may have been built field by field.
        ChannelParams copy(param->params.real, param->params.virt);
        (void)copy;
    }
}

ChannelParams derive_params(const ChannelModel& model) {
    validate(model);
    return std::visit(
        [](const auto& ch) -> ChannelParams {
            using T = std::decay_t<decltype(ch)>;
            if constexpr (std::is_same_v<T, CollisionChannel>) {
                Profile p({1.0}, 0.0);
                return {p, p};
            } else if constexpr (std::is_same_v<T, ThresholdFadingChannel>) {
                Profile p = threshold_profile(ch);
                return {p, p};
            } else {
                return ch.params;
            }
        },
        model);
}

std::size_t SlotOutcome::n_success() const {
    return static_cast<std::size_t>(std::count(real_success.begin(), real_success.end(), true));
}

std::optional<std::size_t> draw_state(const ChannelModel& model, Rng& rng) {
    const auto* fading = std::get_if<ThresholdFadingChannel>(&model);
    if (fading == nullptr) return std::nullopt;
    const double u = rng.uniform();
    double acc = 0.0;
    for (std::size_t s = 0; s < fading->states.size(); ++s) {
        acc += fading->states[s].probability;
        if (u < acc) return s;
    }
    // u landed in the rounding gap above the cumulative sum
    return fading->states.size() - 1;
}

SlotOutcome resolve_slot(const ChannelModel& model, std::optional<std::size_t> state,
                         const std::vector<bool>& transmit_flags, Rng& rng) {
    SlotOutcome out;
    out.n_transmitted = static_cast<std::size_t>(std::count(transmit_flags.begin(), transmit_flags.end(), true));
    out.channel_state = state;
    const std::size_t n = out.n_transmitted;

    std::visit(
        [&](const auto& ch) {
            using T = std::decay_t<decltype(ch)>;
            if constexpr (std::is_same_v<T, CollisionChannel>) {
                out.real_success.assign(n, n == 1);
                out.virtual_success = n == 0;
            } else if constexpr (std::is_same_v<T, ThresholdFadingChannel>) {
                if (!state || *state >= ch.states.size())
                    throw std::invalid_argument("threshold fading slot resolved without a valid state");
                const std::size_t cap = ch.states[*state].capacity;
                out.real_success.assign(n, n <= cap);
                out.virtual_success = n + 1 <= cap;
            } else {
                const ChannelParams& p = ch.params;
                out.real_success.resize(n);
                for (std::size_t i = 0; i < n; ++i) out.real_success[i] = rng.bernoulli(p.real[n - 1]);
                out.virtual_success = rng.bernoulli(p.virt[n]);
            }
        },
        model);
    return out;
}

SlotOutcome sample_slot(const ChannelModel& model, const std::vector<bool>& transmit_flags, Rng& rng) {
    const auto state = draw_state(model, rng);
    return resolve_slot(model, state, transmit_flags, rng);
}

}  // namespace vpmac
