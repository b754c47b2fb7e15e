#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <variant>
#include <vector>

#include "vpmac/rng.hpp"

namespace vpmac {

/// A success-probability sequence indexed by j >= 0.  Entries past the stored
/// vector all equal `tail`.
class Profile {
public:
    Profile() = default;
    Profile(std::vector<double> head, double tail);

    double operator[](std::size_t j) const { return j < head_.size() ? head_[j] : tail_; }

    const std::vector<double>& head() const { return head_; }
    double tail() const { return tail_; }
    /// First index from which every entry equals the tail.
    std::size_t support() const { return head_.size(); }

    bool non_increasing() const;

    friend bool operator==(const Profile&, const Profile&) = default;

private:
    std::vector<double> head_;
    double tail_ = 0.0;
};

/// {C_rj} and {C_vj}.  Construction enforces entries in [0, 1] and a
/// non-increasing virtual profile.
struct ChannelParams {
    Profile real;
    Profile virt;

    ChannelParams() = default;
    ChannelParams(Profile real_profile, Profile virtual_profile);

    friend bool operator==(const ChannelParams&, const ChannelParams&) = default;
};

struct CollisionChannel {
    friend bool operator==(const CollisionChannel&, const CollisionChannel&) = default;
};

struct FadingState {
    double probability = 0.0;
    std::uint32_t capacity = 0;
    friend bool operator==(const FadingState&, const FadingState&) = default;
};

/// Each slot the channel draws one state; in state s at most M_s parallel
/// packets get through.
struct ThresholdFadingChannel {
    std::vector<FadingState> states;
    friend bool operator==(const ThresholdFadingChannel&, const ThresholdFadingChannel&) = default;
};

struct ParametricChannel {
    ChannelParams params;
    friend bool operator==(const ParametricChannel&, const ParametricChannel&) = default;
};

using ChannelModel = std::variant<CollisionChannel, ThresholdFadingChannel, ParametricChannel>;

/// Throws std::invalid_argument when a model violates its invariants.
void validate(const ChannelModel& model);

ChannelParams derive_params(const ChannelModel& model);

struct SlotOutcome {
    std::size_t n_transmitted = 0;
    /// One flag per transmitter, in user-index order.
    std::vector<bool> real_success;
    bool virtual_success = false;
    std::optional<std::size_t> channel_state;

    std::size_t n_success() const;
};

/// Channel-state draw for one slot.  Only ThresholdFading consumes randomness.
std::optional<std::size_t> draw_state(const ChannelModel& model, Rng& rng);

/// Resolves outcomes for a slot whose state was already drawn.  Parametric
/// channels draw one uniform per transmitter (in order) and then one for the
/// virtual packet.
SlotOutcome resolve_slot(const ChannelModel& model, std::optional<std::size_t> state,
                         const std::vector<bool>& transmit_flags, Rng& rng);

/// draw_state followed by resolve_slot.
SlotOutcome sample_slot(const ChannelModel& model, const std::vector<bool>& transmit_flags, Rng& rng);

}  // namespace vpmac
