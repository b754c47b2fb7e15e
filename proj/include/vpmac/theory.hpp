#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "vpmac/channel.hpp"

namespace vpmac {

/// Raised when design constants cannot be derived or violate their constraints.
class DesignError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class UtilityKind { SumThroughput, EnergyWeightedThroughput };

struct UtilitySpec {
    UtilityKind kind = UtilityKind::SumThroughput;
    /// Per-transmission energy cost E; ignored for SumThroughput.
    double energy_cost = 0.0;

    double effective_energy() const { return kind == UtilityKind::SumThroughput ? 0.0 : energy_cost; }

    friend bool operator==(const UtilitySpec&, const UtilitySpec&) = default;
};

/// Largest estimated user count used inside contention-curve evaluation.
inline constexpr double kMaxEstimatedUsers = 1e6;

/// Design constants shared by every user and the receiver.
struct MacDesign {
    double x_star = 0.0;
    double epsilon_v = 0.0;
    std::size_t j_ev = 0;
    double gamma_ev = 0.0;
    double b = 1.0;
    double p_max = 1.0;
    ChannelParams params;
    UtilitySpec utility;
    /// Result of the grid check on q_star run when the design is built.
    bool q_star_monotone = true;
    std::vector<std::string> warnings;

    /// Designed equilibrium min{p_max, x*/(K+b)}.
    double equilibrium_p(std::size_t users) const;
};

// ---------------------------------------------------------------------------
// Utilities

/// U(K, p) = -E K p + K sum_j C(K-1, j) p^{j+1} (1-p)^{K-1-j} C_rj.
double utility_finite(std::size_t users, double p, const ChannelParams& params, const UtilitySpec& spec);

/// Poisson limit of utility_finite(K, x/K) as K grows.
double utility_asymptotic(double x, const ChannelParams& params, const UtilitySpec& spec);

struct XStarResult {
    double x_star = 0.0;
    double utility = 0.0;
    /// The utility was still increasing at the search bound; x_star is not a maximizer.
    bool at_search_bound = false;
    /// Another grid point more than 0.1 away ties the maximum within 1e-9.
    bool non_unique = false;
};

XStarResult compute_x_star(const ChannelParams& params, const UtilitySpec& spec, double x_hi = 50.0);

/// argmax_{0<=p<=1} utility_finite(K, p).
double optimal_p(std::size_t users, const ChannelParams& params, const UtilitySpec& spec);

// ---------------------------------------------------------------------------
// Design constants

/// Smallest j with C_vj > C_v(j+1) + eps.  Throws DesignError for a flat profile.
std::size_t compute_j_ev(const ChannelParams& params, double epsilon_v);

/// Minimum over admissible N of the weighted mean index of the virtual-profile
/// drops under Binomial(N, p_{N+1}) weights.  When n_max is not given it
/// defaults to 10 (J + x* + b) and is doubled until the running minimum
/// settles; if it never settles the Poisson-limit ratio is folded in.
double compute_gamma_ev(const ChannelParams& params, double x_star, double b, double epsilon_v,
                        std::optional<std::size_t> n_max = std::nullopt);

/// Derives x*, J, gamma and b (via the b <- max{1, x* - gamma(b)} + margin
/// fixed point) and p_max.
MacDesign build_design(const ChannelParams& params, const UtilitySpec& spec, double epsilon_v,
                       double b_margin);

/// Completes a design from an explicitly chosen x* and b.  Throws DesignError
/// unless b > max{1, x* - gamma}.
MacDesign make_design(const ChannelParams& params, const UtilitySpec& spec, double epsilon_v,
                      double x_star, double b);

// ---------------------------------------------------------------------------
// Contention measures

/// Virtual-packet success probability when K users all transmit with p.
double q_v_identical(double p, std::size_t users, const ChannelParams& params);

/// d/dp of q_v_identical, in closed form.
double q_v_identical_derivative(double p, std::size_t users, const ChannelParams& params);

/// Contention value the receiver should observe at the designed equilibrium
/// if the user count implied by p_hat were right.  Non-decreasing in p_hat.
double q_v_star(double p_hat, const MacDesign& design);

/// Conditional virtual-packet success given a tagged user idles (q_star) or
/// transmits (d_star), at the user count implied by p_breve.  The implied
/// count is held at one or more since it includes the tagged user.
double q_star(double p_breve, const MacDesign& design);
double d_star(double p_breve, const MacDesign& design);

/// Solve q_v_star(p) = q on [0, p_max].  Clamps to p_max above the range and
/// to 0 below it; returns the infimum of the solution set on flat segments.
double invert_q_v_star(double q_v, const MacDesign& design);

/// Same contract for q_star.  Falls back to a first-crossing grid search when
/// the design flagged q_star as non-monotone.
double invert_q_star(double q_k, const MacDesign& design);

// ---------------------------------------------------------------------------
// Baselines

/// Root of e (1-p)^K - 1 - 0.5 sqrt(p) = 0 on (0, 1).
double hajek_pa(std::size_t users);

/// 1 - exp(-x*/K): holds the idle probability at exp(-x*).
double idle_target_p(std::size_t users, double x_star);

}  // namespace vpmac
