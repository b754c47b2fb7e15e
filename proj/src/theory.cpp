#include "vpmac/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "vpmac/numeric.hpp"

namespace vpmac {
namespace {

using numeric::binomial_mix;
using numeric::poisson_mix;

double clamp_probability(double p) { return std::clamp(p, 0.0, 1.0); }

// Weighted mean of the drop indices j (weights C(N, j) r^j (C_vj - C_v(j+1)))
// where r = p/(1-p).  Weights are normalised in log space.
std::optional<double> binomial_drop_ratio(std::size_t n, double p, const Profile& virt) {
    const std::size_t last = std::min(n, virt.support() == 0 ? 0 : virt.support() - 1);
    const double log_r = std::log(p) - std::log1p(-p);
    const double nd = static_cast<double>(n);
    std::vector<double> log_w(last + 1);
    double lw = 0.0;
    for (std::size_t j = 0; j <= last; ++j) {
        log_w[j] = lw;
        const double jd = static_cast<double>(j);
        lw += std::log((nd - jd) / (jd + 1.0)) + log_r;
    }
    double top = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j <= last; ++j)
        if (virt[j] - virt[j + 1] > 0.0) top = std::max(top, log_w[j]);
    if (!std::isfinite(top)) return std::nullopt;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j <= last; ++j) {
        const double drop = virt[j] - virt[j + 1];
        if (drop <= 0.0) continue;
        const double w = std::exp(log_w[j] - top) * drop;
        num += static_cast<double>(j) * w;
        den += w;
    }
    return num / den;
}

// Same ratio under Poisson(mean) weights: the large-N limit.
std::optional<double> poisson_drop_ratio(double mean, const Profile& virt) {
    const std::size_t last = virt.support() == 0 ? 0 : virt.support() - 1;
    const double log_mean = std::log(mean);
    double lw = 0.0;
    double top = -std::numeric_limits<double>::infinity();
    std::vector<double> log_w(last + 1);
    for (std::size_t j = 0; j <= last; ++j) {
        log_w[j] = lw;
        if (virt[j] - virt[j + 1] > 0.0) top = std::max(top, lw);
        lw += log_mean - std::log(static_cast<double>(j + 1));
    }
    if (!std::isfinite(top)) return std::nullopt;
    double num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j <= last; ++j) {
        const double drop = virt[j] - virt[j + 1];
        if (drop <= 0.0) continue;
        const double w = std::exp(log_w[j] - top) * drop;
        num += static_cast<double>(j) * w;
        den += w;
    }
    return num / den;
}

// Interpolation between the N- and (N+1)-user curves at a real-valued user
// estimate K = x*/p - b.  `weight` multiplies the N-user term.
struct Blend {
    std::size_t n = 0;
    double weight = 1.0;
    /// Evaluation point; moved up to x*/(K_max + b) when the estimate is clamped.
    double p = 0.0;
};

Blend contention_blend(double p, const MacDesign& d, double min_users) {
    double lo = std::max(d.x_star / d.p_max - d.b, min_users);
    // x*/p_max - b is J (an integer) whenever p_max < 1; undo the rounding.
    if (std::abs(lo - std::round(lo)) < 1e-9) lo = std::round(lo);
    const double k = std::clamp(d.x_star / p - d.b, lo, kMaxEstimatedUsers);
    if (k == kMaxEstimatedUsers) p = d.x_star / (kMaxEstimatedUsers + d.b);
    const auto n = static_cast<std::size_t>(std::floor(k));
    const double nd = static_cast<double>(n);
    const double p_n = std::min(d.p_max, d.x_star / (nd + d.b));
    const double p_n1 = std::min(d.p_max, d.x_star / (nd + 1.0 + d.b));
    if (p_n - p_n1 <= 1e-15) return {static_cast<std::size_t>(std::ceil(lo)), 1.0, p};
    return {n, std::clamp((p - p_n1) / (p_n - p_n1), 0.0, 1.0), p};
}

double invert_curve(const std::function<double(double)>& f, double target, double p_max, bool monotone) {
    constexpr double kTol = 1e-12;
    const double f_lo = f(0.0);
    const double f_hi = f(p_max);
    if (monotone) {
        if (target > f_hi) return p_max;
        if (target <= f_lo) return 0.0;
        return numeric::bisect_first_at_least(f, target, 0.0, p_max, kTol);
    }
    // Non-monotone curve: take the smallest crossing found on a grid.
    constexpr std::size_t kGrid = 1024;
    if (f_lo >= target) return 0.0;
    double prev = 0.0;
    for (std::size_t i = 1; i <= kGrid; ++i) {
        const double g = p_max * static_cast<double>(i) / static_cast<double>(kGrid);
        if (f(g) >= target) return numeric::bisect_first_at_least(f, target, prev, g, kTol);
        prev = g;
    }
    return p_max;
}

bool nondecreasing_on_grid(const std::function<double(double)>& f, double hi, std::size_t points) {
    double prev = f(0.0);
    for (std::size_t i = 1; i < points; ++i) {
        const double v = f(hi * static_cast<double>(i) / static_cast<double>(points - 1));
        if (v < prev - 1e-12) return false;
        prev = v;
    }
    return true;
}

}  // namespace

double MacDesign::equilibrium_p(std::size_t users) const {
    return std::min(p_max, x_star / (static_cast<double>(users) + b));
}

double utility_finite(std::size_t users, double p, const ChannelParams& params, const UtilitySpec& spec) {
    if (users == 0) return 0.0;
    p = clamp_probability(p);
    const double k = static_cast<double>(users);
    return -spec.effective_energy() * k * p + k * p * binomial_mix(users - 1, p, params.real);
}

double utility_asymptotic(double x, const ChannelParams& params, const UtilitySpec& spec) {
    if (x <= 0.0) return 0.0;
    return -spec.effective_energy() * x + x * poisson_mix(x, params.real);
}

XStarResult compute_x_star(const ChannelParams& params, const UtilitySpec& spec, double x_hi) {
    constexpr double kStep = 0.01;
    if (!(x_hi > kStep)) throw std::invalid_argument("x_hi must exceed the grid step");
    const auto points = static_cast<std::size_t>(std::ceil(x_hi / kStep)) + 1;
    std::vector<double> values(points);
    std::size_t best = 0;
    for (std::size_t i = 0; i < points; ++i) {
        values[i] = utility_asymptotic(static_cast<double>(i) * kStep, params, spec);
        if (values[i] > values[best]) best = i;
    }

    XStarResult out;
    out.at_search_bound = best == points - 1 || values[points - 1] > values[points - 2];
    for (std::size_t i = 0; i < points; ++i) {
        const double gap = std::abs(static_cast<double>(i) - static_cast<double>(best)) * kStep;
        if (gap > 0.1 && values[best] - values[i] < 1e-9) out.non_unique = true;
    }

    const auto f = [&](double x) { return utility_asymptotic(x, params, spec); };
    const double lo = static_cast<double>(best == 0 ? 0 : best - 1) * kStep;
    const double hi = static_cast<double>(std::min(best + 1, points - 1)) * kStep;
    double x = numeric::golden_max(f, lo, hi, 1e-9);
    if (f(x) < values[best]) x = static_cast<double>(best) * kStep;
    out.x_star = x;
    out.utility = f(x);
    return out;
}

double optimal_p(std::size_t users, const ChannelParams& params, const UtilitySpec& spec) {
    constexpr std::size_t kPoints = 1001;
    const auto f = [&](double p) { return utility_finite(users, p, params, spec); };
    std::size_t best = 0;
    double best_val = f(0.0);
    for (std::size_t i = 1; i < kPoints; ++i) {
        const double v = f(static_cast<double>(i) * 1e-3);
        if (v > best_val) {
            best_val = v;
            best = i;
        }
    }
    const double lo = static_cast<double>(best == 0 ? 0 : best - 1) * 1e-3;
    const double hi = static_cast<double>(std::min(best + 1, kPoints - 1)) * 1e-3;
    const double p = numeric::golden_max(f, lo, hi, 1e-9);
    return f(p) >= best_val ? p : static_cast<double>(best) * 1e-3;
}

std::size_t compute_j_ev(const ChannelParams& params, double epsilon_v) {
    if (!(epsilon_v >= 0.0)) throw DesignError("epsilon_v must be non-negative");
    const Profile& v = params.virt;
    // Beyond the support every drop is zero.
    for (std::size_t j = 0; j < v.support(); ++j)
        if (v[j] > v[j + 1] + epsilon_v) return j;
    throw DesignError("virtual profile has no drop larger than epsilon_v; it cannot measure contention");
}

double compute_gamma_ev(const ChannelParams& params, double x_star, double b, double epsilon_v,
                        std::optional<std::size_t> n_max) {
    if (!(x_star > 0.0)) throw DesignError("x* must be positive");
    if (!(b >= 1.0)) throw DesignError("b must be at least 1");
    const std::size_t j_ev = compute_j_ev(params, epsilon_v);
    const double p_max = std::min(1.0, x_star / (static_cast<double>(j_ev) + b));
    // The lowest contention-curve segment starts at N = floor(x*/p_max - b),
    // which is below x* - b when p_max is capped at 1.  Include it.
    const auto n_first = std::max<std::size_t>(
        j_ev, static_cast<std::size_t>(std::max(0.0, std::floor(x_star - b + 1e-12))));

    std::size_t limit = n_max.value_or(static_cast<std::size_t>(
        std::ceil(10.0 * (static_cast<double>(j_ev) + x_star + b))));
    if (limit < n_first)
        throw DesignError("n_max " + std::to_string(limit) + " is below the first admissible N " +
                          std::to_string(n_first));

    const auto ratio_at = [&](std::size_t n) {
        const double p_next = std::min(p_max, x_star / (static_cast<double>(n) + 1.0 + b));
        const auto r = binomial_drop_ratio(n, p_next, params.virt);
        if (!r) throw DesignError("gamma_ev undefined: no virtual-profile drop within N = " + std::to_string(n));
        return *r;
    };

    double running = std::numeric_limits<double>::infinity();
    std::size_t next = n_first;
    const int max_doublings = n_max ? 0 : 4;
    for (int round = 0;; ++round) {
        const std::size_t mid = n_first + (limit - n_first) / 2;
        double first_half = running;
        double second_half = std::numeric_limits<double>::infinity();
        for (; next <= limit; ++next) {
            const double r = ratio_at(next);
            if (next <= mid)
                first_half = std::min(first_half, r);
            else
                second_half = std::min(second_half, r);
        }
        running = std::min(first_half, second_half);
        if (second_half >= first_half - 1e-12) return running;
        if (round >= max_doublings) break;
        limit *= 2;
    }
    // Still decreasing at the end of the range: the infimum may be the limit.
    if (const auto lim = poisson_drop_ratio(x_star, params.virt)) running = std::min(running, *lim);
    return running;
}

MacDesign make_design(const ChannelParams& params, const UtilitySpec& spec, double epsilon_v,
                      double x_star, double b) {
    if (!(x_star > 0.0) || !std::isfinite(x_star)) throw DesignError("x* must be positive and finite");
    MacDesign d;
    d.params = params;
    d.utility = spec;
    d.epsilon_v = epsilon_v;
    d.x_star = x_star;
    d.b = b;
    d.j_ev = compute_j_ev(params, epsilon_v);
    d.gamma_ev = compute_gamma_ev(params, x_star, b, epsilon_v);
    const double bound = std::max(1.0, x_star - d.gamma_ev);
    if (!(b > bound)) {
        std::ostringstream msg;
        msg << "b = " << b << " must exceed max{1, x* - gamma_ev} = " << bound;
        throw DesignError(msg.str());
    }
    d.p_max = std::min(1.0, x_star / (static_cast<double>(d.j_ev) + b));
    d.q_star_monotone = nondecreasing_on_grid([&](double p) { return q_star(p, d); }, d.p_max, 1024);
    if (!d.q_star_monotone)
        d.warnings.emplace_back("q_star is not monotone on [0, p_max]; one-step and two-step targets use a "
                                "first-crossing grid search");
    return d;
}

MacDesign build_design(const ChannelParams& params, const UtilitySpec& spec, double epsilon_v,
                       double b_margin) {
    if (!(b_margin > 0.0)) throw DesignError("b_margin must be strictly positive (b > max{1, x* - gamma_ev})");
    const XStarResult xs = compute_x_star(params, spec);
    if (xs.at_search_bound)
        throw DesignError("asymptotic utility is still increasing at the search bound; x* is degenerate");
    const double x_star = xs.x_star;
    (void)compute_j_ev(params, epsilon_v);

    double b = 1.0 + b_margin;
    bool settled = false;
    for (int round = 0; round < 100; ++round) {
        const double gamma = compute_gamma_ev(params, x_star, b, epsilon_v);
        const double next = std::max(1.0, x_star - gamma) + b_margin;
        const bool done = std::abs(next - b) < 1e-9;
        b = next;
        if (done) {
            settled = true;
            break;
        }
    }
    if (!settled) throw DesignError("b did not settle within 100 fixed-point rounds");

    MacDesign d = make_design(params, spec, epsilon_v, x_star, b);
    if (xs.non_unique) d.warnings.emplace_back("asymptotic utility has more than one global maximizer");
    return d;
}

double q_v_identical(double p, std::size_t users, const ChannelParams& params) {
    return binomial_mix(users, clamp_probability(p), params.virt);
}

double q_v_identical_derivative(double p, std::size_t users, const ChannelParams& params) {
    if (users == 0) return 0.0;
    p = clamp_probability(p);
    const double k = static_cast<double>(users);
    return -k * (binomial_mix(users - 1, p, params.virt, 0) - binomial_mix(users - 1, p, params.virt, 1));
}

double q_v_star(double p_hat, const MacDesign& design) {
    if (p_hat <= 0.0) return poisson_mix(design.x_star, design.params.virt);
    const double p = std::min(p_hat, design.p_max);
    const Blend bl = contention_blend(p, design, 0.0);
    const Profile& v = design.params.virt;
    return bl.weight * binomial_mix(bl.n, bl.p, v) + (1.0 - bl.weight) * binomial_mix(bl.n + 1, bl.p, v);
}

double q_star(double p_breve, const MacDesign& design) {
    if (p_breve <= 0.0) return poisson_mix(design.x_star, design.params.virt, 0);
    const double p = std::min(p_breve, design.p_max);
    const Blend bl = contention_blend(p, design, 1.0);
    const Profile& v = design.params.virt;
    return bl.weight * binomial_mix(bl.n - 1, bl.p, v, 0) + (1.0 - bl.weight) * binomial_mix(bl.n, bl.p, v, 0);
}

double d_star(double p_breve, const MacDesign& design) {
    if (p_breve <= 0.0) return poisson_mix(design.x_star, design.params.virt, 1);
    const double p = std::min(p_breve, design.p_max);
    const Blend bl = contention_blend(p, design, 1.0);
    const Profile& v = design.params.virt;
    return bl.weight * binomial_mix(bl.n - 1, bl.p, v, 1) + (1.0 - bl.weight) * binomial_mix(bl.n, bl.p, v, 1);
}

double invert_q_v_star(double q_v, const MacDesign& design) {
    return invert_curve([&](double p) { return q_v_star(p, design); }, clamp_probability(q_v), design.p_max,
                        true);
}

double invert_q_star(double q_k, const MacDesign& design) {
    return invert_curve([&](double p) { return q_star(p, design); }, clamp_probability(q_k), design.p_max,
                        design.q_star_monotone);
}

double hajek_pa(std::size_t users) {
    if (users == 0) throw std::invalid_argument("hajek_pa needs at least one user");
    const double k = static_cast<double>(users);
    const auto g = [k](double p) { return std::numbers::e * std::pow(1.0 - p, k) - 1.0 - 0.5 * std::sqrt(p); };
    // g(0) = e - 1 > 0, g(1) = -1.5 < 0 and g is strictly decreasing.
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (g(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

double idle_target_p(std::size_t users, double x_star) {
    if (users == 0) throw std::invalid_argument("idle_target_p needs at least one user");
    return -std::expm1(-x_star / static_cast<double>(users));
}

}  // namespace vpmac
