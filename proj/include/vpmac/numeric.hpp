#pragma once

#include <cstddef>
#include <functional>

#include "vpmac/channel.hpp"

namespace vpmac::numeric {

/// sum_{j=0}^{n} Binom(n, p)(j) * w[j + shift].
///
/// Only indices below the profile support contribute beyond the tail value,
/// so the cost is O(support) regardless of n.  The pmf is propagated in log
/// space, which keeps n up to ~1e6 well-conditioned.
double binomial_mix(std::size_t n, double p, const Profile& w, std::size_t shift = 0);

/// sum_{j>=0} Poisson(mean)(j) * w[j + shift], evaluated exactly through the
/// finite support of the profile.
double poisson_mix(double mean, const Profile& w, std::size_t shift = 0);

/// Golden-section search for the maximum of a unimodal f on [lo, hi].
double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol);

/// Smallest x in [lo, hi] with f(x) >= target for non-decreasing f, assuming
/// f(lo) < target <= f(hi).  Stops once the bracket is narrower than tol.
double bisect_first_at_least(const std::function<double(double)>& f, double target, double lo,
                             double hi, double tol);

}  // namespace vpmac::numeric
