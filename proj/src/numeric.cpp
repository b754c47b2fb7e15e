#include "vpmac/numeric.hpp"

#include <algorithm>
#include <cmath>

namespace vpmac::numeric {

double binomial_mix(std::size_t n, double p, const Profile& w, std::size_t shift) {
    if (p <= 0.0) return w[shift];
    if (p >= 1.0) return w[n + shift];

    const std::size_t support = w.support();
    if (support <= shift) return w.tail();

    // Summation by parts: E[w(X)] = w_0 - sum_j P(X > j) (w_j - w_{j+1}).
    // P(X > j) is exactly zero for j >= n, so plateaus reached by every
    // outcome contribute nothing and the result stays exact there.
    const std::size_t terms = std::min(n, support - shift);
    const double nd = static_cast<double>(n);
    const double log_ratio = std::log(p) - std::log1p(-p);
    double log_pmf = nd * std::log1p(-p);
    double cdf = 0.0;
    double acc = w[shift];
    for (std::size_t j = 0; j < terms; ++j) {
        cdf += std::exp(log_pmf);
        const double survival = std::max(0.0, 1.0 - cdf);
        acc -= survival * (w[j + shift] - w[j + shift + 1]);
        const double jd = static_cast<double>(j);
        log_pmf += std::log((nd - jd) / (jd + 1.0)) + log_ratio;
    }
    return acc;
}

double poisson_mix(double mean, const Profile& w, std::size_t shift) {
    const double tail = w.tail();
    const std::size_t support = w.support();
    if (support <= shift) return tail;
    if (mean <= 0.0) return w[shift];

    double pmf = std::exp(-mean);
    double acc = 0.0;
    for (std::size_t j = 0; j + shift < support; ++j) {
        acc += pmf * (w[j + shift] - tail);
        pmf *= mean / static_cast<double>(j + 1);
    }
    return tail + acc;
}

double golden_max(const std::function<double(double)>& f, double lo, double hi, double tol) {
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = f(c);
    double fd = f(d);
    while (hi - lo > tol) {
        if (fc >= fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    return 0.5 * (lo + hi);
}

double bisect_first_at_least(const std::function<double(double)>& f, double target, double lo,
                             double hi, double tol) {
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (f(mid) >= target)
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

}  // namespace vpmac::numeric
