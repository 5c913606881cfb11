#ifndef PETITIONS_POWERLAW_HPP
#define PETITIONS_POWERLAW_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <vector>

#include "petitions/common.hpp"

namespace petitions::powerlaw {

/// Hurwitz zeta sum_{n>=0} (n + q)^-s for s > 1, q > 0, by Euler-Maclaurin summation.
template <typename Scalar>
Scalar hurwitz_zeta(Scalar s, Scalar q) {
    if (!(s > Scalar(1)) || !(q > Scalar(0)))
        throw ValidationError("hurwitz_zeta needs s > 1 and q > 0");
    // B_2j / (2j)!
    static constexpr double kBernoulliOverFactorial[] = {
        1.0 / 12.0,         -1.0 / 720.0,         1.0 / 30240.0,          -1.0 / 1209600.0,
        1.0 / 47900160.0,   -691.0 / 1307674368000.0, 1.0 / 74724249600.0, -3617.0 / 10670622842880000.0};
    constexpr int kDirect = 16;
    Scalar sum(0);
    for (int n = 0; n < kDirect; ++n)
        sum += std::pow(q + Scalar(n), -s);
    const Scalar a = q + Scalar(kDirect);
    sum += std::pow(a, Scalar(1) - s) / (s - Scalar(1)) + std::pow(a, -s) / Scalar(2);
    // term_j = B_2j/(2j)! * s(s+1)...(s+2j-2) * a^(-s-2j+1)
    Scalar rising = s;
    Scalar power = std::pow(a, -s - Scalar(1));
    const Scalar inv_a2 = Scalar(1) / (a * a);
    for (int j = 0; j < 8; ++j) {
        const Scalar term = Scalar(kBernoulliOverFactorial[j]) * rising * power;
        sum += term;
        if (std::abs(term) < std::abs(sum) * std::numeric_limits<Scalar>::epsilon())
            break;
        rising *= (s + Scalar(2 * j + 1)) * (s + Scalar(2 * j + 2));
        power *= inv_a2;
    }
    return sum;
}

/// Fraction of observations >= x at each distinct observed value x.
struct Ccdf {
    std::vector<std::int64_t> x;
    std::vector<double> p;
};

Ccdf ccdf(std::span<const std::int64_t> counts);

struct PowerLawFit {
    std::int64_t x_min = 1;
    double exponent = 0.0;
    std::int64_t n_tail = 0;
    double ks_distance = 0.0;
    double log_likelihood = 0.0;
};

/// P(X >= x) under a discrete power law with the given exponent and cutoff.
double tail_ccdf(double exponent, std::int64_t x_min, std::int64_t x);

/// Discrete power-law log-likelihood of the observations >= x_min.
double log_likelihood(std::span<const std::int64_t> counts, std::int64_t x_min, double exponent);

/// Discrete maximum-likelihood fit to observations >= x_min. Throws ValidationError
/// with fewer than two tail observations and NumericalError if the optimum is not interior.
PowerLawFit fit_powerlaw(std::span<const std::int64_t> counts, std::int64_t x_min);

/// Largest gap between the empirical and fitted tail CCDF over the observed support.
double ks_distance(std::span<const std::int64_t> counts, std::int64_t x_min, double exponent);

/// Closed-form continuous MLE 1 + n / sum ln(x / x_min) over x >= x_min.
double continuous_exponent(std::span<const double> values, double x_min);

struct XminScan {
    std::vector<PowerLawFit> fits;
    std::size_t best = 0;  ///< index of the smallest ks_distance
};

XminScan scan_xmin(std::span<const std::int64_t> counts, std::span<const std::int64_t> candidates);

/// log10(empirical tail CCDF at T) - log10(fitted CCDF at T) for each threshold, with
/// both CCDFs conditioned on x >= x_min. Empty when no observation reaches T.
std::vector<std::optional<double>> threshold_divergence(std::span<const std::int64_t> counts, const PowerLawFit& fit,
                                                        std::span<const std::int64_t> thresholds);

void write_ccdf_csv(std::ostream& out, const Ccdf& c, const MetadataHeader& header);

} // namespace petitions::powerlaw

#endif
