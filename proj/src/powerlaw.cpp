#include "petitions/powerlaw.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>
#include <sstream>

namespace petitions::powerlaw {

namespace {

std::vector<std::int64_t> tail_of(std::span<const std::int64_t> counts, std::int64_t x_min) {
    std::vector<std::int64_t> tail;
    for (auto c : counts)
        if (c >= x_min)
            tail.push_back(c);
    std::sort(tail.begin(), tail.end());
    return tail;
}

double sum_log(const std::vector<std::int64_t>& tail) {
    double s = 0.0;
    for (auto x : tail)
        s += std::log(static_cast<double>(x));
    return s;
}

} // namespace

Ccdf ccdf(std::span<const std::int64_t> counts) {
    if (counts.empty())
        throw ValidationError("ccdf of an empty sample");
    std::vector<std::int64_t> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end());
    const auto n = static_cast<double>(sorted.size());
    Ccdf out;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        if (i > 0 && sorted[i] == sorted[i - 1])
            continue;
        out.x.push_back(sorted[i]);
        out.p.push_back(static_cast<double>(sorted.size() - i) / n);
    }
    return out;
}

double tail_ccdf(double exponent, std::int64_t x_min, std::int64_t x) {
    if (x <= x_min)
        return 1.0;
    return hurwitz_zeta(exponent, static_cast<double>(x)) / hurwitz_zeta(exponent, static_cast<double>(x_min));
}

double log_likelihood(std::span<const std::int64_t> counts, std::int64_t x_min, double exponent) {
    const auto tail = tail_of(counts, x_min);
    return -static_cast<double>(tail.size()) * std::log(hurwitz_zeta(exponent, static_cast<double>(x_min))) -
           exponent * sum_log(tail);
}

PowerLawFit fit_powerlaw(std::span<const std::int64_t> counts, std::int64_t x_min) {
    if (x_min < 1)
        throw ValidationError("x_min must be at least 1");
    const auto tail = tail_of(counts, x_min);
    if (tail.size() < 2)
        throw ValidationError("power-law fit needs at least two observations >= x_min");
    const auto n = static_cast<double>(tail.size());
    const double logs = sum_log(tail);
    const double q = static_cast<double>(x_min);
    const auto negative_ll = [&](double a) { return n * std::log(hurwitz_zeta(a, q)) + a * logs; };

    // Golden-section search; the log-likelihood is concave in the exponent.
    constexpr double kLower = 1.0 + 1e-6;
    constexpr double kUpper = 20.0;
    const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = kLower;
    double hi = kUpper;
    double c = hi - inv_phi * (hi - lo);
    double d = lo + inv_phi * (hi - lo);
    double fc = negative_ll(c);
    double fd = negative_ll(d);
    int iterations = 0;
    while (hi - lo > 1e-10 * std::max(1.0, std::abs(c))) {
        if (++iterations > 500)
            throw NumericalError("power-law fit did not converge");
        if (fc < fd) {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = negative_ll(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = negative_ll(d);
        }
    }
    const double exponent = 0.5 * (lo + hi);
    if (exponent - kLower < 1e-6 || kUpper - exponent < 1e-6 || !std::isfinite(fc))
        throw NumericalError("power-law exponent estimate hit the search boundary");

    PowerLawFit fit;
    fit.x_min = x_min;
    fit.exponent = exponent;
    fit.n_tail = static_cast<std::int64_t>(tail.size());
    fit.log_likelihood = -negative_ll(exponent);
    fit.ks_distance = ks_distance(counts, x_min, exponent);
    return fit;
}

double ks_distance(std::span<const std::int64_t> counts, std::int64_t x_min, double exponent) {
    const auto tail = tail_of(counts, x_min);
    if (tail.empty())
        throw ValidationError("no observations >= x_min");
    const double norm = hurwitz_zeta(exponent, static_cast<double>(x_min));
    const auto n = static_cast<double>(tail.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < tail.size(); ++i) {
        if (i > 0 && tail[i] == tail[i - 1])
            continue;
        const double empirical = static_cast<double>(tail.size() - i) / n;
        const double fitted = tail[i] == x_min ? 1.0 : hurwitz_zeta(exponent, static_cast<double>(tail[i])) / norm;
        worst = std::max(worst, std::abs(empirical - fitted));
    }
    return worst;
}

double continuous_exponent(std::span<const double> values, double x_min) {
    double logs = 0.0;
    std::size_t n = 0;
    for (double v : values) {
        if (v >= x_min) {
            logs += std::log(v / x_min);
            ++n;
        }
    }
    if (n == 0 || !(logs > 0.0))
        throw ValidationError("continuous exponent needs observations above x_min");
    return 1.0 + static_cast<double>(n) / logs;
}

XminScan scan_xmin(std::span<const std::int64_t> counts, std::span<const std::int64_t> candidates) {
    if (candidates.empty())
        throw ValidationError("scan_xmin needs at least one candidate");
    XminScan scan;
    for (auto x : candidates)
        scan.fits.push_back(fit_powerlaw(counts, x));
    for (std::size_t i = 1; i < scan.fits.size(); ++i)
        if (scan.fits[i].ks_distance < scan.fits[scan.best].ks_distance)
            scan.best = i;
    return scan;
}

std::vector<std::optional<double>> threshold_divergence(std::span<const std::int64_t> counts, const PowerLawFit& fit,
                                                        std::span<const std::int64_t> thresholds) {
    const auto tail = tail_of(counts, fit.x_min);
    if (tail.empty())
        throw ValidationError("no observations >= x_min");
    std::vector<std::optional<double>> out;
    for (auto t : thresholds) {
        if (t < fit.x_min)
            throw ValidationError("threshold " + std::to_string(t) + " lies below x_min");
        const auto reach = static_cast<double>(tail.end() - std::lower_bound(tail.begin(), tail.end(), t));
        if (reach == 0.0) {
            out.emplace_back();
            continue;
        }
        const double empirical = reach / static_cast<double>(tail.size());
        out.emplace_back(std::log10(empirical) - std::log10(tail_ccdf(fit.exponent, fit.x_min, t)));
    }
    return out;
}

void write_ccdf_csv(std::ostream& out, const Ccdf& c, const MetadataHeader& header) {
    out << header.csv_line() << "\nx,p\n";
    for (std::size_t i = 0; i < c.x.size(); ++i)
        out << c.x[i] << ',' << format_real(c.p[i]) << '\n';
}

} // namespace petitions::powerlaw
