#ifndef PETITIONS_TEMPORAL_HPP
#define PETITIONS_TEMPORAL_HPP

#include <cmath>
#include <iosfwd>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "petitions/corpus.hpp"
#include "petitions/lda.hpp"

namespace petitions::temporal {

/// Daily signature mass per issue (days x K) over a contiguous date range.
struct IssueSeries {
    std::vector<Date> dates;
    Eigen::MatrixXd values;
};

/// Attributes each petition's UK signatures, split by theta, to its creation day.
IssueSeries build_series(const lda::TopicModel& model, const Corpus& corpus);
IssueSeries build_series(const Eigen::MatrixXd& theta, const Eigen::VectorXd& signatures,
                         const std::vector<Date>& created, const DateWindow& window);

/// Centered moving average per issue. Odd windows average the w days around t; even
/// windows use the 2xw form (half weight on the two outermost days). Edges use
/// half-sample symmetric extension, which keeps both constants and total mass intact.
IssueSeries smooth(const IssueSeries& series, int window_days);

/// -sum p ln p / ln K for the distribution proportional to `mass`; nullopt when the
/// mass is zero. Requires K >= 2.
template <typename Derived>
std::optional<typename Derived::Scalar> normalized_entropy(const Eigen::MatrixBase<Derived>& mass) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index k = mass.size();
    if (k < 2)
        throw ValidationError("normalized entropy needs at least two issues");
    const Scalar total = mass.sum();
    if (!(total > Scalar(0)))
        return std::nullopt;
    Scalar h(0);
    for (Eigen::Index i = 0; i < k; ++i) {
        const Scalar p = mass(i) / total;
        if (p > Scalar(0))
            h -= p * std::log(p);
    }
    return std::clamp(h / std::log(static_cast<Scalar>(k)), Scalar(0), Scalar(1));
}

struct EntropySeries {
    std::vector<Date> dates;
    std::vector<std::optional<double>> h;
    std::vector<std::optional<double>> pct_change;
    std::vector<Date> flags;
};

/// Entropy of the signature mass pooled over the trailing window [t - w + 1, t].
EntropySeries entropy_series(const IssueSeries& series, int window_days = 7);

/// Percentage change between consecutive defined values with a positive predecessor.
std::vector<std::optional<double>> percentage_changes(const std::vector<std::optional<double>>& h);

enum class Direction { increase, decrease };

struct VolatileDate {
    Date date;
    double pct_change = 0.0;
    Direction direction = Direction::increase;
};

struct VolatilityResult {
    double mean = 0.0;
    double sd = 0.0;  ///< sample standard deviation of the defined changes
    std::size_t n = 0;
    std::vector<VolatileDate> dates;
};

/// Flags days whose percentage change lies more than n_sigma standard deviations
/// from the mean change. Needs at least 30 defined changes.
VolatilityResult detect_volatility(const EntropySeries& es, double n_sigma = 3.0);

struct EntropyStats {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t defined = 0;
};

EntropyStats entropy_stats(const EntropySeries& es);

void write_series_csv(std::ostream& out, const IssueSeries& series, const MetadataHeader& header);
void write_entropy_csv(std::ostream& out, const EntropySeries& es, const VolatilityResult& volatility,
                       const MetadataHeader& header);

} // namespace petitions::temporal

#endif
