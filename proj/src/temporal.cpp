#include "petitions/temporal.hpp"

#include <algorithm>
#include <map>
#include <ostream>
#include <sstream>

namespace petitions::temporal {

namespace {

// Half-sample symmetric reflection of an index into [0, n).
Eigen::Index reflect(Eigen::Index i, Eigen::Index n) {
    const Eigen::Index period = 2 * n;
    Eigen::Index m = i % period;
    if (m < 0)
        m += period;
    return m < n ? m : period - 1 - m;
}

} // namespace

IssueSeries build_series(const Eigen::MatrixXd& theta, const Eigen::VectorXd& signatures,
                         const std::vector<Date>& created, const DateWindow& window) {
    if (theta.rows() != signatures.size() || static_cast<std::size_t>(theta.rows()) != created.size())
        throw ValidationError("theta, signatures and creation dates differ in length");
    if (window.end < window.start)
        throw ValidationError("date window ends before it starts");
    IssueSeries s;
    const auto days = window.days();
    s.values = Eigen::MatrixXd::Zero(days, theta.cols());
    for (Eigen::Index i = 0; i < days; ++i)
        s.dates.push_back(window.start + std::chrono::days{i});
    for (Eigen::Index d = 0; d < theta.rows(); ++d) {
        const Date c = created[static_cast<std::size_t>(d)];
        if (!window.contains(c))
            throw ValidationError("creation date " + format_date(c) + " lies outside the series window");
        s.values.row((c - window.start).count()) += signatures(d) * theta.row(d);
    }
    return s;
}

IssueSeries build_series(const lda::TopicModel& model, const Corpus& corpus) {
    if (model.num_docs() != static_cast<Eigen::Index>(corpus.size()))
        throw ValidationError("model and corpus differ in document count");
    Eigen::VectorXd signatures(model.num_docs());
    std::vector<Date> created;
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        signatures(static_cast<Eigen::Index>(d)) = static_cast<double>(corpus.petitions[d].uk_signatures());
        created.push_back(corpus.petitions[d].created_at);
    }
    return build_series(model.theta, signatures, created, corpus.window);
}

IssueSeries smooth(const IssueSeries& series, int window_days) {
    if (window_days < 1)
        throw ValidationError("smoothing window must be at least one day");
    if (window_days == 1)
        return series;
    // Symmetric kernel over offsets [-half, half].
    const int half = window_days / 2;
    std::vector<double> kernel(static_cast<std::size_t>(2 * half + 1), 1.0 / window_days);
    if (window_days % 2 == 0)
        kernel.front() = kernel.back() = 0.5 / window_days;

    const Eigen::Index n = series.values.rows();
    IssueSeries out{series.dates, Eigen::MatrixXd::Zero(n, series.values.cols())};
    for (Eigen::Index t = 0; t < n; ++t)
        for (int j = -half; j <= half; ++j)
            out.values.row(t) += kernel[static_cast<std::size_t>(j + half)] * series.values.row(reflect(t + j, n));
    return out;
}

EntropySeries entropy_series(const IssueSeries& series, int window_days) {
    if (window_days < 1)
        throw ValidationError("entropy window must be at least one day");
    EntropySeries es;
    es.dates = series.dates;
    const Eigen::Index n = series.values.rows();
    for (Eigen::Index t = 0; t < n; ++t) {
        const Eigen::Index first = std::max<Eigen::Index>(0, t - window_days + 1);
        const Eigen::VectorXd pooled = series.values.middleRows(first, t - first + 1).colwise().sum().transpose();
        es.h.push_back(normalized_entropy(pooled));
    }
    es.pct_change = percentage_changes(es.h);
    return es;
}

std::vector<std::optional<double>> percentage_changes(const std::vector<std::optional<double>>& h) {
    std::vector<std::optional<double>> out(h.size());
    for (std::size_t t = 1; t < h.size(); ++t)
        if (h[t] && h[t - 1] && *h[t - 1] > 0.0)
            out[t] = (*h[t] - *h[t - 1]) / *h[t - 1] * 100.0;
    return out;
}

VolatilityResult detect_volatility(const EntropySeries& es, double n_sigma) {
    std::vector<std::size_t> idx;
    for (std::size_t t = 0; t < es.pct_change.size(); ++t)
        if (es.pct_change[t])
            idx.push_back(t);
    if (idx.size() < 30)
        throw ValidationError("volatility detection needs at least 30 defined percentage changes, got " +
                              std::to_string(idx.size()));
    Eigen::VectorXd x(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t i = 0; i < idx.size(); ++i)
        x(static_cast<Eigen::Index>(i)) = *es.pct_change[idx[i]];

    VolatilityResult r;
    r.n = idx.size();
    r.mean = x.mean();
    r.sd = std::sqrt((x.array() - r.mean).square().sum() / static_cast<double>(x.size() - 1));
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const double v = x(static_cast<Eigen::Index>(i));
        if (std::abs(v - r.mean) > n_sigma * r.sd)
            r.dates.push_back({es.dates[idx[i]], v, v >= 0.0 ? Direction::increase : Direction::decrease});
    }
    return r;
}

EntropyStats entropy_stats(const EntropySeries& es) {
    EntropyStats s;
    double total = 0.0;
    s.min = std::numeric_limits<double>::infinity();
    s.max = -std::numeric_limits<double>::infinity();
    for (const auto& h : es.h) {
        if (!h)
            continue;
        total += *h;
        s.min = std::min(s.min, *h);
        s.max = std::max(s.max, *h);
        ++s.defined;
    }
    if (s.defined == 0)
        throw ValidationError("entropy series has no defined values");
    s.mean = total / static_cast<double>(s.defined);
    return s;
}

void write_series_csv(std::ostream& out, const IssueSeries& series, const MetadataHeader& header) {
    out << header.csv_line() << "\ndate";
    for (Eigen::Index k = 0; k < series.values.cols(); ++k)
        out << ",issue_" << k;
    out << '\n';
    for (std::size_t t = 0; t < series.dates.size(); ++t) {
        out << format_date(series.dates[t]);
        for (Eigen::Index k = 0; k < series.values.cols(); ++k)
            out << ',' << format_real(series.values(static_cast<Eigen::Index>(t), k));
        out << '\n';
    }
}

void write_entropy_csv(std::ostream& out, const EntropySeries& es, const VolatilityResult& volatility,
                       const MetadataHeader& header) {
    std::map<Date, Direction> flagged;
    for (const auto& v : volatility.dates)
        flagged.emplace(v.date, v.direction);
    out << header.csv_line() << "\ndate,entropy,pct_change,flagged,direction\n";
    for (std::size_t t = 0; t < es.dates.size(); ++t) {
        out << format_date(es.dates[t]) << ',' << (es.h[t] ? format_real(*es.h[t]) : "NA") << ','
            << (es.pct_change[t] ? format_real(*es.pct_change[t]) : "NA") << ',';
        if (auto it = flagged.find(es.dates[t]); it != flagged.end())
            out << "1," << (it->second == Direction::increase ? "increase" : "decrease");
        else
            out << "0,";
        out << '\n';
    }
}

} // namespace petitions::temporal
