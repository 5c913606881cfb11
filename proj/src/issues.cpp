#include "petitions/issues.hpp"

#include <algorithm>
#include <numeric>
#include <ostream>

namespace petitions::issues {

namespace {

void check_alignment(const lda::TopicModel& model, const Corpus& corpus) {
    if (model.num_docs() != static_cast<Eigen::Index>(corpus.size()))
        throw ValidationError("model has " + std::to_string(model.num_docs()) + " documents but the corpus has " +
                              std::to_string(corpus.size()));
    if (model.doc_ids.empty())
        return;
    for (std::size_t d = 0; d < corpus.size(); ++d)
        if (model.doc_ids[d] != corpus.petitions[d].id)
            throw ValidationError("model row " + std::to_string(d) + " is petition " + model.doc_ids[d] +
                                  ", corpus has " + corpus.petitions[d].id);
}

} // namespace

Eigen::VectorXd signature_weights(const Corpus& corpus) {
    Eigen::VectorXd s(static_cast<Eigen::Index>(corpus.size()));
    for (std::size_t d = 0; d < corpus.size(); ++d)
        s(static_cast<Eigen::Index>(d)) = static_cast<double>(corpus.petitions[d].uk_signatures());
    return s;
}

std::vector<int> descending_ranks(const Eigen::VectorXd& values) {
    std::vector<int> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return values(a) > values(b); });
    std::vector<int> ranks(order.size());
    for (std::size_t r = 0; r < order.size(); ++r)
        ranks[static_cast<std::size_t>(order[r])] = static_cast<int>(r) + 1;
    return ranks;
}

IssuePrevalence prevalence(const Eigen::MatrixXd& theta, const Eigen::VectorXd& signatures) {
    if (theta.rows() != signatures.size())
        throw ValidationError("theta rows and signature vector differ in length");
    IssuePrevalence p;
    p.by_petitions = theta.colwise().sum().transpose();
    p.by_signatures = theta.transpose() * signatures;
    p.rank_by_petitions = descending_ranks(p.by_petitions);
    p.rank_by_signatures = descending_ranks(p.by_signatures);
    return p;
}

IssuePrevalence prevalence(const lda::TopicModel& model, const Corpus& corpus) {
    check_alignment(model, corpus);
    return prevalence(model.theta, signature_weights(corpus));
}

SuccessProbability success_probability(const Eigen::MatrixXd& theta, const Eigen::VectorXd& signatures,
                                       std::int64_t threshold) {
    if (threshold <= 0)
        throw ValidationError("success threshold must be positive");
    if (theta.rows() != signatures.size())
        throw ValidationError("theta rows and signature vector differ in length");
    const auto k = static_cast<std::size_t>(theta.cols());
    SuccessProbability out;
    out.assigned.assign(k, 0);
    out.successes.assign(k, 0);
    for (Eigen::Index d = 0; d < theta.rows(); ++d) {
        Eigen::Index best = 0;
        theta.row(d).maxCoeff(&best);
        ++out.assigned[static_cast<std::size_t>(best)];
        if (signatures(d) >= static_cast<double>(threshold))
            ++out.successes[static_cast<std::size_t>(best)];
    }
    out.smoothed.resize(static_cast<Eigen::Index>(k));
    for (std::size_t t = 0; t < k; ++t) {
        const auto n = static_cast<double>(out.assigned[t]);
        const auto s = static_cast<double>(out.successes[t]);
        out.raw.push_back(out.assigned[t] > 0 ? std::optional<double>(s / n) : std::nullopt);
        out.smoothed(static_cast<Eigen::Index>(t)) = (s + 1.0) / (n + 2.0);
    }
    return out;
}

SuccessProbability success_probability(const lda::TopicModel& model, const Corpus& corpus, std::int64_t threshold) {
    check_alignment(model, corpus);
    return success_probability(model.theta, signature_weights(corpus), threshold);
}

IssueNetwork co_occurrence_network(const lda::TopicModel& model, const Eigen::VectorXd& node_sizes) {
    return {NetworkKind::co_occurrence, column_cosines(model.theta), node_sizes};
}

IssueNetwork word_distribution_network(const lda::TopicModel& model, const Eigen::VectorXd& node_sizes) {
    return {NetworkKind::word_distribution, column_cosines(model.phi.transpose()), node_sizes};
}

IssueNetwork prune_network(const IssueNetwork& net, double keep_fraction) {
    if (!(keep_fraction > 0.0 && keep_fraction <= 1.0))
        throw ValidationError("keep_fraction must lie in (0, 1]");
    const Eigen::Index k = net.weights.rows();
    std::vector<double> edges;
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j)
            edges.push_back(net.weights(i, j));
    IssueNetwork out = net;
    if (edges.empty())
        return out;
    const auto keep = std::clamp<std::size_t>(
        static_cast<std::size_t>(std::ceil(keep_fraction * static_cast<double>(edges.size()) - 1e-9)), 1, edges.size());
    std::sort(edges.begin(), edges.end(), std::greater<>());
    const double cutoff = edges[keep - 1];
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = 0; j < k; ++j)
            if (i != j && out.weights(i, j) < cutoff)
                out.weights(i, j) = 0.0;
    return out;
}

EdgeSummary summarize_edges(const Eigen::MatrixXd& weights) {
    EdgeSummary s;
    const Eigen::Index k = weights.rows();
    if (k < 2)
        return s;
    double total = 0.0;
    int n = 0;
    s.max = -std::numeric_limits<double>::infinity();
    s.min = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < k; ++i) {
        for (Eigen::Index j = i + 1; j < k; ++j) {
            const double w = weights(i, j);
            total += w;
            ++n;
            if (w > s.max) {
                s.max = w;
                s.max_pair = {static_cast<int>(i), static_cast<int>(j)};
            }
            if (w < s.min) {
                s.min = w;
                s.min_pair = {static_cast<int>(i), static_cast<int>(j)};
            }
        }
    }
    s.mean = total / n;
    return s;
}

void write_prevalence_csv(std::ostream& out, const IssuePrevalence& prev, const SuccessProbability& success,
                          const std::vector<std::string>& names, const MetadataHeader& header) {
    out << header.csv_line()
        << "\ntopic,name,mass_by_petitions,rank_p,mass_by_signatures,rank_s,success_probability,success_probability_smoothed\n";
    for (Eigen::Index t = 0; t < prev.by_petitions.size(); ++t) {
        const auto tu = static_cast<std::size_t>(t);
        out << t << ',' << csv_escape(names[tu]) << ',' << format_real(prev.by_petitions(t)) << ','
            << prev.rank_by_petitions[tu] << ',' << format_real(prev.by_signatures(t)) << ','
            << prev.rank_by_signatures[tu] << ',';
        if (success.raw[tu])
            out << format_real(*success.raw[tu]);
        else
            out << "NA";
        out << ',' << format_real(success.smoothed(t)) << '\n';
    }
}

void write_network_csv(std::ostream& edges, std::ostream& nodes, const IssueNetwork& net,
                       const std::vector<std::string>& names, const MetadataHeader& header) {
    edges << header.csv_line() << "\nsource,target,weight\n";
    const Eigen::Index k = net.weights.rows();
    for (Eigen::Index i = 0; i < k; ++i)
        for (Eigen::Index j = i + 1; j < k; ++j)
            if (net.weights(i, j) > 0.0)
                edges << i << ',' << j << ',' << format_real(net.weights(i, j)) << '\n';
    nodes << header.csv_line() << "\ntopic,name,signatures\n";
    for (Eigen::Index i = 0; i < k; ++i)
        nodes << i << ',' << csv_escape(names[static_cast<std::size_t>(i)]) << ','
              << (i < net.node_sizes.size() ? format_real(net.node_sizes(i)) : std::string("NA")) << '\n';
}

} // namespace petitions::issues
