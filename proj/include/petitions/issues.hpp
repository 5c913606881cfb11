#ifndef PETITIONS_ISSUES_HPP
#define PETITIONS_ISSUES_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "petitions/corpus.hpp"
#include "petitions/lda.hpp"

namespace petitions::issues {

/// dot(u, v) / (|u| |v|), clamped to [-1, 1]. Throws on a zero vector or size mismatch.
template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar cosine(const Eigen::MatrixBase<DerivedA>& u, const Eigen::MatrixBase<DerivedB>& v) {
    using Scalar = typename DerivedA::Scalar;
    if (u.size() != v.size())
        throw ValidationError("cosine: vectors differ in length");
    const Scalar nu = u.norm();
    const Scalar nv = v.norm();
    if (nu == Scalar(0) || nv == Scalar(0))
        throw ValidationError("cosine: zero vector");
    const Scalar c = u.dot(v) / (nu * nv);
    return std::clamp(c, Scalar(-1), Scalar(1));
}

/// Pairwise cosine similarity of the columns of m; unit diagonal.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic> column_cosines(const Eigen::MatrixBase<Derived>& m) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index k = m.cols();
    Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        out(i, i) = Scalar(1);
        for (Eigen::Index j = i + 1; j < k; ++j)
            out(i, j) = out(j, i) = cosine(m.col(i), m.col(j));
    }
    return out;
}

/// UK signatures per petition, in corpus order.
Eigen::VectorXd signature_weights(const Corpus& corpus);

struct IssuePrevalence {
    Eigen::VectorXd by_petitions;
    Eigen::VectorXd by_signatures;
    std::vector<int> rank_by_petitions;   ///< 1 = most prevalent
    std::vector<int> rank_by_signatures;
};

IssuePrevalence prevalence(const Eigen::MatrixXd& theta, const Eigen::VectorXd& signatures);
IssuePrevalence prevalence(const lda::TopicModel& model, const Corpus& corpus);

/// 1-based descending ranks, ties broken by lower index.
std::vector<int> descending_ranks(const Eigen::VectorXd& values);

struct SuccessProbability {
    std::vector<std::optional<double>> raw;  ///< empty optional: no petition assigned to the topic
    Eigen::VectorXd smoothed;                ///< Beta(1,1) posterior mean
    std::vector<std::int64_t> assigned;
    std::vector<std::int64_t> successes;
};

/// Petitions go to their arg-max topic; a success has at least `threshold` signatures.
SuccessProbability success_probability(const Eigen::MatrixXd& theta, const Eigen::VectorXd& signatures,
                                       std::int64_t threshold = 10000);
SuccessProbability success_probability(const lda::TopicModel& model, const Corpus& corpus,
                                       std::int64_t threshold = 10000);

enum class NetworkKind { co_occurrence, word_distribution };

struct IssueNetwork {
    NetworkKind kind = NetworkKind::co_occurrence;
    Eigen::MatrixXd weights;     ///< K x K, symmetric, unit diagonal
    Eigen::VectorXd node_sizes;  ///< signatures per issue, may be empty
};

/// Cosine of theta columns across petitions.
IssueNetwork co_occurrence_network(const lda::TopicModel& model, const Eigen::VectorXd& node_sizes = {});
/// Cosine of phi rows.
IssueNetwork word_distribution_network(const lda::TopicModel& model, const Eigen::VectorXd& node_sizes = {});

/// Keeps the ceil(keep_fraction * K(K-1)/2) strongest off-diagonal edges and every
/// edge tied with the weakest of them; all others become 0.
IssueNetwork prune_network(const IssueNetwork& net, double keep_fraction);

struct EdgeSummary {
    double mean = 0.0;
    double max = 0.0;
    double min = 0.0;
    std::pair<int, int> max_pair{0, 0};
    std::pair<int, int> min_pair{0, 0};
};

/// Statistics over the off-diagonal pairs i < j.
EdgeSummary summarize_edges(const Eigen::MatrixXd& weights);

void write_prevalence_csv(std::ostream& out, const IssuePrevalence& prev, const SuccessProbability& success,
                          const std::vector<std::string>& names, const MetadataHeader& header);
/// Edge list of nonzero pairs and the node table.
void write_network_csv(std::ostream& edges, std::ostream& nodes, const IssueNetwork& net,
                       const std::vector<std::string>& names, const MetadataHeader& header);

} // namespace petitions::issues

#endif
