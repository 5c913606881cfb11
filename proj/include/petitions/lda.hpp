#ifndef PETITIONS_LDA_HPP
#define PETITIONS_LDA_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "petitions/common.hpp"
#include "petitions/textprep.hpp"

namespace petitions::lda {

struct LdaConfig {
    int k = 10;
    double alpha = 0.1;
    double beta = 0.1;
    int iterations = 1000;
    int burn_in = 200;
    /// Sweeps between retained samples after burn-in; also the likelihood cadence.
    int sample_lag = 10;
    std::uint64_t seed = 1;
    /// 1 = serial, bit-reproducible. More threads partition documents per sweep.
    int threads = 1;

    void validate() const;
};

/// Fitted model. phi is K x V, theta is D x K; both are posterior means with the
/// priors folded in, so every row is a strictly positive distribution.
struct TopicModel {
    LdaConfig config;
    Eigen::MatrixXd phi;
    Eigen::MatrixXd theta;
    std::vector<int> trace_sweeps;
    std::vector<double> log_likelihood_trace;
    std::vector<std::string> vocabulary;
    std::vector<std::string> doc_ids;

    int num_topics() const { return static_cast<int>(phi.rows()); }
    Eigen::Index num_terms() const { return phi.cols(); }
    Eigen::Index num_docs() const { return theta.rows(); }
};

/// Collapsed Gibbs sampling. Each document draws from its own RNG stream seeded by
/// (config.seed, petition id), so results do not depend on row positions.
TopicModel fit(const DocumentTermMatrix& dtm, const LdaConfig& config);

/// The n highest-probability terms of a topic; ties broken lexicographically.
std::vector<std::string> top_words(const TopicModel& model, int topic, int n);

struct InferenceConfig {
    int iterations = 200;
    int burn_in = 50;
    std::uint64_t seed = 1;
};

struct InferenceResult {
    Eigen::VectorXd theta;
    bool empty_document = false;  ///< no known terms: theta is uniform
};

/// Held-out theta for a new document given (term index, count) pairs, phi fixed.
InferenceResult infer_theta(const TopicModel& model, std::span<const std::pair<Eigen::Index, int>> doc_counts,
                            const InferenceConfig& config = {});

/// Row `row` of a DTM as (term index, count) pairs.
std::vector<std::pair<Eigen::Index, int>> row_counts(const DocumentTermMatrix& dtm, Eigen::Index row);

/// log p(w | phi, theta) summed over the given rows, theta inferred per document.
double heldout_log_likelihood(const TopicModel& model, const DocumentTermMatrix& dtm,
                              std::span<const Eigen::Index> rows, const InferenceConfig& config = {});

// ---------------------------------------------------------------------------
// Validation

struct IntrusionInstance {
    int topic_index = 0;
    std::vector<std::string> shown_words;  ///< six words, shuffled
    int intruder_position = 0;
};

/// One instance per topic: its top five words plus one word drawn from the terms
/// whose probability is at or below the topic's median.
std::vector<IntrusionInstance> make_intrusion_instances(const TopicModel& model, std::uint64_t seed);

struct IntrusionAnswer {
    int topic = 0;
    int subject = 0;
    int position = 0;
};

struct IntrusionScore {
    std::vector<double> per_topic;    ///< aligned with the instances
    double overall = 0.0;
    std::vector<int> below_threshold;  ///< topics with accuracy < threshold
    double threshold = 0.75;
};

/// Every subject must answer every instance exactly once.
IntrusionScore score_intrusion(std::span<const IntrusionInstance> instances, std::span<const IntrusionAnswer> answers,
                               double threshold = 0.75);

/// Annotator sheet `topic,word1..word6`; carries no hint of the intruder.
void write_intrusion_csv(std::ostream& out, std::span<const IntrusionInstance> instances, const MetadataHeader& header);
/// Answer key `topic,intruder_position,intruder`.
void write_intrusion_key(std::ostream& out, std::span<const IntrusionInstance> instances, const MetadataHeader& header);
/// Rebuilds instances from an annotator sheet and its answer key.
std::vector<IntrusionInstance> read_intrusion_instances(std::istream& sheet, std::istream& key);
/// Reads `topic,subject,position` answer rows.
std::vector<IntrusionAnswer> read_intrusion_answers(std::istream& in);

struct AuditEntry {
    std::string petition_id;
    int topic = 0;
    double max_theta = 0.0;
};

struct AuditSample {
    std::vector<AuditEntry> entries;
    std::vector<std::string> notes;  ///< topics with fewer qualifying petitions than requested
};

/// Seeded sample of up to `per_topic` petitions per topic whose largest theta exceeds
/// `threshold`, for manual review of assignments.
AuditSample audit_assignments(const TopicModel& model, double threshold, std::uint64_t seed, int per_topic = 10);

/// Permutation maximizing total similarity: result[i] is the column matched to row i.
/// Exhaustive over permutations; intended for K up to about 10.
std::vector<int> match_topics(const Eigen::MatrixXd& similarity);

// ---------------------------------------------------------------------------
// Model snapshot (versioned JSON)

void write_model(std::ostream& out, const TopicModel& model, const MetadataHeader& header);
TopicModel read_model(std::istream& in);
std::uint64_t vocabulary_hash(std::span<const std::string> terms);

/// Topic index to issue name (`topic_index,name` CSV). Missing topics are named "topic_<i>".
std::vector<std::string> read_topic_names(std::istream& in, int k);
std::vector<std::string> default_topic_names(int k);

} // namespace petitions::lda

#endif
