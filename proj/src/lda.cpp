#include "petitions/lda.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <thread>

#include "lda_internal.hpp"

namespace petitions::lda {

void LdaConfig::validate() const {
    if (k < 1)
        throw ValidationError("k must be at least 1");
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw ValidationError("alpha and beta must be positive");
    if (iterations < 1)
        throw ValidationError("iterations must be positive");
    if (burn_in < 0 || burn_in >= iterations)
        throw ValidationError("burn_in must lie in [0, iterations)");
    if (sample_lag < 1)
        throw ValidationError("sample_lag must be positive");
    if (threads < 1)
        throw ValidationError("threads must be positive");
}

namespace {

struct SamplerState {
    int k = 0;
    Eigen::Index v = 0;
    double alpha = 0.0;
    double beta = 0.0;
    std::vector<std::vector<int>> words;  // per document, token -> term
    std::vector<std::vector<int>> topics; // per document, token -> topic
    std::vector<std::int32_t> doc_topic;  // D x K
    std::vector<std::int32_t> word_topic; // V x K
    std::vector<std::int64_t> topic_total;
    std::vector<std::mt19937_64> rngs;

    std::int32_t& dk(std::size_t d, int t) { return doc_topic[d * static_cast<std::size_t>(k) + static_cast<std::size_t>(t)]; }
    std::int32_t dk(std::size_t d, int t) const { return doc_topic[d * static_cast<std::size_t>(k) + static_cast<std::size_t>(t)]; }
};

int draw(std::span<double> cumulative, double u) {
    const double target = u * cumulative.back();
    const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), target);
    return static_cast<int>(std::min<std::ptrdiff_t>(it - cumulative.begin(), static_cast<std::ptrdiff_t>(cumulative.size()) - 1));
}

// Resamples every token of documents [first, last) against the given word-topic
// and topic totals, which the caller owns.
void sweep_documents(SamplerState& s, std::size_t first, std::size_t last, std::span<std::int32_t> word_topic,
                     std::span<std::int64_t> topic_total) {
    const auto k = static_cast<std::size_t>(s.k);
    const double vbeta = static_cast<double>(s.v) * s.beta;
    std::vector<double> cumulative(k);
    for (std::size_t d = first; d < last; ++d) {
        auto& words = s.words[d];
        auto& topics = s.topics[d];
        auto& rng = s.rngs[d];
        std::int32_t* doc = &s.doc_topic[d * k];
        for (std::size_t i = 0; i < words.size(); ++i) {
            const auto w = static_cast<std::size_t>(words[i]);
            std::int32_t* wt = &word_topic[w * k];
            const auto old = static_cast<std::size_t>(topics[i]);
            --doc[old];
            --wt[old];
            --topic_total[old];
            double acc = 0.0;
            for (std::size_t t = 0; t < k; ++t) {
                acc += (doc[t] + s.alpha) * (wt[t] + s.beta) / (static_cast<double>(topic_total[t]) + vbeta);
                cumulative[t] = acc;
            }
            const int fresh = draw(cumulative, detail::uniform01(rng));
            const auto nt = static_cast<std::size_t>(fresh);
            topics[i] = fresh;
            ++doc[nt];
            ++wt[nt];
            ++topic_total[nt];
        }
    }
}

void sweep_parallel(SamplerState& s, int threads) {
    const std::size_t n_docs = s.words.size();
    const auto n_threads = static_cast<std::size_t>(std::min<std::size_t>(static_cast<std::size_t>(threads), std::max<std::size_t>(n_docs, 1)));
    std::vector<std::vector<std::int32_t>> local_wt(n_threads, s.word_topic);
    std::vector<std::vector<std::int64_t>> local_tt(n_threads, s.topic_total);
    std::vector<std::thread> workers;
    for (std::size_t t = 0; t < n_threads; ++t) {
        const std::size_t first = n_docs * t / n_threads;
        const std::size_t last = n_docs * (t + 1) / n_threads;
        workers.emplace_back([&, t, first, last] { sweep_documents(s, first, last, local_wt[t], local_tt[t]); });
    }
    for (auto& w : workers)
        w.join();
    // Deterministic merge of count deltas in thread order.
    const std::vector<std::int32_t> base_wt = s.word_topic;
    const std::vector<std::int64_t> base_tt = s.topic_total;
    for (std::size_t t = 0; t < n_threads; ++t) {
        for (std::size_t i = 0; i < base_wt.size(); ++i)
            s.word_topic[i] += local_wt[t][i] - base_wt[i];
        for (std::size_t i = 0; i < base_tt.size(); ++i)
            s.topic_total[i] += local_tt[t][i] - base_tt[i];
    }
}

double joint_log_likelihood(const SamplerState& s) {
    const double k = s.k;
    const auto v = static_cast<double>(s.v);
    double ll = k * (std::lgamma(v * s.beta) - v * std::lgamma(s.beta));
    for (Eigen::Index w = 0; w < s.v; ++w)
        for (int t = 0; t < s.k; ++t)
            ll += std::lgamma(s.word_topic[static_cast<std::size_t>(w) * static_cast<std::size_t>(s.k) + static_cast<std::size_t>(t)] + s.beta);
    for (int t = 0; t < s.k; ++t)
        ll -= std::lgamma(static_cast<double>(s.topic_total[static_cast<std::size_t>(t)]) + v * s.beta);
    const double doc_norm = std::lgamma(k * s.alpha) - k * std::lgamma(s.alpha);
    for (std::size_t d = 0; d < s.words.size(); ++d) {
        ll += doc_norm - std::lgamma(static_cast<double>(s.words[d].size()) + k * s.alpha);
        for (int t = 0; t < s.k; ++t)
            ll += std::lgamma(s.dk(d, t) + s.alpha);
    }
    return ll;
}

void accumulate_sample(const SamplerState& s, Eigen::MatrixXd& phi_sum, Eigen::MatrixXd& theta_sum) {
    const double vbeta = static_cast<double>(s.v) * s.beta;
    for (int t = 0; t < s.k; ++t) {
        const double denom = static_cast<double>(s.topic_total[static_cast<std::size_t>(t)]) + vbeta;
        for (Eigen::Index w = 0; w < s.v; ++w)
            phi_sum(t, w) += (s.word_topic[static_cast<std::size_t>(w) * static_cast<std::size_t>(s.k) + static_cast<std::size_t>(t)] + s.beta) / denom;
    }
    const double kalpha = s.k * s.alpha;
    for (std::size_t d = 0; d < s.words.size(); ++d) {
        const double denom = static_cast<double>(s.words[d].size()) + kalpha;
        for (int t = 0; t < s.k; ++t)
            theta_sum(static_cast<Eigen::Index>(d), t) += (s.dk(d, t) + s.alpha) / denom;
    }
}

} // namespace

TopicModel fit(const DocumentTermMatrix& dtm, const LdaConfig& config) {
    config.validate();
    const Eigen::Index n_docs = dtm.n_docs();
    if (dtm.total_tokens() == 0)
        throw ValidationError("cannot fit LDA to an all-zero document-term matrix");

    SamplerState s;
    s.k = config.k;
    s.v = dtm.n_terms();
    s.alpha = config.alpha;
    s.beta = config.beta;
    s.words.resize(static_cast<std::size_t>(n_docs));
    s.topics.resize(static_cast<std::size_t>(n_docs));
    s.doc_topic.assign(static_cast<std::size_t>(n_docs) * static_cast<std::size_t>(s.k), 0);
    s.word_topic.assign(static_cast<std::size_t>(s.v) * static_cast<std::size_t>(s.k), 0);
    s.topic_total.assign(static_cast<std::size_t>(s.k), 0);
    s.rngs.reserve(static_cast<std::size_t>(n_docs));

    for (Eigen::Index d = 0; d < n_docs; ++d) {
        const auto du = static_cast<std::size_t>(d);
        const std::string id = du < dtm.doc_ids.size() ? dtm.doc_ids[du] : std::to_string(d);
        s.rngs.emplace_back(detail::stream_seed(config.seed, id));
        for (TermCounts::InnerIterator it(dtm.counts, d); it; ++it)
            for (std::int32_t c = 0; c < it.value(); ++c)
                s.words[du].push_back(static_cast<int>(it.col()));
        auto& rng = s.rngs.back();
        for (int w : s.words[du]) {
            const int t = std::min(static_cast<int>(detail::uniform01(rng) * s.k), s.k - 1);
            s.topics[du].push_back(t);
            ++s.dk(du, t);
            ++s.word_topic[static_cast<std::size_t>(w) * static_cast<std::size_t>(s.k) + static_cast<std::size_t>(t)];
            ++s.topic_total[static_cast<std::size_t>(t)];
        }
    }

    TopicModel model;
    model.config = config;
    model.vocabulary = dtm.vocabulary.terms;
    model.doc_ids = dtm.doc_ids;
    Eigen::MatrixXd phi_sum = Eigen::MatrixXd::Zero(s.k, s.v);
    Eigen::MatrixXd theta_sum = Eigen::MatrixXd::Zero(n_docs, s.k);
    int samples = 0;

    for (int sweep = 1; sweep <= config.iterations; ++sweep) {
        if (config.threads == 1)
            sweep_documents(s, 0, s.words.size(), s.word_topic, s.topic_total);
        else
            sweep_parallel(s, config.threads);

        if (sweep == 1 || sweep % config.sample_lag == 0) {
            const double ll = joint_log_likelihood(s);
            if (!std::isfinite(ll))
                throw NumericalError("non-finite log-likelihood at sweep " + std::to_string(sweep));
            model.trace_sweeps.push_back(sweep);
            model.log_likelihood_trace.push_back(ll);
        }
        const bool retain = sweep > config.burn_in && (sweep - config.burn_in) % config.sample_lag == 0;
        if (retain || (sweep == config.iterations && samples == 0)) {
            accumulate_sample(s, phi_sum, theta_sum);
            ++samples;
        }
    }

    model.phi = phi_sum / samples;
    model.theta = theta_sum / samples;
    // Remove accumulated rounding so rows sum to one.
    model.phi.array().colwise() /= model.phi.rowwise().sum().array();
    model.theta.array().colwise() /= model.theta.rowwise().sum().array();
    return model;
}

std::vector<std::string> top_words(const TopicModel& model, int topic, int n) {
    if (topic < 0 || topic >= model.num_topics())
        throw ValidationError("topic index " + std::to_string(topic) + " out of range");
    if (n < 1)
        throw ValidationError("n must be positive");
    std::vector<Eigen::Index> order(static_cast<std::size_t>(model.num_terms()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    const auto take = std::min<std::size_t>(static_cast<std::size_t>(n), order.size());
    const auto row = model.phi.row(topic);
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take), order.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          if (row(a) != row(b))
                              return row(a) > row(b);
                          return model.vocabulary[static_cast<std::size_t>(a)] < model.vocabulary[static_cast<std::size_t>(b)];
                      });
    std::vector<std::string> out;
    for (std::size_t i = 0; i < take; ++i)
        out.push_back(model.vocabulary[static_cast<std::size_t>(order[i])]);
    return out;
}

std::vector<std::pair<Eigen::Index, int>> row_counts(const DocumentTermMatrix& dtm, Eigen::Index row) {
    std::vector<std::pair<Eigen::Index, int>> out;
    for (TermCounts::InnerIterator it(dtm.counts, row); it; ++it)
        out.emplace_back(it.col(), it.value());
    return out;
}

InferenceResult infer_theta(const TopicModel& model, std::span<const std::pair<Eigen::Index, int>> doc_counts,
                            const InferenceConfig& config) {
    const int k = model.num_topics();
    if (config.iterations < 1 || config.burn_in < 0 || config.burn_in >= config.iterations)
        throw ValidationError("inference needs iterations > burn_in >= 0");
    std::vector<int> words;
    for (const auto& [term, count] : doc_counts) {
        if (term < 0 || term >= model.num_terms())
            throw ValidationError("term index outside the model vocabulary");
        if (count < 0)
            throw ValidationError("negative term count");
        words.insert(words.end(), static_cast<std::size_t>(count), static_cast<int>(term));
    }
    InferenceResult result;
    if (words.empty()) {
        result.theta = Eigen::VectorXd::Constant(k, 1.0 / k);
        result.empty_document = true;
        return result;
    }

    const double alpha = model.config.alpha;
    std::mt19937_64 rng(splitmix64(config.seed));
    std::vector<int> topics(words.size());
    Eigen::VectorXi counts = Eigen::VectorXi::Zero(k);
    for (std::size_t i = 0; i < words.size(); ++i) {
        topics[i] = std::min(static_cast<int>(detail::uniform01(rng) * k), k - 1);
        ++counts(topics[i]);
    }
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(k);
    std::vector<double> cumulative(static_cast<std::size_t>(k));
    const double denom = static_cast<double>(words.size()) + k * alpha;
    for (int sweep = 1; sweep <= config.iterations; ++sweep) {
        for (std::size_t i = 0; i < words.size(); ++i) {
            --counts(topics[i]);
            double acc = 0.0;
            for (int t = 0; t < k; ++t) {
                acc += (counts(t) + alpha) * model.phi(t, words[i]);
                cumulative[static_cast<std::size_t>(t)] = acc;
            }
            topics[i] = draw(cumulative, detail::uniform01(rng));
            ++counts(topics[i]);
        }
        if (sweep > config.burn_in)
            sum += (counts.cast<double>().array() + alpha).matrix() / denom;
    }
    result.theta = sum / sum.sum();
    return result;
}

double heldout_log_likelihood(const TopicModel& model, const DocumentTermMatrix& dtm,
                              std::span<const Eigen::Index> rows, const InferenceConfig& config) {
    double total = 0.0;
    for (Eigen::Index row : rows) {
        const auto counts = row_counts(dtm, row);
        const auto ru = static_cast<std::size_t>(row);
        InferenceConfig local = config;
        local.seed = detail::stream_seed(config.seed, ru < dtm.doc_ids.size() ? dtm.doc_ids[ru] : std::to_string(row));
        const Eigen::VectorXd theta = infer_theta(model, counts, local).theta;
        for (const auto& [term, count] : counts)
            total += count * std::log(theta.dot(model.phi.col(term)));
    }
    return total;
}

} // namespace petitions::lda
