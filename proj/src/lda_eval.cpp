#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <set>

#include "lda_internal.hpp"
#include "petitions/lda.hpp"

namespace petitions::lda {

namespace {

double median(Eigen::VectorXd values) {
    auto* begin = values.data();
    auto* end = begin + values.size();
    const auto n = static_cast<std::ptrdiff_t>(values.size());
    std::nth_element(begin, begin + n / 2, end);
    const double upper = begin[n / 2];
    if (n % 2 == 1)
        return upper;
    const double lower = *std::max_element(begin, begin + n / 2);
    return 0.5 * (lower + upper);
}

int parse_int_field(const std::string& s, const char* what) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(s, &used);
        if (used == s.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ValidationError(std::string("invalid ") + what + " '" + s + "'");
}

// Data rows of a CSV stream, skipping `#` metadata lines and the header.
std::vector<std::vector<std::string>> csv_rows(std::istream& in) {
    std::vector<std::vector<std::string>> rows;
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line == "\r")
            continue;
        if (!header) {
            header = true;
            continue;
        }
        rows.push_back(split_csv_line(line));
    }
    return rows;
}

} // namespace

std::vector<IntrusionInstance> make_intrusion_instances(const TopicModel& model, std::uint64_t seed) {
    const Eigen::Index v = model.num_terms();
    if (v < 7)
        throw ValidationError("word intrusion needs at least 7 vocabulary terms");
    std::vector<IntrusionInstance> out;
    for (int t = 0; t < model.num_topics(); ++t) {
        std::mt19937_64 rng(child_seed(seed, "intrusion/" + std::to_string(t)));
        std::vector<std::string> words = top_words(model, t, 5);
        const std::set<std::string> top(words.begin(), words.end());
        const double cutoff = median(model.phi.row(t).transpose());
        std::vector<std::size_t> pool;
        for (Eigen::Index w = 0; w < v; ++w) {
            const auto wu = static_cast<std::size_t>(w);
            if (model.phi(t, w) <= cutoff && !top.contains(model.vocabulary[wu]))
                pool.push_back(wu);
        }
        if (pool.empty())
            throw ValidationError("topic " + std::to_string(t) + " has no low-probability intruder candidates");
        const auto pick = std::min(static_cast<std::size_t>(detail::uniform01(rng) * static_cast<double>(pool.size())), pool.size() - 1);
        const std::string intruder = model.vocabulary[pool[pick]];
        words.push_back(intruder);
        detail::shuffle(words, rng);

        IntrusionInstance inst;
        inst.topic_index = t;
        inst.intruder_position = static_cast<int>(std::find(words.begin(), words.end(), intruder) - words.begin());
        inst.shown_words = std::move(words);
        out.push_back(std::move(inst));
    }
    return out;
}

IntrusionScore score_intrusion(std::span<const IntrusionInstance> instances, std::span<const IntrusionAnswer> answers,
                               double threshold) {
    std::map<int, std::size_t> by_topic;
    for (std::size_t i = 0; i < instances.size(); ++i)
        if (!by_topic.emplace(instances[i].topic_index, i).second)
            throw ValidationError("duplicate intrusion instance for topic " + std::to_string(instances[i].topic_index));
    std::set<int> subjects;
    std::set<std::pair<int, int>> seen;
    for (const auto& a : answers) {
        if (!by_topic.contains(a.topic))
            throw ValidationError("answer for unknown topic " + std::to_string(a.topic));
        if (!seen.emplace(a.topic, a.subject).second)
            throw ValidationError("subject " + std::to_string(a.subject) + " answered topic " + std::to_string(a.topic) + " twice");
        subjects.insert(a.subject);
    }
    if (instances.empty() || answers.size() != instances.size() * subjects.size())
        throw ValidationError("answer count does not match instances x subjects");

    IntrusionScore score;
    score.threshold = threshold;
    std::vector<int> correct(instances.size(), 0);
    int total_correct = 0;
    for (const auto& a : answers) {
        const std::size_t i = by_topic.at(a.topic);
        if (a.position == instances[i].intruder_position) {
            ++correct[i];
            ++total_correct;
        }
    }
    const auto n_subjects = static_cast<double>(subjects.size());
    for (std::size_t i = 0; i < instances.size(); ++i) {
        score.per_topic.push_back(correct[i] / n_subjects);
        if (score.per_topic.back() < threshold)
            score.below_threshold.push_back(instances[i].topic_index);
    }
    score.overall = total_correct / static_cast<double>(answers.size());
    return score;
}

void write_intrusion_csv(std::ostream& out, std::span<const IntrusionInstance> instances, const MetadataHeader& header) {
    out << header.csv_line() << "\ntopic,word1,word2,word3,word4,word5,word6\n";
    for (const auto& inst : instances) {
        out << inst.topic_index;
        for (const auto& w : inst.shown_words)
            out << ',' << csv_escape(w);
        out << '\n';
    }
}

void write_intrusion_key(std::ostream& out, std::span<const IntrusionInstance> instances, const MetadataHeader& header) {
    out << header.csv_line() << "\ntopic,intruder_position,intruder\n";
    for (const auto& inst : instances)
        out << inst.topic_index << ',' << inst.intruder_position << ','
            << csv_escape(inst.shown_words[static_cast<std::size_t>(inst.intruder_position)]) << '\n';
}

std::vector<IntrusionInstance> read_intrusion_instances(std::istream& sheet, std::istream& key) {
    std::map<int, int> positions;
    for (const auto& row : csv_rows(key)) {
        if (row.size() < 2)
            throw ValidationError("intrusion key rows need topic,intruder_position");
        positions[parse_int_field(row[0], "topic")] = parse_int_field(row[1], "intruder position");
    }
    std::vector<IntrusionInstance> out;
    for (const auto& row : csv_rows(sheet)) {
        if (row.size() != 7)
            throw ValidationError("intrusion sheet rows need topic plus six words");
        IntrusionInstance inst;
        inst.topic_index = parse_int_field(row[0], "topic");
        inst.shown_words.assign(row.begin() + 1, row.end());
        auto it = positions.find(inst.topic_index);
        if (it == positions.end() || it->second < 0 || it->second >= 6)
            throw ValidationError("no valid intruder position for topic " + row[0]);
        inst.intruder_position = it->second;
        out.push_back(std::move(inst));
    }
    return out;
}

std::vector<IntrusionAnswer> read_intrusion_answers(std::istream& in) {
    std::vector<IntrusionAnswer> out;
    for (const auto& row : csv_rows(in)) {
        if (row.size() != 3)
            throw ValidationError("answer rows need topic,subject,position");
        out.push_back({parse_int_field(row[0], "topic"), parse_int_field(row[1], "subject"),
                       parse_int_field(row[2], "position")});
    }
    return out;
}

AuditSample audit_assignments(const TopicModel& model, double threshold, std::uint64_t seed, int per_topic) {
    if (!(threshold > 0.0 && threshold <= 1.0))
        throw ValidationError("audit threshold must lie in (0, 1]");
    if (per_topic < 1)
        throw ValidationError("per_topic must be positive");
    std::vector<std::vector<Eigen::Index>> candidates(static_cast<std::size_t>(model.num_topics()));
    for (Eigen::Index d = 0; d < model.num_docs(); ++d) {
        Eigen::Index best = 0;
        const double top = model.theta.row(d).maxCoeff(&best);
        if (top > threshold)
            candidates[static_cast<std::size_t>(best)].push_back(d);
    }
    AuditSample sample;
    for (int t = 0; t < model.num_topics(); ++t) {
        auto& pool = candidates[static_cast<std::size_t>(t)];
        std::mt19937_64 rng(child_seed(seed, "audit/" + std::to_string(t)));
        detail::shuffle(pool, rng);
        const auto take = std::min(pool.size(), static_cast<std::size_t>(per_topic));
        if (take < static_cast<std::size_t>(per_topic))
            sample.notes.push_back("topic " + std::to_string(t) + ": only " + std::to_string(pool.size()) +
                                   " petitions exceed the threshold");
        for (std::size_t i = 0; i < take; ++i) {
            const Eigen::Index d = pool[i];
            const auto du = static_cast<std::size_t>(d);
            sample.entries.push_back({du < model.doc_ids.size() ? model.doc_ids[du] : std::to_string(d), t,
                                      model.theta.row(d).maxCoeff()});
        }
    }
    return sample;
}

std::vector<int> match_topics(const Eigen::MatrixXd& similarity) {
    if (similarity.rows() != similarity.cols() || similarity.rows() == 0)
        throw ValidationError("topic matching needs a non-empty square similarity matrix");
    const int n = static_cast<int>(similarity.rows());
    std::vector<int> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0);
    std::vector<int> best = perm;
    double best_score = -std::numeric_limits<double>::infinity();
    do {
        double score = 0.0;
        for (int i = 0; i < n; ++i)
            score += similarity(i, perm[static_cast<std::size_t>(i)]);
        if (score > best_score) {
            best_score = score;
            best = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

} // namespace petitions::lda
