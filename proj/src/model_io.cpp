#include <istream>
#include <ostream>

#include <json.hpp>

#include "petitions/lda.hpp"

namespace petitions::lda {

using nlohmann::json;

namespace {

json flatten(const Eigen::MatrixXd& m) {
    json out = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c)
            out.push_back(m(r, c));
    return out;
}

Eigen::MatrixXd unflatten(const json& values, Eigen::Index rows, Eigen::Index cols) {
    if (static_cast<Eigen::Index>(values.size()) != rows * cols)
        throw ValidationError("model snapshot matrix has the wrong number of entries");
    Eigen::MatrixXd m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = values[i++].get<double>();
    return m;
}

} // namespace

std::uint64_t vocabulary_hash(std::span<const std::string> terms) {
    std::string joined;
    for (const auto& t : terms) {
        joined += t;
        joined += '\n';
    }
    return fnv1a64(joined);
}

void write_model(std::ostream& out, const TopicModel& model, const MetadataHeader& header) {
    const LdaConfig& c = model.config;
    json doc = {
        {"meta", {{"tool_version", header.tool_version}, {"config_hash", header.config_hash}, {"seed", header.seed}}},
        {"format", "petitions-lda-model"},
        {"format_version", 1},
        {"config",
         {{"k", c.k}, {"alpha", c.alpha}, {"beta", c.beta}, {"iterations", c.iterations}, {"burn_in", c.burn_in},
          {"sample_lag", c.sample_lag}, {"seed", c.seed}, {"threads", c.threads}}},
        {"vocabulary_hash", to_hex(vocabulary_hash(model.vocabulary))},
        {"vocabulary", model.vocabulary},
        {"doc_ids", model.doc_ids},
        {"n_topics", model.num_topics()},
        {"n_terms", model.num_terms()},
        {"n_docs", model.num_docs()},
        {"phi", flatten(model.phi)},
        {"theta", flatten(model.theta)},
        {"trace_sweeps", model.trace_sweeps},
        {"log_likelihood_trace", model.log_likelihood_trace}};
    out << doc.dump() << '\n';
}

TopicModel read_model(std::istream& in) {
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("model snapshot is not valid JSON: ") + e.what());
    }
    if (doc.value("format", "") != "petitions-lda-model" || doc.value("format_version", 0) != 1)
        throw ValidationError("unsupported model snapshot format");
    TopicModel model;
    const json& c = doc.at("config");
    model.config.k = c.at("k");
    model.config.alpha = c.at("alpha");
    model.config.beta = c.at("beta");
    model.config.iterations = c.at("iterations");
    model.config.burn_in = c.at("burn_in");
    model.config.sample_lag = c.at("sample_lag");
    model.config.seed = c.at("seed");
    model.config.threads = c.at("threads");
    model.vocabulary = doc.at("vocabulary").get<std::vector<std::string>>();
    model.doc_ids = doc.at("doc_ids").get<std::vector<std::string>>();
    if (to_hex(vocabulary_hash(model.vocabulary)) != doc.at("vocabulary_hash").get<std::string>())
        throw ValidationError("model snapshot vocabulary hash mismatch");
    const auto k = doc.at("n_topics").get<Eigen::Index>();
    const auto v = doc.at("n_terms").get<Eigen::Index>();
    const auto d = doc.at("n_docs").get<Eigen::Index>();
    model.phi = unflatten(doc.at("phi"), k, v);
    model.theta = unflatten(doc.at("theta"), d, k);
    model.trace_sweeps = doc.at("trace_sweeps").get<std::vector<int>>();
    model.log_likelihood_trace = doc.at("log_likelihood_trace").get<std::vector<double>>();
    return model;
}

std::vector<std::string> default_topic_names(int k) {
    std::vector<std::string> names;
    for (int i = 0; i < k; ++i)
        names.push_back("topic_" + std::to_string(i));
    return names;
}

std::vector<std::string> read_topic_names(std::istream& in, int k) {
    auto names = default_topic_names(k);
    std::string line;
    bool header = false;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#' || line == "\r")
            continue;
        if (!header) {
            header = true;
            continue;
        }
        const auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ValidationError("topic-name rows need topic_index,name");
        int idx = -1;
        try {
            idx = std::stoi(fields[0]);
        } catch (const std::exception&) {
        }
        if (idx < 0 || idx >= k)
            throw ValidationError("topic index '" + fields[0] + "' out of range");
        names[static_cast<std::size_t>(idx)] = fields[1];
    }
    return names;
}

} // namespace petitions::lda
