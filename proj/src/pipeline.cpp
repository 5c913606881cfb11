#include "petitions/pipeline.hpp"

#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "petitions/corpus.hpp"
#include "petitions/issues.hpp"
#include "petitions/powerlaw.hpp"
#include "petitions/temporal.hpp"
#include "petitions/textprep.hpp"

namespace petitions::pipeline {

using nlohmann::json;
namespace fs = std::filesystem;

std::string PipelineConfig::hash() const {
    const json canonical = {
        {"window", {window_start, window_end}},
        {"lda",
         {{"k", lda.k}, {"alpha", lda.alpha}, {"beta", lda.beta}, {"iterations", lda.iterations},
          {"burn_in", lda.burn_in}, {"sample_lag", lda.sample_lag}, {"threads", lda.threads}}},
        {"min_doc_fraction", min_doc_fraction},
        {"audit_threshold", audit_threshold},
        {"entropy_window_days", entropy_window_days},
        {"smoothing_windows", smoothing_windows},
        {"volatility_sigma", volatility_sigma},
        {"success_threshold", success_threshold},
        {"keep_fraction", keep_fraction},
        {"pam_k", pam_k},
        {"silhouette_k", {silhouette_k_min, silhouette_k_max}},
        {"metric", metric == geo::Metric::euclidean ? "euclidean" : "manhattan"},
        {"scaling_bins", scaling_bins},
        {"powerlaw_x_min", powerlaw_x_min},
        {"powerlaw_upper", powerlaw_upper},
        {"thresholds", thresholds},
        {"xmin_candidates", xmin_candidates},
        {"grid", {{"k", grid_k}, {"alpha", grid_alpha}, {"beta", grid_beta}, {"heldout_fraction", heldout_fraction}}},
        {"seed", seed}};
    return to_hex(fnv1a64(canonical.dump()));
}

MetadataHeader PipelineConfig::header() const {
    MetadataHeader h;
    h.config_hash = hash();
    h.seed = seed;
    return h;
}

DateWindow PipelineConfig::window() const {
    try {
        return {parse_date(window_start), parse_date(window_end)};
    } catch (const ValidationError& e) {
        throw ConfigError(std::string("window: ") + e.what());
    }
}

lda::LdaConfig PipelineConfig::lda_config() const {
    lda::LdaConfig c = lda;
    c.seed = child_seed(seed, "lda");
    return c;
}

namespace {

json meta_json(const MetadataHeader& h) {
    return {{"tool_version", h.tool_version}, {"config_hash", h.config_hash}, {"seed", h.seed}};
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw IoError("cannot write '" + path.string() + "'");
    body(out);
    if (!out)
        throw IoError("failed writing '" + path.string() + "'");
}

std::ifstream open_input(const fs::path& path, const char* what) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError(std::string("missing ") + what + " '" + path.string() + "'");
    return in;
}

void require_file(const fs::path& path, const char* what) {
    if (path.empty())
        throw ConfigError(std::string("no ") + what + " given");
    if (!fs::exists(path))
        throw ConfigError(std::string(what) + " not found: '" + path.string() + "'");
}

void ensure_out_dir(const PipelineConfig& config) {
    std::error_code ec;
    fs::create_directories(config.out_dir, ec);
    if (ec)
        throw ConfigError("cannot create output directory '" + config.out_dir.string() + "': " + ec.message());
}

StopwordSet stopwords_for(const PipelineConfig& config) {
    if (config.stopwords.empty())
        return default_stopwords();
    require_file(config.stopwords, "stopword file");
    return load_stopwords(config.stopwords);
}

/// Corpus snapshot plus the constituency table written next to it.
Corpus load_snapshot(const PipelineConfig& config) {
    const fs::path snapshot = config.out_dir / files::corpus;
    if (!fs::exists(snapshot))
        throw IoError("missing corpus snapshot '" + snapshot.string() + "' (run ingest first)");
    IngestConfig ingest;
    ingest.window = config.window();
    const fs::path meta = config.out_dir / files::constituencies;
    if (fs::exists(meta))
        ingest.constituencies = load_constituencies(meta);
    return load_archive(snapshot, ingest).corpus;
}

lda::TopicModel load_model(const PipelineConfig& config) {
    auto in = open_input(config.out_dir / files::model, "model snapshot (run fit first)");
    return lda::read_model(in);
}

std::vector<std::string> topic_names(const PipelineConfig& config, int k) {
    if (config.topic_names.empty())
        return lda::default_topic_names(k);
    require_file(config.topic_names, "topic-name file");
    std::ifstream in(config.topic_names);
    return lda::read_topic_names(in, k);
}

// Runs one report stage, prefixing failures with the stage name.
template <typename F>
auto stage(const char* name, F&& f) -> decltype(f()) {
    try {
        return f();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

json edge_json(const issues::EdgeSummary& s) {
    return {{"mean", s.mean},
            {"max", s.max},
            {"max_pair", {s.max_pair.first, s.max_pair.second}},
            {"min", s.min},
            {"min_pair", {s.min_pair.first, s.min_pair.second}}};
}

json scaling_json(const geo::ScalingFit& f) {
    return {{"exponent", f.exponent},
            {"intercept", f.intercept},
            {"r_squared", f.r_squared},
            {"mode", f.mode == geo::ScalingMode::raw ? "raw" : "binned"},
            {"n", f.n}};
}

std::vector<std::int64_t> signature_counts(const Corpus& corpus) {
    std::vector<std::int64_t> out;
    out.reserve(corpus.size());
    for (const auto& p : corpus.petitions)
        out.push_back(p.uk_signatures());
    return out;
}

json fit_json(const powerlaw::PowerLawFit& f) {
    return {{"x_min", f.x_min}, {"exponent", f.exponent}, {"n_tail", f.n_tail}, {"ks_distance", f.ks_distance}};
}

} // namespace

const std::vector<std::string>& summary_keys() {
    static const std::vector<std::string> keys{"meta",     "corpus",  "lda",     "prevalence", "success_probability",
                                               "networks", "entropy", "scaling", "geo",        "powerlaw",
                                               "clusters"};
    return keys;
}

void cmd_ingest(const PipelineConfig& config, std::ostream& log) {
    require_file(config.archive, "archive");
    IngestConfig ingest;
    ingest.window = config.window();
    if (!config.constituencies.empty()) {
        require_file(config.constituencies, "constituency metadata");
        ingest.constituencies = load_constituencies(config.constituencies);
    }
    ensure_out_dir(config);
    const LoadResult loaded = load_archive(config.archive, ingest);
    const MetadataHeader header = config.header();
    write_file(config.out_dir / files::corpus, [&](std::ostream& o) { write_snapshot(o, loaded.corpus, header); });
    write_file(config.out_dir / files::rejects, [&](std::ostream& o) { write_rejects(o, loaded.report, header); });
    if (!ingest.constituencies.empty())
        write_file(config.out_dir / files::constituencies,
                   [&](std::ostream& o) { write_constituencies(o, ingest.constituencies, header); });

    const IngestReport& r = loaded.report;
    const json report = {{"meta", meta_json(header)},
                         {"records_read", r.records_read},
                         {"accepted", r.accepted},
                         {"not_accepted", r.not_accepted},
                         {"outside_window", r.outside_window},
                         {"malformed", r.rejects.size()},
                         {"overseas_signatures", r.overseas_signatures},
                         {"unknown_constituency_signatures", r.unknown_constituency_signatures},
                         {"uk_signatures", uk_signature_total(loaded.corpus)},
                         {"warnings", r.warnings.size()}};
    write_file(config.out_dir / files::ingest_report, [&](std::ostream& o) { o << report.dump(2) << '\n'; });
    for (const auto& w : r.warnings)
        log << "warning: " << w << '\n';
    log << "ingest: " << r.accepted << " accepted of " << r.records_read << " records (" << r.not_accepted
        << " not accepted, " << r.outside_window << " outside window, " << r.rejects.size() << " malformed); "
        << uk_signature_total(loaded.corpus) << " UK signatures\n";
}

void cmd_fit(const PipelineConfig& config, std::ostream& log) {
    const Corpus corpus = load_snapshot(config);
    const StopwordSet stopwords = stopwords_for(config);
    const MetadataHeader header = config.header();
    const DtmBuild built = build_dtm(corpus, stopwords, config.min_doc_fraction);
    log << "dtm: vocabulary " << built.stats.vocabulary_before << " -> " << built.stats.vocabulary_after
        << " terms; mean tokens per petition " << built.stats.mean_tokens_before << " -> "
        << built.stats.mean_tokens_after << '\n';
    write_file(config.out_dir / files::dtm, [&](std::ostream& tri) {
        write_file(config.out_dir / files::vocabulary,
                   [&](std::ostream& voc) { write_dtm(tri, voc, built.dtm, header); });
    });
    const json stats = {{"meta", meta_json(header)},
                        {"vocabulary_before", built.stats.vocabulary_before},
                        {"vocabulary_after", built.stats.vocabulary_after},
                        {"mean_tokens_before", built.stats.mean_tokens_before},
                        {"mean_tokens_after", built.stats.mean_tokens_after},
                        {"min_doc_frequency", built.stats.min_doc_frequency}};
    write_file(config.out_dir / "dtm_stats.json", [&](std::ostream& o) { o << stats.dump(2) << '\n'; });

    const lda::TopicModel model = lda::fit(built.dtm, config.lda_config());
    write_file(config.out_dir / files::model, [&](std::ostream& o) { lda::write_model(o, model, header); });

    const auto names = topic_names(config, model.num_topics());
    write_file(config.out_dir / files::top_words, [&](std::ostream& o) {
        o << header.csv_line() << "\ntopic,name,word1,word2,word3,word4,word5,word6\n";
        for (int t = 0; t < model.num_topics(); ++t) {
            o << t << ',' << csv_escape(names[static_cast<std::size_t>(t)]);
            for (const auto& w : lda::top_words(model, t, 6))
                o << ',' << csv_escape(w);
            o << '\n';
        }
    });
    if (model.num_terms() >= 7) {
        const auto instances = lda::make_intrusion_instances(model, child_seed(config.seed, "intrusion"));
        write_file(config.out_dir / files::intrusion,
                   [&](std::ostream& o) { lda::write_intrusion_csv(o, instances, header); });
        write_file(config.out_dir / files::intrusion_key,
                   [&](std::ostream& o) { lda::write_intrusion_key(o, instances, header); });
    }
    const auto audit = lda::audit_assignments(model, config.audit_threshold, child_seed(config.seed, "audit"));
    write_file(config.out_dir / "audit.csv", [&](std::ostream& o) {
        o << header.csv_line() << "\npetition_id,topic,name,max_theta,action\n";
        std::map<std::string, const Petition*> by_id;
        for (const auto& p : corpus.petitions)
            by_id.emplace(p.id, &p);
        for (const auto& e : audit.entries)
            o << csv_escape(e.petition_id) << ',' << e.topic << ',' << csv_escape(names[static_cast<std::size_t>(e.topic)])
              << ',' << format_real(e.max_theta) << ',' << csv_escape(by_id.at(e.petition_id)->action)
              << '\n';
    });
    for (const auto& n : audit.notes)
        log << "audit: " << n << '\n';
    log << "fit: " << model.num_topics() << " topics over " << model.num_docs() << " petitions, final log-likelihood "
        << model.log_likelihood_trace.back() << '\n';
}

void cmd_report(const PipelineConfig& config, std::ostream& log) {
    const Corpus corpus = load_snapshot(config);
    const lda::TopicModel model = load_model(config);
    if (corpus.constituencies.empty())
        throw IoError("missing constituency metadata '" + (config.out_dir / files::constituencies).string() +
                      "' (run ingest with --constituencies)");
    const MetadataHeader header = config.header();
    const auto names = topic_names(config, model.num_topics());
    const int k = model.num_topics();
    const fs::path& out = config.out_dir;
    json summary;
    summary["meta"] = meta_json(header);
    summary["corpus"] = {{"petitions", corpus.size()}, {"uk_signatures", uk_signature_total(corpus)}};
    summary["lda"] = {{"k", k}, {"mean_max_theta", model.theta.rowwise().maxCoeff().mean()}};

    stage("issues", [&] {
        const auto prev = issues::prevalence(model, corpus);
        const auto success = issues::success_probability(model, corpus, config.success_threshold);
        write_file(out / "prevalence.csv",
                   [&](std::ostream& o) { issues::write_prevalence_csv(o, prev, success, names, header); });
        json raw = json::array();
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (const auto& v : success.raw) {
            raw.push_back(v ? json(*v) : json(nullptr));
            if (v) {
                lo = std::min(lo, *v);
                hi = std::max(hi, *v);
            }
        }
        summary["prevalence"] = {{"names", names},
                                 {"by_petitions", std::vector<double>(prev.by_petitions.begin(), prev.by_petitions.end())},
                                 {"rank_by_petitions", prev.rank_by_petitions},
                                 {"by_signatures", std::vector<double>(prev.by_signatures.begin(), prev.by_signatures.end())},
                                 {"rank_by_signatures", prev.rank_by_signatures}};
        summary["success_probability"] = {
            {"threshold", config.success_threshold},
            {"raw", raw},
            {"smoothed", std::vector<double>(success.smoothed.begin(), success.smoothed.end())},
            {"min", std::isfinite(lo) ? json(lo) : json(nullptr)},
            {"max", std::isfinite(hi) ? json(hi) : json(nullptr)}};

        json networks;
        for (const auto& net : {issues::co_occurrence_network(model, prev.by_signatures),
                                issues::word_distribution_network(model, prev.by_signatures)}) {
            const std::string kind = net.kind == issues::NetworkKind::co_occurrence ? "co_occurrence" : "word_distribution";
            write_file(out / ("network_" + kind + "_edges.csv"), [&](std::ostream& edges) {
                write_file(out / ("network_" + kind + "_nodes.csv"),
                           [&](std::ostream& nodes) { issues::write_network_csv(edges, nodes, net, names, header); });
            });
            const auto pruned = issues::prune_network(net, config.keep_fraction);
            write_file(out / ("network_" + kind + "_pruned_edges.csv"), [&](std::ostream& edges) {
                std::ostringstream ignored;
                issues::write_network_csv(edges, ignored, pruned, names, header);
            });
            networks[kind] = edge_json(issues::summarize_edges(net.weights));
        }
        summary["networks"] = networks;
    });

    stage("temporal", [&] {
        const auto series = temporal::build_series(model, corpus);
        write_file(out / "series_raw.csv", [&](std::ostream& o) { temporal::write_series_csv(o, series, header); });
        for (int w : config.smoothing_windows) {
            const auto smoothed = temporal::smooth(series, w);
            write_file(out / ("series_smooth_" + std::to_string(w) + ".csv"),
                       [&](std::ostream& o) { temporal::write_series_csv(o, smoothed, header); });
        }
        auto es = temporal::entropy_series(series, config.entropy_window_days);
        const auto vol = temporal::detect_volatility(es, config.volatility_sigma);
        for (const auto& v : vol.dates)
            es.flags.push_back(v.date);
        write_file(out / "entropy.csv", [&](std::ostream& o) { temporal::write_entropy_csv(o, es, vol, header); });
        const auto stats = temporal::entropy_stats(es);
        json flagged = json::array();
        int increases = 0;
        for (const auto& v : vol.dates) {
            const bool up = v.direction == temporal::Direction::increase;
            increases += up;
            flagged.push_back({{"date", format_date(v.date)}, {"pct_change", v.pct_change}, {"direction", up ? "increase" : "decrease"}});
        }
        summary["entropy"] = {{"window_days", config.entropy_window_days},
                              {"mean", stats.mean},
                              {"min", stats.min},
                              {"max", stats.max},
                              {"defined_days", stats.defined},
                              {"pct_change_mean", vol.mean},
                              {"pct_change_sd", vol.sd},
                              {"flagged", flagged},
                              {"flagged_count", vol.dates.size()},
                              {"increases", increases},
                              {"decreases", static_cast<int>(vol.dates.size()) - increases}};
    });

    stage("geo", [&] {
        auto profiles = geo::profile_constituencies(model, corpus, corpus.constituencies);
        const auto raw = geo::scaling_fit(profiles, geo::ScalingMode::raw);
        const auto binned = geo::scaling_fit(profiles, geo::ScalingMode::binned, config.scaling_bins);
        write_file(out / "scaling_raw.json", [&](std::ostream& o) { geo::write_scaling_json(o, raw, header); });
        write_file(out / "scaling_binned.json", [&](std::ostream& o) { geo::write_scaling_json(o, binned, header); });
        summary["scaling"] = {{"raw", scaling_json(raw)}, {"binned", scaling_json(binned)}};

        const std::uint64_t pam_seed = child_seed(config.seed, "pam");
        const auto clusters = geo::pam_cluster(profiles, config.pam_k, pam_seed, config.metric);
        geo::assign_clusters(profiles, clusters);
        write_file(out / "profiles.csv", [&](std::ostream& o) { geo::write_profiles_csv(o, profiles, k, header); });
        write_file(out / "clusters.csv", [&](std::ostream& o) { geo::write_clusters_csv(o, profiles, clusters, header); });
        const auto means = geo::cluster_issue_profile(clusters, profiles);
        write_file(out / "cluster_issue_share.csv",
                   [&](std::ostream& o) { geo::write_cluster_profile_csv(o, means, names, header); });
        const auto sweep = geo::silhouette_sweep(profiles, config.silhouette_k_min, config.silhouette_k_max, pam_seed,
                                                 config.metric);
        json sil = json::array();
        for (const auto& s : sweep)
            sil.push_back({{"k", s.k}, {"silhouette", s.silhouette}, {"total_cost", s.total_cost}});
        write_file(out / "silhouette.csv", [&](std::ostream& o) {
            o << header.csv_line() << "\nk,silhouette,total_cost\n";
            for (const auto& s : sweep)
                o << s.k << ',' << format_real(s.silhouette) << ',' << format_real(s.total_cost) << '\n';
        });

        std::vector<int> sizes(static_cast<std::size_t>(clusters.k), 0);
        for (int a : clusters.assignments)
            if (a >= 0)
                ++sizes[static_cast<std::size_t>(a)];
        summary["clusters"] = {{"k", clusters.k},
                               {"sizes", sizes},
                               {"total_cost", clusters.total_cost},
                               {"medoids", [&] {
                                    std::vector<std::string> codes;
                                    for (int m : clusters.medoid_indices)
                                        codes.push_back(profiles[static_cast<std::size_t>(m)].meta.code);
                                    return codes;
                                }()},
                               {"silhouette", sil}};

        std::int64_t attributed = 0;
        double per_elector = 0.0;
        std::size_t with_signatures = 0;
        for (const auto& p : profiles) {
            attributed += p.total_signatures;
            per_elector += p.per_elector;
            with_signatures += p.total_signatures > 0;
        }
        const auto c = static_cast<double>(profiles.size());
        summary["geo"] = {{"constituencies", profiles.size()},
                          {"with_signatures", with_signatures},
                          {"attributed_signatures", attributed},
                          {"unattributed_signatures", uk_signature_total(corpus) - attributed},
                          {"mean_signatures_per_constituency", static_cast<double>(attributed) / c},
                          {"mean_per_elector", per_elector / c}};
    });

    stage("powerlaw", [&] {
        const auto counts = signature_counts(corpus);
        const auto c = powerlaw::ccdf(counts);
        write_file(out / "ccdf.csv", [&](std::ostream& o) { powerlaw::write_ccdf_csv(o, c, header); });
        std::vector<std::int64_t> fit_counts;
        for (auto x : counts)
            if (config.powerlaw_upper <= 0 || x <= config.powerlaw_upper)
                fit_counts.push_back(x);
        const auto fit = powerlaw::fit_powerlaw(fit_counts, config.powerlaw_x_min);
        std::vector<std::int64_t> reachable;
        for (auto t : config.thresholds)
            if (t >= fit.x_min)
                reachable.push_back(t);
        const auto div = powerlaw::threshold_divergence(counts, fit, reachable);
        json divergences = json::object();
        for (std::size_t i = 0; i < reachable.size(); ++i)
            divergences[std::to_string(reachable[i])] = div[i] ? json(*div[i]) : json(nullptr);
        json report = fit_json(fit);
        report["upper"] = config.powerlaw_upper;
        report["divergences"] = divergences;
        summary["powerlaw"] = report;
        json file = report;
        file["meta"] = meta_json(header);
        write_file(out / "powerlaw.json", [&](std::ostream& o) { o << file.dump(2) << '\n'; });
    });

    write_file(out / files::summary, [&](std::ostream& o) { o << summary.dump(2) << '\n'; });
    log << "report: wrote " << (out / files::summary).string() << '\n';
}

void cmd_intrusion_score(const PipelineConfig& config, std::ostream& log) {
    require_file(config.answers, "answers file");
    auto sheet = open_input(config.out_dir / files::intrusion, "intrusion sheet");
    auto key = open_input(config.out_dir / files::intrusion_key, "intrusion key");
    const auto instances = lda::read_intrusion_instances(sheet, key);
    std::ifstream answers_in(config.answers);
    const auto answers = lda::read_intrusion_answers(answers_in);
    const auto score = lda::score_intrusion(instances, answers);
    const MetadataHeader header = config.header();
    write_file(config.out_dir / "intrusion_scores.csv", [&](std::ostream& o) {
        o << header.csv_line() << "\ntopic,accuracy,below_threshold\n";
        for (std::size_t i = 0; i < instances.size(); ++i)
            o << instances[i].topic_index << ',' << format_real(score.per_topic[i]) << ','
              << (score.per_topic[i] < score.threshold ? 1 : 0) << '\n';
        o << "overall," << format_real(score.overall) << ",\n";
    });
    log << "intrusion: overall accuracy " << score.overall << ", " << score.below_threshold.size()
        << " topics below " << score.threshold << '\n';
}

void cmd_grid(const PipelineConfig& config, std::ostream& log) {
    const Corpus corpus = load_snapshot(config);
    const DtmBuild built = build_dtm(corpus, stopwords_for(config), config.min_doc_fraction);
    const DocumentTermMatrix& dtm = built.dtm;
    if (!(config.heldout_fraction > 0.0 && config.heldout_fraction < 1.0))
        throw ConfigError("heldout_fraction must lie in (0, 1)");

    // Held-out rows are chosen by hashing petition ids, so the split ignores row order.
    const std::uint64_t split_seed = child_seed(config.seed, "grid/split");
    std::vector<Eigen::Index> heldout;
    std::vector<std::string> train_ids;
    std::vector<Eigen::Triplet<std::int32_t>> train_cells;
    for (Eigen::Index d = 0; d < dtm.n_docs(); ++d) {
        const auto& id = dtm.doc_ids[static_cast<std::size_t>(d)];
        const double u = static_cast<double>(splitmix64(split_seed ^ fnv1a64(id)) >> 11) * 0x1.0p-53;
        if (u < config.heldout_fraction) {
            heldout.push_back(d);
            continue;
        }
        const auto row = static_cast<int>(train_ids.size());
        train_ids.push_back(id);
        for (TermCounts::InnerIterator it(dtm.counts, d); it; ++it)
            train_cells.emplace_back(row, static_cast<int>(it.col()), it.value());
    }
    DocumentTermMatrix train;
    train.vocabulary = dtm.vocabulary;
    train.doc_ids = train_ids;
    train.counts.resize(static_cast<Eigen::Index>(train_ids.size()), dtm.n_terms());
    train.counts.setFromTriplets(train_cells.begin(), train_cells.end());
    std::int64_t heldout_tokens = 0;
    for (auto d : heldout)
        for (const auto& [term, count] : lda::row_counts(dtm, d))
            heldout_tokens += count;

    const MetadataHeader header = config.header();
    std::ostringstream rows;
    for (int k : config.grid_k) {
        for (double alpha : config.grid_alpha) {
            for (double beta : config.grid_beta) {
                lda::LdaConfig c = config.lda_config();
                c.k = k;
                c.alpha = alpha;
                c.beta = beta;
                const auto model = lda::fit(train, c);
                lda::InferenceConfig inf;
                inf.seed = child_seed(config.seed, "grid/infer");
                const double ll = lda::heldout_log_likelihood(model, dtm, heldout, inf);
                const double per_token = heldout_tokens > 0 ? ll / static_cast<double>(heldout_tokens) : 0.0;
                rows << k << ',' << format_real(alpha) << ',' << format_real(beta) << ',' << format_real(ll) << ','
                     << format_real(per_token) << '\n';
                log << "grid: k=" << k << " alpha=" << alpha << " beta=" << beta << " held-out log-likelihood " << ll
                    << '\n';
            }
        }
    }
    write_file(config.out_dir / "grid.csv", [&](std::ostream& o) {
        o << header.csv_line() << "\nk,alpha,beta,heldout_log_likelihood,per_token\n" << rows.str();
    });
}

void cmd_xmin_scan(const PipelineConfig& config, std::ostream& log) {
    const Corpus corpus = load_snapshot(config);
    std::vector<std::int64_t> counts;
    for (const auto& p : corpus.petitions)
        if (config.powerlaw_upper <= 0 || p.uk_signatures() <= config.powerlaw_upper)
            counts.push_back(p.uk_signatures());
    const auto scan = powerlaw::scan_xmin(counts, config.xmin_candidates);
    const MetadataHeader header = config.header();
    write_file(config.out_dir / "xmin_scan.csv", [&](std::ostream& o) {
        o << header.csv_line() << "\nx_min,exponent,n_tail,ks_distance,best\n";
        for (std::size_t i = 0; i < scan.fits.size(); ++i) {
            const auto& f = scan.fits[i];
            o << f.x_min << ',' << format_real(f.exponent) << ',' << f.n_tail << ',' << format_real(f.ks_distance) << ','
              << (i == scan.best ? 1 : 0) << '\n';
        }
    });
    const auto& best = scan.fits[scan.best];
    log << "xmin-scan: KS-minimizing x_min " << best.x_min << " (exponent " << best.exponent << ", KS "
        << best.ks_distance << ")\n";
}

} // namespace petitions::pipeline
