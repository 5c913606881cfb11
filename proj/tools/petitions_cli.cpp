#include <exception>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "petitions/pipeline.hpp"

namespace {

using petitions::pipeline::PipelineConfig;

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

void add_options(CLI::App& app, PipelineConfig& c, std::string& metric) {
    app.add_option("--archive", c.archive, "Petition archive (JSONL)");
    app.add_option("--constituencies", c.constituencies, "Constituency metadata CSV (code,name,electorate)");
    app.add_option("--stopwords", c.stopwords, "Stopword file replacing the built-in list");
    app.add_option("--out-dir", c.out_dir, "Directory for every stage output")->capture_default_str();
    app.add_option("--topic-names", c.topic_names, "Issue names CSV (topic_index,name)");
    app.add_option("--answers", c.answers, "Intrusion answers CSV (topic,subject,position)");

    app.add_option("--window-start", c.window_start, "First day of the study window")->capture_default_str();
    app.add_option("--window-end", c.window_end, "Last day of the study window")->capture_default_str();

    app.add_option("--k", c.lda.k, "Number of topics")->capture_default_str();
    app.add_option("--alpha", c.lda.alpha, "Document-topic prior")->capture_default_str();
    app.add_option("--beta", c.lda.beta, "Topic-word prior")->capture_default_str();
    app.add_option("--iterations", c.lda.iterations, "Gibbs sweeps")->capture_default_str();
    app.add_option("--burn-in", c.lda.burn_in, "Sweeps discarded before averaging")->capture_default_str();
    app.add_option("--sample-lag", c.lda.sample_lag, "Sweeps between retained samples")->capture_default_str();
    app.add_option("--threads", c.lda.threads, "Sampler threads (1 is bit-reproducible)")->capture_default_str();

    app.add_option("--min-doc-fraction", c.min_doc_fraction, "Minimum document frequency as a fraction")
        ->capture_default_str();
    app.add_option("--audit-threshold", c.audit_threshold, "max-theta level for the assignment audit")
        ->capture_default_str();
    app.add_option("--entropy-window-days", c.entropy_window_days, "Trailing entropy window")->capture_default_str();
    app.add_option("--smoothing-windows", c.smoothing_windows, "Moving-average widths in days")->capture_default_str();
    app.add_option("--volatility-sigma", c.volatility_sigma, "Flag changes beyond this many SDs")
        ->capture_default_str();
    app.add_option("--success-threshold", c.success_threshold, "Signatures counted as success")->capture_default_str();
    app.add_option("--keep-fraction", c.keep_fraction, "Share of network edges kept when pruning")
        ->capture_default_str();
    app.add_option("--pam-k", c.pam_k, "Number of constituency clusters")->capture_default_str();
    app.add_option("--silhouette-k-min", c.silhouette_k_min, "Smallest k in the silhouette sweep")
        ->capture_default_str();
    app.add_option("--silhouette-k-max", c.silhouette_k_max, "Largest k in the silhouette sweep")
        ->capture_default_str();
    app.add_option("--metric", metric, "Cluster distance")
        ->check(CLI::IsMember({"euclidean", "manhattan"}))
        ->capture_default_str();
    app.add_option("--scaling-bins", c.scaling_bins, "Equal-count bins for the binned fit")->capture_default_str();
    app.add_option("--powerlaw-x-min", c.powerlaw_x_min, "Lower cutoff of the power-law fit")->capture_default_str();
    app.add_option("--powerlaw-upper", c.powerlaw_upper, "Fit only counts up to this value (0: no limit)")
        ->capture_default_str();
    app.add_option("--thresholds", c.thresholds, "Tail points checked for divergence")->capture_default_str();
    app.add_option("--xmin-candidates", c.xmin_candidates, "x_min values tried by xmin-scan")->capture_default_str();
    app.add_option("--grid-k", c.grid_k, "Topic counts tried by grid")->capture_default_str();
    app.add_option("--grid-alpha", c.grid_alpha, "alpha values tried by grid")->capture_default_str();
    app.add_option("--grid-beta", c.grid_beta, "beta values tried by grid")->capture_default_str();
    app.add_option("--heldout-fraction", c.heldout_fraction, "Share of petitions held out by grid")
        ->capture_default_str();
    app.add_option("--seed", c.seed, "Top-level seed; every stage seed derives from it")->capture_default_str();
}

} // namespace

int main(int argc, char** argv) {
    namespace pl = petitions::pipeline;
    PipelineConfig config;
    std::string metric = "euclidean";

    CLI::App app{"Petition opinion-mining pipeline"};
    app.set_version_flag("--version", std::string(PETITIONS_VERSION));
    app.set_config("--config", "", "TOML config file keyed by flag name; flags override it");
    app.allow_config_extras(CLI::config_extras_mode::error);
    app.require_subcommand(1, 1);
    add_options(app, config, metric);

    const std::map<std::string, void (*)(const PipelineConfig&, std::ostream&)> commands{
        {"ingest", pl::cmd_ingest},
        {"fit", pl::cmd_fit},
        {"report", pl::cmd_report},
        {"intrusion-score", pl::cmd_intrusion_score},
        {"grid", pl::cmd_grid},
        {"xmin-scan", pl::cmd_xmin_scan}};
    const std::map<std::string, std::string> descriptions{
        {"ingest", "Load the archive and write the corpus snapshot and rejects report"},
        {"fit", "Build the document-term matrix, fit LDA, write top words and intrusion sheets"},
        {"report", "Run issue, temporal, geographic and power-law analyses; write summary.json"},
        {"intrusion-score", "Score intrusion answers against the stored key"},
        {"grid", "Sweep LDA hyperparameters and report held-out log-likelihood"},
        {"xmin-scan", "Fit the power law at each candidate x_min"}};
    for (const auto& [name, fn] : commands)
        app.add_subcommand(name, descriptions.at(name))->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }
    config.metric = metric == "manhattan" ? petitions::geo::Metric::manhattan : petitions::geo::Metric::euclidean;

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        config.lda.validate();
        config.window();
    } catch (const std::exception& e) {
        std::cerr << "petitions " << name << ": invalid configuration: " << e.what() << '\n';
        return kExitUsage;
    }
    try {
        commands.at(name)(config, std::cerr);
    } catch (const pl::ConfigError& e) {
        std::cerr << "petitions " << name << ": " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "petitions " << name << ": " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
