#ifndef PETITIONS_PIPELINE_HPP
#define PETITIONS_PIPELINE_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "petitions/common.hpp"
#include "petitions/geo.hpp"
#include "petitions/lda.hpp"

namespace petitions::pipeline {

/// Bad usage or configuration (exit code 2).
class ConfigError : public Error {
public:
    using Error::Error;
};

struct PipelineConfig {
    std::filesystem::path archive;
    std::filesystem::path constituencies;
    std::filesystem::path stopwords;  ///< empty: built-in list
    std::filesystem::path out_dir = "out";
    std::filesystem::path topic_names;
    std::filesystem::path answers;

    std::string window_start = "2015-05-18";
    std::string window_end = "2017-05-03";

    lda::LdaConfig lda;
    double min_doc_fraction = 0.001;
    double audit_threshold = 0.95;
    int entropy_window_days = 7;
    std::vector<int> smoothing_windows{7, 30, 91, 182};
    double volatility_sigma = 3.0;
    std::int64_t success_threshold = 10000;
    double keep_fraction = 0.2;
    int pam_k = 6;
    int silhouette_k_min = 5;
    int silhouette_k_max = 10;
    geo::Metric metric = geo::Metric::euclidean;
    int scaling_bins = 10;
    std::int64_t powerlaw_x_min = 10;
    std::int64_t powerlaw_upper = 10000;  ///< fit only counts <= this; 0 disables
    std::vector<std::int64_t> thresholds{10000, 100000};
    std::vector<std::int64_t> xmin_candidates{1, 5, 10, 20, 50, 100, 1000};
    std::vector<int> grid_k{5, 10, 15, 20};
    std::vector<double> grid_alpha{0.1};
    std::vector<double> grid_beta{0.1};
    double heldout_fraction = 0.1;
    std::uint64_t seed = 20170503;

    /// Hash of every analytic setting; paths are excluded.
    std::string hash() const;
    MetadataHeader header() const;
    DateWindow window() const;
    /// LDA settings with the stage seed derived from `seed`.
    lda::LdaConfig lda_config() const;
};

// Stage outputs inside out_dir.
namespace files {
inline constexpr const char* corpus = "corpus.jsonl";
inline constexpr const char* rejects = "rejects.csv";
inline constexpr const char* constituencies = "constituencies.csv";
inline constexpr const char* ingest_report = "ingest_report.json";
inline constexpr const char* dtm = "dtm.json";
inline constexpr const char* vocabulary = "vocabulary.csv";
inline constexpr const char* model = "model.json";
inline constexpr const char* top_words = "top_words.csv";
inline constexpr const char* intrusion = "intrusion.csv";
inline constexpr const char* intrusion_key = "intrusion_key.csv";
inline constexpr const char* summary = "summary.json";
} // namespace files

/// Each command throws ConfigError for usage problems and Error for runtime failures;
/// progress goes to `log`.
void cmd_ingest(const PipelineConfig& config, std::ostream& log);
void cmd_fit(const PipelineConfig& config, std::ostream& log);
void cmd_report(const PipelineConfig& config, std::ostream& log);
void cmd_intrusion_score(const PipelineConfig& config, std::ostream& log);
void cmd_grid(const PipelineConfig& config, std::ostream& log);
void cmd_xmin_scan(const PipelineConfig& config, std::ostream& log);

/// Keys every summary.json must carry.
const std::vector<std::string>& summary_keys();

} // namespace petitions::pipeline

#endif
