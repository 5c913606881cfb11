// Acceptance suite: one PASS/FAIL/SKIP line per criterion.
// Tier 1 (1-8) needs no external data. Tier 2 (9-15) runs the full pipeline on the
// petitions archive named by PETITIONS_ARCHIVE and PETITIONS_CONSTITUENCIES.

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "oracles.hpp"
#include "petitions/geo.hpp"
#include "petitions/lda.hpp"
#include "petitions/pipeline.hpp"
#include "petitions/porter.hpp"
#include "petitions/powerlaw.hpp"
#include "petitions/temporal.hpp"

using namespace petitions;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

enum class Outcome { pass, fail, skip };

struct Verdict {
    Outcome outcome;
    std::string detail;
};

Verdict verdict(bool ok, std::string detail) {
    return {ok ? Outcome::pass : Outcome::fail, std::move(detail)};
}

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string serialized(const lda::TopicModel& m) {
    std::ostringstream out;
    lda::write_model(out, m, MetadataHeader{});
    return out.str();
}

// ---------------------------------------------------------------------------
// Tier 1

Verdict planted_topic_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto corpus = oracles::planted_corpus(200, 3, 30);
    lda::LdaConfig c;
    c.k = 3;
    c.seed = 2017;
    const auto model = lda::fit(corpus.dtm, c);
    const auto cosines = oracles::matched_cosines(corpus.phi, model.phi);
    const double worst = *std::min_element(cosines.begin(), cosines.end());
    const double secs = seconds_since(t0);
    return verdict(worst >= 0.9 && secs < 60.0,
                   "min matched cosine " + fmt("%.4f", worst) + " (>= 0.9), " + fmt("%.2f", secs) + " s (< 60)");
}

Verdict lda_normalization_determinism() {
    const auto corpus = oracles::planted_corpus(200, 3, 30);
    lda::LdaConfig c;
    c.k = 3;
    c.iterations = 300;
    c.burn_in = 100;
    c.seed = 99;
    const auto a = lda::fit(corpus.dtm, c);
    const auto b = lda::fit(corpus.dtm, c);
    const double phi_err = (a.phi.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const double theta_err = (a.theta.rowwise().sum().array() - 1.0).abs().maxCoeff();
    const bool identical = serialized(a) == serialized(b);
    return verdict(phi_err <= 1e-9 && theta_err <= 1e-9 && identical,
                   "max row-sum error phi " + fmt("%.1e", phi_err) + ", theta " + fmt("%.1e", theta_err) +
                       "; repeat fit " + (identical ? "byte-identical" : "DIFFERS"));
}

Verdict powerlaw_recovery() {
    const auto t0 = std::chrono::steady_clock::now();
    const oracles::DiscretePowerLaw law(2.0, 10);
    int within = 0;
    for (int trial = 0; trial < 100; ++trial) {
        std::mt19937_64 rng(50000 + static_cast<std::uint64_t>(trial));
        std::vector<std::int64_t> data(10000);
        for (auto& x : data)
            x = law(rng);
        within += std::abs(powerlaw::fit_powerlaw(data, 10).exponent - 2.0) <= 0.05;
    }
    const double secs = seconds_since(t0);
    return verdict(within >= 95 && secs < 30.0, std::to_string(within) + "/100 trials within 2.0 +- 0.05 (>= 95), " +
                                                    fmt("%.2f", secs) + " s (< 30)");
}

Verdict entropy_anchors() {
    const double uniform = *temporal::normalized_entropy(Eigen::VectorXd::Constant(10, 1.0));
    Eigen::VectorXd single = Eigen::VectorXd::Zero(10);
    single(3) = 42.0;
    const double degenerate = *temporal::normalized_entropy(single);
    const auto jump = oracles::entropy_jump_fixture();
    const auto flagged = temporal::detect_volatility(jump.series);
    const bool one_flag = flagged.dates.size() == 1 && flagged.dates[0].date == jump.jump_date;
    return verdict(std::abs(uniform - 1.0) <= 1e-12 && degenerate == 0.0 && one_flag,
                   "uniform h = 1 " + fmt("%+.1e", uniform - 1.0) + ", single-issue h = " + fmt("%g", degenerate) +
                       ", 10-sigma jump flags " + std::to_string(flagged.dates.size()) + " date(s)" +
                       (one_flag ? " (the jump)" : ""));
}

Verdict pam_optimality() {
    std::mt19937_64 rng(5);
    int optimal = 0;
    int swap_optimal = 0;
    for (int fixture = 0; fixture < 50; ++fixture) {
        const int n = 4 + static_cast<int>(oracles::uniform_index(rng, 9));
        const int k = 1 + static_cast<int>(oracles::uniform_index(rng, 3));
        Eigen::MatrixXd points(n, 3);
        for (Eigen::Index i = 0; i < points.size(); ++i)
            points.data()[i] = oracles::uniform01(rng);
        const auto d = geo::distance_matrix(points);
        const auto r = geo::pam(d, k, static_cast<std::uint64_t>(fixture));
        optimal += r.total_cost <= oracles::exhaustive_medoid_cost(d, k) + 1e-12;
        swap_optimal += oracles::swap_optimal(d, r.medoid_indices);
    }
    return verdict(optimal == 50 && swap_optimal == 50, std::to_string(optimal) + "/50 match exhaustive optimum, " +
                                                            std::to_string(swap_optimal) + "/50 one-swap optimal");
}

Verdict zscore_columns() {
    std::mt19937_64 rng(6);
    double worst_mean = 0.0;
    double worst_sd = 0.0;
    for (int fixture = 0; fixture < 25; ++fixture) {
        const int n = 3 + fixture * 5;
        const int k = 2 + fixture % 9;
        std::vector<ConstituencyMeta> meta;
        Eigen::MatrixXd s(n, k);
        for (int c = 0; c < n; ++c) {
            meta.push_back({"C" + std::to_string(c), "c", 60000});
            for (int i = 0; i < k; ++i)
                s(c, i) = std::floor(5000.0 * oracles::uniform01(rng) * oracles::uniform01(rng)) + 1.0;
        }
        const auto profiles = geo::profiles_from_issue_signatures(meta, s);
        Eigen::MatrixXd z(n, k);
        for (int c = 0; c < n; ++c)
            z.row(c) = profiles[static_cast<std::size_t>(c)].z_scores->transpose();
        for (int i = 0; i < k; ++i) {
            const double mean = z.col(i).mean();
            const double sd = std::sqrt((z.col(i).array() - mean).square().sum() / (n - 1));
            worst_mean = std::max(worst_mean, std::abs(mean));
            worst_sd = std::max(worst_sd, std::abs(sd - 1.0));
        }
    }
    return verdict(worst_mean <= 1e-9 && worst_sd <= 1e-9, "25 fixtures: max |mean| " + fmt("%.1e", worst_mean) +
                                                               ", max |sd - 1| " + fmt("%.1e", worst_sd));
}

Verdict scaling_collinear() {
    std::vector<geo::ConstituencyProfile> profiles;
    for (std::int64_t m = 20; m < 120; ++m) {
        geo::ConstituencyProfile p;
        p.meta = {"C" + std::to_string(m), "c", m * m};
        p.total_signatures = 7 * m * m * m;  // signatures = 7 electorate^1.5
        profiles.push_back(p);
    }
    const auto raw = geo::scaling_fit(profiles, geo::ScalingMode::raw);
    const auto binned = geo::scaling_fit(profiles, geo::ScalingMode::binned);
    const double err = std::max(std::abs(raw.exponent - 1.5), std::abs(binned.exponent - 1.5));
    return verdict(err <= 1e-9 && raw.r_squared == 1.0,
                   "exponent error " + fmt("%.1e", err) + " (<= 1e-9), R^2 = " + fmt("%.15g", raw.r_squared));
}

Verdict share_zscore_oracle() {
    const auto f = oracles::three_constituency_fixture();
    const auto profiles = geo::profiles_from_issue_signatures(f.meta, f.issue_signatures);
    double share_err = 0.0;
    double z_err = 0.0;
    for (int c = 0; c < 3; ++c) {
        const auto& p = profiles[static_cast<std::size_t>(c)];
        share_err = std::max(share_err, (*p.issue_share - f.shares.row(c).transpose()).cwiseAbs().maxCoeff());
        z_err = std::max(z_err, (*p.z_scores - f.z.row(c).transpose()).cwiseAbs().maxCoeff());
    }
    const bool excluded = !profiles[3].issue_share && !profiles[3].z_scores;
    return verdict(share_err == 0.0 && z_err <= 1e-15 && excluded,
                   "share error " + fmt("%.1e", share_err) + ", z error " + fmt("%.1e", z_err) +
                       (excluded ? ", unsigned constituency excluded" : ", unsigned constituency NOT excluded"));
}

// ---------------------------------------------------------------------------
// Tier 2

struct ArchiveRun {
    pipeline::PipelineConfig config;
    json ingest;
    json dtm_stats;
    json summary;
    lda::TopicModel model;
    double seconds = 0.0;
};

std::optional<ArchiveRun> run_archive_pipeline() {
    const char* archive = std::getenv("PETITIONS_ARCHIVE");
    const char* constituencies = std::getenv("PETITIONS_CONSTITUENCIES");
    if (!archive || !constituencies)
        return std::nullopt;
    ArchiveRun run;
    run.config.archive = archive;
    run.config.constituencies = constituencies;
    const char* out = std::getenv("PETITIONS_ACCEPTANCE_OUT");
    run.config.out_dir = out ? fs::path(out) : fs::temp_directory_path() / "petitions_acceptance";
    const auto t0 = std::chrono::steady_clock::now();
    std::ostringstream log;
    pipeline::cmd_ingest(run.config, log);
    pipeline::cmd_fit(run.config, log);
    pipeline::cmd_report(run.config, log);
    run.seconds = seconds_since(t0);
    const auto read = [&](const std::string& name) {
        std::ifstream in(run.config.out_dir / name);
        return json::parse(in);
    };
    run.ingest = read(pipeline::files::ingest_report);
    run.dtm_stats = read("dtm_stats.json");
    run.summary = read(pipeline::files::summary);
    std::ifstream model_in(run.config.out_dir / pipeline::files::model);
    run.model = lda::read_model(model_in);
    return run;
}

bool near(double v, double target, double tol) {
    return std::abs(v - target) <= tol;
}

Verdict corpus_counts(const ArchiveRun& r) {
    const std::int64_t accepted = r.summary["corpus"]["petitions"];
    const std::int64_t signatures = r.summary["corpus"]["uk_signatures"];
    return verdict(accepted == 10950 && signatures == 30420983,
                   std::to_string(accepted) + " petitions (10950), " + std::to_string(signatures) +
                       " UK signatures (30420983)");
}

Verdict vocabulary_size(const ArchiveRun& r) {
    const double v = r.dtm_stats["vocabulary_after"];
    const double before = r.dtm_stats["vocabulary_before"];
    const double rel = (v - 3592.0) / 3592.0;
    std::string detail = fmt("%.0f", v) + " terms after pruning (3592), " + fmt("%.0f", before) +
                         " before (33115); deviation " + fmt("%+.2f%%", 100.0 * rel);
    if (v != 3592.0)
        detail += "; stopword list differs from the original study's unpublished one";
    return verdict(std::abs(rel) <= 0.05, detail);
}

Verdict powerlaw_exponent(const ArchiveRun& r) {
    const double a = r.summary["powerlaw"]["exponent"];
    return verdict(near(a, 1.42, 0.05), "exponent " + fmt("%.4f", a) + " (1.42 +- 0.05) on counts <= 10000, x_min 10");
}

Verdict weekly_entropy(const ArchiveRun& r) {
    const auto& e = r.summary["entropy"];
    const double mean = e["mean"];
    const double lo = e["min"];
    const double hi = e["max"];
    const int flagged = e["flagged_count"];
    return verdict(near(mean, 0.438, 0.02) && near(lo, 0.114, 0.03) && near(hi, 0.533, 0.03) && std::abs(flagged - 9) <= 2,
                   "mean " + fmt("%.3f", mean) + " (0.438), range [" + fmt("%.3f", lo) + ", " + fmt("%.3f", hi) +
                       "] ([0.114, 0.533]), " + std::to_string(flagged) + " flagged (9 +- 2)");
}

Verdict scaling_exponents(const ArchiveRun& r) {
    const double raw = r.summary["scaling"]["raw"]["exponent"];
    const double r2 = r.summary["scaling"]["raw"]["r_squared"];
    const double binned = r.summary["scaling"]["binned"]["exponent"];
    return verdict(near(raw, 1.47, 0.05) && near(r2, 0.39, 0.05) && near(binned, 1.32, 0.05),
                   "raw " + fmt("%.3f", raw) + " (1.47), R^2 " + fmt("%.3f", r2) + " (0.39), binned " +
                       fmt("%.3f", binned) + " (1.32)");
}

Verdict constituency_means(const ArchiveRun& r) {
    const double per_constituency = r.summary["geo"]["mean_signatures_per_constituency"];
    const double per_elector = r.summary["geo"]["mean_per_elector"];
    return verdict(std::abs(per_constituency - 46800.0) <= 468.0 && near(per_elector, 0.65, 0.02),
                   fmt("%.0f", per_constituency) + " per constituency (46800 +- 1%), " + fmt("%.3f", per_elector) +
                       " per elector (0.65)");
}

// Issue names and top words as published; matched to fitted topics by stem overlap.
const std::vector<std::pair<std::string, std::vector<std::string>>> kPublishedTopics{
    {"International affairs", {"british", "govern", "country", "nation", "world", "citizen"}},
    {"Democracy & the EU", {"vote", "referendum", "govern", "parliament", "leave", "will"}},
    {"Law & Order", {"law", "police", "act", "public", "protect", "crime"}},
    {"School", {"school", "children", "student", "education", "year", "young"}},
    {"Driving", {"road", "car", "use", "driver", "drive", "vehicle"}},
    {"Family", {"children", "child", "parent", "people", "family", "need"}},
    {"Work & Pay", {"pay", "tax", "work", "year", "cost", "money"}},
    {"Animals & the Environment", {"dog", "animal", "ban", "use", "food", "can"}},
    {"Healthcare", {"nhs", "health", "people", "care", "mental", "need"}},
    {"Local Government", {"govern", "housing", "local", "will", "council", "fund"}}};

Verdict lda_figures(const ArchiveRun& r) {
    const auto& m = r.model;
    const int k = m.num_topics();
    if (k != 10)
        return verdict(false, "model has " + std::to_string(k) + " topics, expected 10");
    Eigen::MatrixXd overlap(10, 10);
    for (int p = 0; p < 10; ++p) {
        std::set<std::string> published;
        for (const auto& w : kPublishedTopics[static_cast<std::size_t>(p)].second)
            published.insert(porter_stem(w));
        for (int t = 0; t < 10; ++t) {
            int shared = 0;
            for (const auto& w : lda::top_words(m, t, 6))
                shared += published.contains(w);
            overlap(p, t) = shared;
        }
    }
    const auto match = lda::match_topics(overlap);
    const auto fitted = [&](const std::string& name) {
        for (int p = 0; p < 10; ++p)
            if (kPublishedTopics[static_cast<std::size_t>(p)].first == name)
                return match[static_cast<std::size_t>(p)];
        return -1;
    };
    const auto pair_is = [&](const json& pair, const std::string& a, const std::string& b) {
        const int i = pair[0];
        const int j = pair[1];
        const int fa = fitted(a);
        const int fb = fitted(b);
        return (i == fa && j == fb) || (i == fb && j == fa);
    };
    const double mean_max = r.summary["lda"]["mean_max_theta"];
    const bool word_pair = pair_is(r.summary["networks"]["word_distribution"]["max_pair"], "School", "Family");
    const bool co_pair = pair_is(r.summary["networks"]["co_occurrence"]["max_pair"], "Law & Order", "Family");
    return verdict(mean_max >= 0.5 && mean_max <= 0.75 && word_pair && co_pair,
                   "mean max theta " + fmt("%.3f", mean_max) + " ([0.5, 0.75]); strongest word edge " +
                       (word_pair ? "School-Family" : "NOT School-Family") + "; strongest co-occurrence edge " +
                       (co_pair ? "Law & Order-Family" : "NOT Law & Order-Family") + "; topic match overlap " +
                       fmt("%.0f", [&] {
                           double total = 0.0;
                           for (int p = 0; p < 10; ++p)
                               total += overlap(p, match[static_cast<std::size_t>(p)]);
                           return total;
                       }()) +
                       "/60");
}

} // namespace

int main() {
    int failures = 0;
    const auto report = [&](int id, const char* name, const Verdict& v) {
        const char* tag = v.outcome == Outcome::pass ? "PASS" : v.outcome == Outcome::fail ? "FAIL" : "SKIP";
        failures += v.outcome == Outcome::fail;
        std::cout << tag << ' ' << std::setw(2) << id << ' ' << name << ": " << v.detail << std::endl;
    };
    const auto guarded = [&](int id, const char* name, const std::function<Verdict()>& check) {
        try {
            report(id, name, check());
        } catch (const std::exception& e) {
            report(id, name, {Outcome::fail, std::string("error: ") + e.what()});
        }
    };

    guarded(1, "planted-topic recovery", planted_topic_recovery);
    guarded(2, "LDA normalization and determinism", lda_normalization_determinism);
    guarded(3, "power-law exponent recovery", powerlaw_recovery);
    guarded(4, "entropy bounds and anchors", entropy_anchors);
    guarded(5, "PAM optimality", pam_optimality);
    guarded(6, "z-score columns", zscore_columns);
    guarded(7, "scaling regression on collinear data", scaling_collinear);
    guarded(8, "issue-share and z-score oracle", share_zscore_oracle);

    struct Tier2 {
        int id;
        const char* name;
        Verdict (*check)(const ArchiveRun&);
    };
    const Tier2 tier2[] = {{9, "accepted petitions and UK signatures", corpus_counts},
                           {10, "vocabulary after pruning", vocabulary_size},
                           {11, "power-law exponent below 10,000", powerlaw_exponent},
                           {12, "weekly normalized entropy", weekly_entropy},
                           {13, "electorate scaling exponents", scaling_exponents},
                           {14, "signatures per constituency and elector", constituency_means},
                           {15, "LDA-dependent figures", lda_figures}};
    std::optional<ArchiveRun> run;
    std::string unavailable = "set PETITIONS_ARCHIVE and PETITIONS_CONSTITUENCIES to the 2015-2017 archive";
    try {
        run = run_archive_pipeline();
        if (run)
            std::cout << "tier 2 pipeline finished in " << fmt("%.0f", run->seconds) << " s" << std::endl;
    } catch (const std::exception& e) {
        unavailable = std::string("pipeline failed: ") + e.what();
        ++failures;
    }
    for (const auto& t : tier2) {
        if (!run) {
            report(t.id, t.name, {Outcome::skip, unavailable});
            continue;
        }
        guarded(t.id, t.name, [&] { return t.check(*run); });
    }
    return failures == 0 ? 0 : 1;
}
