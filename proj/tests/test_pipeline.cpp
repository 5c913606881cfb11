#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "oracles.hpp"
#include "petitions/pipeline.hpp"

using namespace petitions;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::vector<std::vector<std::string>> kTopicWords{
    {"school", "teacher", "pupil", "education", "classroom", "exam", "curriculum", "lesson"},
    {"hospital", "nurse", "doctor", "patient", "surgery", "clinic", "medicine", "ambulance"},
    {"road", "railway", "train", "bus", "traffic", "motorway", "cycle", "station"}};

/// 400 petitions over 600 days from three word themes, 20 constituencies, heavy-tailed
/// signature counts; plus a rejected and a malformed record.
fs::path write_fixture(const fs::path& dir) {
    fs::create_directories(dir);
    std::ofstream cons(dir / "constituencies.csv");
    cons << "code,name,electorate\n";
    for (int c = 0; c < 20; ++c)
        cons << "E" << 100 + c << ",Place " << c << ',' << 50000 + 1000 * c << '\n';

    std::mt19937_64 rng(7);
    std::ofstream out(dir / "archive.jsonl");
    const Date start = parse_date("2015-05-18");
    for (int i = 0; i < 400; ++i) {
        const auto& words = kTopicWords[static_cast<std::size_t>(i % 3)];
        std::string action;
        std::string background;
        for (int w = 0; w < 12; ++w)
            (w < 4 ? action : background) += words[oracles::uniform_index(rng, words.size())] + " ";
        const auto total = static_cast<std::int64_t>(std::min(200000.0, 10.0 / std::pow(1.0 - oracles::uniform01(rng), 2.0)));
        json by = json::array();
        std::int64_t remaining = total;
        for (int c = 0; c < 20; ++c) {
            const std::int64_t n = c == 19 ? remaining : static_cast<std::int64_t>(oracles::uniform01(rng) * remaining / 4);
            by.push_back({{"ons_code", "E" + std::to_string(100 + c)}, {"signature_count", n}});
            remaining -= n;
        }
        const Date created = start + std::chrono::days(static_cast<int>(oracles::uniform_index(rng, 600)));
        json rec = {{"id", i + 1},
                    {"state", i % 50 == 49 ? "rejected" : "open"},
                    {"attributes",
                     {{"action", action},
                      {"background", background},
                      {"additional_details", nullptr},
                      {"created_at", format_date(created) + "T10:00:00Z"},
                      {"signature_count", total + 3},
                      {"signatures_by_constituency", by},
                      {"signatures_by_country", json::array({{{"code", "GB"}, {"signature_count", total}},
                                                             {{"code", "FR"}, {"signature_count", 3}}})}}}};
        out << rec.dump() << '\n';
    }
    out << "{\"id\": 9999, \"state\": \"open\"}\n";
    return dir;
}

pipeline::PipelineConfig fixture_config(const fs::path& data, const fs::path& out) {
    pipeline::PipelineConfig c;
    c.archive = data / "archive.jsonl";
    c.constituencies = data / "constituencies.csv";
    c.out_dir = out;
    c.lda.k = 3;
    c.lda.iterations = 200;
    c.lda.burn_in = 50;
    c.pam_k = 3;
    c.silhouette_k_min = 2;
    c.silhouette_k_max = 4;
    c.grid_k = {2, 3};
    c.powerlaw_x_min = 10;
    return c;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

void run_all(const pipeline::PipelineConfig& c) {
    std::ostringstream log;
    pipeline::cmd_ingest(c, log);
    pipeline::cmd_fit(c, log);
    pipeline::cmd_report(c, log);
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(PETITIONS_CLI) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

struct Workspace {
    fs::path root;
    Workspace() : root(fs::temp_directory_path() / ("petitions_pipeline_" + std::to_string(::getpid()))) {
        fs::remove_all(root);
        write_fixture(root / "data");
    }
    ~Workspace() { fs::remove_all(root); }
};

const Workspace& workspace() {
    static const Workspace w;
    return w;
}

} // namespace

TEST_CASE("end-to-end run produces every artifact with provenance") {
    const auto& w = workspace();
    const auto config = fixture_config(w.root / "data", w.root / "run1");
    run_all(config);
    const auto& out = config.out_dir;

    const json report = json::parse(slurp(out / pipeline::files::ingest_report));
    CHECK(report["records_read"] == 401);
    CHECK(report["accepted"] == 392);
    CHECK(report["not_accepted"] == 8);
    CHECK(report["malformed"] == 1);
    CHECK(report["overseas_signatures"] == 392 * 3);

    const std::string header = config.header().csv_line();
    std::size_t csv_files = 0;
    for (const auto& entry : fs::directory_iterator(out)) {
        const auto ext = entry.path().extension();
        const std::string text = slurp(entry.path());
        CAPTURE(entry.path().filename().string());
        if (ext == ".csv") {
            ++csv_files;
            CHECK(text.rfind(header + "\n", 0) == 0);
        } else if (ext == ".json") {
            const json doc = json::parse(text);
            CHECK(doc["meta"]["config_hash"] == config.hash());
            CHECK(doc["meta"]["seed"] == config.seed);
        } else if (ext == ".jsonl") {
            std::istringstream lines(text);
            std::string first;
            std::getline(lines, first);
            CHECK(json::parse(first)["meta"]["config_hash"] == config.hash());
        }
    }
    CHECK(csv_files >= 20);

    const json summary = json::parse(slurp(out / pipeline::files::summary));
    for (const auto& key : pipeline::summary_keys())
        CHECK_MESSAGE(summary.contains(key), key);
    CHECK(summary["corpus"]["petitions"] == 392);
    CHECK(summary["lda"]["k"] == 3);
    CHECK(summary["prevalence"]["rank_by_signatures"].size() == 3);
    CHECK(summary["networks"].contains("co_occurrence"));
    CHECK(summary["networks"].contains("word_distribution"));
    CHECK(summary["entropy"]["flagged_count"] == summary["entropy"]["flagged"].size());
    CHECK(summary["scaling"]["raw"]["exponent"].is_number());
    CHECK(summary["scaling"]["binned"]["n"] == 10);
    CHECK(summary["powerlaw"]["x_min"] == 10);
    CHECK(summary["powerlaw"]["divergences"].contains("10000"));
    CHECK(summary["clusters"]["sizes"].size() == 3);
    CHECK(summary["geo"]["unattributed_signatures"] == 0);

    // Geographic totals agree with the corpus total when every code is known.
    CHECK(summary["geo"]["attributed_signatures"] == summary["corpus"]["uk_signatures"]);

    // Top-words table names planted theme words.
    const std::string top = slurp(out / pipeline::files::top_words);
    CHECK(top.find("teacher") != std::string::npos);
    CHECK(top.find("nurs") != std::string::npos);
}

TEST_CASE("repeat runs are byte-identical") {
    const auto& w = workspace();
    const auto a = fixture_config(w.root / "data", w.root / "det_a");
    const auto b = fixture_config(w.root / "data", w.root / "det_b");
    CHECK(a.hash() == b.hash());
    run_all(a);
    run_all(b);
    for (const char* name : {pipeline::files::corpus, pipeline::files::model, pipeline::files::summary,
                             pipeline::files::intrusion, "entropy.csv", "clusters.csv"})
        CHECK_MESSAGE(slurp(a.out_dir / name) == slurp(b.out_dir / name), name);

    auto changed = a;
    changed.seed += 1;
    CHECK(changed.hash() != a.hash());
}

TEST_CASE("CLI exit codes and subcommands") {
    const auto& w = workspace();
    const std::string data = (w.root / "data").string();
    const std::string out = (w.root / "cli").string();
    const std::string common = " --out-dir " + out + " --k 3 --iterations 100 --burn-in 20";

    CHECK(run_cli("ingest --archive " + data + "/missing.jsonl" + common) == 2);
    CHECK(run_cli("fit" + common) == 1);  // no snapshot yet
    CHECK(run_cli("") == 2);
    CHECK(run_cli("ingest --no-such-flag") == 2);
    CHECK(run_cli("fit --k 0" + common) == 2);

    CHECK(run_cli("ingest --archive " + data + "/archive.jsonl --constituencies " + data + "/constituencies.csv" +
                  common) == 0);
    CHECK(run_cli("fit" + common) == 0);
    CHECK(run_cli("report --pam-k 3 --silhouette-k-min 2 --silhouette-k-max 4" + common) == 0);
    CHECK(fs::exists(fs::path(out) / pipeline::files::summary));
    CHECK(run_cli("xmin-scan" + common) == 0);
    CHECK(fs::exists(fs::path(out) / "xmin_scan.csv"));
    CHECK(run_cli("grid --grid-k 2 --grid-k 3" + common) == 0);
    CHECK(fs::exists(fs::path(out) / "grid.csv"));

    // Every subject marks the true intruder.
    std::istringstream key(slurp(fs::path(out) / pipeline::files::intrusion_key));
    std::ofstream answers(w.root / "answers.csv");
    answers << "topic,subject,position\n";
    std::string line;
    while (std::getline(key, line)) {
        if (line.empty() || line[0] == '#' || line.rfind("topic", 0) == 0)
            continue;
        const auto f = split_csv_line(line);
        for (int s = 0; s < 3; ++s)
            answers << f[0] << ',' << s << ',' << f[1] << '\n';
    }
    answers.close();
    CHECK(run_cli("intrusion-score --answers " + (w.root / "answers.csv").string() + common) == 0);
    CHECK(slurp(fs::path(out) / "intrusion_scores.csv").find("overall,1,") != std::string::npos);

    // A config file supplies the same settings; flags still override it.
    std::ofstream toml(w.root / "config.toml");
    toml << "out-dir = \"" << out << "\"\nk = 3\niterations = 100\nburn-in = 20\n";
    toml.close();
    const std::string model_before = slurp(fs::path(out) / pipeline::files::model);
    CHECK(run_cli("fit --config " + (w.root / "config.toml").string()) == 0);
    CHECK(slurp(fs::path(out) / pipeline::files::model) == model_before);
    std::ofstream bad(w.root / "bad.toml");
    bad << "burn_in_typo = 3\n";
    bad.close();
    CHECK(run_cli("fit --config " + (w.root / "bad.toml").string()) == 2);
}

TEST_CASE("report names the failing module") {
    const auto& w = workspace();
    auto c = fixture_config(w.root / "data", w.root / "fail");
    std::ostringstream log;
    pipeline::cmd_ingest(c, log);
    pipeline::cmd_fit(c, log);
    c.pam_k = 500;  // more clusters than constituencies
    try {
        pipeline::cmd_report(c, log);
        FAIL("report should fail");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).rfind("geo: ", 0) == 0);
    }
}
