#include "petitions/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <set>

#include <json.hpp>

namespace petitions {

using nlohmann::json;

namespace {

// Platform states for petitions that were published and could gather signatures.
bool is_accepted_state(std::string_view s) {
    return s == "accepted" || s == "open" || s == "closed";
}

std::string id_string(const json& v) {
    if (v.is_string())
        return v.get<std::string>();
    if (v.is_number_integer())
        return std::to_string(v.get<std::int64_t>());
    throw ValidationError("id must be a string or integer");
}

const json& require(const json& obj, const char* key, const char* path) {
    auto it = obj.find(key);
    if (it == obj.end() || it->is_null())
        throw ValidationError(std::string("missing required field '") + path + "'");
    return *it;
}

std::int64_t count_value(const json& v) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
        throw ValidationError("signature_count must be a non-negative integer");
    return v.get<std::int64_t>();
}

// Numeric ids order numerically, everything else lexicographically.
bool id_less(const std::string& a, const std::string& b) {
    const auto numeric = [](const std::string& s) {
        return !s.empty() && std::all_of(s.begin(), s.end(), [](unsigned char c) { return c >= '0' && c <= '9'; });
    };
    if (numeric(a) && numeric(b) && a.size() != b.size())
        return a.size() < b.size();
    return a < b;
}

struct OutsideWindow {};

Petition parse_petition(const json& rec, const IngestConfig& config,
                        const std::set<std::string, std::less<>>& known_codes, IngestReport& report) {
    Petition p;
    p.id = id_string(require(rec, "id", "id"));
    const json& attrs = require(rec, "attributes", "attributes");
    p.action = require(attrs, "action", "attributes.action").get<std::string>();
    p.background = require(attrs, "background", "attributes.background").get<std::string>();
    if (auto it = attrs.find("additional_details"); it != attrs.end() && !it->is_null())
        p.additional_details = it->get<std::string>();
    p.created_at = parse_date(require(attrs, "created_at", "attributes.created_at").get<std::string>());
    p.state = PetitionState::accepted;

    if (auto it = attrs.find("signatures_by_constituency"); it != attrs.end() && !it->is_null()) {
        for (const json& entry : *it) {
            std::string code = require(entry, "ons_code", "signatures_by_constituency.ons_code").get<std::string>();
            const std::int64_t n = count_value(require(entry, "signature_count", "signatures_by_constituency.signature_count"));
            if (!known_codes.empty() && !known_codes.contains(code)) {
                if (code != kUnknownConstituency)
                    report.warnings.push_back("petition " + p.id + ": unknown constituency code '" + code + "'");
                report.unknown_constituency_signatures += n;
                code = std::string(kUnknownConstituency);
            }
            p.signatures_by_constituency[code] += n;
        }
    }
    std::int64_t country_sum = 0;
    if (auto it = attrs.find("signatures_by_country"); it != attrs.end() && !it->is_null()) {
        for (const json& entry : *it) {
            const std::string code = require(entry, "code", "signatures_by_country.code").get<std::string>();
            const std::int64_t n = count_value(require(entry, "signature_count", "signatures_by_country.signature_count"));
            p.signatures_by_country[code] += n;
            country_sum += n;
            if (code != "GB")
                report.overseas_signatures += n;
        }
    }
    const std::int64_t uk = p.uk_signatures();
    if (auto it = attrs.find("signature_count"); it != attrs.end() && !it->is_null()) {
        p.total_signatures = count_value(*it);
        if (p.total_signatures < uk)
            throw ValidationError("signature_count is below the constituency total");
    } else {
        p.total_signatures = std::max(country_sum, uk);
    }
    if (!config.window.contains(p.created_at))
        throw OutsideWindow{};
    return p;
}

} // namespace

std::int64_t Petition::uk_signatures() const {
    std::int64_t total = 0;
    for (const auto& [code, n] : signatures_by_constituency)
        total += n;
    return total;
}

LoadResult load_archive(const std::filesystem::path& path, const IngestConfig& config) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read archive '" + path.string() + "'");
    return parse_archive(in, config);
}

LoadResult parse_archive(std::istream& in, const IngestConfig& config) {
    LoadResult result;
    IngestReport& report = result.report;
    std::set<std::string, std::less<>> known_codes;
    for (const auto& c : config.constituencies)
        known_codes.insert(c.code);

    DateWindow window = config.window;
    std::set<std::string> seen_ids;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error&) {
            report.rejects.push_back({line_no, "invalid JSON"});
            continue;
        }
        // Snapshot metadata line; it carries the window the snapshot was filtered with.
        if (rec.is_object() && rec.contains("meta") && !rec.contains("id")) {
            if (auto w = rec["meta"].find("window"); w != rec["meta"].end())
                window = {parse_date((*w)[0].get<std::string>()), parse_date((*w)[1].get<std::string>())};
            continue;
        }
        ++report.records_read;
        try {
            if (!rec.is_object())
                throw ValidationError("record is not an object");
            const std::string state = require(rec, "state", "state").get<std::string>();
            if (!is_accepted_state(state)) {
                ++report.not_accepted;
                continue;
            }
            IngestConfig local = config;
            local.window = window;
            IngestReport scratch;
            Petition p = parse_petition(rec, local, known_codes, scratch);
            if (!seen_ids.insert(p.id).second)
                throw ValidationError("duplicate id '" + p.id + "'");
            report.overseas_signatures += scratch.overseas_signatures;
            report.unknown_constituency_signatures += scratch.unknown_constituency_signatures;
            report.warnings.insert(report.warnings.end(), scratch.warnings.begin(), scratch.warnings.end());
            result.corpus.petitions.push_back(std::move(p));
        } catch (const OutsideWindow&) {
            ++report.outside_window;
        } catch (const ValidationError& e) {
            report.rejects.push_back({line_no, e.what()});
        } catch (const json::exception& e) {
            report.rejects.push_back({line_no, std::string("wrong field type: ") + e.what()});
        }
    }
    if (result.corpus.petitions.empty())
        throw ValidationError("empty corpus: no accepted petitions in the archive");

    std::sort(result.corpus.petitions.begin(), result.corpus.petitions.end(),
              [](const Petition& a, const Petition& b) { return id_less(a.id, b.id); });
    result.corpus.constituencies = config.constituencies;
    result.corpus.window = window;
    report.accepted = result.corpus.petitions.size();
    return result;
}

std::int64_t uk_signature_total(const Corpus& corpus) {
    return std::accumulate(corpus.petitions.begin(), corpus.petitions.end(), std::int64_t{0},
                           [](std::int64_t acc, const Petition& p) { return acc + p.uk_signatures(); });
}

std::string merge_text(const Petition& p) {
    if (p.action.empty())
        throw ValidationError("petition " + p.id + " has an empty action");
    std::string out = p.action;
    for (const std::string* part : {&p.background, p.additional_details ? &*p.additional_details : nullptr}) {
        if (part == nullptr || part->empty())
            continue;
        out += ' ';
        out += *part;
    }
    return out;
}

std::vector<ConstituencyMeta> load_constituencies(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read constituency metadata '" + path.string() + "'");
    return parse_constituencies(in);
}

std::vector<ConstituencyMeta> parse_constituencies(std::istream& in) {
    std::vector<ConstituencyMeta> out;
    std::set<std::string> codes;
    std::string line;
    bool header_seen = false;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line == "\r")
            continue;
        auto fields = split_csv_line(line);
        if (!header_seen) {
            if (fields.size() != 3 || fields[0] != "code" || fields[1] != "name" || fields[2] != "electorate")
                throw ValidationError("constituency CSV must start with header 'code,name,electorate'");
            header_seen = true;
            continue;
        }
        if (fields.size() != 3)
            throw ValidationError("constituency CSV line " + std::to_string(line_no) + ": expected 3 fields");
        ConstituencyMeta m{fields[0], fields[1], 0};
        try {
            std::size_t used = 0;
            m.electorate = std::stoll(fields[2], &used);
            if (used != fields[2].size())
                throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ValidationError("constituency CSV line " + std::to_string(line_no) + ": bad electorate");
        }
        if (m.electorate <= 0)
            throw ValidationError("constituency " + m.code + ": electorate must be positive");
        if (!codes.insert(m.code).second)
            throw ValidationError("duplicate constituency code " + m.code);
        out.push_back(std::move(m));
    }
    return out;
}

void write_constituencies(std::ostream& out, const std::vector<ConstituencyMeta>& meta,
                          const MetadataHeader& header) {
    out << header.csv_line() << "\ncode,name,electorate\n";
    for (const auto& m : meta)
        out << csv_escape(m.code) << ',' << csv_escape(m.name) << ',' << m.electorate << '\n';
}

void write_snapshot(std::ostream& out, const Corpus& corpus, const MetadataHeader& header) {
    json meta = {{"tool_version", header.tool_version},
                 {"config_hash", header.config_hash},
                 {"seed", header.seed},
                 {"format", "petitions-corpus"},
                 {"format_version", 1},
                 {"window", {format_date(corpus.window.start), format_date(corpus.window.end)}}};
    out << json{{"meta", meta}}.dump() << '\n';
    for (const Petition& p : corpus.petitions) {
        json by_constituency = json::array();
        for (const auto& [code, n] : p.signatures_by_constituency)
            by_constituency.push_back({{"ons_code", code}, {"signature_count", n}});
        json by_country = json::array();
        for (const auto& [code, n] : p.signatures_by_country)
            by_country.push_back({{"code", code}, {"signature_count", n}});
        json attrs = {{"action", p.action},
                      {"background", p.background},
                      {"additional_details", p.additional_details ? json(*p.additional_details) : json(nullptr)},
                      {"created_at", format_date(p.created_at)},
                      {"signature_count", p.total_signatures},
                      {"signatures_by_constituency", by_constituency},
                      {"signatures_by_country", by_country}};
        out << json{{"id", p.id}, {"state", "accepted"}, {"attributes", attrs}}.dump() << '\n';
    }
}

void write_rejects(std::ostream& out, const IngestReport& report, const MetadataHeader& header) {
    out << header.csv_line() << "\nline_no,reason\n";
    for (const auto& r : report.rejects)
        out << r.line_no << ',' << csv_escape(r.reason) << '\n';
}

} // namespace petitions
