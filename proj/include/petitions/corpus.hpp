#ifndef PETITIONS_CORPUS_HPP
#define PETITIONS_CORPUS_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "petitions/common.hpp"

namespace petitions {

enum class PetitionState { accepted, rejected };

/// Constituency code used for signatures whose code is missing from the metadata.
inline constexpr std::string_view kUnknownConstituency = "UNKNOWN";

struct Petition {
    std::string id;
    std::string action;
    std::string background;
    std::optional<std::string> additional_details;
    Date created_at{};
    PetitionState state = PetitionState::accepted;
    std::int64_t total_signatures = 0;
    std::map<std::string, std::int64_t> signatures_by_constituency;
    std::map<std::string, std::int64_t> signatures_by_country;

    /// Constituency-attributed signatures, including the UNKNOWN bucket.
    std::int64_t uk_signatures() const;

    bool operator==(const Petition&) const = default;
};

struct ConstituencyMeta {
    std::string code;
    std::string name;
    std::int64_t electorate = 0;

    bool operator==(const ConstituencyMeta&) const = default;
};

/// Accepted petitions sorted by id, plus the constituency table they refer to.
/// Immutable once built.
struct Corpus {
    std::vector<Petition> petitions;
    std::vector<ConstituencyMeta> constituencies;
    DateWindow window{};

    std::size_t size() const { return petitions.size(); }
    bool operator==(const Corpus&) const = default;
};

struct IngestConfig {
    /// 2015-2017 parliament: first sitting to dissolution.
    DateWindow window{parse_date("2015-05-18"), parse_date("2017-05-03")};
    /// Empty means every constituency code is accepted as-is.
    std::vector<ConstituencyMeta> constituencies;
};

struct RejectRecord {
    std::size_t line_no = 0;
    std::string reason;
};

struct IngestReport {
    std::size_t records_read = 0;
    std::size_t accepted = 0;
    std::size_t not_accepted = 0;
    std::size_t outside_window = 0;
    std::vector<RejectRecord> rejects;  ///< malformed records only
    std::vector<std::string> warnings;
    std::int64_t overseas_signatures = 0;
    std::int64_t unknown_constituency_signatures = 0;
};

struct LoadResult {
    Corpus corpus;
    IngestReport report;
};

/// Reads a JSON-lines petitions archive and keeps accepted petitions inside the window.
/// Malformed lines are collected in the report; throws IoError if the file cannot be
/// read and ValidationError if nothing is accepted.
LoadResult load_archive(const std::filesystem::path& path, const IngestConfig& config);
LoadResult parse_archive(std::istream& in, const IngestConfig& config);

std::int64_t uk_signature_total(const Corpus& corpus);

/// action, background and additional details joined by single spaces.
std::string merge_text(const Petition& p);

std::vector<ConstituencyMeta> load_constituencies(const std::filesystem::path& path);
std::vector<ConstituencyMeta> parse_constituencies(std::istream& in);
void write_constituencies(std::ostream& out, const std::vector<ConstituencyMeta>& meta,
                          const MetadataHeader& header);

/// Canonical snapshot: a metadata line followed by one archive-schema record per petition.
/// load_archive() reads it back to an identical Corpus.
void write_snapshot(std::ostream& out, const Corpus& corpus, const MetadataHeader& header);
void write_rejects(std::ostream& out, const IngestReport& report, const MetadataHeader& header);

} // namespace petitions

#endif
