#include "petitions/textprep.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include <json.hpp>
#include <unicode/uchar.h>
#include <unicode/utf8.h>

#include "petitions/porter.hpp"

namespace petitions {

namespace detail {
extern const char* const kDefaultStopwordsText;
}

namespace {

bool is_separator(UChar32 c) {
    if (c < 0)
        return true;  // invalid UTF-8 byte
    if (u_isUWhiteSpace(c) || u_ispunct(c))
        return true;
    switch (u_charType(c)) {
    case U_MATH_SYMBOL:
    case U_CURRENCY_SYMBOL:
    case U_MODIFIER_SYMBOL:
    case U_OTHER_SYMBOL:
    case U_CONTROL_CHAR:
        return true;
    default:
        return false;
    }
}

bool is_number(UChar32 c) {
    switch (u_charType(c)) {
    case U_DECIMAL_DIGIT_NUMBER:
    case U_LETTER_NUMBER:
    case U_OTHER_NUMBER:
        return true;
    default:
        return false;
    }
}

std::size_t code_points(std::string_view s) {
    std::size_t n = 0;
    for (unsigned char c : s)
        n += (c & 0xC0) != 0x80;
    return n;
}

void append_utf8(std::string& out, UChar32 c) {
    char buf[U8_MAX_LENGTH];
    std::int32_t len = 0;
    U8_APPEND_UNSAFE(buf, len, c);
    out.append(buf, static_cast<std::size_t>(len));
}

std::int64_t min_doc_count(double fraction, std::size_t n_docs) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw ValidationError("min_doc_fraction must lie in (0, 1)");
    const double raw = fraction * static_cast<double>(n_docs);
    return std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(raw - 1e-9)));
}

} // namespace

const StopwordSet& default_stopwords() {
    static const StopwordSet words = [] {
        std::istringstream in(detail::kDefaultStopwordsText);
        return parse_stopwords(in);
    }();
    return words;
}

StopwordSet load_stopwords(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw IoError("cannot read stopword file '" + path.string() + "'");
    return parse_stopwords(in);
}

StopwordSet parse_stopwords(std::istream& in) {
    StopwordSet out;
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos || line[first] == '#')
            continue;
        const auto last = line.find_last_not_of(" \t\r");
        out.insert(line.substr(first, last - first + 1));
    }
    if (out.empty())
        throw ValidationError("stopword list is empty");
    return out;
}

std::vector<std::string> clean_tokens(std::string_view text, const StopwordSet& stopwords) {
    std::vector<std::string> out;
    std::string token;
    bool has_number = false;
    const auto flush = [&] {
        if (!token.empty() && !has_number && !stopwords.contains(token)) {
            std::string stem = porter_stem(token);
            if (code_points(stem) >= 2)
                out.push_back(std::move(stem));
        }
        token.clear();
        has_number = false;
    };

    const auto* s = reinterpret_cast<const std::uint8_t*>(text.data());
    const auto length = static_cast<std::int32_t>(text.size());
    std::int32_t i = 0;
    while (i < length) {
        UChar32 c;
        U8_NEXT(s, i, length, c);
        if (is_separator(c)) {
            flush();
            continue;
        }
        c = u_tolower(c);
        has_number = has_number || is_number(c);
        append_utf8(token, c);
    }
    flush();
    return out;
}

std::optional<Eigen::Index> Vocabulary::find(std::string_view term) const {
    auto it = std::lower_bound(terms.begin(), terms.end(), term);
    if (it == terms.end() || *it != term)
        return std::nullopt;
    return static_cast<Eigen::Index>(it - terms.begin());
}

std::int64_t DocumentTermMatrix::total_tokens() const {
    std::int64_t total = 0;
    for (Eigen::Index k = 0; k < counts.outerSize(); ++k)
        for (TermCounts::InnerIterator it(counts, k); it; ++it)
            total += it.value();
    return total;
}

DtmBuild build_dtm(const Corpus& corpus, const StopwordSet& stopwords, double min_doc_fraction) {
    std::vector<std::string> ids;
    std::vector<std::vector<std::string>> docs;
    ids.reserve(corpus.size());
    docs.reserve(corpus.size());
    for (const Petition& p : corpus.petitions) {
        ids.push_back(p.id);
        docs.push_back(clean_tokens(merge_text(p), stopwords));
    }
    return build_dtm_from_tokens(ids, docs, min_doc_fraction);
}

DtmBuild build_dtm_from_tokens(std::span<const std::string> doc_ids,
                               std::span<const std::vector<std::string>> docs, double min_doc_fraction) {
    if (docs.empty())
        throw ValidationError("cannot build a document-term matrix from an empty corpus");
    if (doc_ids.size() != docs.size())
        throw ValidationError("doc_ids and documents differ in length");

    const std::int64_t threshold = min_doc_count(min_doc_fraction, docs.size());
    std::map<std::string_view, std::int64_t> df;
    std::int64_t tokens_before = 0;
    for (const auto& doc : docs) {
        tokens_before += static_cast<std::int64_t>(doc.size());
        std::vector<std::string_view> unique(doc.begin(), doc.end());
        std::sort(unique.begin(), unique.end());
        unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
        for (auto t : unique)
            ++df[t];
    }

    DtmBuild result;
    DtmStats& stats = result.stats;
    stats.vocabulary_before = df.size();
    stats.min_doc_frequency = threshold;
    Vocabulary& vocab = result.dtm.vocabulary;
    for (const auto& [term, n] : df) {
        if (n >= threshold) {
            vocab.terms.emplace_back(term);
            vocab.doc_frequency.push_back(n);
        }
    }
    if (vocab.terms.empty())
        throw ValidationError("vocabulary is empty after pruning");
    stats.vocabulary_after = vocab.size();

    std::vector<Eigen::Triplet<std::int32_t>> triplets;
    std::int64_t tokens_after = 0;
    for (std::size_t d = 0; d < docs.size(); ++d) {
        for (const auto& t : docs[d]) {
            if (auto col = vocab.find(t)) {
                triplets.emplace_back(static_cast<int>(d), static_cast<int>(*col), 1);
                ++tokens_after;
            }
        }
    }
    TermCounts& counts = result.dtm.counts;
    counts.resize(static_cast<Eigen::Index>(docs.size()), static_cast<Eigen::Index>(vocab.size()));
    counts.setFromTriplets(triplets.begin(), triplets.end());  // duplicates are summed
    counts.makeCompressed();
    result.dtm.doc_ids.assign(doc_ids.begin(), doc_ids.end());

    const auto n = static_cast<double>(docs.size());
    stats.mean_tokens_before = static_cast<double>(tokens_before) / n;
    stats.mean_tokens_after = static_cast<double>(tokens_after) / n;
    return result;
}

void write_dtm(std::ostream& triplets, std::ostream& vocabulary, const DocumentTermMatrix& dtm,
               const MetadataHeader& header) {
    using nlohmann::json;
    json cells = json::array();
    for (Eigen::Index r = 0; r < dtm.counts.outerSize(); ++r)
        for (TermCounts::InnerIterator it(dtm.counts, r); it; ++it)
            cells.push_back({it.row(), it.col(), it.value()});
    json doc = {{"meta", {{"tool_version", header.tool_version}, {"config_hash", header.config_hash}, {"seed", header.seed}}},
                {"format", "petitions-dtm"},
                {"format_version", 1},
                {"n_docs", dtm.n_docs()},
                {"n_terms", dtm.n_terms()},
                {"doc_ids", dtm.doc_ids},
                {"triplets", cells}};
    triplets << doc.dump() << '\n';

    vocabulary << header.csv_line() << "\nterm,doc_frequency\n";
    for (std::size_t i = 0; i < dtm.vocabulary.size(); ++i)
        vocabulary << csv_escape(dtm.vocabulary.terms[i]) << ',' << dtm.vocabulary.doc_frequency[i] << '\n';
}

DocumentTermMatrix read_dtm(std::istream& triplets, std::istream& vocabulary) {
    using nlohmann::json;
    DocumentTermMatrix dtm;
    std::string line;
    bool header = false;
    while (std::getline(vocabulary, line)) {
        if (line.empty() || line[0] == '#')
            continue;
        if (!header) {
            header = true;
            continue;
        }
        auto fields = split_csv_line(line);
        if (fields.size() != 2)
            throw ValidationError("vocabulary sidecar: expected 'term,doc_frequency'");
        dtm.vocabulary.terms.push_back(fields[0]);
        dtm.vocabulary.doc_frequency.push_back(std::stoll(fields[1]));
    }
    const json doc = json::parse(triplets);
    if (doc.at("format") != "petitions-dtm" || doc.at("format_version") != 1)
        throw ValidationError("unsupported DTM snapshot format");
    const auto n_docs = doc.at("n_docs").get<Eigen::Index>();
    const auto n_terms = doc.at("n_terms").get<Eigen::Index>();
    if (n_terms != static_cast<Eigen::Index>(dtm.vocabulary.size()))
        throw ValidationError("DTM snapshot and vocabulary sidecar disagree on size");
    dtm.doc_ids = doc.at("doc_ids").get<std::vector<std::string>>();
    std::vector<Eigen::Triplet<std::int32_t>> cells;
    for (const auto& t : doc.at("triplets"))
        cells.emplace_back(t[0].get<int>(), t[1].get<int>(), t[2].get<std::int32_t>());
    dtm.counts.resize(n_docs, n_terms);
    dtm.counts.setFromTriplets(cells.begin(), cells.end());
    dtm.counts.makeCompressed();
    return dtm;
}

} // namespace petitions
