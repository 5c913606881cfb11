#ifndef PETITIONS_TEXTPREP_HPP
#define PETITIONS_TEXTPREP_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include <Eigen/SparseCore>

#include "petitions/common.hpp"
#include "petitions/corpus.hpp"

namespace petitions {

using StopwordSet = std::set<std::string, std::less<>>;

/// Pinned English stopword list compiled from data/stopwords_en.txt.
const StopwordSet& default_stopwords();
StopwordSet load_stopwords(const std::filesystem::path& path);
StopwordSet parse_stopwords(std::istream& in);

/// Lowercase, punctuation and symbols to spaces, drop tokens with digits,
/// drop stopwords, Porter-stem, drop stems shorter than two characters.
std::vector<std::string> clean_tokens(std::string_view text, const StopwordSet& stopwords);

struct Vocabulary {
    std::vector<std::string> terms;  ///< unique, sorted
    std::vector<std::int64_t> doc_frequency;

    std::size_t size() const { return terms.size(); }
    std::optional<Eigen::Index> find(std::string_view term) const;
};

using TermCounts = Eigen::SparseMatrix<std::int32_t, Eigen::RowMajor>;

/// Rows are petitions in corpus order (possibly all-zero), columns are vocabulary terms.
struct DocumentTermMatrix {
    Vocabulary vocabulary;
    TermCounts counts;
    std::vector<std::string> doc_ids;

    Eigen::Index n_docs() const { return counts.rows(); }
    Eigen::Index n_terms() const { return counts.cols(); }
    std::int64_t total_tokens() const;
};

struct DtmStats {
    std::size_t vocabulary_before = 0;
    std::size_t vocabulary_after = 0;
    double mean_tokens_before = 0.0;
    double mean_tokens_after = 0.0;
    std::int64_t min_doc_frequency = 0;
};

struct DtmBuild {
    DocumentTermMatrix dtm;
    DtmStats stats;
};

/// Builds the pruned DTM: terms found in fewer than ceil(min_doc_fraction * n_docs)
/// documents are dropped. Throws ValidationError if nothing survives.
DtmBuild build_dtm(const Corpus& corpus, const StopwordSet& stopwords, double min_doc_fraction = 0.001);

/// Same as above from pre-tokenized documents.
DtmBuild build_dtm_from_tokens(std::span<const std::string> doc_ids,
                               std::span<const std::vector<std::string>> docs, double min_doc_fraction = 0.001);

/// JSON sparse-triplet snapshot plus a `term,doc_frequency` vocabulary sidecar.
void write_dtm(std::ostream& triplets, std::ostream& vocabulary, const DocumentTermMatrix& dtm,
               const MetadataHeader& header);
DocumentTermMatrix read_dtm(std::istream& triplets, std::istream& vocabulary);

} // namespace petitions

#endif
