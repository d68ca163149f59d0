#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace anchor {

// Bag-of-words corpus over a shared vocabulary. Documents are sparse
// count vectors with sorted, distinct word indices. Immutable after
// construction; safe to share read-only across threads.
struct SparseCorpus {
    using Entry = std::pair<std::size_t, std::uint32_t>;  // (word index, count)

    std::size_t num_docs = 0;
    std::size_t vocab_size = 0;
    std::vector<std::vector<Entry>> docs;
    std::vector<std::string> vocab;

    std::size_t doc_length(std::size_t d) const {
        std::size_t n = 0;
        for (const auto& [w, c] : docs[d]) n += c;
        return n;
    }
    std::size_t total_tokens() const {
        std::size_t n = 0;
        for (std::size_t d = 0; d < num_docs; ++d) n += doc_length(d);
        return n;
    }
    // Number of documents containing each word at least once.
    std::vector<std::size_t> document_frequencies() const;
};

// Parses the UCI bag-of-words format: three integer header lines
// (M, V, NNZ) followed by NNZ "docID wordID count" triples, 1-based.
// Duplicate (doc, word) entries are summed; empty documents are kept.
SparseCorpus parse_uci_bag_of_words(std::istream& docword_stream,
                                    std::istream& vocab_stream);

SparseCorpus load_uci_corpus(const std::string& docword_path,
                             const std::string& vocab_path);

void write_uci_bag_of_words(const SparseCorpus& corpus,
                            std::ostream& docword_stream,
                            std::ostream& vocab_stream);

void save_uci_corpus(const SparseCorpus& corpus,
                     const std::string& docword_path,
                     const std::string& vocab_path);

// Removes words with document frequency < min_df or > max_df_fraction * M,
// reindexing survivors densely in original order. index_map[old] = new index,
// or npos for dropped words.
struct PruneResult {
    SparseCorpus corpus;
    std::vector<std::size_t> index_map;  // npos marks a removed word
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

PruneResult prune_vocabulary(const SparseCorpus& corpus, std::size_t min_df,
                             double max_df_fraction);

// Drops documents shorter than min_length tokens. The co-occurrence
// estimator divides by n_d(n_d - 1), so min_length must be >= 2.
SparseCorpus filter_short_documents(const SparseCorpus& corpus,
                                    std::size_t min_length = 2);

void validate_corpus(const SparseCorpus& corpus);

}  // namespace anchor
