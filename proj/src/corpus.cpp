#include "anchor/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace anchor {

namespace {

long long parse_integer_line(std::istream& in, std::size_t line_no,
                             const char* what) {
    std::string line;
    if (!std::getline(in, line)) {
        throw std::runtime_error("docword parse error at line " +
                                 std::to_string(line_no) + ": missing " +
                                 what + " header line");
    }
    std::istringstream ss(line);
    long long value = 0;
    if (!(ss >> value)) {
        throw std::runtime_error("docword parse error at line " +
                                 std::to_string(line_no) +
                                 ": expected integer " + what + ", got \"" +
                                 line + "\"");
    }
    return value;
}

}  // namespace

std::vector<std::size_t> SparseCorpus::document_frequencies() const {
    std::vector<std::size_t> df(vocab_size, 0);
    for (const auto& doc : docs) {
        for (const auto& [w, c] : doc) ++df[w];
    }
    return df;
}

SparseCorpus parse_uci_bag_of_words(std::istream& docword_stream,
                                    std::istream& vocab_stream) {
    const long long m = parse_integer_line(docword_stream, 1, "M");
    const long long v = parse_integer_line(docword_stream, 2, "V");
    const long long nnz = parse_integer_line(docword_stream, 3, "NNZ");
    if (m < 0 || v <= 0 || nnz < 0) {
        throw std::runtime_error("docword parse error: header values M=" +
                                 std::to_string(m) + " V=" + std::to_string(v) +
                                 " NNZ=" + std::to_string(nnz) +
                                 " out of range");
    }

    // Accumulate per document in a map keyed by word index: duplicate
    // (doc, word) entries are summed, output comes out sorted.
    std::vector<std::map<std::size_t, std::uint64_t>> acc(
        static_cast<std::size_t>(m));
    std::size_t line_no = 3;
    for (long long i = 0; i < nnz; ++i) {
        ++line_no;
        long long doc_id = 0, word_id = 0, count = 0;
        if (!(docword_stream >> doc_id >> word_id >> count)) {
            throw std::runtime_error("docword parse error at line " +
                                     std::to_string(line_no) +
                                     ": expected \"docID wordID count\"");
        }
        if (doc_id < 1 || doc_id > m) {
            throw std::out_of_range("docword entry at line " +
                                    std::to_string(line_no) + ": docID " +
                                    std::to_string(doc_id) +
                                    " outside [1, " + std::to_string(m) + "]");
        }
        if (word_id < 1 || word_id > v) {
            throw std::out_of_range("docword entry at line " +
                                    std::to_string(line_no) + ": wordID " +
                                    std::to_string(word_id) +
                                    " outside [1, " + std::to_string(v) + "]");
        }
        if (count <= 0) {
            throw std::invalid_argument("docword entry at line " +
                                        std::to_string(line_no) + ": count " +
                                        std::to_string(count) +
                                        " must be positive");
        }
        acc[static_cast<std::size_t>(doc_id - 1)]
           [static_cast<std::size_t>(word_id - 1)] +=
            static_cast<std::uint64_t>(count);
    }

    SparseCorpus corpus;
    corpus.num_docs = static_cast<std::size_t>(m);
    corpus.vocab_size = static_cast<std::size_t>(v);
    corpus.docs.resize(corpus.num_docs);
    for (std::size_t d = 0; d < corpus.num_docs; ++d) {
        corpus.docs[d].reserve(acc[d].size());
        for (const auto& [w, c] : acc[d]) {
            corpus.docs[d].emplace_back(w, static_cast<std::uint32_t>(c));
        }
    }

    corpus.vocab.reserve(corpus.vocab_size);
    std::string word;
    while (std::getline(vocab_stream, word)) {
        if (!word.empty() && word.back() == '\r') word.pop_back();
        if (word.empty() && corpus.vocab.size() >= corpus.vocab_size) continue;
        corpus.vocab.push_back(word);
    }
    if (corpus.vocab.size() != corpus.vocab_size) {
        throw std::runtime_error(
            "vocab file has " + std::to_string(corpus.vocab.size()) +
            " entries but docword header declares V=" +
            std::to_string(corpus.vocab_size));
    }
    validate_corpus(corpus);
    return corpus;
}

SparseCorpus load_uci_corpus(const std::string& docword_path,
                             const std::string& vocab_path) {
    std::ifstream docword(docword_path);
    if (!docword) {
        throw std::runtime_error("cannot open docword file: " + docword_path);
    }
    std::ifstream vocab(vocab_path);
    if (!vocab) {
        throw std::runtime_error("cannot open vocab file: " + vocab_path);
    }
    return parse_uci_bag_of_words(docword, vocab);
}

void write_uci_bag_of_words(const SparseCorpus& corpus,
                            std::ostream& docword_stream,
                            std::ostream& vocab_stream) {
    std::size_t nnz = 0;
    for (const auto& doc : corpus.docs) nnz += doc.size();
    docword_stream << corpus.num_docs << "\n"
                   << corpus.vocab_size << "\n"
                   << nnz << "\n";
    for (std::size_t d = 0; d < corpus.num_docs; ++d) {
        for (const auto& [w, c] : corpus.docs[d]) {
            docword_stream << (d + 1) << " " << (w + 1) << " " << c << "\n";
        }
    }
    for (const auto& word : corpus.vocab) vocab_stream << word << "\n";
}

void save_uci_corpus(const SparseCorpus& corpus,
                     const std::string& docword_path,
                     const std::string& vocab_path) {
    std::ofstream docword(docword_path);
    if (!docword) {
        throw std::runtime_error("cannot write docword file: " + docword_path);
    }
    std::ofstream vocab(vocab_path);
    if (!vocab) {
        throw std::runtime_error("cannot write vocab file: " + vocab_path);
    }
    write_uci_bag_of_words(corpus, docword, vocab);
}

PruneResult prune_vocabulary(const SparseCorpus& corpus, std::size_t min_df,
                             double max_df_fraction) {
    if (max_df_fraction <= 0.0 || max_df_fraction > 1.0) {
        throw std::invalid_argument("max_df_fraction must lie in (0, 1]");
    }
    const std::vector<std::size_t> df = corpus.document_frequencies();
    const double max_df = max_df_fraction * static_cast<double>(corpus.num_docs);

    PruneResult result;
    result.index_map.assign(corpus.vocab_size, PruneResult::npos);
    std::size_t next = 0;
    for (std::size_t w = 0; w < corpus.vocab_size; ++w) {
        if (df[w] >= min_df && static_cast<double>(df[w]) <= max_df) {
            result.index_map[w] = next++;
        }
    }
    if (next == 0) {
        throw std::runtime_error("vocabulary pruning removed every word "
                                 "(min_df=" + std::to_string(min_df) +
                                 ", max_df_fraction=" +
                                 std::to_string(max_df_fraction) + ")");
    }

    result.corpus.num_docs = corpus.num_docs;
    result.corpus.vocab_size = next;
    result.corpus.vocab.resize(next);
    for (std::size_t w = 0; w < corpus.vocab_size; ++w) {
        if (result.index_map[w] != PruneResult::npos) {
            result.corpus.vocab[result.index_map[w]] = corpus.vocab[w];
        }
    }
    result.corpus.docs.resize(corpus.num_docs);
    for (std::size_t d = 0; d < corpus.num_docs; ++d) {
        auto& out = result.corpus.docs[d];
        for (const auto& [w, c] : corpus.docs[d]) {
            if (result.index_map[w] != PruneResult::npos) {
                out.emplace_back(result.index_map[w], c);
            }
        }
    }
    return result;
}

SparseCorpus filter_short_documents(const SparseCorpus& corpus,
                                    std::size_t min_length) {
    if (min_length < 2) {
        throw std::invalid_argument("min_length must be >= 2");
    }
    SparseCorpus out;
    out.vocab_size = corpus.vocab_size;
    out.vocab = corpus.vocab;
    for (std::size_t d = 0; d < corpus.num_docs; ++d) {
        if (corpus.doc_length(d) >= min_length) {
            out.docs.push_back(corpus.docs[d]);
        }
    }
    out.num_docs = out.docs.size();
    if (out.num_docs == 0) {
        throw std::runtime_error("no documents of length >= " +
                                 std::to_string(min_length) + " remain");
    }
    return out;
}

void validate_corpus(const SparseCorpus& corpus) {
    if (corpus.docs.size() != corpus.num_docs) {
        throw std::runtime_error("corpus has " +
                                 std::to_string(corpus.docs.size()) +
                                 " documents but declares " +
                                 std::to_string(corpus.num_docs));
    }
    if (corpus.vocab.size() != corpus.vocab_size) {
        throw std::runtime_error("corpus vocab size mismatch");
    }
    for (std::size_t d = 0; d < corpus.num_docs; ++d) {
        bool first = true;
        std::size_t prev = 0;
        for (const auto& [w, c] : corpus.docs[d]) {
            if (w >= corpus.vocab_size) {
                throw std::out_of_range("document " + std::to_string(d) +
                                        " references word " +
                                        std::to_string(w) +
                                        " outside the vocabulary");
            }
            if (c == 0) {
                throw std::invalid_argument("document " + std::to_string(d) +
                                            " has a zero count");
            }
            if (!first && w <= prev) {
                throw std::runtime_error("document " + std::to_string(d) +
                                         " entries not sorted/distinct");
            }
            prev = w;
            first = false;
        }
    }
}

}  // namespace anchor
