#include "anchor/pipeline.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "anchor/anchors.hpp"
#include "anchor/cooccur.hpp"
#include "anchor/corpus.hpp"
#include "anchor/eval.hpp"
#include "anchor/io.hpp"
#include "anchor/recover.hpp"
#include "anchor/synth.hpp"

namespace fs = std::filesystem;

namespace anchor {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() -
                                         start)
        .count();
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

void save_df_sidecar(const std::string& path,
                     const std::vector<std::size_t>& df) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write df sidecar: " + path);
    for (std::size_t d : df) out << d << "\n";
}

std::vector<std::size_t> load_df_sidecar(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::size_t> df;
    std::size_t value = 0;
    while (in >> value) df.push_back(value);
    return df;
}

void save_anchor_file(const std::string& path, const AnchorSet& anchors,
                      const std::vector<std::string>& vocab) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write anchors file: " + path);
    out.precision(12);
    for (std::size_t r = 0; r < anchors.indices.size(); ++r) {
        const std::size_t w = anchors.indices[r];
        out << (r + 1) << "\t" << w << "\t"
            << (w < vocab.size() ? vocab[w] : "w" + std::to_string(w)) << "\t"
            << anchors.span_distances[r] << "\n";
    }
}

AnchorSet load_anchor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open anchors file: " + path);
    AnchorSet anchors;
    std::string line;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        std::istringstream ss(line);
        std::size_t rank = 0, index = 0;
        std::string word;
        double dist = 0.0;
        if (!(ss >> rank >> index >> word >> dist)) {
            throw std::runtime_error("malformed anchors line: " + line);
        }
        anchors.indices.push_back(index);
        anchors.span_distances.push_back(dist);
    }
    if (anchors.indices.empty()) {
        throw std::runtime_error("anchors file is empty: " + path);
    }
    return anchors;
}

void save_topic_summary(const std::string& path, const TopicModel& model,
                        const std::vector<std::string>& vocab,
                        const AnchorSet& anchors, std::size_t top_n) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write topic summary: " + path);
    const auto n = std::min<std::size_t>(
        top_n, static_cast<std::size_t>(model.a.rows()));
    for (Eigen::Index k = 0; k < model.a.cols(); ++k) {
        out << "topic " << (k + 1) << " (p(z)=" << model.p_z(k) << "):";
        for (std::size_t w :
             top_words(model.a, static_cast<std::size_t>(k), n)) {
            out << " "
                << (w < vocab.size() ? vocab[w] : "w" + std::to_string(w));
            if (static_cast<std::size_t>(k) < anchors.indices.size() &&
                anchors.indices[static_cast<std::size_t>(k)] == w) {
                out << "*";
            }
        }
        out << "\n";
    }
}

std::vector<std::string> load_vocab_lines(const std::string& path) {
    std::vector<std::string> vocab;
    std::ifstream in(path);
    std::string word;
    while (std::getline(in, word)) {
        if (!word.empty() && word.back() == '\r') word.pop_back();
        vocab.push_back(word);
    }
    while (!vocab.empty() && vocab.back().empty()) vocab.pop_back();
    return vocab;
}

}  // namespace

void PipelineConfig::validate() const {
    if (k < 1) throw std::invalid_argument("config: k must be >= 1");
    if (eg_tolerance <= 0.0) {
        throw std::invalid_argument("config: eg-tol must be positive");
    }
    if (max_df_fraction <= 0.0 || max_df_fraction > 1.0) {
        throw std::invalid_argument("config: max-df-frac must be in (0, 1]");
    }
    if (min_doc_length < 2) {
        throw std::invalid_argument("config: min-doc-len must be >= 2");
    }
    recover_method_from_string(method);
    if (synth_a_path.empty() && docword_path.empty()) {
        throw std::invalid_argument(
            "config: either docword/vocab inputs or a synth A matrix is required");
    }
}

void apply_config_override(PipelineConfig& c, const std::string& key,
                           const std::string& value) {
    const std::string k_ = trim(key);
    const std::string v = trim(value);
    try {
        if (k_ == "docword") c.docword_path = v;
        else if (k_ == "vocab") c.vocab_path = v;
        else if (k_ == "min-df") c.min_df = std::stoul(v);
        else if (k_ == "max-df-frac") c.max_df_fraction = std::stod(v);
        else if (k_ == "min-doc-len") c.min_doc_length = std::stoul(v);
        else if (k_ == "k") c.k = std::stoul(v);
        else if (k_ == "proj-dim") c.projection_dim = std::stoul(v);
        else if (k_ == "min-anchor-df") c.min_anchor_df = std::stoul(v);
        else if (k_ == "seed") c.seed = std::stoull(v);
        else if (k_ == "method") c.method = v;
        else if (k_ == "eg-tol") c.eg_tolerance = std::stod(v);
        else if (k_ == "eg-max-iters") c.eg_max_iters = std::stoul(v);
        else if (k_ == "a-true") c.a_true_path = v;
        else if (k_ == "top-n") c.top_n = std::stoul(v);
        else if (k_ == "synth-a") c.synth_a_path = v;
        else if (k_ == "synth-docs") c.synth_docs = std::stoul(v);
        else if (k_ == "synth-doc-len") c.synth_doc_length = std::stoul(v);
        else if (k_ == "synth-prior") c.synth_prior = v;
        else if (k_ == "synth-alpha") c.synth_alpha = std::stod(v);
        else if (k_ == "synth-rho") c.synth_rho = std::stod(v);
        else if (k_ == "synth-groups") c.synth_groups = std::stoul(v);
        else if (k_ == "synth-inject-anchors")
            c.synth_inject_anchors = (v == "1" || v == "true" || v == "yes");
        else if (k_ == "out-dir") c.out_dir = v;
        else if (k_ == "resume") c.resume = (v == "1" || v == "true" || v == "yes");
        else if (k_ == "deterministic")
            c.deterministic = (v == "1" || v == "true" || v == "yes");
        else if (k_ == "threads") c.num_threads = std::stoul(v);
        else throw std::invalid_argument("unknown config key: " + k_);
    } catch (const std::invalid_argument&) {
        throw;
    } catch (const std::exception&) {
        throw std::invalid_argument("bad value for config key " + k_ + ": " + v);
    }
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open config file: " + path);
    PipelineConfig config;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        const auto eq = t.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " +
                                        std::to_string(line_no) +
                                        ": expected key = value");
        }
        apply_config_override(config, t.substr(0, eq), t.substr(eq + 1));
    }
    return config;
}

int run_pipeline(const PipelineConfig& config) {
    std::string stage = "setup";
    try {
        config.validate();
        fs::create_directories(config.out_dir);
        const std::string q_path = config.out_dir + "/q.bin";
        const std::string df_path = q_path + ".df";
        const std::string anchors_path = config.out_dir + "/anchors.tsv";
        const std::string model_prefix = config.out_dir + "/model";
        const std::string report_path = config.out_dir + "/report.json";
        std::string docword_path = config.docword_path;
        std::string vocab_path = config.vocab_path;

        EvalReport report;

        // Optional synth stage: generate the corpus from a given A.
        if (!config.synth_a_path.empty()) {
            stage = "synth";
            docword_path = config.out_dir + "/docword.txt";
            vocab_path = config.out_dir + "/vocab.txt";
            if (!(config.resume && fs::exists(docword_path))) {
                const auto start = std::chrono::steady_clock::now();
                GeneratorSpec spec;
                spec.a = load_matrix_binary(config.synth_a_path);
                if (config.synth_inject_anchors) {
                    spec.a = inject_anchor_words(spec.a);
                }
                spec.num_docs = config.synth_docs;
                spec.doc_length = config.synth_doc_length;
                spec.seed = config.seed;
                spec.num_threads = config.num_threads;
                if (config.synth_prior == "dirichlet") {
                    spec.prior = DirichletPrior{Eigen::VectorXd::Constant(
                        spec.a.cols(), config.synth_alpha)};
                } else if (config.synth_prior == "logistic-normal") {
                    spec.prior = LogisticNormalPrior{
                        Eigen::VectorXd::Zero(spec.a.cols()),
                        block_covariance(
                            static_cast<std::size_t>(spec.a.cols()),
                            config.synth_groups, config.synth_rho)};
                } else {
                    throw std::invalid_argument("unknown synth prior: " +
                                                config.synth_prior);
                }
                GeneratedCorpus generated = generate_corpus(spec);
                save_uci_corpus(generated.corpus, docword_path, vocab_path);
                save_matrix_binary(config.out_dir + "/w_true.bin",
                                   generated.w_true);
                std::ofstream meta(config.out_dir + "/synth_meta.txt");
                meta << "seed = " << config.seed << "\n"
                     << "prior = " << config.synth_prior << "\n"
                     << "alpha = " << config.synth_alpha << "\n"
                     << "rho = " << config.synth_rho << "\n"
                     << "doc-len = " << config.synth_doc_length << "\n"
                     << "docs = " << config.synth_docs << "\n"
                     << "inject-anchors = " << config.synth_inject_anchors
                     << "\n";
                report.timings_seconds["synth"] = seconds_since(start);
            }
        }

        // build-q
        std::vector<std::string> vocab;
        if (!(config.resume && fs::exists(q_path))) {
            stage = "build-q";
            const auto start = std::chrono::steady_clock::now();
            SparseCorpus corpus = load_uci_corpus(docword_path, vocab_path);
            if (config.min_df > 1 || config.max_df_fraction < 1.0) {
                corpus = prune_vocabulary(corpus, config.min_df,
                                          config.max_df_fraction)
                             .corpus;
            }
            corpus = filter_short_documents(corpus, config.min_doc_length);
            vocab = corpus.vocab;
            CooccurOptions copts;
            copts.deterministic = config.deterministic;
            copts.num_threads = config.num_threads;
            Cooccurrence cooc = build_q(corpus, copts);
            save_q_binary(q_path, cooc.q, cooc.p_w);
            save_df_sidecar(df_path, corpus.document_frequencies());
            report.timings_seconds["q-build"] = seconds_since(start);
        } else {
            vocab = load_vocab_lines(vocab_path);
        }

        stage = "load-q";
        Eigen::MatrixXd q;
        Eigen::VectorXd p_w;
        load_q_binary(q_path, q, p_w);
        Cooccurrence cooc = cooccurrence_from_q(q);

        // anchors
        AnchorSet anchors;
        if (!(config.resume && fs::exists(anchors_path))) {
            stage = "anchors";
            const auto start = std::chrono::steady_clock::now();
            const std::vector<std::size_t> df = load_df_sidecar(df_path);
            std::vector<std::size_t> candidates;
            for (std::size_t w = 0;
                 w < static_cast<std::size_t>(cooc.q.rows()); ++w) {
                if (cooc.zero_rows.count(w)) continue;
                if (!df.empty() && w < df.size() && df[w] < config.min_anchor_df)
                    continue;
                candidates.push_back(w);
            }
            if (candidates.size() < config.k) {
                // df cutoff too aggressive for this corpus; fall back to
                // all nonzero rows.
                candidates.clear();
                for (std::size_t w = 0;
                     w < static_cast<std::size_t>(cooc.q.rows()); ++w) {
                    if (!cooc.zero_rows.count(w)) candidates.push_back(w);
                }
            }
            AnchorOptions aopts;
            aopts.k = config.k;
            aopts.projection_dim = config.projection_dim;
            aopts.seed = config.seed;
            aopts.num_threads = config.num_threads;
            anchors = select_anchors(cooc.q_bar, candidates, aopts);
            save_anchor_file(anchors_path, anchors, vocab);
            report.timings_seconds["anchors"] = seconds_since(start);
        } else {
            anchors = load_anchor_file(anchors_path);
        }

        // recover
        stage = "recover";
        {
            const auto start = std::chrono::steady_clock::now();
            RecoverOptions ropts;
            ropts.eg_tolerance = config.eg_tolerance;
            ropts.eg_max_iters = config.eg_max_iters;
            ropts.num_threads = config.num_threads;
            TopicModel model = recover_topic_model(
                cooc, anchors, recover_method_from_string(config.method),
                ropts);
            report.timings_seconds["recover"] = seconds_since(start);
            save_matrix_binary(model_prefix + ".A.bin", model.a);
            save_topic_matrix_tsv(model_prefix + ".A.tsv", model.a, vocab);
            save_matrix_binary(model_prefix + ".R.bin", model.r);
            std::ofstream pz(model_prefix + ".pz.tsv");
            pz.precision(12);
            for (Eigen::Index t = 0; t < model.p_z.size(); ++t) {
                pz << (t + 1) << "\t" << model.p_z(t) << "\n";
            }
            if (model.alpha0) pz << "alpha0\t" << *model.alpha0 << "\n";
            save_topic_summary(config.out_dir + "/topics.txt", model, vocab,
                               anchors, config.top_n);

            // eval
            stage = "eval";
            if (!config.a_true_path.empty()) {
                Eigen::MatrixXd a_true =
                    load_matrix_binary(config.a_true_path);
                L1MatchResult l1 = l1_topic_error(a_true, model.a);
                report.per_topic_l1 = l1.per_topic_l1;
                report.matching = l1.matching;
                report.mean_l1 = 0.0;
                for (double d : l1.per_topic_l1) report.mean_l1 += d;
                report.mean_l1 /= static_cast<double>(l1.per_topic_l1.size());
                report.uniform_baseline_l1 = uniform_baseline(a_true);
                report.has_l1 = true;
            }
            if (!docword_path.empty() && fs::exists(docword_path)) {
                SparseCorpus corpus =
                    load_uci_corpus(docword_path, vocab_path);
                if (static_cast<Eigen::Index>(corpus.vocab_size) ==
                    model.a.rows()) {
                    report.coherence = coherence(
                        model.a, corpus,
                        std::min<std::size_t>(
                            config.top_n,
                            static_cast<std::size_t>(model.a.rows())));
                    report.mean_coherence = 0.0;
                    for (double d : report.coherence) {
                        report.mean_coherence += d;
                    }
                    report.mean_coherence /=
                        static_cast<double>(report.coherence.size());
                    report.has_coherence = true;
                    report.unique_words = unique_words(
                        model.a,
                        std::min<std::size_t>(
                            config.top_n,
                            static_cast<std::size_t>(model.a.rows())));
                }
            }
        }

        stage = "report";
        std::ofstream out(report_path);
        out << report.to_json() << "\n";
        return kExitOk;
    } catch (const std::exception& e) {
        std::cerr << "pipeline failed at stage " << stage << ": " << e.what()
                  << "\n";
        return kExitStageFailure;
    }
}

int run_experiment_matrix(const PipelineConfig& base, const SweepAxes& axes) {
    // Empty axes mean a single cell with the base settings.
    const std::vector<std::size_t> docs =
        axes.docs.empty() ? std::vector<std::size_t>{base.synth_docs}
                          : axes.docs;
    const std::vector<std::string> methods =
        axes.methods.empty() ? std::vector<std::string>{base.method}
                             : axes.methods;
    const std::vector<double> rho =
        axes.rho.empty() ? std::vector<double>{base.synth_rho} : axes.rho;
    const std::vector<bool> inject =
        axes.inject.empty() ? std::vector<bool>{base.synth_inject_anchors}
                            : axes.inject;

    fs::create_directories(base.out_dir);
    std::ofstream summary(base.out_dir + "/summary.csv");
    summary << "cell,docs,method,rho,inject,status,mean_l1\n";
    summary.precision(10);

    std::size_t cell = 0;
    bool any_failure = false;
    for (std::size_t m : docs) {
        for (const std::string& method : methods) {
            for (double r : rho) {
                for (bool inj : inject) {
                    PipelineConfig cfg = base;
                    cfg.synth_docs = m;
                    cfg.method = method;
                    cfg.synth_rho = r;
                    cfg.synth_inject_anchors = inj;
                    cfg.out_dir = base.out_dir + "/cell_" +
                                  std::to_string(cell);
                    const int status = run_pipeline(cfg);
                    std::string mean_l1 = "";
                    if (status == kExitOk) {
                        std::ifstream report(cfg.out_dir + "/report.json");
                        std::string json(
                            (std::istreambuf_iterator<char>(report)),
                            std::istreambuf_iterator<char>());
                        const auto pos = json.find("\"mean\":");
                        if (pos != std::string::npos) {
                            const auto end = json.find_first_of(",}", pos + 7);
                            mean_l1 = json.substr(pos + 7, end - pos - 7);
                        }
                    } else {
                        any_failure = true;
                    }
                    summary << cell << "," << m << "," << method << "," << r
                            << "," << (inj ? 1 : 0) << ","
                            << (status == kExitOk ? "ok" : "failed") << ","
                            << mean_l1 << "\n";
                    ++cell;
                }
            }
        }
    }
    return any_failure ? kExitStageFailure : kExitOk;
}

}  // namespace anchor
