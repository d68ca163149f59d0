#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "anchor/anchors.hpp"
#include "anchor/cooccur.hpp"
#include "anchor/corpus.hpp"
#include "anchor/eval.hpp"
#include "anchor/io.hpp"
#include "anchor/pipeline.hpp"
#include "anchor/recover.hpp"
#include "anchor/synth.hpp"

namespace {

using namespace anchor;

struct GlobalOptions {
    std::size_t threads = 1;
    bool deterministic = false;
    std::uint64_t seed = 0;
};

std::vector<std::size_t> candidate_words(const Cooccurrence& cooc,
                                         const std::vector<std::size_t>& df,
                                         std::size_t min_anchor_df) {
    std::vector<std::size_t> candidates;
    for (std::size_t w = 0; w < static_cast<std::size_t>(cooc.q.rows()); ++w) {
        if (cooc.zero_rows.count(w)) continue;
        if (!df.empty() && w < df.size() && df[w] < min_anchor_df) continue;
        candidates.push_back(w);
    }
    return candidates;
}

std::vector<std::size_t> read_df(const std::string& path) {
    std::ifstream in(path);
    std::vector<std::size_t> df;
    std::size_t v = 0;
    while (in >> v) df.push_back(v);
    return df;
}

int cmd_build_q(const GlobalOptions& global, const std::string& docword,
                const std::string& vocab, std::size_t min_df,
                double max_df_frac, std::size_t min_doc_len,
                const std::string& out, bool deterministic) {
    SparseCorpus corpus = load_uci_corpus(docword, vocab);
    if (min_df > 1 || max_df_frac < 1.0) {
        PruneResult pruned = prune_vocabulary(corpus, min_df, max_df_frac);
        corpus = std::move(pruned.corpus);
    }
    corpus = filter_short_documents(corpus, min_doc_len);
    CooccurOptions opts;
    opts.deterministic = deterministic || global.deterministic;
    opts.num_threads = global.threads;
    Cooccurrence cooc = build_q(corpus, opts);
    save_q_binary(out, cooc.q, cooc.p_w);
    std::ofstream df(out + ".df");
    for (std::size_t d : corpus.document_frequencies()) df << d << "\n";
    std::ofstream vocab_out(out + ".vocab");
    for (const auto& w : corpus.vocab) vocab_out << w << "\n";
    std::cout << "Q: " << cooc.q.rows() << "x" << cooc.q.cols() << " from "
              << corpus.num_docs << " documents, " << cooc.zero_rows.size()
              << " zero rows -> " << out << "\n";
    return kExitOk;
}

int cmd_anchors(const GlobalOptions& global, const std::string& q_path,
                std::size_t k, std::size_t proj_dim,
                std::size_t min_anchor_df, const std::string& vocab_path,
                const std::string& out) {
    Eigen::MatrixXd q;
    Eigen::VectorXd p_w;
    load_q_binary(q_path, q, p_w);
    Cooccurrence cooc = cooccurrence_from_q(q);

    std::vector<std::size_t> df = read_df(q_path + ".df");
    std::vector<std::size_t> candidates =
        candidate_words(cooc, df, min_anchor_df);
    if (candidates.size() < k) candidates = candidate_words(cooc, {}, 0);

    AnchorOptions opts;
    opts.k = k;
    opts.projection_dim = proj_dim;
    opts.seed = global.seed;
    opts.num_threads = global.threads;
    AnchorSet anchors = select_anchors(cooc.q_bar, candidates, opts);

    std::vector<std::string> vocab;
    {
        std::ifstream in(vocab_path.empty() ? q_path + ".vocab" : vocab_path);
        std::string w;
        while (std::getline(in, w)) vocab.push_back(w);
    }
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot write anchors file: " + out);
    file.precision(12);
    for (std::size_t r = 0; r < anchors.indices.size(); ++r) {
        const std::size_t w = anchors.indices[r];
        file << (r + 1) << "\t" << w << "\t"
             << (w < vocab.size() ? vocab[w] : "w" + std::to_string(w)) << "\t"
             << anchors.span_distances[r] << "\n";
    }
    std::cout << "selected " << k << " anchors -> " << out << "\n";
    return kExitOk;
}

AnchorSet read_anchor_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open anchors file: " + path);
    AnchorSet anchors;
    std::size_t rank = 0, index = 0;
    std::string word;
    double dist = 0.0;
    while (in >> rank >> index >> word >> dist) {
        anchors.indices.push_back(index);
        anchors.span_distances.push_back(dist);
    }
    if (anchors.indices.empty()) {
        throw std::runtime_error("anchors file is empty: " + path);
    }
    return anchors;
}

int cmd_recover(const GlobalOptions& global, const std::string& q_path,
                const std::string& anchors_path, const std::string& method,
                double eg_tol, std::size_t eg_max_iters,
                const std::string& out_prefix, std::size_t top_n) {
    Eigen::MatrixXd q;
    Eigen::VectorXd p_w;
    load_q_binary(q_path, q, p_w);
    Cooccurrence cooc = cooccurrence_from_q(q);
    AnchorSet anchors = read_anchor_file(anchors_path);

    RecoverOptions opts;
    opts.eg_tolerance = eg_tol;
    opts.eg_max_iters = eg_max_iters;
    opts.num_threads = global.threads;
    TopicModel model = recover_topic_model(
        cooc, anchors, recover_method_from_string(method), opts);

    std::vector<std::string> vocab;
    {
        std::ifstream in(q_path + ".vocab");
        std::string w;
        while (std::getline(in, w)) vocab.push_back(w);
    }
    save_matrix_binary(out_prefix + ".A.bin", model.a);
    save_topic_matrix_tsv(out_prefix + ".A.tsv", model.a, vocab);
    save_matrix_binary(out_prefix + ".R.bin", model.r);
    std::ofstream pz(out_prefix + ".pz.tsv");
    pz.precision(12);
    for (Eigen::Index t = 0; t < model.p_z.size(); ++t) {
        pz << (t + 1) << "\t" << model.p_z(t) << "\n";
    }
    if (model.alpha0) pz << "alpha0\t" << *model.alpha0 << "\n";

    std::ofstream topics(out_prefix + ".topics.txt");
    const auto n =
        std::min<std::size_t>(top_n, static_cast<std::size_t>(model.a.rows()));
    for (Eigen::Index k = 0; k < model.a.cols(); ++k) {
        topics << "topic " << (k + 1) << ":";
        for (std::size_t w :
             top_words(model.a, static_cast<std::size_t>(k), n)) {
            topics << " "
                   << (w < vocab.size() ? vocab[w] : "w" + std::to_string(w));
            if (anchors.indices[static_cast<std::size_t>(k)] == w) {
                topics << "*";
            }
        }
        topics << "\n";
    }
    std::cout << "recovered " << model.a.cols() << " topics (" << method
              << ") -> " << out_prefix << ".A.tsv\n";
    return kExitOk;
}

int cmd_synth(const GlobalOptions& global, const std::string& a_path,
              std::size_t docs, std::size_t doc_len, const std::string& prior,
              double alpha, bool inject, double rho, std::size_t groups,
              const std::string& out_prefix, bool save_wtrue) {
    GeneratorSpec spec;
    spec.a = load_matrix_binary(a_path);
    if (inject) spec.a = inject_anchor_words(spec.a);
    spec.num_docs = docs;
    spec.doc_length = doc_len;
    spec.seed = global.seed;
    spec.num_threads = global.threads;
    if (prior == "dirichlet") {
        spec.prior =
            DirichletPrior{Eigen::VectorXd::Constant(spec.a.cols(), alpha)};
    } else if (prior == "logistic-normal") {
        spec.prior = LogisticNormalPrior{
            Eigen::VectorXd::Zero(spec.a.cols()),
            block_covariance(static_cast<std::size_t>(spec.a.cols()), groups,
                             rho)};
    } else {
        throw std::invalid_argument("unknown prior: " + prior);
    }
    GeneratedCorpus generated = generate_corpus(spec);
    save_uci_corpus(generated.corpus, out_prefix + ".docword.txt",
                    out_prefix + ".vocab.txt");
    if (save_wtrue) {
        save_matrix_binary(out_prefix + ".wtrue.bin", generated.w_true);
    }
    if (inject) save_matrix_binary(out_prefix + ".a_injected.bin", spec.a);
    std::ofstream meta(out_prefix + ".meta.txt");
    meta << "seed = " << global.seed << "\nprior = " << prior
         << "\nalpha = " << alpha << "\nrho = " << rho
         << "\ngroups = " << groups << "\ndoc-len = " << doc_len
         << "\ndocs = " << docs << "\ninject-anchors = " << inject << "\n";
    std::cout << "generated " << docs << " documents -> " << out_prefix
              << ".docword.txt\n";
    return kExitOk;
}

int cmd_eval(const std::string& a_hat_path, const std::string& a_true_path,
             const std::string& docword, const std::string& vocab,
             std::size_t top_n, const std::string& out) {
    Eigen::MatrixXd a_hat = load_matrix_binary(a_hat_path);
    EvalReport report;
    if (!a_true_path.empty()) {
        Eigen::MatrixXd a_true = load_matrix_binary(a_true_path);
        L1MatchResult l1 = l1_topic_error(a_true, a_hat);
        report.per_topic_l1 = l1.per_topic_l1;
        report.matching = l1.matching;
        for (double d : l1.per_topic_l1) report.mean_l1 += d;
        report.mean_l1 /= static_cast<double>(l1.per_topic_l1.size());
        report.uniform_baseline_l1 = uniform_baseline(a_true);
        report.has_l1 = true;
    }
    if (!docword.empty()) {
        SparseCorpus corpus = load_uci_corpus(docword, vocab);
        const auto n = std::min<std::size_t>(
            top_n, static_cast<std::size_t>(a_hat.rows()));
        report.coherence = coherence(a_hat, corpus, n);
        for (double d : report.coherence) report.mean_coherence += d;
        report.mean_coherence /= static_cast<double>(report.coherence.size());
        report.has_coherence = true;
        report.unique_words = unique_words(a_hat, n);
    } else {
        report.unique_words = unique_words(
            a_hat, std::min<std::size_t>(
                       top_n, static_cast<std::size_t>(a_hat.rows())));
    }
    std::ofstream file(out);
    if (!file) throw std::runtime_error("cannot write report: " + out);
    file << report.to_json() << "\n";
    std::cout << "report -> " << out << "\n";
    return kExitOk;
}

std::vector<std::size_t> parse_size_list(const std::string& csv) {
    std::vector<std::size_t> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stoul(item));
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& csv) {
    std::vector<double> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(std::stod(item));
    }
    return out;
}

std::vector<std::string> parse_string_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Anchor-word topic modeling: co-occurrence statistics, "
                 "combinatorial anchor selection, and convex recovery"};
    app.require_subcommand(1);

    GlobalOptions global;
    app.add_option("--threads", global.threads, "Worker threads");
    app.add_flag("--deterministic", global.deterministic,
                 "Force deterministic reductions");
    app.add_option("--seed", global.seed, "RNG seed");

    // build-q
    auto* build = app.add_subcommand("build-q", "Build the co-occurrence matrix");
    std::string docword, vocab, out = "q.bin";
    std::size_t min_df = 1, min_doc_len = 2;
    double max_df_frac = 1.0;
    bool det_flag = false;
    build->add_option("--docword", docword)->required();
    build->add_option("--vocab", vocab)->required();
    build->add_option("--min-df", min_df);
    build->add_option("--max-df-frac", max_df_frac);
    build->add_option("--min-doc-len", min_doc_len);
    build->add_option("--out", out);
    build->add_flag("--deterministic", det_flag);

    // anchors
    auto* anc = app.add_subcommand("anchors", "Select anchor words");
    std::string q_path = "q.bin", anchors_out = "anchors.tsv", anc_vocab;
    std::size_t k = 10, proj_dim = 1000, min_anchor_df = 10;
    anc->add_option("--q", q_path)->required();
    anc->add_option("--k", k)->required();
    anc->add_option("--proj-dim", proj_dim);
    anc->add_option("--min-anchor-df", min_anchor_df);
    anc->add_option("--vocab", anc_vocab);
    anc->add_option("--out", anchors_out);

    // recover
    auto* rec = app.add_subcommand("recover", "Recover the topic model");
    std::string rec_q = "q.bin", rec_anchors = "anchors.tsv", method = "l2";
    std::string out_prefix = "model";
    double eg_tol = 1e-7;
    std::size_t eg_max_iters = 1000, rec_top_n = 20;
    rec->add_option("--q", rec_q)->required();
    rec->add_option("--anchors", rec_anchors)->required();
    rec->add_option("--method", method)
        ->check(CLI::IsMember({"kl", "l2", "original"}));
    rec->add_option("--eg-tol", eg_tol);
    rec->add_option("--eg-max-iters", eg_max_iters);
    rec->add_option("--out-prefix", out_prefix);
    rec->add_option("--top-n", rec_top_n);

    // synth
    auto* syn = app.add_subcommand("synth", "Generate a semi-synthetic corpus");
    std::string a_path, prior = "dirichlet", syn_prefix = "synth";
    std::size_t docs = 0, doc_len = 0, groups = 10;
    double alpha = 0.03, rho = 0.0;
    bool inject = false, save_wtrue = false;
    syn->add_option("--a", a_path)->required();
    syn->add_option("--docs", docs)->required();
    syn->add_option("--doc-len", doc_len)->required();
    syn->add_option("--prior", prior)
        ->check(CLI::IsMember({"dirichlet", "logistic-normal"}));
    syn->add_option("--alpha", alpha);
    syn->add_flag("--inject-anchors", inject);
    syn->add_option("--corr-rho", rho);
    syn->add_option("--corr-groups", groups);
    syn->add_option("--out-prefix", syn_prefix);
    syn->add_flag("--save-wtrue", save_wtrue);

    // eval
    auto* ev = app.add_subcommand("eval", "Score a recovered model");
    std::string a_hat, a_true, ev_docword, ev_vocab, report_out = "report.json";
    std::size_t top_n = 20;
    ev->add_option("--a-hat", a_hat)->required();
    ev->add_option("--a-true", a_true);
    ev->add_option("--docword", ev_docword);
    ev->add_option("--vocab", ev_vocab);
    ev->add_option("--top-n", top_n);
    ev->add_option("--out", report_out);

    // pipeline
    auto* pipe = app.add_subcommand("pipeline", "Run the full pipeline");
    std::string config_path;
    std::vector<std::string> overrides;
    bool resume = false;
    pipe->add_option("--config", config_path, "key=value config file");
    pipe->add_option("--set", overrides, "key=value override (repeatable)");
    pipe->add_flag("--resume", resume);

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Run the experiment matrix");
    std::string sweep_config, docs_axis, methods_axis, rho_axis, inject_axis;
    std::vector<std::string> sweep_overrides;
    sweep->add_option("--config", sweep_config)->required();
    sweep->add_option("--set", sweep_overrides, "key=value override");
    sweep->add_option("--docs", docs_axis, "comma-separated corpus sizes");
    sweep->add_option("--methods", methods_axis, "comma-separated methods");
    sweep->add_option("--rho", rho_axis, "comma-separated correlation levels");
    sweep->add_option("--inject", inject_axis,
                      "comma-separated 0/1 anchor-injection flags");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*build) {
            return cmd_build_q(global, docword, vocab, min_df, max_df_frac,
                               min_doc_len, out, det_flag);
        }
        if (*anc) {
            return cmd_anchors(global, q_path, k, proj_dim, min_anchor_df,
                               anc_vocab, anchors_out);
        }
        if (*rec) {
            return cmd_recover(global, rec_q, rec_anchors, method, eg_tol,
                               eg_max_iters, out_prefix, rec_top_n);
        }
        if (*syn) {
            return cmd_synth(global, a_path, docs, doc_len, prior, alpha,
                             inject, rho, groups, syn_prefix, save_wtrue);
        }
        if (*ev) {
            return cmd_eval(a_hat, a_true, ev_docword, ev_vocab, top_n,
                            report_out);
        }
        if (*pipe) {
            PipelineConfig config;
            try {
                if (!config_path.empty()) {
                    config = load_pipeline_config(config_path);
                }
                for (const auto& kv : overrides) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos) {
                        throw std::invalid_argument("override must be key=value: " + kv);
                    }
                    apply_config_override(config, kv.substr(0, eq),
                                          kv.substr(eq + 1));
                }
                if (resume) config.resume = true;
                if (global.threads > 1) config.num_threads = global.threads;
                if (global.deterministic) config.deterministic = true;
                if (global.seed != 0) config.seed = global.seed;
                config.validate();
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return kExitConfigError;
            }
            return run_pipeline(config);
        }
        if (*sweep) {
            PipelineConfig config;
            SweepAxes axes;
            try {
                config = load_pipeline_config(sweep_config);
                for (const auto& kv : sweep_overrides) {
                    const auto eq = kv.find('=');
                    if (eq == std::string::npos) {
                        throw std::invalid_argument("override must be key=value: " + kv);
                    }
                    apply_config_override(config, kv.substr(0, eq),
                                          kv.substr(eq + 1));
                }
                if (global.threads > 1) config.num_threads = global.threads;
                axes.docs = parse_size_list(docs_axis);
                axes.methods = parse_string_list(methods_axis);
                axes.rho = parse_double_list(rho_axis);
                for (std::size_t f : parse_size_list(inject_axis)) {
                    axes.inject.push_back(f != 0);
                }
                config.validate();
            } catch (const std::exception& e) {
                std::cerr << "config error: " << e.what() << "\n";
                return kExitConfigError;
            }
            return run_experiment_matrix(config, axes);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitStageFailure;
    }
    return kExitOk;
}
