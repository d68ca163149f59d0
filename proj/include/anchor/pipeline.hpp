#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace anchor {

// Exit codes shared by the CLI and the pipeline driver.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitStageFailure = 3;

struct PipelineConfig {
    // corpus inputs
    std::string docword_path;
    std::string vocab_path;
    std::size_t min_df = 1;
    double max_df_fraction = 1.0;
    std::size_t min_doc_length = 2;
    // anchors
    std::size_t k = 10;
    std::size_t projection_dim = 1000;
    std::size_t min_anchor_df = 10;
    std::uint64_t seed = 0;
    // recovery
    std::string method = "l2";
    double eg_tolerance = 1e-7;
    std::size_t eg_max_iters = 1000;
    // evaluation (optional)
    std::string a_true_path;
    std::size_t top_n = 20;
    // synth stage (optional; generates the corpus before build-q)
    std::string synth_a_path;
    std::size_t synth_docs = 0;
    std::size_t synth_doc_length = 0;
    std::string synth_prior = "dirichlet";  // or "logistic-normal"
    double synth_alpha = 0.03;
    double synth_rho = 0.0;
    std::size_t synth_groups = 10;
    bool synth_inject_anchors = false;
    // execution
    std::string out_dir = ".";
    bool resume = false;
    bool deterministic = true;
    std::size_t num_threads = 1;

    void validate() const;
};

// Flat key=value file (# comments, blank lines ignored). Keys mirror the
// struct field names with dashes, e.g. "eg-tol = 1e-7".
PipelineConfig load_pipeline_config(const std::string& path);
void apply_config_override(PipelineConfig& config, const std::string& key,
                           const std::string& value);

// Runs synth? -> build-q -> anchors -> recover -> eval, leaving artifacts
// under out_dir. Stages with existing outputs are skipped when resume is
// set. Returns kExitOk or kExitStageFailure.
int run_pipeline(const PipelineConfig& config);

struct SweepAxes {
    std::vector<std::size_t> docs;
    std::vector<std::string> methods;
    std::vector<double> rho;
    std::vector<bool> inject;
};

// Cartesian sweep; one report per cell plus a summary.csv of mean l1.
// Cell failures are recorded in the summary and do not stop the sweep.
int run_experiment_matrix(const PipelineConfig& base, const SweepAxes& axes);

}  // namespace anchor
