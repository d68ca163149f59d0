#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

namespace anchor {

// Binary Q file: 8-byte magic "ANCHQ001", u64 V, V*V little-endian f64
// row-major entries, then V f64 word marginals.
void save_q_binary(const std::string& path, const Eigen::MatrixXd& q,
                   const Eigen::VectorXd& p_w);
void load_q_binary(const std::string& path, Eigen::MatrixXd& q,
                   Eigen::VectorXd& p_w);

// General dense matrix file: 8-byte magic "ANCHM001", u64 rows, u64 cols,
// row-major f64 entries. Used for A matrices and W_true.
void save_matrix_binary(const std::string& path, const Eigen::MatrixXd& m);
Eigen::MatrixXd load_matrix_binary(const std::string& path);

// A matrix as TSV: header "word\t1\t2...K", one row per word.
void save_topic_matrix_tsv(const std::string& path, const Eigen::MatrixXd& a,
                           const std::vector<std::string>& vocab);

}  // namespace anchor
