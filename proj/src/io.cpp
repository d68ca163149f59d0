#include "anchor/io.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace anchor {

namespace {

constexpr char kQMagic[8] = {'A', 'N', 'C', 'H', 'Q', '0', '0', '1'};
constexpr char kMatMagic[8] = {'A', 'N', 'C', 'H', 'M', '0', '0', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    return v;
}

void write_doubles(std::ostream& out, const double* data, std::size_t n) {
    out.write(reinterpret_cast<const char*>(data),
              static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::istream& in, double* data, std::size_t n) {
    in.read(reinterpret_cast<char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
}

}  // namespace

void save_q_binary(const std::string& path, const Eigen::MatrixXd& q,
                   const Eigen::VectorXd& p_w) {
    if (q.rows() != q.cols() || q.rows() != p_w.size()) {
        throw std::invalid_argument("save_q_binary: Q must be V x V with "
                                    "matching p_w length");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write Q file: " + path);
    out.write(kQMagic, sizeof(kQMagic));
    const auto v = static_cast<std::uint64_t>(q.rows());
    write_u64(out, v);
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor qr = q;
    write_doubles(out, qr.data(), static_cast<std::size_t>(v) * v);
    write_doubles(out, p_w.data(), v);
    if (!out) throw std::runtime_error("write failed: " + path);
}

void load_q_binary(const std::string& path, Eigen::MatrixXd& q,
                   Eigen::VectorXd& p_w) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open Q file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kQMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not a Q file (bad magic): " + path);
    }
    const std::uint64_t v = read_u64(in);
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor qr(static_cast<Eigen::Index>(v), static_cast<Eigen::Index>(v));
    read_doubles(in, qr.data(), static_cast<std::size_t>(v) * v);
    p_w.resize(static_cast<Eigen::Index>(v));
    read_doubles(in, p_w.data(), v);
    if (!in) throw std::runtime_error("truncated Q file: " + path);
    q = qr;
}

void save_matrix_binary(const std::string& path, const Eigen::MatrixXd& m) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write matrix file: " + path);
    out.write(kMatMagic, sizeof(kMatMagic));
    write_u64(out, static_cast<std::uint64_t>(m.rows()));
    write_u64(out, static_cast<std::uint64_t>(m.cols()));
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor mr = m;
    write_doubles(out, mr.data(),
                  static_cast<std::size_t>(m.rows()) *
                      static_cast<std::size_t>(m.cols()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

Eigen::MatrixXd load_matrix_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open matrix file: " + path);
    char magic[8];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMatMagic, sizeof(magic)) != 0) {
        throw std::runtime_error("not a matrix file (bad magic): " + path);
    }
    const std::uint64_t rows = read_u64(in);
    const std::uint64_t cols = read_u64(in);
    using RowMajor =
        Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    RowMajor mr(static_cast<Eigen::Index>(rows),
                static_cast<Eigen::Index>(cols));
    read_doubles(in, mr.data(), static_cast<std::size_t>(rows) * cols);
    if (!in) throw std::runtime_error("truncated matrix file: " + path);
    return mr;
}

void save_topic_matrix_tsv(const std::string& path, const Eigen::MatrixXd& a,
                           const std::vector<std::string>& vocab) {
    if (!vocab.empty() &&
        static_cast<Eigen::Index>(vocab.size()) != a.rows()) {
        throw std::invalid_argument("save_topic_matrix_tsv: vocab size does "
                                    "not match matrix rows");
    }
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write TSV file: " + path);
    out << "word";
    for (Eigen::Index k = 0; k < a.cols(); ++k) out << "\t" << (k + 1);
    out << "\n";
    out.precision(12);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        if (vocab.empty()) {
            out << "w" << i;
        } else {
            out << vocab[static_cast<std::size_t>(i)];
        }
        for (Eigen::Index k = 0; k < a.cols(); ++k) out << "\t" << a(i, k);
        out << "\n";
    }
}

}  // namespace anchor
