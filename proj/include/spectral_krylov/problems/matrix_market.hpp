#pragma once

#include <cctype>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "spectral_krylov/core/linear_operator.hpp"
#include "spectral_krylov/core/sparse_csr.hpp"

namespace spk {

/// Matrix Market exchange format, coordinate real general/symmetric,
/// 1-based indices. Symmetric storage is expanded on read; duplicates and
/// out-of-range indices are rejected.
inline SparseCSR read_matrix_market_csr(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("matrix market: cannot open '" + path + "'");

    std::string header;
    if (!std::getline(in, header)) throw std::runtime_error("matrix market: empty file '" + path + "'");
    std::istringstream hs(header);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket" || object != "matrix")
        throw std::runtime_error("matrix market: malformed header in '" + path + "'");
    if (format != "coordinate" || field != "real")
        throw std::runtime_error("matrix market: only 'coordinate real' is supported ('" + path + "')");
    const bool symmetric = symmetry == "symmetric";
    if (!symmetric && symmetry != "general")
        throw std::runtime_error("matrix market: unsupported symmetry '" + symmetry + "' in '" + path + "'");

    std::string line;
    std::size_t rows = 0, cols = 0, nnz = 0, entries_read = 0;
    bool have_size = false;
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '%') continue;
        std::istringstream ls(line);
        if (!have_size) {
            if (!(ls >> rows >> cols >> nnz))
                throw std::runtime_error("matrix market: malformed size line in '" + path + "'");
            have_size = true;
            trip.reserve(symmetric ? 2 * nnz : nnz);
            continue;
        }
        long long i = 0, j = 0;
        double v = 0;
        if (!(ls >> i >> j >> v))
            throw std::runtime_error("matrix market: malformed entry line in '" + path + "'");
        if (i < 1 || j < 1 || std::size_t(i) > rows || std::size_t(j) > cols)
            throw std::runtime_error("matrix market: entry index out of bounds in '" + path +
                                     "' (indices are 1-based)");
        ++entries_read;
        trip.emplace_back(std::size_t(i) - 1, std::size_t(j) - 1, v);
        if (symmetric && i != j) trip.emplace_back(std::size_t(j) - 1, std::size_t(i) - 1, v);
    }
    if (!have_size) throw std::runtime_error("matrix market: missing size line in '" + path + "'");
    if (entries_read != nnz)
        throw std::runtime_error("matrix market: entry count does not match the size line in '" + path + "'");
    SparseCSR m = SparseCSR::from_triplets(rows, cols, std::move(trip));
    m.validate();
    return m;
}

inline LinearOperator read_matrix_market(const std::string& path) {
    return LinearOperator::from_csr(read_matrix_market_csr(path));
}

namespace detail {

inline void write_mm_entries(std::ofstream& out,
                             const std::vector<std::tuple<std::size_t, std::size_t, double>>& trip,
                             std::size_t rows, std::size_t cols) {
    out << rows << " " << cols << " " << trip.size() << "\n";
    char buf[64];
    for (const auto& [i, j, v] : trip) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << (i + 1) << " " << (j + 1) << " " << buf << "\n";
    }
}

}  // namespace detail

/// Writes coordinate real general with 17 significant digits, so a
/// read-back reproduces the matrix exactly.
inline void write_matrix_market(const std::string& path, const SparseCSR& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("matrix market: cannot write '" + path + "'");
    out << "%%MatrixMarket matrix coordinate real general\n";
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    trip.reserve(m.nnz());
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t k = m.row_offsets[i]; k < m.row_offsets[i + 1]; ++k)
            trip.emplace_back(i, m.col_indices[k], m.values[k]);
    detail::write_mm_entries(out, trip, m.rows, m.cols);
    if (!out) throw std::runtime_error("matrix market: write failed for '" + path + "'");
}

inline void write_matrix_market(const std::string& path, const DenseMatrix& m) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("matrix market: cannot write '" + path + "'");
    out << "%%MatrixMarket matrix coordinate real general\n";
    std::vector<std::tuple<std::size_t, std::size_t, double>> trip;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            if (m(i, j) != 0.0) trip.emplace_back(i, j, m(i, j));
    detail::write_mm_entries(out, trip, m.rows(), m.cols());
    if (!out) throw std::runtime_error("matrix market: write failed for '" + path + "'");
}

inline void write_matrix_market(const std::string& path, const LinearOperator& op) {
    if (const auto* c = op.csr())
        write_matrix_market(path, *c);
    else
        write_matrix_market(path, *op.dense());
}

}  // namespace spk
