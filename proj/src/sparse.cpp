#include "bandana/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace bandana {

std::size_t SparseMatrix::find(std::size_t r, std::size_t c) const {
    const auto cols_r = row_cols(r);
    const auto it = std::lower_bound(cols_r.begin(), cols_r.end(), static_cast<Index>(c));
    if (it == cols_r.end() || *it != c) return nnz();
    return row_offsets[r] + static_cast<std::size_t>(it - cols_r.begin());
}

void SparseMatrix::validate() const {
    if (row_offsets.size() != rows + 1 || row_offsets.front() != 0 ||
        row_offsets.back() != col_indices.size()) {
        throw std::invalid_argument("SparseMatrix: malformed row offsets");
    }
    if (values.size() != col_indices.size()) {
        throw std::invalid_argument("SparseMatrix: values and indices differ in length");
    }
    for (std::size_t r = 0; r < rows; ++r) {
        if (row_offsets[r] > row_offsets[r + 1]) {
            throw std::invalid_argument("SparseMatrix: row offsets not monotone");
        }
        const auto cs = row_cols(r);
        for (std::size_t k = 0; k < cs.size(); ++k) {
            if (cs[k] >= cols) throw std::invalid_argument("SparseMatrix: column out of range");
            if (k > 0 && cs[k] <= cs[k - 1]) {
                throw std::invalid_argument("SparseMatrix: columns unsorted or duplicated");
            }
        }
    }
    for (Real v : values) {
        if (!std::isfinite(v)) throw std::invalid_argument("SparseMatrix: non-finite value");
    }
}

Matrix SparseMatrix::to_dense() const {
    Matrix d(rows, cols);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k)
            d(r, col_indices[k]) += values[k];
    return d;
}

SparseMatrix SparseMatrix::transposed() const {
    SparseMatrix t;
    t.rows = cols;
    t.cols = rows;
    t.row_offsets.assign(cols + 1, 0);
    for (Index c : col_indices) ++t.row_offsets[c + 1];
    for (std::size_t c = 0; c < cols; ++c) t.row_offsets[c + 1] += t.row_offsets[c];
    t.col_indices.resize(nnz());
    t.values.resize(nnz());
    std::vector<std::size_t> cursor(t.row_offsets.begin(), t.row_offsets.end() - 1);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            const std::size_t dst = cursor[col_indices[k]]++;
            t.col_indices[dst] = static_cast<Index>(r);
            t.values[dst] = values[k];
        }
    }
    return t;
}

std::vector<Real> SparseMatrix::row_sums() const {
    std::vector<Real> s(rows, 0.0);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t k = row_offsets[r]; k < row_offsets[r + 1]; ++k) s[r] += values[k];
    return s;
}

std::vector<Real> SparseMatrix::col_sums() const {
    std::vector<Real> s(cols, 0.0);
    for (std::size_t k = 0; k < nnz(); ++k) s[col_indices[k]] += values[k];
    return s;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
    SparseMatrix s;
    s.rows = s.cols = n;
    s.row_offsets.resize(n + 1);
    s.col_indices.resize(n);
    s.values.assign(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) {
        s.row_offsets[i + 1] = i + 1;
        s.col_indices[i] = static_cast<Index>(i);
    }
    return s;
}

SparseMatrix SparseMatrix::from_dense(const Matrix& dense) {
    SparseMatrix s;
    s.rows = dense.rows();
    s.cols = dense.cols();
    s.row_offsets.assign(s.rows + 1, 0);
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t c = 0; c < s.cols; ++c) {
            if (dense(r, c) != 0.0) {
                s.col_indices.push_back(static_cast<Index>(c));
                s.values.push_back(dense(r, c));
            }
        }
        s.row_offsets[r + 1] = s.col_indices.size();
    }
    return s;
}

Matrix spmm(const SparseMatrix& s, const Matrix& x) {
    if (s.cols != x.rows()) {
        throw std::invalid_argument("spmm: sparse cols must equal dense rows");
    }
    const std::size_t n = x.cols();
    Matrix out(s.rows, n);
    for (std::size_t r = 0; r < s.rows; ++r) {
        Real* dst = out.data() + r * n;
        for (std::size_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k) {
            const Real v = s.values[k];
            const Real* src = x.data() + static_cast<std::size_t>(s.col_indices[k]) * n;
            for (std::size_t j = 0; j < n; ++j) dst[j] += v * src[j];
        }
    }
    return out;
}

std::vector<std::size_t> transpose_slots(const SparseMatrix& s) {
    std::vector<std::size_t> t(s.nnz());
    for (std::size_t r = 0; r < s.rows; ++r) {
        for (std::size_t k = s.row_offsets[r]; k < s.row_offsets[r + 1]; ++k) {
            const std::size_t mirror = s.find(s.col_indices[k], r);
            if (mirror == s.nnz()) {
                throw std::invalid_argument("transpose_slots: pattern is not symmetric");
            }
            t[k] = mirror;
        }
    }
    return t;
}

}  // namespace bandana
