#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "bandana/matrix.hpp"

namespace bandana {

using Index = std::uint32_t;

/// Compressed sparse row matrix with real values.
///
/// Adjacency-like matrices in this library are stored target-major: row j
/// lists the nodes i that send a message to j, and the stored value is the
/// weight of the i -> j message. Propagation is then a plain spmm, and a
/// per-target simplex is a per-row simplex.
struct SparseMatrix {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::size_t> row_offsets{0};
    std::vector<Index> col_indices;
    std::vector<Real> values;

    std::size_t nnz() const { return col_indices.size(); }
    std::span<const Index> row_cols(std::size_t r) const {
        return {col_indices.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
    }
    std::span<const Real> row_values(std::size_t r) const {
        return {values.data() + row_offsets[r], row_offsets[r + 1] - row_offsets[r]};
    }
    /// Slot index of (r, c), or nnz() if absent. Columns must be sorted.
    std::size_t find(std::size_t r, std::size_t c) const;

    /// Throws std::invalid_argument on malformed structure or non-finite values.
    void validate() const;
    bool same_pattern(const SparseMatrix& other) const {
        return rows == other.rows && cols == other.cols && row_offsets == other.row_offsets &&
               col_indices == other.col_indices;
    }

    Matrix to_dense() const;
    SparseMatrix transposed() const;
    std::vector<Real> row_sums() const;
    std::vector<Real> col_sums() const;

    static SparseMatrix identity(std::size_t n);
    /// Builds from a dense matrix, storing entries whose value is nonzero.
    static SparseMatrix from_dense(const Matrix& dense);
};

/// Dense product s·x, without recording anything for differentiation.
Matrix spmm(const SparseMatrix& s, const Matrix& x);

/// Map from each slot (r, c) of a structurally symmetric pattern to the
/// slot holding (c, r).
std::vector<std::size_t> transpose_slots(const SparseMatrix& s);

}  // namespace bandana
