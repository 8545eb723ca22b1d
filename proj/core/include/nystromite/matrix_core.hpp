#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nystromite/errors.hpp"

namespace nystromite {

// Dense double-precision matrices in column-major storage throughout.
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using Index = Eigen::Index;

/// Eigenvector-basis condition numbers above this value mark a numerically
/// defective eigenbasis (1/sqrt(machine epsilon)).
double defective_basis_threshold();

/// Relative threshold used by rank checks on selected sub-blocks:
/// 1 / (machine epsilon * 1e3), about 4.5e12.
double rank_check_epsilon();

void require_finite(const Matrix& m, const char* what);

/// Thin SVD, values sorted non-increasing, factors with orthonormal columns.
struct SvdResult {
  Matrix u;       // rows x k
  Vector values;  // k, non-negative, non-increasing
  Matrix v;       // cols x k
};

/// Dense eigendecomposition. Pairs are ordered by non-increasing magnitude;
/// ties keep the solver's order.
struct EvdResult {
  ComplexVector values;
  ComplexMatrix vectors;          // columns are eigenvectors
  double basis_condition = 1.0;   // kappa_2 of the eigenvector matrix
  bool ill_conditioned = false;   // basis_condition above threshold
  bool real_spectrum = false;     // imaginary parts within tolerance

  /// Real parts of the eigenvectors; requires real_spectrum.
  Matrix real_vectors() const;
  /// Real parts of the eigenvalues; requires real_spectrum.
  Vector real_values() const;
};

SvdResult full_svd(const Matrix& m);

/// Singular values only (cheaper than full_svd when factors are not needed).
Vector singular_values(const Matrix& m);

EvdResult full_evd(const Matrix& a);

/// Moore-Penrose pseudo-inverse. Singular values at or below `tol` are
/// treated as zero; a negative `tol` selects max(rows, cols) * eps * sigma_1.
Matrix pseudo_inverse(const Matrix& a, double tol = -1.0);

/// Principal square root of a real diagonalizable matrix with a real
/// non-negative spectrum. Eigenvalues within roundoff of zero are clipped to
/// zero; genuinely negative or complex eigenvalues, a defective eigenbasis,
/// or a residual above 1e-8 * |A|_2 raise NoRealSquareRoot.
Matrix matrix_sqrt(const Matrix& a);

/// Largest r such that sigma_1 / sigma_r <= eps, i.e. one less than the
/// first index whose ratio exceeds eps. Requires eps > 1. A zero matrix has
/// rank 0. Larger eps admits more indices, so the result is non-decreasing
/// in eps.
Index numerical_rank(const Matrix& m, double eps);
Index numerical_rank(const Vector& values, double eps);

/// Distinct in-range indices into a dimension of size `bound`, kept in the
/// order given (pivot order is meaningful to callers).
struct IndexSet {
  std::vector<Index> indices;
  Index bound = 0;

  IndexSet() = default;
  IndexSet(std::vector<Index> idx, Index bound_);

  Index size() const { return static_cast<Index>(indices.size()); }
  /// Indices not in the set, in ascending order.
  std::vector<Index> complement() const;
  bool operator==(const IndexSet&) const = default;
};

/// Four-block view of a matrix under row/column sample index sets:
///   a = M[I, J]          b = M[I, J^c]
///   f = M[I^c, J]        c = M[I^c, J^c]
/// row_order/col_order map pivoted positions (sample first, complement
/// after) back to original indices.
struct BlockPartition {
  Index source_rows = 0;
  Index source_cols = 0;
  Index sample_size = 0;
  IndexSet row_set;
  IndexSet col_set;
  Matrix a, b, f, c;
  std::vector<Index> row_order;
  std::vector<Index> col_order;
};

/// Splits `m` along equally sized row/column index sets. The blocks are
/// copied entry-for-entry; reassemble(partition(m, ...)) reproduces `m`
/// exactly.
BlockPartition partition(const Matrix& m, const IndexSet& rows,
                         const IndexSet& cols);

/// Original matrix, rebuilt from the four blocks.
Matrix reassemble(const BlockPartition& p);

/// Matrix in original index order with the c block replaced by `c_hat`;
/// a, b, f are placed back unmodified.
Matrix assemble_with_block(const BlockPartition& p, const Matrix& c_hat);

/// Rows of `m` listed by `idx`, in the order given.
Matrix gather_rows(const Matrix& m, const std::vector<Index>& idx);

/// Columns of `m` listed by `idx`, in the order given.
Matrix gather_cols(const Matrix& m, const std::vector<Index>& idx);

/// Sub-block m[rows, cols], both index lists kept in the order given.
Matrix gather_block(const Matrix& m, const std::vector<Index>& rows,
                    const std::vector<Index>& cols);

/// Largest singular value (exact, via SVD).
double spectral_norm(const Matrix& m);

double frobenius_norm(const Matrix& m);

/// Power-iteration estimate of |m|_2 for matrices too large for a full SVD.
/// Deterministic start vector; stops on relative change below `tol`.
double spectral_norm_estimate(const Matrix& m, int max_iters = 50,
                              double tol = 1e-6);

}  // namespace nystromite
