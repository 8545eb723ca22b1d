#pragma once

#include "nystromite/matrix_core.hpp"

namespace nystromite {

enum class DecompositionKind { Svd, Evd };
enum class ConstructionMethod { General, SingleStep };

/// Rank-s approximation factors built from the sampled blocks alone:
///   M_hat = [a; f] * pinv(a) * [a, b]
/// a, b and f enter the approximation unmodified; only the trailing block
/// is replaced by f * pinv(a) * b. Cost O(s^2 (rows + cols)).
struct NystromFactorization {
  Matrix left;       // [a; f], pivoted row order, rows x s
  Matrix core_pinv;  // pinv(a), s x s
  Matrix right;      // [a, b], pivoted column order, s x cols
  BlockPartition part;
};

NystromFactorization factorize(const BlockPartition& p);

/// Dense approximation in original index order. The a, b, f blocks are
/// placed back bit-for-bit; only the trailing block is approximated.
Matrix reconstruct(const NystromFactorization& f);

/// Eigen- or singular vectors of the sample block extended over the
/// remaining rows and columns. Row/column order is pivoted (sample first),
/// so the top s x s block of u_hat is exactly the core basis.
struct ExtendedVectors {
  Matrix u_hat;   // rows x s
  Vector values;  // s core eigenvalues (Evd) or singular values (Svd)
  Matrix v_hat;   // Evd only: s x cols, rows biorthogonal to u_hat columns
  Matrix h_hat;   // Svd only: cols x s
  DecompositionKind kind = DecompositionKind::Svd;
};

/// EVD-based extension. Needs a square source, a nonsingular sample block
/// with a real spectrum and a well-conditioned eigenbasis; violations raise
/// ZeroEigenvalue, ComplexSpectrum or DefectiveEigenbasis.
ExtendedVectors extend_evd(const BlockPartition& p);

/// SVD-based extension. Needs sigma_s(a) above s * eps * sigma_1(a);
/// otherwise raises SingularSample.
ExtendedVectors extend_svd(const BlockPartition& p);

/// Canonical form of the extended decomposition, in original index order.
/// Svd kind: M_hat ~= u_o * diag(values) * right^T with orthonormal u_o and
/// right (right holds the column-side vectors, cols x rank).
/// Evd kind: M_hat ~= u_o * diag(values) * right with right * u_o = I
/// (right holds the row eigenvectors, rank x cols).
struct CanonicalDecomposition {
  Matrix u_o;
  Vector values;  // non-increasing (by magnitude for Evd)
  Matrix right;
  DecompositionKind kind = DecompositionKind::Svd;
  ConstructionMethod method = ConstructionMethod::General;
  bool symmetric = false;
  Index rank = 0;
  bool truncated = false;        // rank fell below the sample size
  double basis_condition = 1.0;  // Evd: kappa_2 of the small eigenbasis
};

/// Eigendecomposition of the approximation via the extended vectors.
/// Requires a positive core spectrum (square roots of the eigenvalues are
/// taken); raises NegativeEigenvalue otherwise.
CanonicalDecomposition evd_general(const BlockPartition& p);

/// Same output through the sample block's inverse square root; fails with
/// NoRealSquareRoot when the sample block has no real one (fall back to
/// evd_general for merely diagonalizable blocks).
CanonicalDecomposition evd_single_step(const BlockPartition& p);

/// Singular value decomposition of the approximation via the extended
/// vectors; works for any rectangular source.
CanonicalDecomposition svd_general(const BlockPartition& p);

/// Same output through the sample block's inverse square root; requires the
/// sample block to admit a real square root.
CanonicalDecomposition svd_single_step(const BlockPartition& p);

/// Symmetric specialization: one orthonormal factor for both sides
/// (right == u_o). Requires a symmetric partition (row_set == col_set,
/// symmetric blocks) and a positive semidefinite sample block; indefinite
/// samples raise NegativeEigenvalue (use svd_general instead).
CanonicalDecomposition symmetric_svd_general(const BlockPartition& p);

CanonicalDecomposition symmetric_svd_single_step(const BlockPartition& p);

/// Dense approximation the decomposition represents, original index order.
Matrix densify(const CanonicalDecomposition& d);

}  // namespace nystromite
