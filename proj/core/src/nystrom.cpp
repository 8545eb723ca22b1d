#include "nystromite/nystrom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "nystromite/rng.hpp"

namespace nystromite {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Matrix left_factor(const BlockPartition& p) {
  Matrix out(p.source_rows, p.sample_size);
  out.topRows(p.sample_size) = p.a;
  out.bottomRows(p.source_rows - p.sample_size) = p.f;
  return out;
}

Matrix right_factor(const BlockPartition& p) {
  Matrix out(p.sample_size, p.source_cols);
  out.leftCols(p.sample_size) = p.a;
  out.rightCols(p.source_cols - p.sample_size) = p.b;
  return out;
}

Matrix scatter_rows(const Matrix& pivoted, const std::vector<Index>& order) {
  Matrix out(pivoted.rows(), pivoted.cols());
  for (Index i = 0; i < pivoted.rows(); ++i)
    out.row(order[static_cast<std::size_t>(i)]) = pivoted.row(i);
  return out;
}

Matrix scatter_cols(const Matrix& pivoted, const std::vector<Index>& order) {
  Matrix out(pivoted.rows(), pivoted.cols());
  for (Index j = 0; j < pivoted.cols(); ++j)
    out.col(order[static_cast<std::size_t>(j)]) = pivoted.col(j);
  return out;
}

// Flips column signs so each left vector's largest-magnitude entry is
// positive; the paired right vector flips with it.
void fix_signs(Matrix& u, Matrix& paired, bool paired_is_rows) {
  for (Index j = 0; j < u.cols(); ++j) {
    Index arg = 0;
    double best = -1.0;
    for (Index i = 0; i < u.rows(); ++i) {
      const double mag = std::abs(u(i, j));
      if (mag > best) {
        best = mag;
        arg = i;
      }
    }
    if (u(arg, j) < 0.0) {
      u.col(j) = -u.col(j);
      if (paired.size() > 0) {
        if (paired_is_rows) paired.row(j) = -paired.row(j);
        else paired.col(j) = -paired.col(j);
      }
    }
  }
}

struct GramBasis {
  Matrix basis;   // s x rank, orthonormal
  Vector values;  // rank, positive, non-increasing
  Index rank = 0;
};

// Eigendecomposition of z^T z with small eigenvalues dropped. The kept
// columns satisfy (z * basis * values^{-1/2}) having orthonormal columns.
GramBasis gram_eigenbasis(const Matrix& z, const char* what) {
  const Index s = z.cols();
  Matrix gram = z.transpose() * z;
  gram = 0.5 * (gram + gram.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Matrix> es(gram);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, std::string(what) + ": gram eigensolve");
  Vector asc = es.eigenvalues();
  const double top = asc(s - 1);
  if (!(top > 0.0))
    fail(ErrorCode::SingularSample,
         std::string(what) + ": extension factor is numerically zero");
  const double tau = static_cast<double>(s) * kEps * top;
  Index rank = 0;
  for (Index i = 0; i < s; ++i)
    if (asc(i) > tau) ++rank;
  GramBasis out;
  out.rank = rank;
  out.values.resize(rank);
  out.basis.resize(s, rank);
  for (Index k = 0; k < rank; ++k) {
    const Index src = s - 1 - k;  // descending order
    out.values(k) = asc(src);
    out.basis.col(k) = es.eigenvectors().col(src);
  }
  return out;
}

CanonicalDecomposition svd_from_factors(const BlockPartition& p,
                                        const Matrix& zu, const Matrix& zh,
                                        ConstructionMethod method) {
  const GramBasis gu = gram_eigenbasis(zu, "left factor");
  const GramBasis gh = gram_eigenbasis(zh, "right factor");
  const Matrix cross = gu.basis.transpose() * gh.basis;
  const Matrix d = gu.values.cwiseSqrt().asDiagonal() * cross *
                   gh.values.cwiseSqrt().asDiagonal();
  const SvdResult ds = full_svd(d);
  const Index rank = ds.values.size();
  Matrix u_o =
      zu * (gu.basis * gu.values.cwiseSqrt().cwiseInverse().asDiagonal() *
            ds.u);
  Matrix h_o =
      zh * (gh.basis * gh.values.cwiseSqrt().cwiseInverse().asDiagonal() *
            ds.v);
  fix_signs(u_o, h_o, /*paired_is_rows=*/false);

  CanonicalDecomposition out;
  out.u_o = scatter_rows(u_o, p.row_order);
  out.values = ds.values;
  out.right = scatter_rows(h_o, p.col_order);
  out.kind = DecompositionKind::Svd;
  out.method = method;
  out.rank = rank;
  out.truncated = rank < p.sample_size;
  return out;
}

CanonicalDecomposition evd_from_factors(const BlockPartition& p,
                                        const Matrix& g_u, const Matrix& g_v,
                                        ConstructionMethod method) {
  const Matrix w = g_v * g_u;
  const EvdResult ev = full_evd(w);
  if (!ev.real_spectrum)
    fail(ErrorCode::ComplexSpectrum,
         "approximation spectrum is not real; no eigendecomposition");
  if (ev.ill_conditioned)
    fail(ErrorCode::DefectiveEigenbasis,
         "approximation eigenbasis is numerically defective");
  const Matrix f = ev.real_vectors();
  const Vector sig = ev.real_values();
  if (sig.minCoeff() <= 0.0)
    fail(ErrorCode::NegativeEigenvalue,
         "approximation spectrum is not positive");
  const Vector isqrt = sig.cwiseSqrt().cwiseInverse();
  Matrix u_o = g_u * f * isqrt.asDiagonal();
  Matrix v_o = isqrt.asDiagonal() * f.partialPivLu().solve(g_v);
  fix_signs(u_o, v_o, /*paired_is_rows=*/true);

  CanonicalDecomposition out;
  out.u_o = scatter_rows(u_o, p.row_order);
  out.values = sig;
  out.right = scatter_cols(v_o, p.col_order);
  out.kind = DecompositionKind::Evd;
  out.method = method;
  out.rank = sig.size();
  out.truncated = false;
  out.basis_condition = ev.basis_condition;
  return out;
}

void require_square_source(const BlockPartition& p, const char* what) {
  if (p.source_rows != p.source_cols)
    fail(ErrorCode::InvalidArgument,
         std::string(what) + " needs a square source matrix");
}

// Symmetric constructions require row_set == col_set and symmetric sampled
// blocks. The sample block is checked fully; the off-diagonal blocks are
// spot-checked on a deterministic grid to stay cheap at large sizes.
void require_symmetric_partition(const BlockPartition& p) {
  require_square_source(p, "symmetric construction");
  if (!(p.row_set == p.col_set))
    fail(ErrorCode::AsymmetricInput,
         "row and column samples differ; symmetric construction needs "
         "matching index sets");
  const double scale = std::max(p.a.cwiseAbs().maxCoeff(),
                                p.f.size() > 0 ? p.f.cwiseAbs().maxCoeff()
                                               : 0.0);
  const double tol = 1e-12 * std::max(scale, 1e-300);
  if ((p.a - p.a.transpose()).cwiseAbs().maxCoeff() > tol)
    fail(ErrorCode::AsymmetricInput, "sample block is not symmetric");
  const Index fr = p.f.rows(), fc = p.f.cols();
  if (fr > 0 && fc > 0) {
    if (fr * fc <= 4096) {
      if ((p.f - p.b.transpose()).cwiseAbs().maxCoeff() > tol)
        fail(ErrorCode::AsymmetricInput,
             "off-diagonal blocks are not transposes of each other");
    } else {
      Rng grid(0x0ffd1a60ULL);
      for (int k = 0; k < 256; ++k) {
        const Index i = static_cast<Index>(grid.index(fr));
        const Index j = static_cast<Index>(grid.index(fc));
        if (std::abs(p.f(i, j) - p.b(j, i)) > tol)
          fail(ErrorCode::AsymmetricInput,
               "off-diagonal blocks are not transposes of each other");
      }
    }
  }
}

// Core eigendecomposition shared by extend_evd and the symmetric builders.
struct CoreEvd {
  Matrix u;
  Vector lam;
};

CoreEvd core_evd(const BlockPartition& p) {
  const EvdResult ev = full_evd(p.a);
  if (!ev.real_spectrum)
    fail(ErrorCode::ComplexSpectrum,
         "sample block has complex eigenvalues");
  if (ev.ill_conditioned)
    fail(ErrorCode::DefectiveEigenbasis,
         "sample block eigenbasis is numerically defective");
  const Vector lam = ev.real_values();
  const double top = lam.cwiseAbs().maxCoeff();
  const double tol = static_cast<double>(p.sample_size) * kEps * top;
  if (!(top > 0.0) || lam.cwiseAbs().minCoeff() <= tol)
    fail(ErrorCode::ZeroEigenvalue,
         "sample block is numerically singular");
  return {ev.real_vectors(), lam};
}

}  // namespace

NystromFactorization factorize(const BlockPartition& p) {
  NystromFactorization out;
  out.left = left_factor(p);
  out.core_pinv = pseudo_inverse(p.a);
  out.right = right_factor(p);
  out.part = p;
  return out;
}

Matrix reconstruct(const NystromFactorization& f) {
  const Matrix c_hat = f.part.f * (f.core_pinv * f.part.b);
  return assemble_with_block(f.part, c_hat);
}

ExtendedVectors extend_evd(const BlockPartition& p) {
  require_square_source(p, "extend_evd");
  const CoreEvd core = core_evd(p);
  const Vector inv_lam = core.lam.cwiseInverse();
  const Matrix u_inv = core.u.partialPivLu().inverse();

  ExtendedVectors out;
  out.kind = DecompositionKind::Evd;
  out.values = core.lam;
  out.u_hat.resize(p.source_rows, p.sample_size);
  out.u_hat.topRows(p.sample_size) = core.u;
  out.u_hat.bottomRows(p.source_rows - p.sample_size) =
      p.f * core.u * inv_lam.asDiagonal();
  out.v_hat.resize(p.sample_size, p.source_cols);
  out.v_hat.leftCols(p.sample_size) = u_inv;
  out.v_hat.rightCols(p.source_cols - p.sample_size) =
      inv_lam.asDiagonal() * u_inv * p.b;
  return out;
}

ExtendedVectors extend_svd(const BlockPartition& p) {
  const SvdResult sv = full_svd(p.a);
  const Index s = p.sample_size;
  const double tol = static_cast<double>(s) * kEps * sv.values(0);
  if (!(sv.values(s - 1) > tol))
    fail(ErrorCode::SingularSample,
         "sample block is numerically singular (sigma_s = " +
             std::to_string(sv.values(s - 1)) + ")");
  const Vector inv_sigma = sv.values.cwiseInverse();

  ExtendedVectors out;
  out.kind = DecompositionKind::Svd;
  out.values = sv.values;
  out.u_hat.resize(p.source_rows, s);
  out.u_hat.topRows(s) = sv.u;
  out.u_hat.bottomRows(p.source_rows - s) =
      p.f * sv.v * inv_sigma.asDiagonal();
  out.h_hat.resize(p.source_cols, s);
  out.h_hat.topRows(s) = sv.v;
  out.h_hat.bottomRows(p.source_cols - s) =
      p.b.transpose() * sv.u * inv_sigma.asDiagonal();
  return out;
}

CanonicalDecomposition evd_general(const BlockPartition& p) {
  const ExtendedVectors ext = extend_evd(p);
  if (ext.values.minCoeff() <= 0.0)
    fail(ErrorCode::NegativeEigenvalue,
         "sample block spectrum is not positive");
  const Vector sqrt_lam = ext.values.cwiseSqrt();
  const Matrix g_u = ext.u_hat * sqrt_lam.asDiagonal();
  const Matrix g_v = sqrt_lam.asDiagonal() * ext.v_hat;
  return evd_from_factors(p, g_u, g_v, ConstructionMethod::General);
}

CanonicalDecomposition evd_single_step(const BlockPartition& p) {
  require_square_source(p, "evd_single_step");
  const Matrix root = matrix_sqrt(p.a);
  const Matrix inv_root = pseudo_inverse(root);
  const Matrix g_u = left_factor(p) * inv_root;
  const Matrix g_v = inv_root * right_factor(p);
  return evd_from_factors(p, g_u, g_v, ConstructionMethod::SingleStep);
}

CanonicalDecomposition svd_general(const BlockPartition& p) {
  const ExtendedVectors ext = extend_svd(p);
  const Vector sqrt_sigma = ext.values.cwiseSqrt();
  const Matrix zu = ext.u_hat * sqrt_sigma.asDiagonal();
  const Matrix zh = ext.h_hat * sqrt_sigma.asDiagonal();
  return svd_from_factors(p, zu, zh, ConstructionMethod::General);
}

CanonicalDecomposition svd_single_step(const BlockPartition& p) {
  const Matrix root = matrix_sqrt(p.a);
  const Matrix inv_root = pseudo_inverse(root);
  const Matrix zu = left_factor(p) * inv_root;
  const Matrix zh = (inv_root * right_factor(p)).transpose();
  return svd_from_factors(p, zu, zh, ConstructionMethod::SingleStep);
}

CanonicalDecomposition symmetric_svd_general(const BlockPartition& p) {
  require_symmetric_partition(p);
  const CoreEvd core = core_evd(p);
  if (core.lam.minCoeff() < 0.0)
    fail(ErrorCode::NegativeEigenvalue,
         "sample block is indefinite; use svd_general");
  const Matrix u_tilde = p.f * core.u * core.lam.cwiseInverse().asDiagonal();
  Matrix z(p.source_rows, p.sample_size);
  z.topRows(p.sample_size) = core.u;
  z.bottomRows(p.source_rows - p.sample_size) = u_tilde;
  z = z * core.lam.cwiseSqrt().asDiagonal();

  const GramBasis gb = gram_eigenbasis(z, "symmetric factor");
  Matrix u_o =
      z * (gb.basis * gb.values.cwiseSqrt().cwiseInverse().asDiagonal());
  Matrix none;
  fix_signs(u_o, none, false);

  CanonicalDecomposition out;
  out.u_o = scatter_rows(u_o, p.row_order);
  out.values = gb.values;
  out.right = out.u_o;
  out.kind = DecompositionKind::Svd;
  out.method = ConstructionMethod::General;
  out.symmetric = true;
  out.rank = gb.rank;
  out.truncated = gb.rank < p.sample_size;
  return out;
}

CanonicalDecomposition symmetric_svd_single_step(const BlockPartition& p) {
  require_symmetric_partition(p);
  const Matrix root = matrix_sqrt(p.a);
  const Matrix inv_root = pseudo_inverse(root);
  const Matrix g = left_factor(p) * inv_root;

  const GramBasis gb = gram_eigenbasis(g, "symmetric factor");
  Matrix u_o =
      g * (gb.basis * gb.values.cwiseSqrt().cwiseInverse().asDiagonal());
  Matrix none;
  fix_signs(u_o, none, false);

  CanonicalDecomposition out;
  out.u_o = scatter_rows(u_o, p.row_order);
  out.values = gb.values;
  out.right = out.u_o;
  out.kind = DecompositionKind::Svd;
  out.method = ConstructionMethod::SingleStep;
  out.symmetric = true;
  out.rank = gb.rank;
  out.truncated = gb.rank < p.sample_size;
  return out;
}

Matrix densify(const CanonicalDecomposition& d) {
  if (d.kind == DecompositionKind::Svd)
    return d.u_o * d.values.asDiagonal() * d.right.transpose();
  return d.u_o * d.values.asDiagonal() * d.right;
}

}  // namespace nystromite
