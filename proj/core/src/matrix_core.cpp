#include "nystromite/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace nystromite {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Relative tolerance deciding whether a computed spectrum counts as real.
constexpr double kRealSpectrumTol = 1e-8;

bool nearly_symmetric(const Matrix& a) {
  if (a.rows() != a.cols()) return false;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return true;
  return (a - a.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

std::vector<Index> magnitude_order(const ComplexVector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) {
    return std::abs(values(i)) > std::abs(values(j));
  });
  return order;
}

}  // namespace

double defective_basis_threshold() { return 1.0 / std::sqrt(kEps); }

double rank_check_epsilon() { return 1.0 / (kEps * 1e3); }

void require_finite(const Matrix& m, const char* what) {
  if (!m.allFinite())
    fail(ErrorCode::InvalidArgument,
         std::string(what) + " contains a non-finite entry");
}

Matrix EvdResult::real_vectors() const {
  if (!real_spectrum)
    fail(ErrorCode::ComplexSpectrum,
         "eigenvectors are not real within tolerance");
  return vectors.real();
}

Vector EvdResult::real_values() const {
  if (!real_spectrum)
    fail(ErrorCode::ComplexSpectrum,
         "eigenvalues are not real within tolerance");
  return values.real();
}

SvdResult full_svd(const Matrix& m) {
  require_finite(m, "full_svd input");
  if (m.rows() == 0 || m.cols() == 0)
    return {Matrix(m.rows(), 0), Vector(0), Matrix(m.cols(), 0)};
  Eigen::BDCSVD<Matrix> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
  if (svd.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, "SVD did not converge");
  return {svd.matrixU(), svd.singularValues(), svd.matrixV()};
}

Vector singular_values(const Matrix& m) {
  require_finite(m, "singular_values input");
  if (m.rows() == 0 || m.cols() == 0) return Vector(0);
  Eigen::BDCSVD<Matrix> svd(m);
  if (svd.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, "SVD did not converge");
  return svd.singularValues();
}

EvdResult full_evd(const Matrix& a) {
  require_finite(a, "full_evd input");
  if (a.rows() != a.cols())
    fail(ErrorCode::InvalidArgument, "full_evd needs a square matrix");
  EvdResult out;
  if (a.rows() == 0) {
    out.real_spectrum = true;
    return out;
  }
  if (nearly_symmetric(a)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
      fail(ErrorCode::NonConvergence, "symmetric eigensolver failed");
    const ComplexVector values = es.eigenvalues().cast<std::complex<double>>();
    const ComplexMatrix vectors =
        es.eigenvectors().cast<std::complex<double>>();
    const auto order = magnitude_order(values);
    out.values.resize(values.size());
    out.vectors.resize(vectors.rows(), vectors.cols());
    for (Index k = 0; k < values.size(); ++k) {
      out.values(k) = values(order[static_cast<std::size_t>(k)]);
      out.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
    }
    out.basis_condition = 1.0;
    out.ill_conditioned = false;
    out.real_spectrum = true;
    return out;
  }
  Eigen::EigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success)
    fail(ErrorCode::NonConvergence, "eigensolver failed");
  const ComplexVector values = es.eigenvalues();
  const ComplexMatrix vectors = es.eigenvectors();
  const auto order = magnitude_order(values);
  out.values.resize(values.size());
  out.vectors.resize(vectors.rows(), vectors.cols());
  for (Index k = 0; k < values.size(); ++k) {
    out.values(k) = values(order[static_cast<std::size_t>(k)]);
    out.vectors.col(k) = vectors.col(order[static_cast<std::size_t>(k)]);
  }
  Eigen::JacobiSVD<ComplexMatrix> svd(out.vectors);
  const auto& sv = svd.singularValues();
  out.basis_condition = sv(sv.size() - 1) > 0.0
                            ? sv(0) / sv(sv.size() - 1)
                            : std::numeric_limits<double>::infinity();
  out.ill_conditioned = out.basis_condition > defective_basis_threshold();
  const double max_mag =
      out.values.size() > 0 ? std::abs(out.values(0)) : 0.0;
  const double max_imag = out.values.imag().cwiseAbs().maxCoeff();
  out.real_spectrum = max_imag <= kRealSpectrumTol * std::max(max_mag, 0.0) ||
                      max_imag == 0.0;
  return out;
}

Matrix pseudo_inverse(const Matrix& a, double tol) {
  const SvdResult svd = full_svd(a);
  const Index k = svd.values.size();
  if (k == 0) return Matrix::Zero(a.cols(), a.rows());
  if (tol < 0.0)
    tol = static_cast<double>(std::max(a.rows(), a.cols())) * kEps *
          svd.values(0);
  Vector inv = Vector::Zero(k);
  for (Index i = 0; i < k; ++i)
    if (svd.values(i) > tol) inv(i) = 1.0 / svd.values(i);
  return svd.v * inv.asDiagonal() * svd.u.transpose();
}

Matrix matrix_sqrt(const Matrix& a) {
  require_finite(a, "matrix_sqrt input");
  if (a.rows() != a.cols())
    fail(ErrorCode::InvalidArgument, "matrix_sqrt needs a square matrix");
  const Index n = a.rows();
  if (n == 0) return Matrix(0, 0);

  Matrix root;
  if (nearly_symmetric(a)) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(a);
    if (es.info() != Eigen::Success)
      fail(ErrorCode::NonConvergence, "symmetric eigensolver failed");
    const Vector lam = es.eigenvalues();
    const double scale = lam.cwiseAbs().maxCoeff();
    const double neg_tol = 1e-10 * scale;
    Vector s(n);
    for (Index i = 0; i < n; ++i) {
      if (lam(i) < -neg_tol)
        fail(ErrorCode::NoRealSquareRoot,
             "negative eigenvalue " + std::to_string(lam(i)));
      s(i) = std::sqrt(std::max(lam(i), 0.0));
    }
    root = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
  } else {
    const EvdResult ev = full_evd(a);
    const double scale = ev.values.size() > 0 ? std::abs(ev.values(0)) : 0.0;
    const double tol = 1e-10 * scale;
    const double max_imag = ev.values.imag().cwiseAbs().maxCoeff();
    if (max_imag > tol)
      fail(ErrorCode::NoRealSquareRoot, "eigenvalues have imaginary parts");
    if (ev.ill_conditioned)
      fail(ErrorCode::NoRealSquareRoot,
           "eigenbasis is numerically defective");
    ComplexVector s(n);
    for (Index i = 0; i < n; ++i) {
      const double re = ev.values(i).real();
      if (re < -tol)
        fail(ErrorCode::NoRealSquareRoot,
             "negative eigenvalue " + std::to_string(re));
      s(i) = std::sqrt(std::complex<double>(std::max(re, 0.0), 0.0));
    }
    const ComplexMatrix sqrt_c =
        ev.vectors * s.asDiagonal() * ev.vectors.inverse();
    root = sqrt_c.real();
  }

  const double norm_a = spectral_norm(a);
  const double residual = spectral_norm(root * root - a);
  if (residual > 1e-8 * std::max(norm_a, 1e-300))
    fail(ErrorCode::NoRealSquareRoot,
         "square-root residual " + std::to_string(residual) +
             " exceeds tolerance");
  return root;
}

Index numerical_rank(const Vector& values, double eps) {
  if (!(eps > 1.0))
    fail(ErrorCode::InvalidArgument, "numerical_rank needs eps > 1");
  const Index k = values.size();
  if (k == 0 || values(0) <= 0.0) return 0;
  for (Index j = 0; j < k; ++j) {
    const double sj = values(j);
    if (sj <= 0.0 || values(0) / sj > eps) return j;
  }
  return k;
}

Index numerical_rank(const Matrix& m, double eps) {
  return numerical_rank(singular_values(m), eps);
}

IndexSet::IndexSet(std::vector<Index> idx, Index bound_)
    : indices(std::move(idx)), bound(bound_) {
  std::vector<bool> seen(static_cast<std::size_t>(bound), false);
  for (const Index i : indices) {
    if (i < 0 || i >= bound)
      fail(ErrorCode::InvalidArgument,
           "index " + std::to_string(i) + " out of range [0, " +
               std::to_string(bound) + ")");
    if (seen[static_cast<std::size_t>(i)])
      fail(ErrorCode::InvalidArgument,
           "duplicate index " + std::to_string(i));
    seen[static_cast<std::size_t>(i)] = true;
  }
}

std::vector<Index> IndexSet::complement() const {
  std::vector<bool> member(static_cast<std::size_t>(bound), false);
  for (const Index i : indices) member[static_cast<std::size_t>(i)] = true;
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(bound - size()));
  for (Index i = 0; i < bound; ++i)
    if (!member[static_cast<std::size_t>(i)]) out.push_back(i);
  return out;
}

BlockPartition partition(const Matrix& m, const IndexSet& rows,
                         const IndexSet& cols) {
  require_finite(m, "partition input");
  if (rows.bound != m.rows() || cols.bound != m.cols())
    fail(ErrorCode::InvalidArgument, "index-set bounds do not match matrix");
  if (rows.size() != cols.size())
    fail(ErrorCode::InvalidArgument,
         "row and column samples must have equal size");
  const Index s = rows.size();
  if (s < 1 || s > std::min(m.rows(), m.cols()))
    fail(ErrorCode::InvalidArgument,
         "sample size must lie in [1, min(rows, cols)]");

  BlockPartition p;
  p.source_rows = m.rows();
  p.source_cols = m.cols();
  p.sample_size = s;
  p.row_set = rows;
  p.col_set = cols;

  const auto row_rest = rows.complement();
  const auto col_rest = cols.complement();
  p.row_order = rows.indices;
  p.row_order.insert(p.row_order.end(), row_rest.begin(), row_rest.end());
  p.col_order = cols.indices;
  p.col_order.insert(p.col_order.end(), col_rest.begin(), col_rest.end());

  const Index mr = static_cast<Index>(row_rest.size());
  const Index nc = static_cast<Index>(col_rest.size());
  p.a.resize(s, s);
  p.b.resize(s, nc);
  p.f.resize(mr, s);
  p.c.resize(mr, nc);
  for (Index i = 0; i < s; ++i) {
    const Index ri = rows.indices[static_cast<std::size_t>(i)];
    for (Index j = 0; j < s; ++j)
      p.a(i, j) = m(ri, cols.indices[static_cast<std::size_t>(j)]);
    for (Index j = 0; j < nc; ++j)
      p.b(i, j) = m(ri, col_rest[static_cast<std::size_t>(j)]);
  }
  for (Index i = 0; i < mr; ++i) {
    const Index ri = row_rest[static_cast<std::size_t>(i)];
    for (Index j = 0; j < s; ++j)
      p.f(i, j) = m(ri, cols.indices[static_cast<std::size_t>(j)]);
    for (Index j = 0; j < nc; ++j)
      p.c(i, j) = m(ri, col_rest[static_cast<std::size_t>(j)]);
  }
  return p;
}

Matrix assemble_with_block(const BlockPartition& p, const Matrix& c_hat) {
  if (c_hat.rows() != p.c.rows() || c_hat.cols() != p.c.cols())
    fail(ErrorCode::InvalidArgument, "replacement block has wrong shape");
  Matrix out(p.source_rows, p.source_cols);
  const Index s = p.sample_size;
  for (Index i = 0; i < p.source_rows; ++i) {
    const Index ri = p.row_order[static_cast<std::size_t>(i)];
    for (Index j = 0; j < p.source_cols; ++j) {
      const Index cj = p.col_order[static_cast<std::size_t>(j)];
      double value = 0.0;
      if (i < s && j < s) value = p.a(i, j);
      else if (i < s) value = p.b(i, j - s);
      else if (j < s) value = p.f(i - s, j);
      else value = c_hat(i - s, j - s);
      out(ri, cj) = value;
    }
  }
  return out;
}

Matrix reassemble(const BlockPartition& p) {
  return assemble_with_block(p, p.c);
}

Matrix gather_rows(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(static_cast<Index>(idx.size()), m.cols());
  for (Index i = 0; i < out.rows(); ++i)
    out.row(i) = m.row(idx[static_cast<std::size_t>(i)]);
  return out;
}

Matrix gather_cols(const Matrix& m, const std::vector<Index>& idx) {
  Matrix out(m.rows(), static_cast<Index>(idx.size()));
  for (Index j = 0; j < out.cols(); ++j)
    out.col(j) = m.col(idx[static_cast<std::size_t>(j)]);
  return out;
}

Matrix gather_block(const Matrix& m, const std::vector<Index>& rows,
                    const std::vector<Index>& cols) {
  Matrix out(static_cast<Index>(rows.size()), static_cast<Index>(cols.size()));
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j)
      out(i, j) = m(rows[static_cast<std::size_t>(i)],
                    cols[static_cast<std::size_t>(j)]);
  return out;
}

double spectral_norm(const Matrix& m) {
  if (m.size() == 0) return 0.0;
  const Vector sv = singular_values(m);
  return sv.size() > 0 ? sv(0) : 0.0;
}

double frobenius_norm(const Matrix& m) { return m.norm(); }

double spectral_norm_estimate(const Matrix& m, int max_iters, double tol) {
  require_finite(m, "spectral_norm_estimate input");
  if (m.size() == 0) return 0.0;
  Vector v = Vector::Ones(m.cols());
  v.normalize();
  double estimate = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector u = m * v;
    const double next = u.norm();
    if (next == 0.0) {
      // Ones landed in the null space; restart once from a basis vector.
      if (it == 0 && m.cols() > 0) {
        v = Vector::Zero(m.cols());
        v(0) = 1.0;
        continue;
      }
      return 0.0;
    }
    Vector w = m.transpose() * u;
    const double wn = w.norm();
    if (wn == 0.0) return next;
    v = w / wn;
    if (std::abs(next - estimate) <= tol * next) {
      estimate = next;
      break;
    }
    estimate = next;
  }
  return estimate;
}

}  // namespace nystromite
