#include "nystromite/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "nystromite/bounds.hpp"
#include "nystromite/rng.hpp"

namespace nystromite {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

// Dimensions up to which exact SVDs of full-size residuals are affordable.
constexpr Index kDeskScale = 2000;

constexpr double kSwapMu = 1.0 + 1e-12;

void require_sample_size(Index s, Index rows, Index cols, const char* what) {
  if (s < 1 || s > std::min(rows, cols))
    fail(ErrorCode::InvalidArgument,
         std::string(what) + ": sample size must lie in [1, min(rows, cols)]");
}

}  // namespace

ThinDecomposition thin_svd(const Matrix& m, Index s) {
  require_sample_size(s, m.rows(), m.cols(), "thin_svd");
  const SvdResult svd = full_svd(m);
  ThinDecomposition out;
  out.g = svd.u.leftCols(s) * svd.values.head(s).asDiagonal();
  out.s_factor = svd.v.leftCols(s).transpose();
  out.residual_norm = s < svd.values.size() ? svd.values(s) : 0.0;
  out.gamma = 1.0;
  out.sigma_s_g = svd.values(s - 1);
  out.sigma_s_s = 1.0;
  out.sigma_s_gs = svd.values(s - 1);
  return out;
}

ThinDecomposition linear_time_svd(const Matrix& m, Index s, Index columns,
                                  std::uint64_t seed, bool uniform) {
  require_finite(m, "linear_time_svd input");
  const Index n = m.cols();
  if (columns <= 0) columns = std::min<Index>(n, 10 * s);
  require_sample_size(s, m.rows(), n, "linear_time_svd");
  if (s > columns)
    fail(ErrorCode::InvalidArgument,
         "linear_time_svd: column budget below sample size");

  Vector weights(n);
  for (Index j = 0; j < n; ++j)
    weights(j) = uniform ? 1.0 : m.col(j).squaredNorm();
  std::vector<double> cumulative(static_cast<std::size_t>(n));
  double acc = 0.0;
  for (Index j = 0; j < n; ++j) {
    acc += weights(j);
    cumulative[static_cast<std::size_t>(j)] = acc;
  }
  const double total = cumulative.back();
  if (!(total > 0.0))
    fail(ErrorCode::DegenerateSampling,
         "column sampling weights are all zero");

  Rng rng(seed);
  Matrix c(m.rows(), columns);
  const double cd = static_cast<double>(columns);
  for (Index t = 0; t < columns; ++t) {
    const double u = rng.uniform() * total;
    const auto it =
        std::upper_bound(cumulative.begin(), cumulative.end(), u);
    const Index j = static_cast<Index>(it - cumulative.begin());
    const double p = weights(j) / total;
    c.col(t) = m.col(j) / std::sqrt(cd * p);
  }

  const SvdResult svd = full_svd(c);
  ThinDecomposition out;
  out.g = svd.u.leftCols(s);
  out.s_factor = out.g.transpose() * m;
  out.sigma_s_g = singular_values(out.g)(s - 1);
  out.sigma_s_s = singular_values(out.s_factor)(s - 1);

  const Matrix approx = out.g * out.s_factor;
  if (std::max(m.rows(), n) <= kDeskScale) {
    out.residual_norm = spectral_norm(m - approx);
    out.sigma_s_gs = singular_values(approx)(s - 1);
  } else {
    out.residual_norm = spectral_norm_estimate(m - approx);
    // g has orthonormal columns, so the product's spectrum equals
    // s_factor's; the exact small SVD stands in for the full one.
    out.sigma_s_gs = out.sigma_s_s;
  }
  const double denom = out.sigma_s_g * out.sigma_s_s;
  out.gamma = denom > 0.0 ? out.sigma_s_gs / denom
                          : std::numeric_limits<double>::infinity();
  return out;
}

RrqrSelection rrqr_select(const Matrix& a, Index s, Index swap_budget) {
  require_finite(a, "rrqr_select input");
  if (a.rows() != s)
    fail(ErrorCode::InvalidArgument,
         "rrqr_select: the matrix must have exactly s rows");
  const Index k = a.cols();
  if (s < 1 || k < s)
    fail(ErrorCode::InvalidArgument,
         "rrqr_select: need at least s columns");
  if (swap_budget < 0) swap_budget = 4 * s;

  Eigen::ColPivHouseholderQR<Matrix> qr(a);
  const auto& perm = qr.colsPermutation().indices();
  std::vector<Index> selected, pool;
  selected.reserve(static_cast<std::size_t>(s));
  pool.reserve(static_cast<std::size_t>(k - s));
  for (Index i = 0; i < k; ++i) {
    if (i < s) selected.push_back(perm(i));
    else pool.push_back(perm(i));
  }

  // Determinant-ratio swaps: replacing selected column i with pool column j
  // multiplies |det| by |W(i, j)| where W solves a[:, selected] W = a[:, pool].
  for (Index round = 0; round < swap_budget && !pool.empty(); ++round) {
    const Matrix a1 = gather_cols(a, selected);
    const Matrix a2 = gather_cols(a, pool);
    const Matrix w =
        Eigen::CompleteOrthogonalDecomposition<Matrix>(a1).solve(a2);
    Index bi = 0, bj = 0;
    double best = -1.0;
    for (Index j = 0; j < w.cols(); ++j)
      for (Index i = 0; i < w.rows(); ++i)
        if (std::abs(w(i, j)) > best) {
          best = std::abs(w(i, j));
          bi = i;
          bj = j;
        }
    if (best <= kSwapMu) break;
    std::swap(selected[static_cast<std::size_t>(bi)],
              pool[static_cast<std::size_t>(bj)]);
  }

  RrqrSelection out;
  out.selected = IndexSet(selected, k);
  out.rank_deficient = numerical_rank(a, rank_check_epsilon()) < s;
  return out;
}

SampleSelection select_sample(const Matrix& m, Index s,
                              const SamplerConfig& cfg) {
  require_sample_size(s, m.rows(), m.cols(), "select_sample");
  const ThinDecomposition thin =
      cfg.front_end == ThinFrontEnd::ExactSvd
          ? thin_svd(m, s)
          : linear_time_svd(m, s, cfg.column_budget, cfg.seed,
                            cfg.uniform_columns);

  SampleSelection sel;
  sel.beta_bound = beta_default(s, m.rows(), m.cols());
  sel.residual_norm = thin.residual_norm;
  sel.gamma = thin.gamma;
  sel.sigma_s_g = thin.sigma_s_g;
  sel.sigma_s_s = thin.sigma_s_s;
  sel.sigma_s_gs = thin.sigma_s_gs;
  sel.sigma_s_sample = kNan;
  sel.sigma_s_ga = kNan;
  sel.sigma_s_sa = kNan;

  const RrqrSelection row_pick =
      rrqr_select(thin.g.transpose(), s, cfg.swap_budget);
  const RrqrSelection col_pick =
      rrqr_select(thin.s_factor, s, cfg.swap_budget);
  sel.rows = IndexSet(row_pick.selected.indices, m.rows());
  sel.cols = IndexSet(col_pick.selected.indices, m.cols());

  const Matrix g_a = gather_rows(thin.g, sel.rows.indices);
  const Matrix s_a = gather_cols(thin.s_factor, sel.cols.indices);
  const Vector g_sv = singular_values(g_a);
  const Vector s_sv = singular_values(s_a);
  sel.sigma_s_ga = g_sv(s - 1);
  sel.sigma_s_sa = s_sv(s - 1);

  const double eps = rank_check_epsilon();
  if (numerical_rank(g_sv, eps) < s || numerical_rank(s_sv, eps) < s) {
    sel.ok = false;
    sel.failure_reason =
        "selected sub-factors are numerically rank-deficient; retry with a "
        "different sample size";
    return sel;
  }

  const Matrix a = gather_block(m, sel.rows.indices, sel.cols.indices);
  sel.sigma_s_sample = singular_values(a)(s - 1);
  sel.ok = true;
  return sel;
}

SampleSelection random_sample(Index rows, Index cols, Index s,
                              std::uint64_t seed, bool symmetric) {
  require_sample_size(s, rows, cols, "random_sample");
  if (symmetric && rows != cols)
    fail(ErrorCode::InvalidArgument,
         "random_sample: symmetric draws need a square shape");
  Rng rng(seed);
  SampleSelection sel;
  sel.rows = IndexSet(rng.sample_without_replacement(rows, s), rows);
  sel.cols = symmetric
                 ? sel.rows
                 : IndexSet(rng.sample_without_replacement(cols, s), cols);
  sel.ok = true;
  sel.beta_bound = beta_default(s, rows, cols);
  sel.sigma_s_sample = kNan;
  sel.residual_norm = kNan;
  sel.gamma = kNan;
  sel.sigma_s_g = kNan;
  sel.sigma_s_s = kNan;
  sel.sigma_s_gs = kNan;
  sel.sigma_s_ga = kNan;
  sel.sigma_s_sa = kNan;
  return sel;
}

void finalize_selection(const Matrix& m, SampleSelection& sel) {
  if (!sel.ok || sel.rows.size() == 0) return;
  const Matrix a = gather_block(m, sel.rows.indices, sel.cols.indices);
  const Vector sv = singular_values(a);
  sel.sigma_s_sample = sv(sv.size() - 1);
}

SampleSelection icd_sample(const Matrix& m, Index s, double trace_stop) {
  require_finite(m, "icd_sample input");
  if (m.rows() != m.cols())
    fail(ErrorCode::InvalidArgument, "icd_sample needs a square matrix");
  const Index n = m.rows();
  require_sample_size(s, n, n, "icd_sample");
  {
    // Spot symmetry check: all entries when cheap, a seeded grid otherwise.
    const double scale = std::max(m.cwiseAbs().maxCoeff(), 1e-300);
    const double tol = 1e-12 * scale;
    if (n * n <= 4096) {
      if ((m - m.transpose()).cwiseAbs().maxCoeff() > tol)
        fail(ErrorCode::AsymmetricInput, "icd_sample needs a symmetric matrix");
    } else {
      Rng grid(0x1cd5ca1eULL);
      for (int k = 0; k < 256; ++k) {
        const Index i = static_cast<Index>(grid.index(n));
        const Index j = static_cast<Index>(grid.index(n));
        if (std::abs(m(i, j) - m(j, i)) > tol)
          fail(ErrorCode::AsymmetricInput,
               "icd_sample needs a symmetric matrix");
      }
    }
  }

  const double norm2 = spectral_norm_estimate(m);
  const double neg_tol = -1e-10 * norm2;
  const double zero_tol = 1e-14 * norm2;
  Vector diag = m.diagonal();
  const double initial_trace = diag.sum();
  Matrix l(n, s);
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<Index> picked;

  for (Index step = 0; step < s; ++step) {
    if (trace_stop > 0.0 && step > 0) {
      double residual_trace = 0.0;
      for (Index i = 0; i < n; ++i)
        if (!taken[static_cast<std::size_t>(i)]) residual_trace += diag(i);
      if (residual_trace <= trace_stop * initial_trace) break;
    }
    Index pivot = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (diag(i) > best) {
        best = diag(i);
        pivot = i;
      }
    }
    if (best < neg_tol)
      fail(ErrorCode::PsdViolation,
           "diagonal residual " + std::to_string(best) +
               " below the PSD tolerance");
    if (best <= zero_tol) {
      SampleSelection sel;
      sel.ok = false;
      sel.failure_reason =
          "residual rank fell below the sample size after " +
          std::to_string(step) + " pivots";
      return sel;
    }
    Vector col = m.col(pivot);
    if (step > 0)
      col -= l.leftCols(step) * l.row(pivot).head(step).transpose();
    l.col(step) = col / std::sqrt(best);
    diag -= l.col(step).cwiseAbs2();
    taken[static_cast<std::size_t>(pivot)] = true;
    picked.push_back(pivot);
  }

  SampleSelection sel;
  sel.rows = IndexSet(picked, n);
  sel.cols = sel.rows;
  sel.ok = true;
  const Index actual = sel.rows.size();
  sel.beta_bound = beta_default(actual, n, n);
  sel.residual_norm = kNan;
  sel.gamma = kNan;
  sel.sigma_s_g = kNan;
  sel.sigma_s_s = kNan;
  sel.sigma_s_gs = kNan;
  sel.sigma_s_ga = kNan;
  sel.sigma_s_sa = kNan;
  finalize_selection(m, sel);
  return sel;
}

SampleSelection kmeans_sample(const Matrix& points, Index s, int iters,
                              std::uint64_t seed) {
  require_finite(points, "kmeans_sample input");
  const Index n = points.rows();
  require_sample_size(s, n, n, "kmeans_sample");

  Rng rng(seed);
  const auto init = rng.sample_without_replacement(n, s);
  Matrix centroids(s, points.cols());
  for (Index c = 0; c < s; ++c)
    centroids.row(c) = points.row(init[static_cast<std::size_t>(c)]);

  std::vector<Index> assign(static_cast<std::size_t>(n), 0);
  auto nearest_centroid = [&](Index i) {
    Index arg = 0;
    double best = std::numeric_limits<double>::infinity();
    for (Index c = 0; c < s; ++c) {
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = c;
      }
    }
    return arg;
  };

  for (int it = 0; it < iters; ++it) {
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      const Index c = nearest_centroid(i);
      if (c != assign[static_cast<std::size_t>(i)]) {
        assign[static_cast<std::size_t>(i)] = c;
        changed = true;
      }
    }
    Matrix sums = Matrix::Zero(s, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(s), 0);
    for (Index i = 0; i < n; ++i) {
      sums.row(assign[static_cast<std::size_t>(i)]) += points.row(i);
      ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(i)])];
    }
    std::vector<bool> reseeded(static_cast<std::size_t>(n), false);
    for (Index c = 0; c < s; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) {
        centroids.row(c) =
            sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
        continue;
      }
      // Empty cluster: reseed from the point farthest from its centroid.
      Index far = -1;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (reseeded[static_cast<std::size_t>(i)]) continue;
        const double d =
            (points.row(i) -
             centroids.row(assign[static_cast<std::size_t>(i)]))
                .squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      centroids.row(c) = points.row(far);
      assign[static_cast<std::size_t>(far)] = c;
      reseeded[static_cast<std::size_t>(far)] = true;
      changed = true;
    }
    if (!changed) break;
  }

  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<Index> picked;
  for (Index c = 0; c < s; ++c) {
    Index arg = -1;
    double best = std::numeric_limits<double>::infinity();
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double d = (points.row(i) - centroids.row(c)).squaredNorm();
      if (d < best) {
        best = d;
        arg = i;
      }
    }
    taken[static_cast<std::size_t>(arg)] = true;
    picked.push_back(arg);
  }

  SampleSelection sel;
  sel.rows = IndexSet(picked, n);
  sel.cols = sel.rows;
  sel.ok = true;
  sel.beta_bound = beta_default(s, n, n);
  sel.sigma_s_sample = kNan;
  sel.residual_norm = kNan;
  sel.gamma = kNan;
  sel.sigma_s_g = kNan;
  sel.sigma_s_s = kNan;
  sel.sigma_s_gs = kNan;
  sel.sigma_s_ga = kNan;
  sel.sigma_s_sa = kNan;
  return sel;
}

SampleSelection monte_carlo_select(const Matrix& m, Index s,
                                   const SamplerConfig& cfg, int trials) {
  if (trials < 1)
    fail(ErrorCode::InvalidArgument, "monte_carlo_select needs trials >= 1");
  if (cfg.method == SamplerMethod::KMeans)
    fail(ErrorCode::InvalidArgument,
         "monte_carlo_select cannot drive kmeans_sample; it needs the point "
         "set, not the matrix");

  SampleSelection best;
  bool have_best = false;
  int failures = 0;
  std::string first_reason;
  for (int t = 0; t < trials; ++t) {
    const std::uint64_t seed_t =
        derive_seed(cfg.seed, static_cast<std::uint64_t>(t));
    SampleSelection cand;
    switch (cfg.method) {
      case SamplerMethod::Rrqr: {
        SamplerConfig trial_cfg = cfg;
        trial_cfg.seed = seed_t;
        cand = select_sample(m, s, trial_cfg);
        break;
      }
      case SamplerMethod::Random: {
        cand = random_sample(m.rows(), m.cols(), s, seed_t, cfg.symmetric);
        finalize_selection(m, cand);
        break;
      }
      case SamplerMethod::Icd: {
        cand = icd_sample(m, s);
        break;
      }
      case SamplerMethod::KMeans:
        break;  // rejected above
    }
    if (!cand.ok) {
      ++failures;
      if (first_reason.empty()) first_reason = cand.failure_reason;
      continue;
    }
    if (!have_best || cand.sigma_s_sample > best.sigma_s_sample) {
      best = cand;
      have_best = true;
    }
  }
  if (!have_best) {
    SampleSelection sel;
    sel.ok = false;
    sel.failure_reason = "all " + std::to_string(trials) +
                         " trials failed; first reason: " + first_reason;
    return sel;
  }
  return best;
}

}  // namespace nystromite
