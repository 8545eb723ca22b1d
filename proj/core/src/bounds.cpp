#include "nystromite/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace nystromite {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Combined pivot and conditioning factor beta^2 gamma, NaN unless both
// inputs are finite and positive.
double combined_factor(const SpectralSummary& sum) {
  if (!std::isfinite(sum.beta) || !std::isfinite(sum.gamma)) return kNan;
  if (sum.beta <= 0.0 || sum.gamma <= 0.0) return kNan;
  return sum.beta * sum.beta * sum.gamma;
}

double measured_beta(const SampleSelection& sel) {
  const double g = sel.sigma_s_g, ga = sel.sigma_s_ga;
  const double s = sel.sigma_s_s, sa = sel.sigma_s_sa;
  if (!std::isfinite(g) || !std::isfinite(ga) || !std::isfinite(s) ||
      !std::isfinite(sa))
    return kNan;
  if (ga <= 0.0 || sa <= 0.0) return kInf;
  return std::max({g / ga, s / sa, 1.0});
}

}  // namespace

double beta_default(Index s, Index rows, Index cols) {
  const double free_dim = static_cast<double>(std::min(rows, cols) - s);
  return std::sqrt(static_cast<double>(s) * free_dim + 1.0);
}

AssumptionReport nonsingularity_assumptions(const SpectralSummary& sum,
                                            const SampleSelection& sel) {
  AssumptionReport rep;
  rep.rank_ok = sel.sigma_s_gs > 0.0;

  const double recovered = sel.sigma_s_g * sel.sigma_s_s * sum.gamma;
  rep.conditioning_ok =
      sum.gamma >= 1.0 - 1e-9 &&
      std::abs(recovered - sel.sigma_s_gs) <= 1e-9 * sel.sigma_s_gs;

  rep.pivot_quality_ok =
      sel.sigma_s_ga * sum.beta >= sel.sigma_s_g * (1.0 - 1e-12) &&
      sel.sigma_s_sa * sum.beta >= sel.sigma_s_s * (1.0 - 1e-12);

  const double b2g = combined_factor(sum);
  const double e = sum.residual_norm;
  rep.residual_ok = e >= 0.0 && b2g > 0.0 && e * (1.0 + b2g) < sum.sigma_s;
  return rep;
}

bool spectral_gap_condition(const SpectralSummary& sum) {
  const double b2g = combined_factor(sum);
  if (!(b2g > 0.0)) return false;
  const double e = sum.residual_norm;
  if (!(e >= 0.0)) return false;
  return sum.sigma_s1 < (sum.sigma_s - e) / b2g - e;
}

BoundValue measured_error_bound(const SpectralSummary& sum) {
  if (!(sum.sigma_s_sample > 0.0) || !(sum.sigma_s_lead > 0.0))
    return {kInf, false};
  const double s1 = sum.sigma_1;
  const double tail = sum.sigma_s1;
  const double value =
      (tail / sum.sigma_s_sample) *
      (s1 * s1 / sum.sigma_s_lead + 2.0 * s1 + tail);
  return {value, std::isfinite(value)};
}

AprioriBound a_priori_error_bound(const SpectralSummary& sum) {
  AprioriBound out;
  out.value = kNan;
  out.eigengap_factor = kNan;

  const double b2g = combined_factor(sum);
  if (!(b2g > 0.0) || !(sum.residual_norm >= 0.0)) return out;

  // Lower bound on sigma_s of the selected block of the rank-s part.
  const double denom = sum.sigma_s - (1.0 + b2g) * sum.residual_norm;
  if (!(denom > 0.0)) return out;
  out.eigengap_factor = sum.sigma_s1 * b2g / denom;

  // Margin of that lower bound over the discarded spectrum.
  const double inner = denom - sum.sigma_s1 * b2g;
  if (!(inner > 0.0)) return out;

  const double s1 = sum.sigma_1;
  out.value = out.eigengap_factor *
              (s1 * s1 * b2g / inner + 2.0 * s1 + sum.sigma_s1);
  out.applicable = std::isfinite(out.value);
  return out;
}

double observed_error(const Matrix& m, const NystromFactorization& f,
                      ErrorNorm norm) {
  const Matrix diff = m - reconstruct(f);
  return norm == ErrorNorm::L2 ? spectral_norm(diff) : frobenius_norm(diff);
}

SpectralSummary make_summary(const SvdResult& msvd, const Matrix& m,
                             const SampleSelection& sel,
                             bool worst_case_beta) {
  const Index s = sel.rows.size();
  if (s < 1 || sel.cols.size() != s)
    fail(ErrorCode::InvalidArgument,
         "make_summary: selection must carry equal nonempty index sets");
  if (sel.rows.bound != m.rows() || sel.cols.bound != m.cols())
    fail(ErrorCode::InvalidArgument,
         "make_summary: selection index bounds do not match the matrix");
  if (msvd.values.size() < s)
    fail(ErrorCode::InvalidArgument,
         "make_summary: decomposition has fewer values than the sample size");

  SpectralSummary sum;
  sum.s = s;
  sum.rows = m.rows();
  sum.cols = m.cols();
  sum.sigma_1 = msvd.values(0);
  sum.sigma_s = msvd.values(s - 1);
  sum.sigma_s1 = s < msvd.values.size() ? msvd.values(s) : 0.0;

  if (std::isfinite(sel.sigma_s_sample)) {
    sum.sigma_s_sample = sel.sigma_s_sample;
  } else {
    const Vector sv =
        singular_values(gather_block(m, sel.rows.indices, sel.cols.indices));
    sum.sigma_s_sample = sv(sv.size() - 1);
  }

  // Selected block of the rank-s part, assembled from the thin factors.
  const Matrix x = msvd.u.leftCols(s) * msvd.values.head(s).asDiagonal();
  const Matrix lead = gather_rows(x, sel.rows.indices) *
                      gather_rows(msvd.v.leftCols(s), sel.cols.indices)
                          .transpose();
  const Vector lead_sv = singular_values(lead);
  sum.sigma_s_lead = lead_sv(lead_sv.size() - 1);

  sum.residual_norm = sel.residual_norm;
  sum.gamma = sel.gamma;
  sum.beta = worst_case_beta ? beta_default(s, m.rows(), m.cols())
                             : measured_beta(sel);
  return sum;
}

SpectralSummary make_summary(const Matrix& m, const SampleSelection& sel,
                             bool worst_case_beta) {
  return make_summary(full_svd(m), m, sel, worst_case_beta);
}

}  // namespace nystromite
