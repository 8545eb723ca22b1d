#pragma once

#include "nystromite/matrix_core.hpp"
#include "nystromite/nystrom.hpp"
#include "nystromite/sampling.hpp"

namespace nystromite {

enum class ErrorNorm { L2, Frobenius };

/// Worst-case pivot-quality factor for a rank-s selection out of a
/// rows x cols matrix: sqrt(s * (min(rows, cols) - s) + 1).
double beta_default(Index s, Index rows, Index cols);

/// Spectral quantities a sample selection is judged by. sigma_1, sigma_s and
/// sigma_s1 describe the source matrix; the remaining fields describe the
/// selected block, the thin front end, and the pivot-quality factors.
struct SpectralSummary {
  Index s = 0;
  Index rows = 0;
  Index cols = 0;
  double sigma_1 = 0.0;         // |M|_2
  double sigma_s = 0.0;         // s-th singular value of M
  double sigma_s1 = 0.0;        // (s+1)-th singular value of M, 0 past the end
  double sigma_s_sample = 0.0;  // sigma_s of the selected s x s block of M
  double sigma_s_lead = 0.0;    // sigma_s of the selected block of the rank-s part of M
  double residual_norm = 0.0;   // e: |M - G S|_2 of the thin front end
  double beta = 1.0;            // pivot-quality factor, >= 1
  double gamma = 1.0;           // front-end conditioning factor, >= 1
};

/// The preconditions under which the selected sample block of the rank-s
/// part of M is provably nonsingular. Any NaN input fails its check.
struct AssumptionReport {
  bool rank_ok = false;          // sigma_s(GS) > 0
  bool conditioning_ok = false;  // sigma_s(G) sigma_s(S) gamma recovers sigma_s(GS), gamma >= 1
  bool pivot_quality_ok = false; // selected sub-factors within beta of the full factors
  bool residual_ok = false;      // e < (sigma_s - e) / (beta^2 gamma)

  bool all() const {
    return rank_ok && conditioning_ok && pivot_quality_ok && residual_ok;
  }
};

AssumptionReport nonsingularity_assumptions(const SpectralSummary& sum,
                                            const SampleSelection& sel);

/// sigma_{s+1} < (sigma_s - e) / (beta^2 gamma) - e. Together with the
/// nonsingularity assumptions this keeps the selected block of the rank-s
/// part dominant over the discarded spectrum.
bool spectral_gap_condition(const SpectralSummary& sum);

/// A bound that can be undefined: `defined` is false (and `value` +inf) when
/// a denominator vanishes.
struct BoundValue {
  double value = 0.0;
  bool defined = false;
};

/// A-posteriori spectral-norm bound on |M - Mhat|_2, evaluated from the
/// measured block quantities:
///   (sigma_{s+1} / sigma_s_sample)
///     * (sigma_1^2 / sigma_s_lead + 2 sigma_1 + sigma_{s+1}).
BoundValue measured_error_bound(const SpectralSummary& sum);

/// A-priori counterpart built from the source spectrum and the beta/gamma
/// factors alone. `applicable` is false outside the bound's validity region
/// (nonpositive denominators); no value is clamped or fabricated there.
struct AprioriBound {
  double value = 0.0;
  double eigengap_factor = 0.0;  // lower bound on sigma_{s+1} / sigma_s_sample
  bool applicable = false;
};

AprioriBound a_priori_error_bound(const SpectralSummary& sum);

/// |M - reconstruct(f)| in the requested norm.
double observed_error(const Matrix& m, const NystromFactorization& f,
                      ErrorNorm norm);

/// Collects the summary for a selection. `msvd` must be the thin SVD of `m`.
/// beta is measured from the selection's sub-factor diagnostics,
/// max(sigma_s_g / sigma_s_ga, sigma_s_s / sigma_s_sa, 1); pass
/// `worst_case_beta` to use beta_default instead. Selections without
/// front-end diagnostics (random sampling) yield NaN measured factors, which
/// fail every assumption check; use `worst_case_beta` for those.
SpectralSummary make_summary(const SvdResult& msvd, const Matrix& m,
                             const SampleSelection& sel,
                             bool worst_case_beta = false);

/// Convenience overload computing the SVD of `m` internally.
SpectralSummary make_summary(const Matrix& m, const SampleSelection& sel,
                             bool worst_case_beta = false);

}  // namespace nystromite
