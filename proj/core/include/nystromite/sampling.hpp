#pragma once

#include <cstdint>
#include <string>

#include "nystromite/matrix_core.hpp"

namespace nystromite {

enum class SamplerMethod { Rrqr, Random, Icd, KMeans };
enum class ThinFrontEnd { ExactSvd, LinearTimeSvd };

struct SamplerConfig {
  SamplerMethod method = SamplerMethod::Rrqr;
  ThinFrontEnd front_end = ThinFrontEnd::LinearTimeSvd;
  std::uint64_t seed = 0;
  Index column_budget = 0;  // linear-time front end; <= 0 picks min(cols, 10 s)
  bool uniform_columns = false;  // sample columns uniformly instead of by norm
  Index swap_budget = -1;        // RRQR refinement; negative picks 4 s
  int kmeans_iters = 25;
  bool symmetric = false;  // one index set for both rows and columns
};

/// Rank-s factorization M ~= g * s_factor used to steer index selection.
struct ThinDecomposition {
  Matrix g;         // rows x s
  Matrix s_factor;  // s x cols
  double residual_norm = 0.0;  // |M - g s_factor|_2; exact at desk scale,
                               // power-iteration estimate beyond
  double gamma = 1.0;          // sigma_s(g s_factor) / (sigma_s(g) sigma_s(s_factor))
  double sigma_s_g = 0.0;
  double sigma_s_s = 0.0;
  double sigma_s_gs = 0.0;
};

/// Exact truncated SVD front end: g = U_s Sigma_s, s_factor = V_s^T,
/// residual_norm = sigma_{s+1}, gamma = 1.
ThinDecomposition thin_svd(const Matrix& m, Index s);

/// Randomized front end: samples `columns` columns with replacement with
/// probability proportional to squared column norm (or uniformly), rescales
/// them, and keeps the top s left singular vectors. g has orthonormal
/// columns; gamma is measured. A zero matrix raises DegenerateSampling.
ThinDecomposition linear_time_svd(const Matrix& m, Index s, Index columns,
                                  std::uint64_t seed, bool uniform = false);

struct RrqrSelection {
  IndexSet selected;          // s column indices of a, pivot order
  bool rank_deficient = false;  // a itself has numerical rank below s
};

/// Selects s columns of a wide s x k matrix: greedy column-pivoted QR
/// followed by determinant-ratio swaps until the selection is locally
/// mu-maximal (mu = 1 + 1e-12) or the budget runs out. On a full-rank input
/// the selected block satisfies
///   sigma_s(a[:, selected]) >= sigma_s(a) / sqrt(s (k - s) + 1).
RrqrSelection rrqr_select(const Matrix& a, Index s, Index swap_budget = -1);

/// Outcome of picking a row/column sample. Diagnostics hold the quantities
/// the error bounds need; entries are NaN when the producing sampler cannot
/// know them (finalize_selection fills sigma_s_sample from the matrix).
struct SampleSelection {
  IndexSet rows;
  IndexSet cols;
  bool ok = false;
  std::string failure_reason;
  double sigma_s_sample = 0.0;  // sigma_s of the selected block
  double beta_bound = 0.0;      // sqrt(s (min(rows, cols) - s) + 1)
  double residual_norm = 0.0;   // front-end e_s
  double gamma = 0.0;
  double sigma_s_g = 0.0;   // sigma_s of the thin left factor
  double sigma_s_s = 0.0;   // sigma_s of the thin right factor
  double sigma_s_gs = 0.0;  // sigma_s of their product
  double sigma_s_ga = 0.0;  // sigma_s of the selected rows of g
  double sigma_s_sa = 0.0;  // sigma_s of the selected columns of s_factor
};

/// Full selection pipeline: thin front end, one RRQR pass over the left
/// factor's rows and one over the right factor's columns, then a numerical
/// rank check of both selected sub-factors (threshold rank_check_epsilon()).
/// A failed rank check returns ok = false with the reason filled in rather
/// than throwing; the caller should retry with a different sample size.
SampleSelection select_sample(const Matrix& m, Index s,
                              const SamplerConfig& cfg);

/// Uniform without-replacement draw of row and column indices. Diagnostics
/// are NaN until finalize_selection.
SampleSelection random_sample(Index rows, Index cols, Index s,
                              std::uint64_t seed, bool symmetric = false);

/// Fills sigma_s_sample for a selection produced without seeing the matrix.
void finalize_selection(const Matrix& m, SampleSelection& sel);

/// Pivot order of an incomplete pivoted Cholesky run for s steps on a
/// symmetric PSD matrix. A diagonal residual below -1e-10 |M|_2 raises
/// PsdViolation. `trace_stop` > 0 additionally stops once the residual
/// trace falls below trace_stop * trace(M), possibly returning fewer than
/// s indices.
SampleSelection icd_sample(const Matrix& m, Index s, double trace_stop = 0.0);

/// Lloyd iterations on the rows of `points` (one point per row); the
/// selection takes the point nearest each final centroid. Diagnostics stay
/// NaN; finalize against the kernel matrix built from the same points.
SampleSelection kmeans_sample(const Matrix& points, Index s, int iters,
                              std::uint64_t seed);

/// Runs the configured sampler `trials` times with seeds derived from
/// cfg.seed and keeps the selection with the largest sigma_s of the sampled
/// block (earliest trial wins ties). KMeans is not supported here since it
/// needs the point set rather than the matrix.
SampleSelection monte_carlo_select(const Matrix& m, Index s,
                                   const SamplerConfig& cfg, int trials);

}  // namespace nystromite
