#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nystromite/bounds.hpp"
#include "nystromite/data.hpp"
#include "nystromite/sampling.hpp"

namespace nystromite {

enum class ExperimentKind { Kernel, Synthetic, Singularity };

/// Compression methods the harness compares. TruncatedSvd is the optimal
/// rank-s reference, LinearTime the thin randomized factorization; the rest
/// pick an index sample and reconstruct through the sampled block.
enum class MethodKind { Random, LinearTime, Rrqr, Icd, KMeans, TruncatedSvd };

/// Stable lowercase token for CSV and CLI use: random, lintime, rrqr, icd,
/// kmeans, svd.
std::string method_name(MethodKind method);
MethodKind method_from_name(const std::string& name);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::Kernel;

  // Kernel input: a libsvm file, or generated blobs when the path is empty.
  std::string input_path;
  Index blob_n = 300;
  Index blob_d = 3;
  Index blob_k = 5;
  KernelScale scale = KernelScale::MeanToCenter;

  // Synthetic and singularity inputs.
  Index synth_n = 500;
  std::vector<DecayKind> decays = {DecayKind::Linear, DecayKind::Exponential};
  double rate = 0.5;

  // Common knobs. Empty methods/ratios pick per-experiment defaults.
  std::vector<MethodKind> methods;
  std::vector<double> ratios;
  int trials = 20;
  std::uint64_t master_seed = 0;
  ErrorNorm norm = ErrorNorm::L2;
  std::string out_dir = ".";
  ThinFrontEnd front_end = ThinFrontEnd::LinearTimeSvd;
  Index column_budget = 0;  // <= 0 picks min(cols, 10 s)
  int kmeans_iters = 25;
};

/// One measurement. `error` and `sigma_s_am` are NaN when the method failed
/// on this input; `bound` is present only for selection rows whose
/// nonsingularity assumptions and gap condition verify in the L2 norm.
struct ResultRow {
  std::string experiment;
  MethodKind method = MethodKind::Random;
  double ratio = 0.0;
  int trial = 0;
  double error = 0.0;
  double sigma_s_am = 0.0;
  std::optional<double> bound;
  double millis = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic per-row seed: a chain over method, ratio index and trial.
std::uint64_t row_seed(std::uint64_t master, MethodKind method,
                       int ratio_index, int trial);

std::vector<ResultRow> run_kernel_experiment(const ExperimentSpec& spec);
std::vector<ResultRow> run_synthetic_experiment(const ExperimentSpec& spec);

/// Repeated fixed-ratio sampling that records the sampled block's smallest
/// singular value next to the reconstruction error, for studying how
/// near-singular samples degrade the approximation.
std::vector<ResultRow> run_singularity_experiment(const ExperimentSpec& spec);

/// Dispatches on spec.kind.
std::vector<ResultRow> run_experiment(const ExperimentSpec& spec);

/// Exact CSV column line: experiment,sampler,ratio,trial,error,sigma_s_am,bound,ms,seed
std::string csv_header();

/// Rows as CSV text (header included). Doubles use shortest round-trip
/// form, NaN prints as `nan`, a missing bound as `n/a`.
std::string csv_text(const std::vector<ResultRow>& rows);
void write_csv(const std::string& path, const std::vector<ResultRow>& rows);

/// Inverse of csv_text; raises ParseError on a malformed header or row.
std::vector<ResultRow> parse_csv_text(const std::string& text);
std::vector<ResultRow> read_csv(const std::string& path);

/// Gnuplot script with inline data: per-method mean-error curves over the
/// ratio for Kernel/Synthetic, a log-log error-versus-sigma scatter for
/// Singularity. The script renders `<stem>.png` next to itself.
void write_plot_script(const std::string& path,
                       const std::vector<ResultRow>& rows,
                       ExperimentKind kind);

/// Writes one CSV (and optionally one plot script) per experiment tag under
/// spec.out_dir and returns the written paths. Refuses an empty row set.
std::vector<std::string> emit_outputs(const std::vector<ResultRow>& rows,
                                      const ExperimentSpec& spec,
                                      bool with_plot);

/// Ratio lists come as a single value, a comma list, or start:stop:step.
/// Every ratio must lie in (0, 1].
std::vector<double> parse_ratio_spec(const std::string& text);

/// Pearson correlation of (log sigma_s_am, log error) over rows where both
/// are finite and positive. `defined` is false below two usable rows.
struct Correlation {
  double value = 0.0;
  long count = 0;
  bool defined = false;
};

Correlation singularity_correlation(const std::vector<ResultRow>& rows);

}  // namespace nystromite
