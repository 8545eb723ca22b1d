#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "nystromite/experiments.hpp"

using namespace nystromite;

namespace {

std::vector<MethodKind> parse_samplers(const std::string& list) {
  std::vector<MethodKind> methods;
  std::size_t start = 0;
  while (start <= list.size()) {
    const std::size_t comma = list.find(',', start);
    const std::string tok =
        list.substr(start, comma == std::string::npos ? comma : comma - start);
    if (tok.empty())
      fail(ErrorCode::ParseError, "sampler list '" + list + "': empty entry");
    methods.push_back(method_from_name(tok));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return methods;
}

std::vector<DecayKind> parse_decay(const std::string& token) {
  if (token == "linear") return {DecayKind::Linear};
  if (token == "exponential") return {DecayKind::Exponential};
  if (token == "both") return {DecayKind::Linear, DecayKind::Exponential};
  fail(ErrorCode::ParseError,
       "decay must be linear, exponential or both, got '" + token + "'");
}

ErrorNorm parse_norm(const std::string& token) {
  if (token == "l2") return ErrorNorm::L2;
  if (token == "fro") return ErrorNorm::Frobenius;
  fail(ErrorCode::ParseError, "norm must be l2 or fro, got '" + token + "'");
}

void print_summary(const std::vector<ResultRow>& rows) {
  // Mean error per (experiment, method, ratio), skipping failed trials.
  std::map<std::string,
           std::map<std::string, std::map<double, std::pair<double, long>>>>
      cells;
  for (const ResultRow& row : rows)
    if (std::isfinite(row.error)) {
      auto& cell = cells[row.experiment][method_name(row.method)][row.ratio];
      cell.first += row.error;
      cell.second += 1;
    }
  for (const auto& [experiment, methods] : cells) {
    std::printf("%s\n", experiment.c_str());
    for (const auto& [method, ratios] : methods) {
      std::printf("  %-8s", method.c_str());
      for (const auto& [ratio, cell] : ratios)
        std::printf("  %.3g@%g", cell.first / double(cell.second), ratio);
      std::printf("\n");
    }
  }
}

// The correlation is a within-one-matrix statistic; pooling rows of
// different matrices confounds it with the scale gap between them, so group
// by experiment tag first.
void print_correlations(const std::vector<ResultRow>& rows) {
  std::vector<std::string> order;
  std::map<std::string, std::vector<ResultRow>> by_experiment;
  for (const ResultRow& row : rows) {
    auto [it, fresh] = by_experiment.try_emplace(row.experiment);
    if (fresh) order.push_back(row.experiment);
    it->second.push_back(row);
  }
  for (const std::string& tag : order) {
    const std::vector<ResultRow>& subset = by_experiment[tag];
    const Correlation pooled = singularity_correlation(subset);
    if (pooled.defined)
      std::printf("%s log-log correlation (all samplers, %ld trials): %.4f\n",
                  tag.c_str(), pooled.count, pooled.value);
    else
      std::printf("%s log-log correlation: undefined (too few usable trials)\n",
                  tag.c_str());

    std::map<std::string, std::vector<ResultRow>> by_method;
    for (const ResultRow& row : subset)
      by_method[method_name(row.method)].push_back(row);
    for (const auto& [method, method_rows] : by_method) {
      const Correlation corr = singularity_correlation(method_rows);
      if (corr.defined)
        std::printf("  %-8s %.4f over %ld trials\n", method.c_str(),
                    corr.value, corr.count);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Benchmark harness for sample-based low-rank compression"};
  app.require_subcommand(1);

  ExperimentSpec spec;
  std::string ratio_text;
  std::string sampler_text;
  std::string norm_text;
  std::string decay_text = "both";
  std::string front_text = "lintime";
  std::vector<long> blob_dims;
  bool with_plot = false;

  const auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--ratios", ratio_text,
                    "sample ratios: value, comma list, or start:stop:step");
    cmd->add_option("--trials", spec.trials, "trials per sampler and ratio");
    cmd->add_option("--seed", spec.master_seed, "master seed");
    cmd->add_option("--samplers", sampler_text,
                    "comma list of random,lintime,rrqr,icd,kmeans,svd");
    cmd->add_option("--norm", norm_text, "error norm: l2 or fro");
    cmd->add_option("--out", spec.out_dir, "output directory");
    cmd->add_option("--front-end", front_text,
                    "thin factorization: exact or lintime");
    cmd->add_option("--columns", spec.column_budget,
                    "column budget of the lintime front end");
    cmd->add_option("--kmeans-iters", spec.kmeans_iters,
                    "Lloyd iterations for the kmeans sampler");
    cmd->add_flag("--plot", with_plot, "also write gnuplot scripts");
  };

  CLI::App* kernel =
      app.add_subcommand("kernel", "Gaussian kernel of a point set");
  kernel->add_option("--input", spec.input_path,
                     "libsvm dataset (default: generated blobs)");
  kernel->add_option("--blobs", blob_dims, "blob generator: n,d,k")
      ->delimiter(',')
      ->expected(3);
  add_common(kernel);

  CLI::App* synthetic =
      app.add_subcommand("synthetic", "matrices with planted spectra");
  synthetic->add_option("--n", spec.synth_n, "matrix size");
  synthetic->add_option("--decay", decay_text,
                        "spectrum: linear, exponential or both");
  synthetic->add_option("--rate", spec.rate, "exponential decay rate");
  add_common(synthetic);

  CLI::App* singularity = app.add_subcommand(
      "singularity", "sampled-block conditioning against the error");
  singularity->add_option("--n", spec.synth_n, "matrix size");
  singularity->add_option("--decay", decay_text,
                          "spectrum: linear, exponential or both");
  singularity->add_option("--rate", spec.rate, "exponential decay rate");
  add_common(singularity);

  CLI11_PARSE(app, argc, argv);

  try {
    CLI::App* active = kernel->parsed()      ? kernel
                       : synthetic->parsed() ? synthetic
                                             : singularity;
    if (kernel->parsed()) {
      spec.kind = ExperimentKind::Kernel;
      spec.norm = ErrorNorm::Frobenius;
      if (!blob_dims.empty()) {
        spec.blob_n = blob_dims[0];
        spec.blob_d = blob_dims[1];
        spec.blob_k = blob_dims[2];
      }
    } else if (synthetic->parsed()) {
      spec.kind = ExperimentKind::Synthetic;
      spec.norm = ErrorNorm::L2;
    } else {
      spec.kind = ExperimentKind::Singularity;
      spec.norm = ErrorNorm::L2;
      if (active->count("--trials") == 0) spec.trials = 100;
    }

    if (!norm_text.empty()) spec.norm = parse_norm(norm_text);
    spec.decays = parse_decay(decay_text);
    if (!ratio_text.empty()) spec.ratios = parse_ratio_spec(ratio_text);
    if (!sampler_text.empty()) spec.methods = parse_samplers(sampler_text);
    if (front_text == "exact")
      spec.front_end = ThinFrontEnd::ExactSvd;
    else if (front_text != "lintime")
      fail(ErrorCode::ParseError,
           "front end must be exact or lintime, got '" + front_text + "'");

    const std::vector<ResultRow> rows = run_experiment(spec);
    const std::vector<std::string> written =
        emit_outputs(rows, spec, with_plot);

    std::printf("%zu rows\n", rows.size());
    print_summary(rows);
    if (spec.kind == ExperimentKind::Singularity) print_correlations(rows);
    for (const std::string& path : written)
      std::printf("wrote %s\n", path.c_str());
  } catch (const NystromError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return 1;
  }
  return 0;
}
