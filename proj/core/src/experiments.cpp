#include "nystromite/experiments.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <utility>

#include "nystromite/nystrom.hpp"
#include "nystromite/rng.hpp"

namespace nystromite {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

const char* kCsvHeader =
    "experiment,sampler,ratio,trial,error,sigma_s_am,bound,ms,seed";

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

double parse_csv_double(const std::string& tok, long line) {
  double value = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    fail(ErrorCode::ParseError,
         "csv line " + std::to_string(line) + ": malformed number '" + tok +
             "'");
  return value;
}

std::string slugify(const std::string& text) {
  std::string out;
  bool pending_dash = false;
  for (const char ch : text) {
    if (std::isalnum(static_cast<unsigned char>(ch))) {
      if (pending_dash && !out.empty()) out.push_back('-');
      pending_dash = false;
      out.push_back(static_cast<char>(
          std::tolower(static_cast<unsigned char>(ch))));
    } else {
      pending_dash = true;
    }
  }
  return out.empty() ? std::string("input") : out;
}

std::string decay_name(DecayKind decay) {
  return decay == DecayKind::Linear ? "linear" : "exponential";
}

struct MatrixCase {
  std::string tag;
  Matrix m;
  SvdResult svd;
  Matrix points;  // rows are samples; empty unless the case has a point set
  bool has_points = false;
  bool symmetric = false;
};

Index ratio_to_s(double ratio, Index rows, Index cols) {
  const Index limit = std::min(rows, cols);
  const Index s =
      static_cast<Index>(std::llround(ratio * static_cast<double>(limit)));
  return std::clamp<Index>(s, 1, limit);
}

double optimal_error(const SvdResult& svd, Index s, ErrorNorm norm) {
  const Index k = svd.values.size();
  if (s >= k) return 0.0;
  if (norm == ErrorNorm::L2) return svd.values(s);
  return std::sqrt(svd.values.tail(k - s).squaredNorm());
}

struct Measurement {
  double error = kNan;
  double sigma_s_am = kNan;
  std::optional<double> bound;
};

double selection_error(const Matrix& m, const SampleSelection& sel,
                       ErrorNorm norm) {
  const NystromFactorization f = factorize(partition(m, sel.rows, sel.cols));
  return observed_error(m, f, norm);
}

Measurement measure(const MatrixCase& c, MethodKind method, Index s,
                    std::uint64_t seed, const ExperimentSpec& spec) {
  Measurement out;
  switch (method) {
    case MethodKind::Random: {
      SampleSelection sel =
          random_sample(c.m.rows(), c.m.cols(), s, seed, c.symmetric);
      finalize_selection(c.m, sel);
      out.error = selection_error(c.m, sel, spec.norm);
      out.sigma_s_am = sel.sigma_s_sample;
      break;
    }
    case MethodKind::LinearTime: {
      const ThinDecomposition t =
          linear_time_svd(c.m, s, spec.column_budget, seed);
      out.error = spec.norm == ErrorNorm::L2
                      ? t.residual_norm
                      : frobenius_norm(c.m - t.g * t.s_factor);
      break;
    }
    case MethodKind::Rrqr: {
      SamplerConfig cfg;
      cfg.method = SamplerMethod::Rrqr;
      cfg.front_end = spec.front_end;
      cfg.seed = seed;
      cfg.column_budget = spec.column_budget;
      const SampleSelection sel = select_sample(c.m, s, cfg);
      if (!sel.ok) break;
      out.error = selection_error(c.m, sel, spec.norm);
      out.sigma_s_am = sel.sigma_s_sample;
      if (spec.norm == ErrorNorm::L2) {
        const SpectralSummary sum = make_summary(c.svd, c.m, sel);
        if (nonsingularity_assumptions(sum, sel).all() &&
            spectral_gap_condition(sum)) {
          const BoundValue bv = measured_error_bound(sum);
          if (bv.defined) out.bound = bv.value;
        }
      }
      break;
    }
    case MethodKind::Icd: {
      SampleSelection sel = icd_sample(c.m, s);
      if (!sel.ok) break;
      finalize_selection(c.m, sel);
      out.error = selection_error(c.m, sel, spec.norm);
      out.sigma_s_am = sel.sigma_s_sample;
      break;
    }
    case MethodKind::KMeans: {
      if (!c.has_points)
        fail(ErrorCode::InvalidArgument,
             "kmeans sampling needs a point set, not just a matrix");
      SampleSelection sel =
          kmeans_sample(c.points, s, spec.kmeans_iters, seed);
      finalize_selection(c.m, sel);
      out.error = selection_error(c.m, sel, spec.norm);
      out.sigma_s_am = sel.sigma_s_sample;
      break;
    }
    case MethodKind::TruncatedSvd:
      out.error = optimal_error(c.svd, s, spec.norm);
      break;
  }
  return out;
}

bool single_shot(MethodKind method) {
  return method == MethodKind::Icd || method == MethodKind::TruncatedSvd;
}

void append_case_rows(std::vector<ResultRow>& out, const MatrixCase& c,
                      const ExperimentSpec& spec,
                      const std::vector<MethodKind>& methods,
                      const std::vector<double>& ratios, int trials) {
  using clock = std::chrono::steady_clock;
  for (const MethodKind method : methods) {
    const int runs = single_shot(method) ? 1 : trials;
    for (std::size_t ri = 0; ri < ratios.size(); ++ri) {
      const double ratio = ratios[ri];
      const Index s = ratio_to_s(ratio, c.m.rows(), c.m.cols());
      for (int trial = 0; trial < runs; ++trial) {
        const std::uint64_t seed =
            row_seed(spec.master_seed, method, static_cast<int>(ri), trial);
        Measurement meas;
        const auto start = clock::now();
        try {
          meas = measure(c, method, s, seed, spec);
        } catch (const NystromError&) {
          meas = Measurement{};
        }
        const std::chrono::duration<double, std::milli> elapsed =
            clock::now() - start;
        out.push_back(ResultRow{c.tag, method, ratio, trial, meas.error,
                                meas.sigma_s_am, meas.bound, elapsed.count(),
                                seed});
      }
    }
  }
}

MatrixCase kernel_case(const ExperimentSpec& spec) {
  Dataset ds;
  if (spec.input_path.empty()) {
    ds = gaussian_blobs(spec.blob_n, spec.blob_d, spec.blob_k,
                        derive_seed(spec.master_seed, 101));
  } else {
    ds = parse_libsvm(resolve_data_path(spec.input_path));
  }
  MatrixCase c;
  c.tag = "kernel-" + slugify(std::filesystem::path(ds.name).stem().string());
  c.m = gaussian_kernel(ds, spec.scale);
  c.svd = full_svd(c.m);
  c.points = std::move(ds.values);
  c.has_points = true;
  c.symmetric = true;
  return c;
}

MatrixCase synthetic_case(const ExperimentSpec& spec, DecayKind decay,
                          const char* prefix) {
  SyntheticSpec synth;
  synth.n = spec.synth_n;
  synth.decay = decay;
  synth.rate = spec.rate;
  synth.seed = derive_seed(spec.master_seed,
                           decay == DecayKind::Linear ? 11 : 12);
  MatrixCase c;
  c.tag = std::string(prefix) + "-" + decay_name(decay);
  c.m = synthetic_matrix(synth);
  c.svd = full_svd(c.m);
  return c;
}

std::vector<double> default_ratios() {
  return {0.02, 0.04, 0.06, 0.08, 0.10};
}

}  // namespace

std::string method_name(MethodKind method) {
  switch (method) {
    case MethodKind::Random: return "random";
    case MethodKind::LinearTime: return "lintime";
    case MethodKind::Rrqr: return "rrqr";
    case MethodKind::Icd: return "icd";
    case MethodKind::KMeans: return "kmeans";
    case MethodKind::TruncatedSvd: return "svd";
  }
  fail(ErrorCode::InvalidArgument, "unknown method id");
}

MethodKind method_from_name(const std::string& name) {
  for (const MethodKind m :
       {MethodKind::Random, MethodKind::LinearTime, MethodKind::Rrqr,
        MethodKind::Icd, MethodKind::KMeans, MethodKind::TruncatedSvd})
    if (method_name(m) == name) return m;
  fail(ErrorCode::ParseError, "unknown sampler '" + name + "'");
}

std::uint64_t row_seed(std::uint64_t master, MethodKind method,
                       int ratio_index, int trial) {
  const std::uint64_t by_method =
      derive_seed(master, static_cast<std::uint64_t>(method));
  const std::uint64_t by_ratio =
      derive_seed(by_method, static_cast<std::uint64_t>(ratio_index));
  return derive_seed(by_ratio, static_cast<std::uint64_t>(trial));
}

std::vector<ResultRow> run_kernel_experiment(const ExperimentSpec& spec) {
  const MatrixCase c = kernel_case(spec);
  const std::vector<MethodKind> methods =
      spec.methods.empty()
          ? std::vector<MethodKind>{MethodKind::Random, MethodKind::LinearTime,
                                    MethodKind::Rrqr, MethodKind::Icd,
                                    MethodKind::KMeans,
                                    MethodKind::TruncatedSvd}
          : spec.methods;
  const std::vector<double> ratios =
      spec.ratios.empty() ? default_ratios() : spec.ratios;
  std::vector<ResultRow> rows;
  append_case_rows(rows, c, spec, methods, ratios, spec.trials);
  return rows;
}

std::vector<ResultRow> run_synthetic_experiment(const ExperimentSpec& spec) {
  const std::vector<MethodKind> methods =
      spec.methods.empty()
          ? std::vector<MethodKind>{MethodKind::Random, MethodKind::LinearTime,
                                    MethodKind::Rrqr, MethodKind::TruncatedSvd}
          : spec.methods;
  const std::vector<double> ratios =
      spec.ratios.empty() ? default_ratios() : spec.ratios;
  std::vector<ResultRow> rows;
  for (const DecayKind decay : spec.decays)
    append_case_rows(rows, synthetic_case(spec, decay, "synthetic"), spec,
                     methods, ratios, spec.trials);
  return rows;
}

std::vector<ResultRow> run_singularity_experiment(const ExperimentSpec& spec) {
  const std::vector<MethodKind> methods =
      spec.methods.empty()
          ? std::vector<MethodKind>{MethodKind::Random, MethodKind::Rrqr}
          : spec.methods;
  const std::vector<double> ratios =
      spec.ratios.empty() ? std::vector<double>{0.05} : spec.ratios;
  std::vector<ResultRow> rows;
  for (const DecayKind decay : spec.decays)
    append_case_rows(rows, synthetic_case(spec, decay, "singularity"), spec,
                     methods, ratios, spec.trials);
  return rows;
}

std::vector<ResultRow> run_experiment(const ExperimentSpec& spec) {
  switch (spec.kind) {
    case ExperimentKind::Kernel: return run_kernel_experiment(spec);
    case ExperimentKind::Synthetic: return run_synthetic_experiment(spec);
    case ExperimentKind::Singularity: return run_singularity_experiment(spec);
  }
  fail(ErrorCode::InvalidArgument, "unknown experiment kind");
}

std::string csv_header() { return kCsvHeader; }

std::string csv_text(const std::vector<ResultRow>& rows) {
  std::string out = kCsvHeader;
  out.push_back('\n');
  for (const ResultRow& row : rows) {
    out += row.experiment;
    out.push_back(',');
    out += method_name(row.method);
    out.push_back(',');
    out += format_double(row.ratio);
    out.push_back(',');
    out += std::to_string(row.trial);
    out.push_back(',');
    out += format_double(row.error);
    out.push_back(',');
    out += format_double(row.sigma_s_am);
    out.push_back(',');
    out += row.bound ? format_double(*row.bound) : std::string("n/a");
    out.push_back(',');
    out += format_double(row.millis);
    out.push_back(',');
    out += std::to_string(row.seed);
    out.push_back('\n');
  }
  return out;
}

void write_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  out << csv_text(rows);
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::vector<ResultRow> parse_csv_text(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line != kCsvHeader)
    fail(ErrorCode::ParseError, "csv: missing or unexpected header line");

  std::vector<ResultRow> rows;
  long line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      fields.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (fields.size() != 9)
      fail(ErrorCode::ParseError, "csv line " + std::to_string(line_no) +
                                      ": expected 9 fields, got " +
                                      std::to_string(fields.size()));
    ResultRow row;
    row.experiment = fields[0];
    row.method = method_from_name(fields[1]);
    row.ratio = parse_csv_double(fields[2], line_no);
    row.trial = static_cast<int>(parse_csv_double(fields[3], line_no));
    row.error = parse_csv_double(fields[4], line_no);
    row.sigma_s_am = parse_csv_double(fields[5], line_no);
    if (fields[6] != "n/a")
      row.bound = parse_csv_double(fields[6], line_no);
    row.millis = parse_csv_double(fields[7], line_no);
    std::uint64_t seed = 0;
    const auto res = std::from_chars(
        fields[8].data(), fields[8].data() + fields[8].size(), seed);
    if (res.ec != std::errc{} ||
        res.ptr != fields[8].data() + fields[8].size())
      fail(ErrorCode::ParseError, "csv line " + std::to_string(line_no) +
                                      ": malformed seed '" + fields[8] + "'");
    row.seed = seed;
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<ResultRow> read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv_text(buf.str());
}

void write_plot_script(const std::string& path,
                       const std::vector<ResultRow>& rows,
                       ExperimentKind kind) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  const std::string stem = std::filesystem::path(path).stem().string();
  const std::string title = rows.empty() ? stem : rows.front().experiment;

  out << "set terminal pngcairo size 900,600\n";
  out << "set output '" << stem << ".png'\n";
  out << "set title '" << title << "'\n";

  std::vector<MethodKind> order;
  if (kind == ExperimentKind::Singularity) {
    // Per-trial scatter of error against the sampled block's smallest
    // singular value.
    std::map<MethodKind, std::vector<std::pair<double, double>>> series;
    for (const ResultRow& row : rows)
      if (std::isfinite(row.error) && row.error > 0.0 &&
          std::isfinite(row.sigma_s_am) && row.sigma_s_am > 0.0) {
        if (!series.count(row.method)) order.push_back(row.method);
        series[row.method].emplace_back(row.sigma_s_am, row.error);
      }
    out << "set xlabel 'sigma_s of sampled block'\n";
    out << "set ylabel 'error'\n";
    out << "set logscale xy\n";
    for (const MethodKind m : order) {
      out << "$" << method_name(m) << " << EOD\n";
      for (const auto& [sigma, err] : series[m])
        out << format_double(sigma) << ' ' << format_double(err) << '\n';
      out << "EOD\n";
    }
    if (!order.empty()) {
      out << "plot ";
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) out << ", ";
        out << "$" << method_name(order[i]) << " using 1:2 with points title '"
            << method_name(order[i]) << "'";
      }
      out << '\n';
    } else {
      out << "# no plottable rows\n";
    }
  } else {
    // Mean error per (method, ratio); failed trials are left out.
    std::map<MethodKind, std::map<double, std::pair<double, long>>> series;
    for (const ResultRow& row : rows)
      if (std::isfinite(row.error)) {
        if (!series.count(row.method)) order.push_back(row.method);
        auto& cell = series[row.method][row.ratio];
        cell.first += row.error;
        cell.second += 1;
      }
    out << "set xlabel 'sample fraction'\n";
    out << "set ylabel 'mean error'\n";
    out << "set logscale y\n";
    out << "set key outside right\n";
    for (const MethodKind m : order) {
      out << "$" << method_name(m) << " << EOD\n";
      for (const auto& [ratio, cell] : series[m])
        out << format_double(ratio) << ' '
            << format_double(cell.first / static_cast<double>(cell.second))
            << '\n';
      out << "EOD\n";
    }
    if (!order.empty()) {
      out << "plot ";
      for (std::size_t i = 0; i < order.size(); ++i) {
        if (i) out << ", ";
        out << "$" << method_name(order[i])
            << " using 1:2 with linespoints title '" << method_name(order[i])
            << "'";
      }
      out << '\n';
    } else {
      out << "# no plottable rows\n";
    }
  }
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::vector<std::string> emit_outputs(const std::vector<ResultRow>& rows,
                                      const ExperimentSpec& spec,
                                      bool with_plot) {
  if (rows.empty())
    fail(ErrorCode::InvalidArgument, "emit_outputs: no rows to write");
  namespace fs = std::filesystem;
  fs::create_directories(spec.out_dir);

  std::vector<std::string> tags;
  std::map<std::string, std::vector<ResultRow>> groups;
  for (const ResultRow& row : rows) {
    if (!groups.count(row.experiment)) tags.push_back(row.experiment);
    groups[row.experiment].push_back(row);
  }

  std::vector<std::string> written;
  for (const std::string& tag : tags) {
    const fs::path csv = fs::path(spec.out_dir) / (tag + ".csv");
    write_csv(csv.string(), groups[tag]);
    written.push_back(csv.string());
    if (with_plot) {
      const fs::path gp = fs::path(spec.out_dir) / (tag + ".gp");
      write_plot_script(gp.string(), groups[tag], spec.kind);
      written.push_back(gp.string());
    }
  }
  return written;
}

std::vector<double> parse_ratio_spec(const std::string& text) {
  const auto parse_one = [&text](const std::string& tok) {
    double value = 0.0;
    const auto res =
        std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
      fail(ErrorCode::ParseError,
           "ratio list '" + text + "': malformed number '" + tok + "'");
    return value;
  };
  const auto check = [&text](double r) {
    if (!(r > 0.0 && r <= 1.0))
      fail(ErrorCode::ParseError,
           "ratio list '" + text + "': ratios must lie in (0, 1]");
    return r;
  };

  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const std::size_t comma = text.find(',', start);
    const std::string tok =
        text.substr(start, comma == std::string::npos ? comma : comma - start);
    if (tok.empty())
      fail(ErrorCode::ParseError, "ratio list '" + text + "': empty entry");

    const std::size_t c1 = tok.find(':');
    if (c1 == std::string::npos) {
      out.push_back(check(parse_one(tok)));
    } else {
      const std::size_t c2 = tok.find(':', c1 + 1);
      if (c2 == std::string::npos || tok.find(':', c2 + 1) != std::string::npos)
        fail(ErrorCode::ParseError,
             "ratio list '" + text + "': ranges take start:stop:step");
      const double lo = parse_one(tok.substr(0, c1));
      const double hi = parse_one(tok.substr(c1 + 1, c2 - c1 - 1));
      const double step = parse_one(tok.substr(c2 + 1));
      if (!(step > 0.0) || hi < lo)
        fail(ErrorCode::ParseError,
             "ratio list '" + text + "': need stop >= start and step > 0");
      const long count =
          static_cast<long>(std::floor((hi - lo) / step + 1e-9));
      for (long k = 0; k <= count; ++k)
        out.push_back(check(lo + static_cast<double>(k) * step));
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  if (out.empty())
    fail(ErrorCode::ParseError, "ratio list '" + text + "' is empty");
  return out;
}

Correlation singularity_correlation(const std::vector<ResultRow>& rows) {
  std::vector<std::pair<double, double>> pts;
  for (const ResultRow& row : rows)
    if (std::isfinite(row.error) && row.error > 0.0 &&
        std::isfinite(row.sigma_s_am) && row.sigma_s_am > 0.0)
      pts.emplace_back(std::log(row.sigma_s_am), std::log(row.error));

  Correlation corr;
  corr.count = static_cast<long>(pts.size());
  if (pts.size() < 2) return corr;

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, syy = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    syy += (y - my) * (y - my);
    sxy += (x - mx) * (y - my);
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return corr;
  corr.value = sxy / std::sqrt(sxx * syy);
  corr.defined = true;
  return corr;
}

}  // namespace nystromite
