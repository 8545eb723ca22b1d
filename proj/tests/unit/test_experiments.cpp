#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <limits>
#include <set>

#include "nystromite/experiments.hpp"

using namespace nystromite;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

bool rows_equal_except_millis(const std::vector<ResultRow>& a,
                              const std::vector<ResultRow>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const ResultRow& x = a[i];
    const ResultRow& y = b[i];
    const bool errors_match =
        (std::isnan(x.error) && std::isnan(y.error)) || x.error == y.error;
    const bool sigmas_match = (std::isnan(x.sigma_s_am) &&
                               std::isnan(y.sigma_s_am)) ||
                              x.sigma_s_am == y.sigma_s_am;
    if (x.experiment != y.experiment || x.method != y.method ||
        x.ratio != y.ratio || x.trial != y.trial || !errors_match ||
        !sigmas_match || x.bound != y.bound || x.seed != y.seed)
      return false;
  }
  return true;
}

std::vector<ResultRow> sample_rows() {
  std::vector<ResultRow> rows;
  ResultRow a;
  a.experiment = "synthetic-linear";
  a.method = MethodKind::Rrqr;
  a.ratio = 0.05;
  a.trial = 3;
  a.error = 1.0 / 3.0;
  a.sigma_s_am = 2.5e-7;
  a.bound = 0.75;
  a.millis = 12.125;
  a.seed = 18446744073709551615ull;
  rows.push_back(a);

  ResultRow b;
  b.experiment = "synthetic-exponential";
  b.method = MethodKind::Random;
  b.ratio = 0.1;
  b.trial = 0;
  b.error = kNan;
  b.sigma_s_am = kNan;
  b.millis = 0.0;
  b.seed = 7;
  rows.push_back(b);
  return rows;
}

}  // namespace

TEST_CASE("method names round-trip and reject unknown tokens") {
  for (const MethodKind m :
       {MethodKind::Random, MethodKind::LinearTime, MethodKind::Rrqr,
        MethodKind::Icd, MethodKind::KMeans, MethodKind::TruncatedSvd})
    CHECK(method_from_name(method_name(m)) == m);
  CHECK(method_name(MethodKind::TruncatedSvd) == "svd");
  CHECK(method_name(MethodKind::LinearTime) == "lintime");
  CHECK_THROWS_AS(method_from_name("qr"), NystromError);
}

TEST_CASE("row_seed is deterministic and spreads across the grid") {
  CHECK(row_seed(1, MethodKind::Rrqr, 2, 3) ==
        row_seed(1, MethodKind::Rrqr, 2, 3));
  std::set<std::uint64_t> seen;
  for (const MethodKind m : {MethodKind::Random, MethodKind::Rrqr})
    for (int r = 0; r < 4; ++r)
      for (int t = 0; t < 8; ++t) seen.insert(row_seed(9, m, r, t));
  CHECK(seen.size() == 64);
}

TEST_CASE("parse_ratio_spec handles values, lists and ranges") {
  CHECK(parse_ratio_spec("0.05") == std::vector<double>{0.05});
  CHECK(parse_ratio_spec("0.02,0.5,1") ==
        std::vector<double>{0.02, 0.5, 1.0});

  const std::vector<double> range = parse_ratio_spec("0.01:0.10:0.01");
  REQUIRE(range.size() == 10);
  CHECK(range.front() == doctest::Approx(0.01));
  CHECK(range.back() == doctest::Approx(0.10));

  const std::vector<double> mixed = parse_ratio_spec("0.005,0.1:0.3:0.1");
  REQUIRE(mixed.size() == 4);
  CHECK(mixed[0] == 0.005);
  CHECK(mixed[3] == doctest::Approx(0.3));

  CHECK_THROWS_AS(parse_ratio_spec(""), NystromError);
  CHECK_THROWS_AS(parse_ratio_spec("0"), NystromError);
  CHECK_THROWS_AS(parse_ratio_spec("1.5"), NystromError);
  CHECK_THROWS_AS(parse_ratio_spec("abc"), NystromError);
  CHECK_THROWS_AS(parse_ratio_spec("0.1:0.05:0.01"), NystromError);
  CHECK_THROWS_AS(parse_ratio_spec("0.1:0.2"), NystromError);
  CHECK_THROWS_AS(parse_ratio_spec("0.1,,0.2"), NystromError);
}

TEST_CASE("csv text round-trips every field exactly") {
  const std::vector<ResultRow> rows = sample_rows();
  const std::string text = csv_text(rows);
  CHECK(text.substr(0, text.find('\n')) == csv_header());
  CHECK(csv_header() ==
        "experiment,sampler,ratio,trial,error,sigma_s_am,bound,ms,seed");

  const std::vector<ResultRow> back = parse_csv_text(text);
  REQUIRE(back.size() == 2);
  CHECK(back[0].experiment == "synthetic-linear");
  CHECK(back[0].method == MethodKind::Rrqr);
  CHECK(back[0].ratio == 0.05);
  CHECK(back[0].trial == 3);
  CHECK(back[0].error == 1.0 / 3.0);
  CHECK(back[0].sigma_s_am == 2.5e-7);
  REQUIRE(back[0].bound.has_value());
  CHECK(*back[0].bound == 0.75);
  CHECK(back[0].millis == 12.125);
  CHECK(back[0].seed == 18446744073709551615ull);
  CHECK(std::isnan(back[1].error));
  CHECK(std::isnan(back[1].sigma_s_am));
  CHECK_FALSE(back[1].bound.has_value());
}

TEST_CASE("parse_csv_text rejects malformed input") {
  CHECK_THROWS_WITH_AS(parse_csv_text("nope\n"),
                       doctest::Contains("header"), NystromError);
  const std::string header = csv_header() + "\n";
  CHECK_THROWS_WITH_AS(parse_csv_text(header + "a,rrqr,0.1,0\n"),
                       doctest::Contains("9 fields"), NystromError);
  CHECK_THROWS_WITH_AS(
      parse_csv_text(header + "a,qr,0.1,0,1,1,n/a,1,5\n"),
      doctest::Contains("unknown sampler"), NystromError);
  CHECK_THROWS_WITH_AS(
      parse_csv_text(header + "a,rrqr,x,0,1,1,n/a,1,5\n"),
      doctest::Contains("malformed number"), NystromError);
  CHECK_THROWS_WITH_AS(
      parse_csv_text(header + "a,rrqr,0.1,0,1,1,n/a,1,-5\n"),
      doctest::Contains("malformed seed"), NystromError);
}

TEST_CASE("singularity_correlation recovers exact log-log relations") {
  std::vector<ResultRow> rows;
  for (int i = 1; i <= 5; ++i) {
    ResultRow r;
    r.sigma_s_am = std::exp(static_cast<double>(i));
    r.error = std::exp(static_cast<double>(-2 * i));
    rows.push_back(r);
  }
  ResultRow junk;
  junk.sigma_s_am = kNan;
  junk.error = 1.0;
  rows.push_back(junk);

  const Correlation corr = singularity_correlation(rows);
  REQUIRE(corr.defined);
  CHECK(corr.count == 5);
  CHECK(corr.value == doctest::Approx(-1.0).epsilon(1e-12));

  for (auto& r : rows) r.error = r.sigma_s_am * 3.0;
  const Correlation pos = singularity_correlation(rows);
  REQUIRE(pos.defined);
  CHECK(pos.value == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_FALSE(singularity_correlation({rows[0]}).defined);
  for (auto& r : rows) r.error = 2.0;
  CHECK_FALSE(singularity_correlation(rows).defined);
}

TEST_CASE("synthetic experiment rows follow the planted spectra") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Synthetic;
  spec.synth_n = 60;
  spec.trials = 2;
  spec.ratios = {0.1};
  spec.methods = {MethodKind::Random, MethodKind::Rrqr,
                  MethodKind::TruncatedSvd};
  spec.master_seed = 4;

  const std::vector<ResultRow> rows = run_synthetic_experiment(spec);
  REQUIRE(rows.size() == 2 * (2 + 2 + 1));

  // s = 6 of 60, so the optimal L2 error is the planted seventh value.
  double svd_linear = kNan, svd_exponential = kNan;
  for (const ResultRow& row : rows)
    if (row.method == MethodKind::TruncatedSvd) {
      if (row.experiment == "synthetic-linear") svd_linear = row.error;
      if (row.experiment == "synthetic-exponential")
        svd_exponential = row.error;
    }
  CHECK(svd_linear == doctest::Approx(1.0 - 6.0 / 60.0).epsilon(1e-10));
  CHECK(svd_exponential == doctest::Approx(std::pow(0.5, 6)).epsilon(1e-10));

  for (const ResultRow& row : rows) {
    CHECK((row.experiment == "synthetic-linear" ||
           row.experiment == "synthetic-exponential"));
    if (std::isfinite(row.error) && row.experiment == "synthetic-linear")
      CHECK(row.error >= svd_linear * (1.0 - 1e-9));
    if (std::isfinite(row.error) &&
        row.experiment == "synthetic-exponential")
      CHECK(row.error >= svd_exponential * (1.0 - 1e-9));
  }

  const std::vector<ResultRow> again = run_synthetic_experiment(spec);
  CHECK(rows_equal_except_millis(rows, again));
}

TEST_CASE("a full-size sample reconstructs the synthetic matrix exactly") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Synthetic;
  spec.synth_n = 30;
  spec.trials = 1;
  spec.ratios = {1.0};
  spec.methods = {MethodKind::Random};
  spec.decays = {DecayKind::Exponential};

  const std::vector<ResultRow> rows = run_synthetic_experiment(spec);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].error <= 1e-8);
}

TEST_CASE("kernel experiment covers point-based samplers") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Kernel;
  spec.blob_n = 40;
  spec.blob_d = 2;
  spec.blob_k = 3;
  spec.trials = 2;
  spec.ratios = {0.1, 0.25};
  spec.methods = {MethodKind::Random, MethodKind::Icd, MethodKind::KMeans,
                  MethodKind::TruncatedSvd};
  spec.norm = ErrorNorm::Frobenius;
  spec.master_seed = 21;

  const std::vector<ResultRow> rows = run_kernel_experiment(spec);
  REQUIRE(rows.size() == (2 + 1 + 2 + 1) * 2);

  std::map<double, double> optimal;
  for (const ResultRow& row : rows) {
    CHECK(row.experiment == "kernel-blobs");
    if (row.method == MethodKind::TruncatedSvd) optimal[row.ratio] = row.error;
  }
  REQUIRE(optimal.size() == 2);

  for (const ResultRow& row : rows) {
    REQUIRE(std::isfinite(row.error));
    CHECK(row.error >= optimal[row.ratio] * (1.0 - 1e-9));
    if (row.method == MethodKind::Icd) CHECK(row.trial == 0);
  }

  // Symmetric sampling on a kernel keeps row and column sets equal, so the
  // sampled-block diagnostic exists for every selection method.
  for (const ResultRow& row : rows)
    if (row.method != MethodKind::TruncatedSvd)
      CHECK(std::isfinite(row.sigma_s_am));
}

TEST_CASE("kmeans rows degrade to nan on matrix-only experiments") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Synthetic;
  spec.synth_n = 24;
  spec.trials = 1;
  spec.ratios = {0.25};
  spec.methods = {MethodKind::KMeans};
  spec.decays = {DecayKind::Linear};

  const std::vector<ResultRow> rows = run_synthetic_experiment(spec);
  REQUIRE(rows.size() == 1);
  CHECK(std::isnan(rows[0].error));
  CHECK(std::isnan(rows[0].sigma_s_am));
  CHECK_FALSE(rows[0].bound.has_value());
}

TEST_CASE("singularity experiment fills defaults and correlates") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Singularity;
  spec.synth_n = 80;
  spec.trials = 10;
  spec.decays = {DecayKind::Exponential};
  spec.master_seed = 33;

  const std::vector<ResultRow> rows = run_singularity_experiment(spec);
  REQUIRE(rows.size() == 2 * 10);
  for (const ResultRow& row : rows) {
    CHECK(row.experiment == "singularity-exponential");
    CHECK(row.ratio == 0.05);
    CHECK((row.method == MethodKind::Random ||
           row.method == MethodKind::Rrqr));
  }

  const Correlation corr = singularity_correlation(rows);
  CHECK(corr.defined);
  CHECK(corr.count >= 10);
}

TEST_CASE("emit_outputs writes one csv per experiment tag") {
  ExperimentSpec spec;
  spec.kind = ExperimentKind::Synthetic;
  spec.synth_n = 40;
  spec.trials = 1;
  spec.ratios = {0.1};
  spec.methods = {MethodKind::Random, MethodKind::TruncatedSvd};
  spec.out_dir =
      (std::filesystem::temp_directory_path() / "nystromite_emit").string();
  std::filesystem::remove_all(spec.out_dir);

  const std::vector<ResultRow> rows = run_synthetic_experiment(spec);
  const std::vector<std::string> written = emit_outputs(rows, spec, true);
  REQUIRE(written.size() == 4);
  CHECK(written[0].find("synthetic-linear.csv") != std::string::npos);
  CHECK(written[1].find("synthetic-linear.gp") != std::string::npos);
  CHECK(written[2].find("synthetic-exponential.csv") != std::string::npos);

  for (const std::string& path : written)
    CHECK(std::filesystem::exists(path));

  std::vector<ResultRow> reread = read_csv(written[0]);
  std::vector<ResultRow> expected;
  for (const ResultRow& row : rows)
    if (row.experiment == "synthetic-linear") expected.push_back(row);
  REQUIRE(reread.size() == expected.size());
  CHECK(rows_equal_except_millis(reread, expected));

  CHECK_THROWS_AS(emit_outputs({}, spec, false), NystromError);
}

TEST_CASE("plot scripts carry inline data blocks") {
  const std::vector<ResultRow> rows = sample_rows();
  const auto dir = std::filesystem::temp_directory_path();

  const std::string lines = (dir / "nystromite_lines.gp").string();
  write_plot_script(lines, rows, ExperimentKind::Synthetic);
  std::ifstream in(lines);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  CHECK(text.find("$rrqr << EOD") != std::string::npos);
  CHECK(text.find("with linespoints") != std::string::npos);
  CHECK(text.find("set logscale y") != std::string::npos);
  CHECK(text.find("nystromite_lines.png") != std::string::npos);

  const std::string scatter = (dir / "nystromite_scatter.gp").string();
  write_plot_script(scatter, rows, ExperimentKind::Singularity);
  std::ifstream in2(scatter);
  std::string text2((std::istreambuf_iterator<char>(in2)),
                    std::istreambuf_iterator<char>());
  CHECK(text2.find("set logscale xy") != std::string::npos);
  CHECK(text2.find("with points") != std::string::npos);
}
