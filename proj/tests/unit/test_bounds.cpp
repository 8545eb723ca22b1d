#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>

#include "nystromite/bounds.hpp"
#include "nystromite/rng.hpp"

using namespace nystromite;

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

Matrix random_matrix(Index rows, Index cols, Rng& rng) {
  Matrix m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

Matrix haar_basis(Index rows, Index cols, Rng& rng) {
  const Matrix g = random_matrix(rows, cols, rng);
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Vector diag = qr.matrixQR().topRows(cols).diagonal();
  for (Index j = 0; j < cols; ++j)
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

Matrix matrix_with_values(const Vector& values, Index rows, Index cols,
                          Rng& rng) {
  const Index r = values.size();
  const Matrix u = haar_basis(rows, r, rng);
  const Matrix v = haar_basis(cols, r, rng);
  return u * values.asDiagonal() * v.transpose();
}

// Spectrum with a hard drop after the leading s values, small enough past
// the drop that the gap condition holds even for worst-case beta.
Vector gapped_values(Index s, Index tail, double drop) {
  Vector v(s + tail);
  for (Index i = 0; i < s; ++i) v(i) = 10.0 * std::pow(0.9, double(i));
  const double top_tail = v(s - 1) * drop;
  for (Index i = 0; i < tail; ++i) v(s + i) = top_tail * std::pow(0.5, double(i));
  return v;
}

SpectralSummary plain_summary(double sigma_1, double sigma_s, double sigma_s1,
                              double sample, double lead, double e,
                              double beta, double gamma) {
  SpectralSummary sum;
  sum.s = 2;
  sum.rows = 10;
  sum.cols = 10;
  sum.sigma_1 = sigma_1;
  sum.sigma_s = sigma_s;
  sum.sigma_s1 = sigma_s1;
  sum.sigma_s_sample = sample;
  sum.sigma_s_lead = lead;
  sum.residual_norm = e;
  sum.beta = beta;
  sum.gamma = gamma;
  return sum;
}

}  // namespace

TEST_CASE("beta_default matches the selection guarantee factor") {
  CHECK(beta_default(1, 2, 2) == doctest::Approx(std::sqrt(2.0)));
  CHECK(beta_default(5, 100, 200) == doctest::Approx(std::sqrt(476.0)));
  CHECK(beta_default(7, 7, 50) == doctest::Approx(1.0));
  CHECK(beta_default(3, 40, 12) == doctest::Approx(std::sqrt(28.0)));
}

TEST_CASE("measured_error_bound evaluates the closed form") {
  const SpectralSummary sum =
      plain_summary(1.0, 0.5, 0.1, 1.0, 1.0, 0.0, 1.0, 1.0);
  const BoundValue b = measured_error_bound(sum);
  CHECK(b.defined);
  CHECK(b.value == doctest::Approx(0.31).epsilon(1e-12));
}

TEST_CASE("measured_error_bound is zero for an exactly rank-s source") {
  const SpectralSummary sum =
      plain_summary(4.0, 2.0, 0.0, 1.5, 1.4, 0.0, 1.0, 1.0);
  const BoundValue b = measured_error_bound(sum);
  CHECK(b.defined);
  CHECK(b.value == 0.0);
}

TEST_CASE("measured_error_bound is undefined on singular blocks") {
  for (const auto [sample, lead] :
       {std::pair{0.0, 1.0}, std::pair{1.0, 0.0}, std::pair{kNan, 1.0}}) {
    const BoundValue b = measured_error_bound(
        plain_summary(1.0, 0.5, 0.1, sample, lead, 0.0, 1.0, 1.0));
    CHECK_FALSE(b.defined);
  }
}

TEST_CASE("a_priori_error_bound evaluates the closed form") {
  // sigma_1 = 2, sigma_s = 1, sigma_{s+1} = 0.1, e = 0.05, beta^2 gamma = 2:
  // denominator 17/20, eigengap 4/17, value 4266/1105.
  SpectralSummary sum =
      plain_summary(2.0, 1.0, 0.1, 1.0, 1.0, 0.05, std::sqrt(2.0), 1.0);
  const AprioriBound b = a_priori_error_bound(sum);
  CHECK(b.applicable);
  CHECK(b.eigengap_factor == doctest::Approx(4.0 / 17.0).epsilon(1e-12));
  CHECK(b.value == doctest::Approx(4266.0 / 1105.0).epsilon(1e-12));
}

TEST_CASE("a_priori_error_bound vanishes for an exactly rank-s source") {
  const AprioriBound b = a_priori_error_bound(
      plain_summary(4.0, 2.0, 0.0, 1.0, 1.0, 0.0, 3.0, 1.5));
  CHECK(b.applicable);
  CHECK(b.eigengap_factor == 0.0);
  CHECK(b.value == 0.0);
}

TEST_CASE("a_priori_error_bound reports undefined regions") {
  SUBCASE("residual eats the s-th value") {
    const AprioriBound b = a_priori_error_bound(
        plain_summary(2.0, 1.0, 0.1, 1.0, 1.0, 0.4, std::sqrt(2.0), 1.0));
    CHECK_FALSE(b.applicable);
    CHECK(std::isnan(b.value));
    CHECK(std::isnan(b.eigengap_factor));
  }
  SUBCASE("tail too close to the s-th value") {
    const AprioriBound b = a_priori_error_bound(
        plain_summary(2.0, 1.0, 0.6, 1.0, 1.0, 0.0, std::sqrt(2.0), 1.0));
    CHECK_FALSE(b.applicable);
    CHECK(std::isnan(b.value));
    CHECK(b.eigengap_factor == doctest::Approx(1.2));
  }
  SUBCASE("NaN factors") {
    const AprioriBound b = a_priori_error_bound(
        plain_summary(2.0, 1.0, 0.1, 1.0, 1.0, 0.05, kNan, 1.0));
    CHECK_FALSE(b.applicable);
  }
}

TEST_CASE("a_priori_error_bound grows with the tail and the residual") {
  double prev = 0.0;
  for (const double tail : {0.01, 0.02, 0.05, 0.1}) {
    const AprioriBound b = a_priori_error_bound(
        plain_summary(2.0, 1.0, tail, 1.0, 1.0, 0.01, 1.5, 1.0));
    REQUIRE(b.applicable);
    CHECK(b.value > prev);
    prev = b.value;
  }
  prev = 0.0;
  for (const double e : {0.0, 0.01, 0.05, 0.1}) {
    const AprioriBound b = a_priori_error_bound(
        plain_summary(2.0, 1.0, 0.05, 1.0, 1.0, e, 1.5, 1.0));
    REQUIRE(b.applicable);
    CHECK(b.value > prev);
    prev = b.value;
  }
}

TEST_CASE("spectral_gap_condition separates gapped from flat spectra") {
  CHECK(spectral_gap_condition(
      plain_summary(2.0, 1.0, 1e-4, 1.0, 1.0, 1e-4, 2.0, 1.0)));
  CHECK_FALSE(spectral_gap_condition(
      plain_summary(2.0, 1.0, 0.3, 1.0, 1.0, 1e-4, 2.0, 1.0)));
  CHECK_FALSE(spectral_gap_condition(
      plain_summary(2.0, 1.0, 0.0, 1.0, 1.0, 1.0, 2.0, 1.0)));
  CHECK_FALSE(spectral_gap_condition(
      plain_summary(2.0, 1.0, 1e-4, 1.0, 1.0, kNan, 2.0, 1.0)));
}

TEST_CASE("nonsingularity_assumptions checks each precondition") {
  SampleSelection sel;
  sel.sigma_s_g = 2.0;
  sel.sigma_s_s = 0.5;
  sel.sigma_s_gs = 1.0;
  sel.sigma_s_ga = 1.0;
  sel.sigma_s_sa = 0.25;
  SpectralSummary sum =
      plain_summary(4.0, 3.0, 0.1, 1.0, 1.0, 0.2, 2.5, 1.0);

  CHECK(nonsingularity_assumptions(sum, sel).all());

  SUBCASE("rank") {
    sel.sigma_s_gs = 0.0;
    const AssumptionReport rep = nonsingularity_assumptions(sum, sel);
    CHECK_FALSE(rep.rank_ok);
  }
  SUBCASE("conditioning") {
    sum.gamma = 0.9;
    const AssumptionReport rep = nonsingularity_assumptions(sum, sel);
    CHECK_FALSE(rep.conditioning_ok);
    CHECK(rep.rank_ok);
  }
  SUBCASE("conditioning identity") {
    sum.gamma = 1.5;
    CHECK_FALSE(nonsingularity_assumptions(sum, sel).conditioning_ok);
  }
  SUBCASE("pivot quality") {
    sel.sigma_s_ga = 0.5;
    const AssumptionReport rep = nonsingularity_assumptions(sum, sel);
    CHECK_FALSE(rep.pivot_quality_ok);
    CHECK(rep.conditioning_ok);
  }
  SUBCASE("residual") {
    sum.residual_norm = 1.0;
    const AssumptionReport rep = nonsingularity_assumptions(sum, sel);
    CHECK_FALSE(rep.residual_ok);
    CHECK(rep.pivot_quality_ok);
  }
  SUBCASE("NaN diagnostics fail everything") {
    SampleSelection blank;
    blank.sigma_s_g = blank.sigma_s_s = blank.sigma_s_gs = kNan;
    blank.sigma_s_ga = blank.sigma_s_sa = kNan;
    sum.gamma = kNan;
    sum.residual_norm = kNan;
    const AssumptionReport rep = nonsingularity_assumptions(sum, blank);
    CHECK_FALSE(rep.rank_ok);
    CHECK_FALSE(rep.conditioning_ok);
    CHECK_FALSE(rep.pivot_quality_ok);
    CHECK_FALSE(rep.residual_ok);
    CHECK_FALSE(rep.all());
  }
}

TEST_CASE("observed_error measures the unapproximated corner exactly") {
  Matrix m(2, 2);
  m << 2.0, 1.0, 1.0, 1.0;
  const BlockPartition p =
      partition(m, IndexSet({0}, 2), IndexSet({0}, 2));
  const NystromFactorization f = factorize(p);
  CHECK(observed_error(m, f, ErrorNorm::L2) == doctest::Approx(0.5));
  CHECK(observed_error(m, f, ErrorNorm::Frobenius) == doctest::Approx(0.5));
}

TEST_CASE("observed_error vanishes on a rank-s source with a good sample") {
  Rng rng(31);
  Vector values(3);
  values << 5.0, 2.0, 1.0;
  const Matrix m = matrix_with_values(values, 25, 18, rng);
  SamplerConfig cfg;
  cfg.front_end = ThinFrontEnd::ExactSvd;
  const SampleSelection sel = select_sample(m, 3, cfg);
  REQUIRE(sel.ok);
  const NystromFactorization f =
      factorize(partition(m, sel.rows, sel.cols));
  CHECK(observed_error(m, f, ErrorNorm::L2) <= 1e-10);
  CHECK(observed_error(m, f, ErrorNorm::Frobenius) <= 1e-10);
}

TEST_CASE("observed_error in Frobenius norm dominates the spectral norm") {
  Rng rng(57);
  const Matrix m = random_matrix(14, 11, rng);
  const SampleSelection sel = random_sample(14, 11, 4, 5);
  const NystromFactorization f =
      factorize(partition(m, sel.rows, sel.cols));
  const double l2 = observed_error(m, f, ErrorNorm::L2);
  const double fro = observed_error(m, f, ErrorNorm::Frobenius);
  CHECK(fro >= l2 - 1e-12);
}

TEST_CASE("make_summary reads the spectrum off a diagonal example") {
  Matrix m = Matrix::Zero(5, 5);
  for (Index i = 0; i < 5; ++i) m(i, i) = 5.0 - double(i);
  SampleSelection sel = random_sample(5, 5, 2, 17);
  sel.rows = IndexSet({0, 1}, 5);
  sel.cols = IndexSet({0, 1}, 5);
  const SpectralSummary sum = make_summary(m, sel, true);
  CHECK(sum.s == 2);
  CHECK(sum.rows == 5);
  CHECK(sum.cols == 5);
  CHECK(sum.sigma_1 == doctest::Approx(5.0));
  CHECK(sum.sigma_s == doctest::Approx(4.0));
  CHECK(sum.sigma_s1 == doctest::Approx(3.0));
  CHECK(sum.sigma_s_sample == doctest::Approx(4.0));
  CHECK(sum.sigma_s_lead == doctest::Approx(4.0).epsilon(1e-9));
  CHECK(sum.beta == doctest::Approx(std::sqrt(7.0)));
  CHECK(std::isnan(sum.gamma));
}

TEST_CASE("make_summary without worst_case_beta keeps NaN for blind draws") {
  Matrix m = Matrix::Identity(4, 4);
  SampleSelection sel = random_sample(4, 4, 2, 3);
  const SpectralSummary sum = make_summary(m, sel);
  CHECK(std::isnan(sum.beta));
  CHECK_FALSE(nonsingularity_assumptions(sum, sel).all());
}

TEST_CASE("make_summary validates the selection against the matrix") {
  const Matrix m = Matrix::Identity(6, 6);
  SampleSelection sel = random_sample(5, 5, 2, 1);
  CHECK_THROWS_AS(make_summary(m, sel), NystromError);
}

TEST_CASE("make_summary measures beta from the front-end diagnostics") {
  Rng rng(101);
  const Matrix m = matrix_with_values(gapped_values(4, 12, 1e-5), 40, 30, rng);
  SamplerConfig cfg;
  cfg.front_end = ThinFrontEnd::ExactSvd;
  const SampleSelection sel = select_sample(m, 4, cfg);
  REQUIRE(sel.ok);
  const SpectralSummary sum = make_summary(m, sel);
  CHECK(sum.beta >= 1.0);
  CHECK(sum.beta <= beta_default(4, 40, 30));
  CHECK(sum.beta == doctest::Approx(std::max(
                        {sel.sigma_s_g / sel.sigma_s_ga,
                         sel.sigma_s_s / sel.sigma_s_sa, 1.0})));
  CHECK(sum.gamma == doctest::Approx(1.0));
  CHECK(sum.residual_norm == doctest::Approx(sel.residual_norm));
}

TEST_CASE("selected block of the rank-s part stays within a tail of the block") {
  // Weyl: the selected block of M and of its rank-s part differ by at most
  // sigma_{s+1} in every singular value.
  Rng rng(303);
  for (int rep = 0; rep < 20; ++rep) {
    const Matrix m = random_matrix(16, 12, rng);
    SampleSelection sel =
        random_sample(16, 12, 3, derive_seed(44, std::uint64_t(rep)));
    finalize_selection(m, sel);
    const SpectralSummary sum = make_summary(m, sel, true);
    CHECK(sum.sigma_s_lead >= sum.sigma_s_sample - sum.sigma_s1 - 1e-10);
    CHECK(sum.sigma_s_lead <= sum.sigma_s_sample + sum.sigma_s1 + 1e-10);
  }
}

TEST_CASE("measured bound dominates the observed error on gapped spectra") {
  int checked = 0;
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng(derive_seed(909, std::uint64_t(rep)));
    const Matrix m =
        matrix_with_values(gapped_values(5, 20, 1e-6), 60, 45, rng);
    SamplerConfig cfg;
    cfg.front_end = ThinFrontEnd::ExactSvd;
    const SampleSelection sel = select_sample(m, 5, cfg);
    REQUIRE(sel.ok);
    const SpectralSummary sum = make_summary(m, sel);
    REQUIRE(nonsingularity_assumptions(sum, sel).all());
    REQUIRE(spectral_gap_condition(sum));

    const BoundValue bound = measured_error_bound(sum);
    REQUIRE(bound.defined);
    const double err = observed_error(
        m, factorize(partition(m, sel.rows, sel.cols)), ErrorNorm::L2);
    CHECK(err <= bound.value * (1.0 + 1e-9));
    ++checked;
  }
  CHECK(checked == 20);
}

TEST_CASE("a-priori bound dominates the measured bound where applicable") {
  for (int rep = 0; rep < 20; ++rep) {
    Rng rng(derive_seed(707, std::uint64_t(rep)));
    const Matrix m =
        matrix_with_values(gapped_values(5, 20, 1e-6), 60, 45, rng);
    SamplerConfig cfg;
    cfg.front_end = ThinFrontEnd::ExactSvd;
    const SampleSelection sel = select_sample(m, 5, cfg);
    REQUIRE(sel.ok);
    const SpectralSummary sum = make_summary(m, sel);
    const AprioriBound apriori = a_priori_error_bound(sum);
    const BoundValue measured = measured_error_bound(sum);
    REQUIRE(apriori.applicable);
    REQUIRE(measured.defined);
    CHECK(apriori.eigengap_factor >=
          sum.sigma_s1 / sum.sigma_s_sample - 1e-12);
    CHECK(apriori.value >= measured.value * (1.0 - 1e-9));
  }
}
