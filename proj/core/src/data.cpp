#include "nystromite/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "nystromite/rng.hpp"

namespace nystromite {

namespace {

[[noreturn]] void parse_fail(const std::string& path, long line,
                             const std::string& msg) {
  fail(ErrorCode::ParseError, path + ":" + std::to_string(line) + ": " + msg);
}

double parse_double(const std::string& tok, const std::string& path,
                    long line, const char* what) {
  double value = 0.0;
  const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
    parse_fail(path, line, std::string("malformed ") + what + " '" + tok + "'");
  return value;
}

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

Matrix haar_basis(Index rows, Index cols, Rng& rng) {
  Matrix g(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) g(i, j) = rng.normal();
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(rows, cols);
  const Vector diag = qr.matrixQR().topRows(cols).diagonal();
  for (Index j = 0; j < cols; ++j)
    if (diag(j) < 0.0) q.col(j) = -q.col(j);
  return q;
}

}  // namespace

Dataset parse_libsvm(const std::string& path, Index dim_override) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::IoError, "cannot open '" + path + "' for reading");

  std::vector<double> labels;
  std::vector<std::vector<std::pair<Index, double>>> rows;
  Index max_index = 0;

  std::string line;
  long line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;

    std::istringstream tokens(line);
    std::string tok;
    tokens >> tok;
    labels.push_back(parse_double(tok, path, line_no, "label"));

    std::vector<std::pair<Index, double>> entries;
    Index prev_index = 0;
    while (tokens >> tok) {
      const std::size_t colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size())
        parse_fail(path, line_no, "expected index:value, got '" + tok + "'");
      long index = 0;
      const auto res =
          std::from_chars(tok.data(), tok.data() + colon, index);
      if (res.ec != std::errc{} || res.ptr != tok.data() + colon)
        parse_fail(path, line_no, "malformed index in '" + tok + "'");
      if (index < 1)
        parse_fail(path, line_no, "indices are 1-based; got " +
                                      std::to_string(index));
      if (index <= prev_index)
        parse_fail(path, line_no,
                   "indices must be strictly increasing; got " +
                       std::to_string(index) + " after " +
                       std::to_string(prev_index));
      if (dim_override > 0 && index > dim_override)
        parse_fail(path, line_no,
                   "index " + std::to_string(index) +
                       " exceeds the declared dimension " +
                       std::to_string(dim_override));
      const double value =
          parse_double(tok.substr(colon + 1), path, line_no, "value");
      entries.emplace_back(index, value);
      prev_index = index;
      max_index = std::max(max_index, static_cast<Index>(index));
    }
    rows.push_back(std::move(entries));
  }
  if (rows.empty())
    fail(ErrorCode::ParseError, path + ": contains no samples");

  Dataset ds;
  const Index n = static_cast<Index>(rows.size());
  const Index d = dim_override > 0 ? dim_override : max_index;
  ds.values = Matrix::Zero(n, d);
  ds.labels = Vector(n);
  for (Index i = 0; i < n; ++i) {
    ds.labels(i) = labels[static_cast<std::size_t>(i)];
    for (const auto& [index, value] : rows[static_cast<std::size_t>(i)])
      ds.values(i, index - 1) = value;
  }
  ds.name = std::filesystem::path(path).filename().string();
  return ds;
}

void write_libsvm(const std::string& path, const Dataset& ds) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::IoError, "cannot open '" + path + "' for writing");
  for (Index i = 0; i < ds.values.rows(); ++i) {
    out << format_double(ds.labels.size() > i ? ds.labels(i) : 0.0);
    for (Index j = 0; j < ds.values.cols(); ++j) {
      const double value = ds.values(i, j);
      if (value != 0.0)
        out << ' ' << (j + 1) << ':' << format_double(value);
    }
    out << '\n';
  }
  if (!out) fail(ErrorCode::IoError, "write to '" + path + "' failed");
}

Matrix gaussian_kernel(const Dataset& ds, KernelScale scale) {
  const Index n = ds.size();
  if (n < 1)
    fail(ErrorCode::InvalidArgument, "gaussian_kernel: empty dataset");

  const Eigen::RowVectorXd center = ds.values.colwise().mean();
  double eps = (ds.values.rowwise() - center).squaredNorm() /
               static_cast<double>(n);
  if (scale == KernelScale::MeanPairwise) eps *= 2.0;
  if (!(eps > 0.0))
    fail(ErrorCode::DegenerateDataset,
         "gaussian_kernel: all points coincide, kernel width is zero");

  Matrix k = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) {
      const double d2 = (ds.values.row(i) - ds.values.row(j)).squaredNorm();
      const double value = std::exp(-d2 / eps);
      k(i, j) = value;
      k(j, i) = value;
    }
  return k;
}

Vector decay_values(DecayKind decay, Index n, double rate) {
  if (n < 2)
    fail(ErrorCode::InvalidArgument, "decay_values: need n >= 2");
  if (decay == DecayKind::Exponential && !(rate > 0.0 && rate < 1.0))
    fail(ErrorCode::InvalidArgument,
         "decay_values: exponential rate must lie in (0, 1)");
  Vector v(n);
  for (Index i = 0; i < n; ++i)
    v(i) = decay == DecayKind::Linear
               ? 1.0 - static_cast<double>(i) / static_cast<double>(n)
               : std::pow(rate, static_cast<double>(i));
  return v;
}

Matrix synthetic_matrix(const SyntheticSpec& spec) {
  const Vector values = decay_values(spec.decay, spec.n, spec.rate);
  return matrix_with_spectrum(values, spec.n, spec.n, spec.seed);
}

Matrix matrix_with_spectrum(const Vector& values, Index rows, Index cols,
                            std::uint64_t seed) {
  const Index r = values.size();
  if (r < 1 || r > std::min(rows, cols))
    fail(ErrorCode::InvalidArgument,
         "matrix_with_spectrum: need 1 <= values <= min(rows, cols)");
  for (Index i = 0; i < r; ++i) {
    if (values(i) < 0.0)
      fail(ErrorCode::InvalidArgument,
           "matrix_with_spectrum: singular values must be non-negative");
    if (i > 0 && values(i) > values(i - 1))
      fail(ErrorCode::InvalidArgument,
           "matrix_with_spectrum: singular values must be non-increasing");
  }
  Rng rng(seed);
  const Matrix u = haar_basis(rows, r, rng);
  const Matrix v = haar_basis(cols, r, rng);
  return u * values.asDiagonal() * v.transpose();
}

Dataset gaussian_blobs(Index n, Index d, Index k, std::uint64_t seed) {
  if (k < 1 || d < 1 || n < k)
    fail(ErrorCode::InvalidArgument,
         "gaussian_blobs: need n >= k >= 1 and d >= 1");

  Rng rng(seed);
  const double separation = 6.0 * std::sqrt(static_cast<double>(d));
  std::vector<Vector> centers;
  int attempts = 0;
  while (static_cast<Index>(centers.size()) < k) {
    if (++attempts > 20000)
      fail(ErrorCode::DegenerateDataset,
           "gaussian_blobs: could not place separated cluster centers");
    Vector c(d);
    for (Index j = 0; j < d; ++j) c(j) = 20.0 * rng.uniform() - 10.0;
    bool far = true;
    for (const Vector& other : centers)
      if ((c - other).norm() < separation) {
        far = false;
        break;
      }
    if (far) centers.push_back(std::move(c));
  }

  Dataset ds;
  ds.values = Matrix(n, d);
  ds.labels = Vector(n);
  ds.name = "blobs";
  Index row = 0;
  for (Index c = 0; c < k; ++c) {
    Index count = n / k + (c < n % k ? 1 : 0);
    for (Index p = 0; p < count; ++p, ++row) {
      for (Index j = 0; j < d; ++j)
        ds.values(row, j) = centers[static_cast<std::size_t>(c)](j) +
                            rng.normal();
      ds.labels(row) = static_cast<double>(c);
    }
  }
  return ds;
}

std::string resolve_data_path(const std::string& name) {
  namespace fs = std::filesystem;
  if (fs::exists(name)) return name;
  if (const char* dir = std::getenv("NYSTROMITE_DATA_DIR")) {
    const fs::path candidate = fs::path(dir) / name;
    if (fs::exists(candidate)) return candidate.string();
  }
  fail(ErrorCode::IoError,
       "dataset '" + name +
           "' not found (also tried $NYSTROMITE_DATA_DIR)");
}

}  // namespace nystromite
