#pragma once

#include <cstdint>
#include <string>

#include "nystromite/matrix_core.hpp"

namespace nystromite {

/// Point set with one sample per row.
struct Dataset {
  Matrix values;   // n x d
  Vector labels;   // n
  std::string name;

  Index size() const { return values.rows(); }
  Index dimension() const { return values.cols(); }
};

/// Reads a libsvm/svmlight file: one `label idx:val ...` line per sample,
/// indices 1-based and strictly increasing within a line, omitted entries
/// zero. `dim_override` > 0 fixes the dimension (an index beyond it is an
/// error); otherwise the largest index seen decides. Raises ParseError with
/// the offending line number, or IoError if the file cannot be opened.
Dataset parse_libsvm(const std::string& path, Index dim_override = 0);

/// Writes the dataset in the same format, nonzero entries only, values in
/// shortest round-trip decimal form.
void write_libsvm(const std::string& path, const Dataset& ds);

/// How the kernel width is picked from the data.
enum class KernelScale {
  MeanToCenter,  // eps = mean squared distance to the centroid
  MeanPairwise,  // eps = mean squared pairwise distance (twice the above)
};

/// Dense Gaussian kernel matrix K(i, j) = exp(-|x_i - x_j|^2 / eps) with a
/// unit diagonal. Raises DegenerateDataset when all points coincide
/// (eps = 0).
Matrix gaussian_kernel(const Dataset& ds,
                       KernelScale scale = KernelScale::MeanToCenter);

/// Spectrum shapes for synthetic test matrices.
enum class DecayKind { Linear, Exponential };

struct SyntheticSpec {
  Index n = 500;
  DecayKind decay = DecayKind::Exponential;
  double rate = 0.5;  // Exponential only, in (0, 1)
  std::uint64_t seed = 0;
};

/// The singular values synthetic_matrix plants: Linear gives
/// 1 - (i - 1)/n for i = 1..n, Exponential gives rate^(i-1).
Vector decay_values(DecayKind decay, Index n, double rate);

/// n x n matrix with Haar-random singular vector bases and the decay_values
/// spectrum. Deterministic in the seed.
Matrix synthetic_matrix(const SyntheticSpec& spec);

/// rows x cols matrix with the given singular values (non-increasing,
/// non-negative, at most min(rows, cols) of them) and Haar-random bases.
Matrix matrix_with_spectrum(const Vector& values, Index rows, Index cols,
                            std::uint64_t seed);

/// k well-separated unit-variance Gaussian clusters of n points total in d
/// dimensions; labels hold the cluster ids. Cluster sizes differ by at most
/// one. Raises DegenerateDataset if separated centers cannot be placed.
Dataset gaussian_blobs(Index n, Index d, Index k, std::uint64_t seed);

/// Resolves a dataset file name: an existing path is kept as is, otherwise
/// the NYSTROMITE_DATA_DIR directory is tried. Raises IoError when neither
/// exists.
std::string resolve_data_path(const std::string& name);

}  // namespace nystromite
