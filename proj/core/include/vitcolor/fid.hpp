#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>

#include "vitcolor/colorspace.hpp"
#include "vitcolor/extractor.hpp"
#include "vitcolor/tensor.hpp"

namespace vitcolor {

/// Sufficient statistics of one image population in embedding space: sample
/// count, feature-wise mean, and unbiased covariance (denominator n-1).
struct FidStats {
  std::int64_t n = 0;
  Tensor<double> mu;     // [d]
  Tensor<double> sigma;  // [d,d], symmetric
};

/// Streaming mean/covariance accumulator. Uses the shifted-comoment update so
/// a million vectors can be folded in one at a time without a second pass,
/// and two partial accumulations can be merged exactly.
class FidAccumulator {
 public:
  explicit FidAccumulator(std::int64_t dim);

  /// Folds embeddings shaped [d] or [N,d] into the running statistics.
  void add(const Tensor<float>& embeddings);
  void add_vector(const double* v);

  /// Absorbs another accumulator of the same dimension, as if its vectors had
  /// been added here.
  void merge(const FidAccumulator& other);

  std::int64_t count() const { return n_; }
  std::int64_t dim() const { return dim_; }

  /// Mean and unbiased covariance. Requires at least two vectors.
  FidStats finalize() const;

 private:
  std::int64_t dim_;
  std::int64_t n_ = 0;
  Eigen::VectorXd mean_;
  Eigen::MatrixXd m2_;  // sum of centered outer products
};

/// Unique PSD square root of a symmetric positive-semidefinite matrix via
/// eigendecomposition, with negative eigenvalues from roundoff clamped to
/// zero. Throws if the input's asymmetry exceeds asym_tol.
Tensor<double> sqrtm_psd(const Tensor<double>& m, double asym_tol = 1e-6);

/// Frechet distance between two Gaussians fitted to the populations:
/// |mu_a - mu_b|^2 + Tr(Sigma_a) + Tr(Sigma_b) - 2 Tr((Sigma_a^{1/2} Sigma_b
/// Sigma_a^{1/2})^{1/2}). The conjugated product keeps the inner matrix
/// symmetric PSD, which a plain Sigma_a Sigma_b product is not. Results in
/// [-1e-6, 0) are roundoff and clamp to zero; anything more negative is
/// returned as-is so a real defect stays visible.
double fid(const FidStats& a, const FidStats& b);

/// Resizes to the extractor's input resolution, scales to [0,1], and folds
/// the resulting embedding into the accumulator.
void accumulate_image(FidAccumulator& acc, const RgbImage& img, EmbeddingExtractor& extractor);

/// Directory-level report. backend records which extractor produced the
/// embeddings, since stub-backed scores live on their own scale and are only
/// comparable with each other.
struct FidReport {
  double value = 0.0;
  std::int64_t real_count = 0;
  std::int64_t gen_count = 0;
  std::int64_t real_skipped = 0;
  std::int64_t gen_skipped = 0;
  std::string backend;
};

/// FID between every decodable image under real_dir and under gen_dir,
/// embedding both populations with the same extractor. Undecodable files are
/// skipped and counted. Each side needs at least two images.
FidReport evaluate_fid_dirs(const std::string& real_dir, const std::string& gen_dir,
                            EmbeddingExtractor& extractor, const std::string& backend_label);

}  // namespace vitcolor
