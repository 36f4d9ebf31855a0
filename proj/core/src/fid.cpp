#include "vitcolor/fid.hpp"

#include <cmath>
#include <stdexcept>

#include "vitcolor/dataset.hpp"
#include "vitcolor/image_io.hpp"
#include "vitcolor/resize.hpp"

namespace vitcolor {

namespace {

using MapM = Eigen::Map<Eigen::MatrixXd>;
using CMapM = Eigen::Map<const Eigen::MatrixXd>;

}  // namespace

FidAccumulator::FidAccumulator(std::int64_t dim) : dim_(dim) {
  if (dim <= 0) throw std::invalid_argument("FidAccumulator: dim must be > 0");
  mean_ = Eigen::VectorXd::Zero(dim);
  m2_ = Eigen::MatrixXd::Zero(dim, dim);
}

void FidAccumulator::add_vector(const double* v) {
  Eigen::Map<const Eigen::VectorXd> x(v, dim_);
  ++n_;
  const Eigen::VectorXd delta = x - mean_;
  mean_ += delta / static_cast<double>(n_);
  // Outer product of pre-update and post-update deviations (Welford's update
  // generalized to comoments). Floating point makes each term slightly
  // asymmetric, so finalize symmetrizes.
  m2_.noalias() += delta * (x - mean_).transpose();
}

void FidAccumulator::add(const Tensor<float>& embeddings) {
  Shape shape = embeddings.shape();
  std::int64_t rows = 0, cols = 0;
  if (shape.size() == 1) {
    rows = 1;
    cols = shape[0];
  } else if (shape.size() == 2) {
    rows = shape[0];
    cols = shape[1];
  } else {
    throw std::invalid_argument("FidAccumulator::add: expected [d] or [N,d], got " +
                                shape_str(embeddings.shape()));
  }
  if (cols != dim_)
    throw std::invalid_argument("FidAccumulator::add: dimension mismatch: " +
                                shape_str(embeddings.shape()));
  std::vector<double> row(static_cast<std::size_t>(dim_));
  for (std::int64_t r = 0; r < rows; ++r) {
    const float* src = embeddings.data() + r * cols;
    for (std::int64_t c = 0; c < cols; ++c) row[static_cast<std::size_t>(c)] = src[c];
    add_vector(row.data());
  }
}

void FidAccumulator::merge(const FidAccumulator& other) {
  if (other.dim_ != dim_) throw std::invalid_argument("FidAccumulator::merge: dimension mismatch");
  if (other.n_ == 0) return;
  if (n_ == 0) {
    n_ = other.n_;
    mean_ = other.mean_;
    m2_ = other.m2_;
    return;
  }
  const double na = static_cast<double>(n_), nb = static_cast<double>(other.n_);
  const Eigen::VectorXd delta = other.mean_ - mean_;
  mean_ = (na * mean_ + nb * other.mean_) / (na + nb);
  m2_ += other.m2_ + (na * nb / (na + nb)) * (delta * delta.transpose());
  n_ += other.n_;
}

FidStats FidAccumulator::finalize() const {
  if (n_ < 2) throw std::runtime_error("FidAccumulator::finalize: need at least 2 samples");
  FidStats stats;
  stats.n = n_;
  stats.mu = Tensor<double>({dim_});
  Eigen::Map<Eigen::VectorXd>(stats.mu.data(), dim_) = mean_;
  stats.sigma = Tensor<double>({dim_, dim_});
  const Eigen::MatrixXd sym = (m2_ + m2_.transpose()) / (2.0 * static_cast<double>(n_ - 1));
  // Eigen is column-major and sym is symmetric, so a flat copy lands row-major correctly.
  MapM(stats.sigma.data(), dim_, dim_) = sym;
  return stats;
}

Tensor<double> sqrtm_psd(const Tensor<double>& m, double asym_tol) {
  if (m.ndim() != 2 || m.extent(0) != m.extent(1))
    throw std::invalid_argument("sqrtm_psd: matrix must be square, got " + shape_str(m.shape()));
  const std::int64_t d = m.extent(0);
  CMapM a(m.data(), d, d);
  const double asym = (a - a.transpose()).cwiseAbs().maxCoeff();
  if (asym > asym_tol)
    throw std::invalid_argument("sqrtm_psd: asymmetry " + std::to_string(asym) +
                                " exceeds tolerance");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver((a + a.transpose()) / 2.0);
  if (solver.info() != Eigen::Success) throw std::runtime_error("sqrtm_psd: eigensolver failed");
  // Eigenvalues within relative roundoff of zero are noise; square-rooting
  // them would inject sqrt(eps)-sized garbage into every trace over a
  // rank-deficient matrix, so they clamp to exactly zero.
  const double floor = std::max(solver.eigenvalues().maxCoeff(), 0.0) * 1e-12;
  Eigen::VectorXd evals =
      (solver.eigenvalues().array() < floor).select(0.0, solver.eigenvalues()).cwiseSqrt();
  Tensor<double> out({d, d});
  MapM(out.data(), d, d) =
      solver.eigenvectors() * evals.asDiagonal() * solver.eigenvectors().transpose();
  return out;
}

double fid(const FidStats& a, const FidStats& b) {
  if (a.mu.shape() != b.mu.shape() || a.sigma.shape() != b.sigma.shape())
    throw std::invalid_argument("fid: dimension mismatch");
  const std::int64_t d = a.mu.extent(0);
  CMapM sa(a.sigma.data(), d, d);
  CMapM sb(b.sigma.data(), d, d);
  Eigen::Map<const Eigen::VectorXd> ma(a.mu.data(), d);
  Eigen::Map<const Eigen::VectorXd> mb(b.mu.data(), d);

  const Tensor<double> a_half = sqrtm_psd(a.sigma);
  CMapM ah(a_half.data(), d, d);
  Tensor<double> inner({d, d});
  const Eigen::MatrixXd prod = ah * sb * ah;
  MapM(inner.data(), d, d) = (prod + prod.transpose()) / 2.0;
  const Tensor<double> root = sqrtm_psd(inner);
  CMapM r(root.data(), d, d);

  double value = (ma - mb).squaredNorm() + sa.trace() + sb.trace() - 2.0 * r.trace();
  if (value < 0.0 && value >= -1e-6) value = 0.0;
  return value;
}

void accumulate_image(FidAccumulator& acc, const RgbImage& img, EmbeddingExtractor& extractor) {
  const RgbImage resized = resize_bilinear(img, kExtractorInputSize, kExtractorInputSize);
  Tensor<float> input({1, 3, kExtractorInputSize, kExtractorInputSize});
  const std::int64_t plane = kExtractorInputSize * kExtractorInputSize;
  for (std::int64_t i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      input.data()[c * plane + i] = static_cast<float>(resized.data[i * 3 + c]) / 255.f;
  acc.add(extractor.embed(input));
}

FidReport evaluate_fid_dirs(const std::string& real_dir, const std::string& gen_dir,
                            EmbeddingExtractor& extractor, const std::string& backend_label) {
  FidReport report;
  report.backend = backend_label;
  auto consume = [&extractor](const std::string& dir, std::int64_t& count, std::int64_t& skipped) {
    FidAccumulator acc(kEmbeddingDim);
    // Scan only for the file list; decoding happens here at native resolution.
    DatasetManifest manifest = scan_dataset(dir, kExtractorInputSize);
    for (const auto& entry : manifest.entries) {
      RgbImage img;
      try {
        img = read_image(entry.path);
      } catch (const DecodeError&) {
        ++skipped;
        continue;
      }
      accumulate_image(acc, img, extractor);
      ++count;
    }
    if (acc.count() < 2)
      throw std::runtime_error("evaluate_fid_dirs: need at least 2 decodable images in " + dir);
    return acc;
  };
  FidAccumulator real_acc = consume(real_dir, report.real_count, report.real_skipped);
  FidAccumulator gen_acc = consume(gen_dir, report.gen_count, report.gen_skipped);
  report.value = fid(real_acc.finalize(), gen_acc.finalize());
  return report;
}

}  // namespace vitcolor
