#include "vitcolor/extractor.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "vitcolor/container.hpp"
#include "vitcolor/conv_kernels.hpp"
#include "vitcolor/resize.hpp"
#include "vitcolor/rng.hpp"

namespace vitcolor {
namespace {

constexpr std::int64_t kChannels[5] = {3, 8, 16, 32, 64};
constexpr const char* kManifestFormat = "conv-pyramid-v1";

Tensor<float> he_init(Shape shape, std::int64_t fan_in, Rng& rng) {
  Tensor<float> t(std::move(shape));
  const double std = std::sqrt(2.0 / static_cast<double>(fan_in));
  for (std::int64_t i = 0; i < t.numel(); ++i)
    t.data()[i] = static_cast<float>(rng.normal(0.0, std));
  return t;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

StubExtractor::StubExtractor(std::uint64_t seed) {
  Rng rng(seed);
  for (int i = 0; i < 4; ++i) {
    const std::int64_t cin = kChannels[i], cout = kChannels[i + 1];
    conv_w_[i] = he_init({cout, cin, 3, 3}, cin * 9, rng);
    conv_b_[i] = Tensor<float>({cout}, 0.f);
  }
  fc_w_ = he_init({kEmbeddingDim, kChannels[4]}, kChannels[4], rng);
  fc_b_ = Tensor<float>({kEmbeddingDim}, 0.f);
}

Tensor<float> StubExtractor::run(const Tensor<float>& batch) {
  if (batch.ndim() != 4 || batch.extent(1) != 3 ||
      batch.extent(2) != kExtractorInputSize || batch.extent(3) != kExtractorInputSize)
    throw std::invalid_argument("extractor: want [N,3,299,299], got " + shape_str(batch.shape()));
  const float lo = batch.min_value(), hi = batch.max_value();
  if (lo < -1e-4f || hi > 1.f + 1e-4f)
    throw std::invalid_argument("extractor: input must lie in [0,1], saw [" +
                                std::to_string(lo) + "," + std::to_string(hi) + "]");

  Tensor<float> x = batch;
  for (int i = 0; i < 4; ++i) {
    x = detail::conv2d_fwd(x, conv_w_[i], 2, 1);
    const std::int64_t n = x.extent(0), c = x.extent(1), hw = x.extent(2) * x.extent(3);
    for (std::int64_t in = 0; in < n; ++in)
      for (std::int64_t ch = 0; ch < c; ++ch) {
        float* p = x.data() + (in * c + ch) * hw;
        const float b = conv_b_[i].data()[ch];
        for (std::int64_t q = 0; q < hw; ++q) {
          const float v = p[q] + b;
          p[q] = v > 0.f ? v : 0.f;
        }
      }
  }

  const std::int64_t n = x.extent(0), c = x.extent(1), hw = x.extent(2) * x.extent(3);
  Tensor<float> pooled({n, c});
  for (std::int64_t in = 0; in < n; ++in)
    for (std::int64_t ch = 0; ch < c; ++ch) {
      const float* p = x.data() + (in * c + ch) * hw;
      float acc = 0.f;
      for (std::int64_t q = 0; q < hw; ++q) acc += p[q];
      pooled.data()[in * c + ch] = acc / static_cast<float>(hw);
    }

  Tensor<float> out({n, kEmbeddingDim});
  detail::CMapM<float> pm(pooled.data(), n, c);
  detail::CMapM<float> wm(fc_w_.data(), kEmbeddingDim, c);
  detail::MapM<float> om(out.data(), n, kEmbeddingDim);
  om.noalias() = pm * wm.transpose();
  for (std::int64_t in = 0; in < n; ++in)
    for (std::int64_t j = 0; j < kEmbeddingDim; ++j) out.data()[in * kEmbeddingDim + j] += fc_b_.data()[j];
  return out;
}

void StubExtractor::save_pretrained(const std::string& weights_path,
                                    const std::string& manifest_path) const {
  std::vector<RawEntry> entries;
  for (int i = 0; i < 4; ++i) {
    entries.push_back(to_entry("conv" + std::to_string(i) + ".w", conv_w_[i]));
    entries.push_back(to_entry("conv" + std::to_string(i) + ".b", conv_b_[i]));
  }
  entries.push_back(to_entry("fc.w", fc_w_));
  entries.push_back(to_entry("fc.b", fc_b_));
  write_entries(weights_path, entries);

  nlohmann::json manifest;
  manifest["format"] = kManifestFormat;
  manifest["fnv1a64"] = hex64(fnv1a64_file(weights_path));
  manifest["embedding_dim"] = kEmbeddingDim;
  std::ofstream out(manifest_path);
  if (!out) throw std::runtime_error("extractor: cannot write manifest " + manifest_path);
  out << manifest.dump(2) << "\n";
}

std::unique_ptr<EmbeddingExtractor> load_pretrained_extractor(const std::string& weights_path,
                                                              const std::string& manifest_path) {
  std::ifstream in(manifest_path);
  if (!in) throw std::runtime_error("extractor: cannot open manifest " + manifest_path);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("extractor: bad manifest " + manifest_path + ": " + e.what());
  }
  if (manifest.value("format", "") != kManifestFormat)
    throw std::runtime_error("extractor: unsupported manifest format in " + manifest_path);
  if (manifest.value("embedding_dim", -1) != kEmbeddingDim)
    throw std::runtime_error("extractor: embedding_dim mismatch in " + manifest_path);
  const std::string expected = manifest.value("fnv1a64", "");
  const std::string actual = hex64(fnv1a64_file(weights_path));
  if (expected != actual)
    throw std::runtime_error("extractor: weight hash mismatch: manifest says " + expected +
                             ", file is " + actual);

  auto entries = read_entries(weights_path);
  auto find = [&entries](const std::string& name) -> const RawEntry& {
    for (const auto& e : entries)
      if (e.name == name) return e;
    throw std::runtime_error("extractor: missing weight entry " + name);
  };
  auto ex = std::unique_ptr<StubExtractor>(new StubExtractor(StubExtractor::Uninit{}));
  for (int i = 0; i < 4; ++i) {
    ex->conv_w_[i] = from_entry<float>(find("conv" + std::to_string(i) + ".w"));
    ex->conv_b_[i] = from_entry<float>(find("conv" + std::to_string(i) + ".b"));
    const std::int64_t cin = kChannels[i], cout = kChannels[i + 1];
    if (ex->conv_w_[i].shape() != Shape{cout, cin, 3, 3})
      throw std::runtime_error("extractor: unexpected conv weight shape in " + weights_path);
  }
  ex->fc_w_ = from_entry<float>(find("fc.w"));
  ex->fc_b_ = from_entry<float>(find("fc.b"));
  if (ex->fc_w_.shape() != Shape{kEmbeddingDim, kChannels[4]})
    throw std::runtime_error("extractor: unexpected fc weight shape in " + weights_path);
  return ex;
}

Tensor<float> prepare_extractor_input(const Tensor<float>& l_norm) {
  if (l_norm.ndim() != 3 || l_norm.extent(0) != 1)
    throw std::invalid_argument("prepare_extractor_input: want [1,H,W], got " +
                                shape_str(l_norm.shape()));
  Tensor<float> unit({1, l_norm.extent(1), l_norm.extent(2)});
  const std::int64_t n = l_norm.numel();
  for (std::int64_t i = 0; i < n; ++i) {
    float v = (l_norm.data()[i] + 1.f) * 0.5f;
    unit.data()[i] = v < 0.f ? 0.f : (v > 1.f ? 1.f : v);
  }
  Tensor<float> resized = resize_bilinear_chw(unit, kExtractorInputSize, kExtractorInputSize);
  Tensor<float> out({3, kExtractorInputSize, kExtractorInputSize});
  const std::int64_t hw = kExtractorInputSize * kExtractorInputSize;
  for (int c = 0; c < 3; ++c) std::copy_n(resized.data(), hw, out.data() + c * hw);
  return out;
}

}  // namespace vitcolor
