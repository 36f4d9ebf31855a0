#include "vitcolor/dataset.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "vitcolor/colorspace.hpp"
#include "vitcolor/image_io.hpp"
#include "vitcolor/rng.hpp"

using namespace vitcolor;
namespace fs = std::filesystem;

namespace {

RgbImage random_image(std::int64_t h, std::int64_t w, Rng& rng) {
  RgbImage img(h, w);
  for (auto& v : img.data) v = static_cast<std::uint8_t>(rng.uniform_int(256));
  return img;
}

RgbImage gray_image(std::int64_t h, std::int64_t w) {
  RgbImage img(h, w);
  for (std::int64_t i = 0; i < h * w; ++i) {
    const auto level = static_cast<std::uint8_t>((i * 7) % 256);
    img.data[i * 3] = img.data[i * 3 + 1] = img.data[i * 3 + 2] = level;
  }
  return img;
}

/// Fresh directory tree with n random PNGs split across root and a subdir.
struct TempDataset {
  fs::path root;

  explicit TempDataset(const std::string& tag, int n = 0, std::int64_t hw = 16) {
    root = fs::temp_directory_path() / ("vitcolor_test_" + tag);
    fs::remove_all(root);
    fs::create_directories(root / "sub");
    Rng rng(99);
    for (int i = 0; i < n; ++i) {
      const fs::path dir = (i % 3 == 0) ? root / "sub" : root;
      char name[32];
      std::snprintf(name, sizeof name, "img_%03d.png", i);
      write_png((dir / name).string(), random_image(hw, hw, rng));
    }
  }
  ~TempDataset() { fs::remove_all(root); }
};

}  // namespace

TEST_CASE("scan finds nested files in stable lexicographic order") {
  TempDataset ds("scan", 7);
  std::ofstream(ds.root / "notes.txt") << "not an image";
  auto m1 = scan_dataset(ds.root.string(), 16);
  auto m2 = scan_dataset(ds.root.string(), 16);
  CHECK(m1.entries.size() == 7);
  CHECK(m1.decodable_count() == 7);
  REQUIRE(m1.entries.size() == m2.entries.size());
  for (std::size_t i = 0; i < m1.entries.size(); ++i) CHECK(m1.entries[i].path == m2.entries[i].path);
  CHECK(std::is_sorted(m1.entries.begin(), m1.entries.end(),
                       [](const auto& a, const auto& b) { return a.path < b.path; }));
  CHECK_THROWS_AS(scan_dataset((ds.root / "missing").string(), 16), std::runtime_error);
  TempDataset empty("scan_empty", 0);
  CHECK(scan_dataset(empty.root.string(), 16).entries.empty());
}

TEST_CASE("jpeg files are discovered too") {
  TempDataset ds("scan_jpg", 0);
  Rng rng(3);
  write_jpeg((ds.root / "a.jpg").string(), random_image(16, 16, rng));
  write_jpeg((ds.root / "b.JPEG").string(), random_image(16, 16, rng));
  auto m = scan_dataset(ds.root.string(), 16);
  CHECK(m.entries.size() == 2);
}

TEST_CASE("loaded examples are normalized and shaped for training") {
  TempDataset ds("load", 1, 32);
  auto m = scan_dataset(ds.root.string(), 16);
  REQUIRE(m.entries.size() == 1);
  auto ex = load_example(m.entries[0].path, 16);  // 32x32 source, downsampled
  REQUIRE(ex.has_value());
  CHECK(ex->l.shape() == Shape{1, 16, 16});
  CHECK(ex->ab.shape() == Shape{2, 16, 16});
  CHECK(ex->l.min_value() >= -1.f);
  CHECK(ex->l.max_value() <= 1.f);
  CHECK(ex->ab.min_value() >= -1.f);
  CHECK(ex->ab.max_value() <= 1.f);
  CHECK(ex->l.all_finite());
  CHECK(ex->ab.all_finite());
}

TEST_CASE("achromatic sources produce near-zero chroma") {
  TempDataset ds("gray", 0);
  write_png((ds.root / "g.png").string(), gray_image(20, 20));
  auto ex = load_example((ds.root / "g.png").string(), 20);
  REQUIRE(ex.has_value());
  for (std::int64_t i = 0; i < ex->ab.numel(); ++i)
    CHECK(std::abs(ex->ab.data()[i]) * 128.f < 0.01f);
}

TEST_CASE("corrupt files load as nothing") {
  TempDataset ds("corrupt", 0);
  std::ofstream(ds.root / "bad.png", std::ios::binary) << "\x89PNG\r\n but then garbage";
  CHECK_FALSE(load_example((ds.root / "bad.png").string(), 16).has_value());
}

TEST_CASE("round trip through loading reproduces the resized source") {
  TempDataset ds("rt", 0);
  Rng rng(12);
  const RgbImage src = random_image(16, 16, rng);
  write_png((ds.root / "rt.png").string(), src);
  auto ex = load_example((ds.root / "rt.png").string(), 16);  // same size, resize is identity
  REQUIRE(ex.has_value());
  LabImage lab;
  lab.height = 16;
  lab.width = 16;
  lab.L.assign(256, 0.f);
  lab.a.assign(256, 0.f);
  lab.b.assign(256, 0.f);
  denormalize_l(ex->l, lab);
  denormalize_ab(ex->ab, lab);
  const RgbImage back = lab_to_srgb(lab);
  for (std::size_t i = 0; i < src.data.size(); ++i)
    CHECK(std::abs(int(src.data[i]) - int(back.data[i])) <= 1);
}

TEST_CASE("batches follow the seeded permutation with drop-last") {
  TempDataset ds("batch", 10);
  auto m = scan_dataset(ds.root.string(), 16);
  CHECK(steps_per_epoch(m, 4) == 2);
  BatchStream stream(m, 4, /*seed=*/7, /*epoch=*/0);
  const auto perm = stream.permutation();
  CHECK(perm.size() == 10);
  std::vector<std::int64_t> seen;
  int batches = 0;
  while (auto b = stream.next()) {
    CHECK(b->l.shape() == Shape{4, 1, 16, 16});
    CHECK(b->ab.shape() == Shape{4, 2, 16, 16});
    CHECK(b->l.all_finite());
    CHECK(b->ab.all_finite());
    seen.insert(seen.end(), b->ids.begin(), b->ids.end());
    ++batches;
  }
  CHECK(batches == 2);  // 10/4, last 2 dropped
  REQUIRE(seen.size() == 8);
  for (int i = 0; i < 8; ++i) CHECK(seen[i] == perm[i]);  // ids = permutation prefix, in order

  BatchStream again(m, 4, 7, 0);
  CHECK(again.permutation() == perm);
  BatchStream other_epoch(m, 4, 7, 1);
  CHECK(other_epoch.permutation() != perm);
  BatchStream other_seed(m, 4, 8, 0);
  CHECK(other_seed.permutation() != perm);

  CHECK_THROWS_AS(BatchStream(m, 11, 7, 0), std::invalid_argument);
}

TEST_CASE("corrupt file mid-epoch is skipped, counted, and marked") {
  TempDataset ds("skip", 6);
  std::ofstream(ds.root / "img_999.png", std::ios::binary) << "not a png";
  auto m = scan_dataset(ds.root.string(), 16);
  REQUIRE(m.entries.size() == 7);
  // Consume the whole epoch; every batch must still be full-size.
  BatchStream stream(m, 2, 1, 0);
  int batches = 0;
  while (auto b = stream.next()) {
    CHECK(b->ids.size() == 2);
    ++batches;
  }
  CHECK(stream.skipped() == 1);
  CHECK(batches == 3);  // 6 good images in pairs
  CHECK(m.decodable_count() == 6);
  // The next epoch no longer includes the bad entry at all.
  BatchStream next_epoch(m, 2, 1, 1);
  CHECK(next_epoch.permutation().size() == 6);
}
