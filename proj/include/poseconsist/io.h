#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "poseconsist/image.h"
#include "poseconsist/synthetic_world.h"

namespace poseconsist {

namespace fs = std::filesystem;

// 8-bit binary PNM. One channel is written as P5, three as P6. Values are
// clamped to [0, 1] and rounded to the nearest of 255 levels.
void write_pnm(const fs::path& path, const ImageGrid& image);
ImageGrid read_pnm(const fs::path& path);

// 16-bit P5 with depth in units of 1/256 m; 0 marks a missing value.
void write_depth_pgm(const fs::path& path, const DepthMap& depth);
DepthMap read_depth_pgm(const fs::path& path);

// One line "fx fy cx cy".
void write_intrinsics(const fs::path& path, const Intrinsics& k);
Intrinsics read_intrinsics(const fs::path& path);

// Dataset directory:
//   frame_0000.ppm ...   images (.pgm when single-channel)
//   depth_0000.pgm ...   16-bit depth
//   poses.txt            camera-to-world, one 12-number row per frame
//   intrinsics.txt
std::string frame_name(int index, int channels);
std::string depth_name(int index);
void write_dataset(const fs::path& dir, const RenderedSequence& seq);
// Reads frames until the first missing index. Throws DataError on any
// inconsistency, naming the file.
RenderedSequence read_dataset(const fs::path& dir);
// Predicted depths written by the optimizer, `n` frames.
std::vector<DepthMap> read_depths(const fs::path& dir, int n);

// Minimal CSV table: a header and rows of preformatted cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  void add(std::vector<std::string> row);
  std::string str() const;
  // Column index by name; throws DataError when absent.
  size_t column(const std::string& name) const;
};

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);
void write_csv(const fs::path& path, const CsvTable& table);
CsvTable read_csv(const fs::path& path);

}  // namespace poseconsist
