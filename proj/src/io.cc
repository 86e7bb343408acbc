#include "poseconsist/io.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "poseconsist/errors.h"
#include "poseconsist/format.h"
#include "poseconsist/lie.h"

namespace poseconsist {

namespace {

struct PnmHeader {
  char kind = 0;  // '5' or '6'
  int width = 0;
  int height = 0;
  int maxval = 0;
};

// Next header token, skipping whitespace and '#' comments.
std::string token(std::istream& in, const fs::path& path) {
  std::string t;
  int c;
  while ((c = in.get()) != EOF) {
    if (c == '#') {
      while ((c = in.get()) != EOF && c != '\n') {
      }
      continue;
    }
    if (std::isspace(c)) {
      if (!t.empty()) return t;
      continue;
    }
    t.push_back(static_cast<char>(c));
  }
  if (t.empty()) throw DataError(path.string() + ": truncated header");
  return t;
}

int header_int(std::istream& in, const fs::path& path) {
  const std::string t = token(in, path);
  try {
    size_t used = 0;
    const int v = std::stoi(t, &used);
    if (used != t.size() || v <= 0) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw DataError(path.string() + ": bad header field '" + t + "'");
  }
}

PnmHeader read_header(std::istream& in, const fs::path& path) {
  PnmHeader h;
  const std::string magic = token(in, path);
  if (magic != "P5" && magic != "P6") throw DataError(path.string() + ": not a binary PGM/PPM");
  h.kind = magic[1];
  h.width = header_int(in, path);
  h.height = header_int(in, path);
  h.maxval = header_int(in, path);
  if (h.maxval > 65535) throw DataError(path.string() + ": maxval above 65535");
  // token() consumed exactly one whitespace byte after maxval.
  return h;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot write");
  return out;
}

std::vector<unsigned> read_samples(std::istream& in, const PnmHeader& h, size_t count,
                                   const fs::path& path) {
  std::vector<unsigned> values(count);
  if (h.maxval < 256) {
    std::vector<unsigned char> raw(count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(count));
    if (in.gcount() != static_cast<std::streamsize>(count)) throw DataError(path.string() + ": truncated pixel data");
    for (size_t i = 0; i < count; ++i) values[i] = raw[i];
  } else {
    std::vector<unsigned char> raw(2 * count);
    in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (in.gcount() != static_cast<std::streamsize>(raw.size())) throw DataError(path.string() + ": truncated pixel data");
    for (size_t i = 0; i < count; ++i) values[i] = (raw[2 * i] << 8) | raw[2 * i + 1];
  }
  for (unsigned v : values) {
    if (static_cast<int>(v) > h.maxval) throw DataError(path.string() + ": sample above maxval");
  }
  return values;
}

}  // namespace

void write_pnm(const fs::path& path, const ImageGrid& image) {
  if (image.channels != 1 && image.channels != 3) {
    throw DataError(path.string() + ": only 1 or 3 channels can be written");
  }
  auto out = open_out(path);
  out << (image.channels == 1 ? "P5" : "P6") << "\n" << image.width << " " << image.height << "\n255\n";
  std::vector<unsigned char> raw(image.plane_size() * image.channels);
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      for (int c = 0; c < image.channels; ++c) {
        const double x = std::clamp(image.at(c, v, u), 0.0, 1.0);
        raw[(static_cast<size_t>(v) * image.width + u) * image.channels + c] =
            static_cast<unsigned char>(std::lround(x * 255.0));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

ImageGrid read_pnm(const fs::path& path) {
  auto in = open_in(path);
  const PnmHeader h = read_header(in, path);
  const int channels = h.kind == '6' ? 3 : 1;
  const auto values = read_samples(in, h, static_cast<size_t>(h.width) * h.height * channels, path);
  ImageGrid image(h.height, h.width, channels);
  const double maxval = h.maxval;
  for (int v = 0; v < h.height; ++v) {
    for (int u = 0; u < h.width; ++u) {
      for (int c = 0; c < channels; ++c) {
        image.at(c, v, u) = values[(static_cast<size_t>(v) * h.width + u) * channels + c] / maxval;
      }
    }
  }
  return image;
}

void write_depth_pgm(const fs::path& path, const DepthMap& depth) {
  auto out = open_out(path);
  out << "P5\n" << depth.width << " " << depth.height << "\n65535\n";
  std::vector<unsigned char> raw(2 * depth.size());
  for (size_t i = 0; i < depth.size(); ++i) {
    const double d = depth.data[i];
    long q = std::isfinite(d) && d > 0.0 ? std::lround(d * 256.0) : 0;
    q = std::clamp(q, 0L, 65535L);
    raw[2 * i] = static_cast<unsigned char>(q >> 8);
    raw[2 * i + 1] = static_cast<unsigned char>(q & 0xff);
  }
  out.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

DepthMap read_depth_pgm(const fs::path& path) {
  auto in = open_in(path);
  const PnmHeader h = read_header(in, path);
  if (h.kind != '5' || h.maxval < 256) throw DataError(path.string() + ": expected a 16-bit PGM");
  const auto values = read_samples(in, h, static_cast<size_t>(h.width) * h.height, path);
  DepthMap depth(h.height, h.width);
  for (size_t i = 0; i < values.size(); ++i) depth.data[i] = values[i] / 256.0;
  return depth;
}

void write_intrinsics(const fs::path& path, const Intrinsics& k) {
  write_text(path, format_double(k.fx) + " " + format_double(k.fy) + " " + format_double(k.cx) +
                       " " + format_double(k.cy) + "\n");
}

Intrinsics read_intrinsics(const fs::path& path) {
  std::istringstream in(read_text(path));
  Intrinsics k;
  std::string extra;
  if (!(in >> k.fx >> k.fy >> k.cx >> k.cy) || (in >> extra)) {
    throw DataError(path.string() + ": expected four numbers \"fx fy cx cy\"");
  }
  try {
    k.validate();
  } catch (const std::invalid_argument& e) {
    throw DataError(path.string() + ": " + e.what());
  }
  return k;
}

std::string frame_name(int index, int channels) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "frame_%04d.%s", index, channels == 1 ? "pgm" : "ppm");
  return buf;
}

std::string depth_name(int index) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "depth_%04d.pgm", index);
  return buf;
}

void write_dataset(const fs::path& dir, const RenderedSequence& seq) {
  fs::create_directories(dir);
  for (int i = 0; i < seq.size(); ++i) {
    write_pnm(dir / frame_name(i, seq.frames[i].channels), seq.frames[i]);
    write_depth_pgm(dir / depth_name(i), seq.gt_depths[i]);
  }
  write_pose_file((dir / "poses.txt").string(), seq.gt_poses);
  write_intrinsics(dir / "intrinsics.txt", seq.k);
}

RenderedSequence read_dataset(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw DataError(dir.string() + ": dataset directory not found");
  RenderedSequence seq;
  seq.k = read_intrinsics(dir / "intrinsics.txt");
  seq.gt_poses = read_pose_file((dir / "poses.txt").string());
  for (int i = 0;; ++i) {
    fs::path frame = dir / frame_name(i, 3);
    if (!fs::exists(frame)) frame = dir / frame_name(i, 1);
    if (!fs::exists(frame)) break;
    seq.frames.push_back(read_pnm(frame));
    seq.gt_depths.push_back(read_depth_pgm(dir / depth_name(i)));
  }
  if (seq.frames.empty()) throw DataError(dir.string() + ": no frame_0000 image");
  if (seq.gt_poses.size() != seq.frames.size()) {
    throw DataError((dir / "poses.txt").string() + ": " + std::to_string(seq.gt_poses.size()) +
                    " poses for " + std::to_string(seq.frames.size()) + " frames");
  }
  try {
    seq.validate();
  } catch (const DataError& e) {
    throw DataError(dir.string() + ": " + e.what());
  }
  return seq;
}

std::vector<DepthMap> read_depths(const fs::path& dir, int n) {
  std::vector<DepthMap> out;
  for (int i = 0; i < n; ++i) out.push_back(read_depth_pgm(dir / depth_name(i)));
  return out;
}

void CsvTable::add(std::vector<std::string> row) {
  if (row.size() != header.size()) throw std::logic_error("csv: row width does not match header");
  rows.push_back(std::move(row));
}

std::string CsvTable::str() const {
  std::string s;
  auto line = [&](const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
      if (i) s += ',';
      s += cells[i];
    }
    s += '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return s;
}

size_t CsvTable::column(const std::string& name) const {
  auto it = std::find(header.begin(), header.end(), name);
  if (it == header.end()) throw DataError("csv: missing column '" + name + "'");
  return static_cast<size_t>(it - header.begin());
}

void write_text(const fs::path& path, const std::string& text) {
  auto out = open_out(path);
  out << text;
  if (!out) throw DataError(path.string() + ": write failed");
}

std::string read_text(const fs::path& path) {
  auto in = open_in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_csv(const fs::path& path, const CsvTable& table) { write_text(path, table.str()); }

CsvTable read_csv(const fs::path& path) {
  std::istringstream in(read_text(path));
  CsvTable t;
  std::string line;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::stringstream ss(l);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  };
  if (!std::getline(in, line)) throw DataError(path.string() + ": empty CSV");
  t.header = split(line);
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(t.header.size()) + " cells");
    }
    t.rows.push_back(std::move(cells));
  }
  return t;
}

}  // namespace poseconsist
