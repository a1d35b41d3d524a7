#include "reco/dedup.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

namespace {

class PnmReader {
 public:
  explicit PnmReader(const std::string& data) : data_(data) {}

  std::string magic() {
    if (data_.size() < 2 || data_[0] != 'P') fail_data("not a PNM file");
    pos_ = 2;
    return data_.substr(0, 2);
  }

  long token() {
    skip_space();
    std::size_t start = pos_;
    while (pos_ < data_.size() && std::isdigit(static_cast<unsigned char>(data_[pos_]))) ++pos_;
    if (start == pos_) fail_data("malformed PNM header");
    return std::stol(data_.substr(start, pos_ - start));
  }

  // Single whitespace byte separates the header from binary data.
  void end_header() {
    if (pos_ >= data_.size()) fail_data("PNM truncated");
    ++pos_;
  }

  std::uint8_t byte() {
    if (pos_ >= data_.size()) fail_data("PNM pixel data truncated");
    return static_cast<std::uint8_t>(data_[pos_++]);
  }

 private:
  void skip_space() {
    while (pos_ < data_.size()) {
      if (data_[pos_] == '#') {
        while (pos_ < data_.size() && data_[pos_] != '\n') ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(data_[pos_]))) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  const std::string& data_;
  std::size_t pos_ = 0;
};

}  // namespace

Image read_pnm(const std::filesystem::path& path) {
  const auto data = io::read_file(path);
  PnmReader in(data);
  const auto magic = in.magic();
  Image img;
  bool binary = false;
  if (magic == "P5") {
    img.channels = 1;
    binary = true;
  } else if (magic == "P6") {
    img.channels = 3;
    binary = true;
  } else if (magic == "P2") {
    img.channels = 1;
  } else if (magic == "P3") {
    img.channels = 3;
  } else {
    fail_data(path.string() + ": unsupported PNM type " + magic);
  }
  img.width = static_cast<int>(in.token());
  img.height = static_cast<int>(in.token());
  const long maxval = in.token();
  if (img.width < 1 || img.height < 1) fail_data(path.string() + ": empty raster");
  if (maxval < 1 || maxval > 255) fail_data(path.string() + ": maxval must be in [1,255]");
  const auto count = static_cast<std::size_t>(img.width) * img.height * img.channels;
  img.pixels.resize(count);
  if (binary) {
    in.end_header();
    for (auto& p : img.pixels) p = in.byte();
  } else {
    for (auto& p : img.pixels) {
      const long v = in.token();
      if (v < 0 || v > maxval) fail_data(path.string() + ": sample out of range");
      p = static_cast<std::uint8_t>(v);
    }
  }
  if (maxval != 255) {
    for (auto& p : img.pixels) p = static_cast<std::uint8_t>(std::lround(p * 255.0 / maxval));
  }
  return img;
}

std::string encode_pnm(const Image& image) {
  std::string out = (image.channels == 3 ? "P6\n" : "P5\n") + std::to_string(image.width) + " " +
                    std::to_string(image.height) + "\n255\n";
  out.append(image.pixels.begin(), image.pixels.end());
  return out;
}

DHash64 dhash(const Image& image) {
  if (image.width < 1 || image.height < 1) fail_data("dhash: empty raster");
  if (image.channels != 1 && image.channels != 3) fail_data("dhash: images must have 1 or 3 channels");
  if (image.pixels.size() != static_cast<std::size_t>(image.width) * image.height * image.channels) {
    fail_data("dhash: pixel buffer does not match the dimensions");
  }
  const int w = image.width;
  const int h = image.height;
  std::vector<double> luma(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      luma[static_cast<std::size_t>(y) * w + x] =
          image.channels == 1 ? image.at(x, y)
                              : 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
    }
  }

  constexpr int kCols = 9;
  constexpr int kRows = 8;
  auto source = [](int dst, int dst_size, int src_size) {
    const double s = (dst + 0.5) * src_size / dst_size - 0.5;
    return std::clamp(s, 0.0, static_cast<double>(src_size - 1));
  };
  double small[kRows][kCols];
  for (int r = 0; r < kRows; ++r) {
    const double sy = source(r, kRows, h);
    const int y0 = static_cast<int>(std::floor(sy));
    const int y1 = std::min(y0 + 1, h - 1);
    const double fy = sy - y0;
    for (int c = 0; c < kCols; ++c) {
      const double sx = source(c, kCols, w);
      const int x0 = static_cast<int>(std::floor(sx));
      const int x1 = std::min(x0 + 1, w - 1);
      const double fx = sx - x0;
      auto px = [&](int x, int y) { return luma[static_cast<std::size_t>(y) * w + x]; };
      const double top = px(x0, y0) * (1.0 - fx) + px(x1, y0) * fx;
      const double bottom = px(x0, y1) * (1.0 - fx) + px(x1, y1) * fx;
      small[r][c] = top * (1.0 - fy) + bottom * fy;
    }
  }

  DHash64 hash = 0;
  for (int r = 0; r < kRows; ++r) {
    for (int c = 0; c < kCols - 1; ++c) {
      hash = (hash << 1) | (small[r][c] < small[r][c + 1] ? 1u : 0u);
    }
  }
  return hash;
}

std::string hash_hex(DHash64 h) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  auto lines = io::read_lines(path);
  if (lines.empty() || io::trim(lines[0]) != "id,path") fail_data(path.string() + ":1: expected header id,path");
  const auto base = path.parent_path();
  std::vector<ManifestEntry> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (io::trim(lines[ln]).empty()) continue;
    const auto comma = lines[ln].find(',');
    if (comma == std::string::npos) fail_data(path.string() + ":" + std::to_string(ln + 1) + ": expected id,path");
    ManifestEntry e;
    e.id = std::string(io::trim(std::string_view(lines[ln]).substr(0, comma)));
    e.path = std::string(io::trim(std::string_view(lines[ln]).substr(comma + 1)));
    if (e.path.is_relative()) e.path = base / e.path;
    out.push_back(std::move(e));
  }
  return out;
}

DedupResult dedup_hashes(const std::vector<HashedEntry>& candidates,
                         const std::vector<HashedEntry>& references, const DedupOptions& options) {
  DedupResult res;
  res.candidate_hashes = candidates;
  std::unordered_map<DHash64, std::string> exact;
  for (const auto& r : references) exact.emplace(r.hash, r.id);
  for (const auto& c : candidates) {
    if (auto it = exact.find(c.hash); it != exact.end()) {
      res.removed.push_back({c.id, it->second, "dhash " + hash_hex(c.hash) + " equals reference " + it->second});
      continue;
    }
    bool near = false;
    if (options.max_hamming > 0) {
      for (const auto& r : references) {
        const int dist = std::popcount(c.hash ^ r.hash);
        if (dist <= options.max_hamming) {
          res.removed.push_back({c.id, r.id, "dhash " + hash_hex(c.hash) + " within " + std::to_string(dist) +
                                                 " bits of reference " + r.id});
          near = true;
          break;
        }
      }
    }
    if (!near) res.kept.push_back(c.id);
  }
  return res;
}

DedupResult dedup(const std::vector<ManifestEntry>& candidates,
                  const std::vector<std::vector<ManifestEntry>>& references, const DedupOptions& options) {
  std::vector<std::string> warnings;
  auto hash_all = [&](const std::vector<ManifestEntry>& entries, const char* role) {
    std::vector<HashedEntry> out;
    for (const auto& e : entries) {
      try {
        out.push_back({e.id, dhash(read_pnm(e.path))});
      } catch (const Error& err) {
        warnings.push_back(std::string(role) + " " + e.id + ": " + err.what());
      }
    }
    return out;
  };
  auto cand = hash_all(candidates, "candidate");
  std::vector<HashedEntry> refs;
  for (const auto& m : references) {
    auto h = hash_all(m, "reference");
    refs.insert(refs.end(), h.begin(), h.end());
  }
  auto res = dedup_hashes(cand, refs, options);
  res.warnings = std::move(warnings);
  return res;
}

std::string hashes_csv(const std::vector<HashedEntry>& entries) {
  std::string out = "id,hash_hex\n";
  for (const auto& e : entries) out += e.id + "," + hash_hex(e.hash) + "\n";
  return out;
}

}  // namespace reco
