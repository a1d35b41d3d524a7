#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace reco {

/// 8-bit raster, row-major, 1 (gray) or 3 (RGB) interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
};

/// Reads binary or ASCII PGM/PPM (P2, P3, P5, P6) with maxval <= 255.
Image read_pnm(const std::filesystem::path& path);
std::string encode_pnm(const Image& image);

using DHash64 = std::uint64_t;

/// Difference hash. Pixels go to luma (0.299 R + 0.587 G + 0.114 B), the
/// luma plane is bilinearly resampled to 9x8 with pixel-center alignment
/// (source coordinate (x + 0.5) * W / 9 - 0.5, clamped to the image), and bit
/// (r, c) is set iff sample(r, c) < sample(r, c + 1). Bits are packed
/// row-major with (0, 0) in the most significant bit.
DHash64 dhash(const Image& image);

/// 16 lowercase hex digits.
std::string hash_hex(DHash64 h);

struct ManifestEntry {
  std::string id;
  std::filesystem::path path;
};

/// `id,path` with a header line; relative paths resolve against the manifest's directory.
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

struct HashedEntry {
  std::string id;
  DHash64 hash = 0;
};

struct Removal {
  std::string id;
  std::string matched_reference;
  std::string reason;
};

struct DedupResult {
  std::vector<std::string> kept;
  std::vector<Removal> removed;
  std::vector<std::string> warnings;  // unreadable images, skipped
  std::vector<HashedEntry> candidate_hashes;
};

struct DedupOptions {
  /// 0 removes exact hash matches only. A positive value also removes
  /// candidates within that many differing bits of a reference.
  int max_hamming = 0;
};

/// Hashes every listed image and drops candidates whose hash matches any
/// reference hash. Unreadable candidates are neither kept nor removed; they
/// are reported as warnings, as are unreadable references.
DedupResult dedup(const std::vector<ManifestEntry>& candidates,
                  const std::vector<std::vector<ManifestEntry>>& references,
                  const DedupOptions& options = {});

/// Same decision on precomputed hashes.
DedupResult dedup_hashes(const std::vector<HashedEntry>& candidates,
                         const std::vector<HashedEntry>& references, const DedupOptions& options = {});

std::string hashes_csv(const std::vector<HashedEntry>& entries);

}  // namespace reco
