#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "reco/linalg.hpp"

namespace reco {

/// Two-layer MLP with a tanh hidden layer and L2-normalized outputs:
///   z = normalize(W2 tanh(W1 x + b1) + b2)
class Encoder {
 public:
  Encoder() = default;
  Encoder(int input_dim, int hidden_dim, int output_dim);

  /// Weights ~ U(-1/sqrt(fan_in), 1/sqrt(fan_in)), biases zero.
  static Encoder initialize(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed);

  int input_dim() const noexcept { return static_cast<int>(w1.cols()); }
  int hidden_dim() const noexcept { return static_cast<int>(w1.rows()); }
  int output_dim() const noexcept { return static_cast<int>(w2.rows()); }
  Eigen::Index parameter_count() const noexcept;

  struct Cache {
    Matrix hidden;  // tanh activations
    Matrix raw;     // pre-normalization outputs
    Vector norms;
    Matrix z;
  };

  /// Unit-norm embedding per row. Throws `Error(data)` on a width mismatch.
  Matrix embed(const Matrix& features) const;
  const Matrix& forward(const Matrix& features, Cache& cache) const;

  /// Gradient of a scalar loss w.r.t. the flattened parameters, given the
  /// loss gradient w.r.t. the embeddings of the cached forward pass.
  Vector backward(const Matrix& features, const Cache& cache, const Matrix& grad_z) const;

  /// Parameters flattened as W1, b1, W2, b2 (matrices row-major).
  Vector parameters() const;
  void set_parameters(const Vector& flat);

  /// Little-endian checkpoint: "RCL1", uint32 layer count (3), uint32 widths
  /// (input, hidden, output), then the flattened parameters as float64.
  std::string to_bytes() const;
  static Encoder from_bytes(const std::string& bytes);
  void save(const std::filesystem::path& path) const;
  static Encoder load(const std::filesystem::path& path);

  bool operator==(const Encoder& other) const;

  Matrix w1;
  Vector b1;
  Matrix w2;
  Vector b2;
};

}  // namespace reco
