#include "reco/encoder.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <random>

#include "reco/error.hpp"
#include "reco/io.hpp"

namespace reco {

namespace {

constexpr char kMagic[4] = {'R', 'C', 'L', '1'};

void put_u32(std::string& out, std::uint32_t v) {
  for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xff));
}

void put_f64(std::string& out, double v) {
  auto bits = std::bit_cast<std::uint64_t>(v);
  for (int b = 0; b < 8; ++b) out.push_back(static_cast<char>((bits >> (8 * b)) & 0xff));
}

std::uint64_t get_le(const std::string& in, std::size_t& pos, int bytes) {
  if (pos + bytes > in.size()) fail_data("checkpoint truncated");
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(in[pos + b])) << (8 * b);
  pos += bytes;
  return v;
}

}  // namespace

Encoder::Encoder(int input_dim, int hidden_dim, int output_dim)
    : w1(Matrix::Zero(hidden_dim, input_dim)),
      b1(Vector::Zero(hidden_dim)),
      w2(Matrix::Zero(output_dim, hidden_dim)),
      b2(Vector::Zero(output_dim)) {
  if (input_dim < 1 || hidden_dim < 1 || output_dim < 1) fail_config("encoder widths must be positive");
}

Encoder Encoder::initialize(int input_dim, int hidden_dim, int output_dim, std::uint64_t seed) {
  Encoder e(input_dim, hidden_dim, output_dim);
  std::mt19937_64 rng(seed);
  const double a1 = 1.0 / std::sqrt(static_cast<double>(input_dim));
  const double a2 = 1.0 / std::sqrt(static_cast<double>(hidden_dim));
  std::uniform_real_distribution<double> u1(-a1, a1);
  std::uniform_real_distribution<double> u2(-a2, a2);
  for (Eigen::Index i = 0; i < e.w1.size(); ++i) e.w1.data()[i] = u1(rng);
  for (Eigen::Index i = 0; i < e.w2.size(); ++i) e.w2.data()[i] = u2(rng);
  return e;
}

Eigen::Index Encoder::parameter_count() const noexcept {
  return w1.size() + b1.size() + w2.size() + b2.size();
}

const Matrix& Encoder::forward(const Matrix& features, Cache& cache) const {
  if (features.cols() != input_dim()) {
    fail_data("feature width " + std::to_string(features.cols()) + " does not match encoder input " +
              std::to_string(input_dim()));
  }
  cache.hidden = ((features * w1.transpose()).rowwise() + b1.transpose()).array().tanh().matrix();
  cache.raw = (cache.hidden * w2.transpose()).rowwise() + b2.transpose();
  cache.norms = cache.raw.rowwise().norm();
  cache.z = cache.raw;
  for (Eigen::Index r = 0; r < cache.z.rows(); ++r) {
    if (!(cache.norms(r) > 0.0) || !std::isfinite(cache.norms(r))) {
      fail_numeric("encoder output row " + std::to_string(r) + " cannot be normalized");
    }
    cache.z.row(r) /= cache.norms(r);
  }
  return cache.z;
}

Matrix Encoder::embed(const Matrix& features) const {
  Cache cache;
  forward(features, cache);
  return std::move(cache.z);
}

Vector Encoder::backward(const Matrix& features, const Cache& cache, const Matrix& grad_z) const {
  // d z / d raw = (I - z z^T) / |raw|
  Matrix grad_raw(grad_z.rows(), grad_z.cols());
  for (Eigen::Index r = 0; r < grad_z.rows(); ++r) {
    const double along = cache.z.row(r).dot(grad_z.row(r));
    grad_raw.row(r) = (grad_z.row(r) - along * cache.z.row(r)) / cache.norms(r);
  }
  const Matrix gw2 = grad_raw.transpose() * cache.hidden;
  const Vector gb2 = grad_raw.colwise().sum().transpose();
  const Matrix grad_hidden = grad_raw * w2;
  const Matrix grad_pre = (grad_hidden.array() * (1.0 - cache.hidden.array().square())).matrix();
  const Matrix gw1 = grad_pre.transpose() * features;
  const Vector gb1 = grad_pre.colwise().sum().transpose();

  Vector flat(parameter_count());
  Eigen::Index at = 0;
  auto append = [&](const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) flat(at++) = data[i];
  };
  append(gw1.data(), gw1.size());
  append(gb1.data(), gb1.size());
  append(gw2.data(), gw2.size());
  append(gb2.data(), gb2.size());
  return flat;
}

Vector Encoder::parameters() const {
  Vector flat(parameter_count());
  Eigen::Index at = 0;
  auto append = [&](const double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) flat(at++) = data[i];
  };
  append(w1.data(), w1.size());
  append(b1.data(), b1.size());
  append(w2.data(), w2.size());
  append(b2.data(), b2.size());
  return flat;
}

void Encoder::set_parameters(const Vector& flat) {
  if (flat.size() != parameter_count()) fail_data("parameter vector has the wrong length");
  Eigen::Index at = 0;
  auto take = [&](double* data, Eigen::Index n) {
    for (Eigen::Index i = 0; i < n; ++i) data[i] = flat(at++);
  };
  take(w1.data(), w1.size());
  take(b1.data(), b1.size());
  take(w2.data(), w2.size());
  take(b2.data(), b2.size());
}

std::string Encoder::to_bytes() const {
  std::string out(kMagic, 4);
  put_u32(out, 3);
  put_u32(out, static_cast<std::uint32_t>(input_dim()));
  put_u32(out, static_cast<std::uint32_t>(hidden_dim()));
  put_u32(out, static_cast<std::uint32_t>(output_dim()));
  const Vector flat = parameters();
  for (Eigen::Index i = 0; i < flat.size(); ++i) put_f64(out, flat(i));
  return out;
}

Encoder Encoder::from_bytes(const std::string& bytes) {
  if (bytes.size() < 4 || std::memcmp(bytes.data(), kMagic, 4) != 0) fail_data("not an RCL1 checkpoint");
  std::size_t pos = 4;
  const auto layers = get_le(bytes, pos, 4);
  if (layers != 3) fail_data("checkpoint declares " + std::to_string(layers) + " widths, expected 3");
  const auto in = static_cast<int>(get_le(bytes, pos, 4));
  const auto hidden = static_cast<int>(get_le(bytes, pos, 4));
  const auto out = static_cast<int>(get_le(bytes, pos, 4));
  Encoder e(in, hidden, out);
  Vector flat(e.parameter_count());
  for (Eigen::Index i = 0; i < flat.size(); ++i) flat(i) = std::bit_cast<double>(get_le(bytes, pos, 8));
  if (pos != bytes.size()) fail_data("checkpoint has trailing bytes");
  e.set_parameters(flat);
  return e;
}

void Encoder::save(const std::filesystem::path& path) const { io::write_file_atomic(path, to_bytes()); }

Encoder Encoder::load(const std::filesystem::path& path) { return from_bytes(io::read_file(path)); }

bool Encoder::operator==(const Encoder& other) const {
  return w1.rows() == other.w1.rows() && w1.cols() == other.w1.cols() && w2.rows() == other.w2.rows() &&
         w1 == other.w1 && b1 == other.b1 && w2 == other.w2 && b2 == other.b2;
}

}  // namespace reco
