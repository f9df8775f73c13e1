#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace fprf {

using Real = double;

// Dense row-major array. Computation is always 64-bit; the on-disk format
// ("FPT1") stores 32-bit floats.
class Tensor {
 public:
  Tensor() = default;
  explicit Tensor(std::vector<size_t> shape, Real fill = 0.0);
  Tensor(std::vector<size_t> shape, std::vector<Real> data);

  static Tensor zeros(std::vector<size_t> shape) { return Tensor(std::move(shape)); }
  static Tensor zeros_like(const Tensor& t) { return Tensor(t.shape_); }

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t dim(size_t i) const { return shape_.at(i); }
  size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  // Row count / row width for a tensor viewed as a matrix over its last axis.
  size_t rows() const;
  size_t cols() const;

  Real* data() { return data_.data(); }
  const Real* data() const { return data_.data(); }
  std::span<Real> span() { return data_; }
  std::span<const Real> span() const { return data_; }
  std::vector<Real>& vec() { return data_; }
  const std::vector<Real>& vec() const { return data_; }

  Real& operator[](size_t i) { return data_[i]; }
  Real operator[](size_t i) const { return data_[i]; }
  Real& at(size_t i, size_t j) { return data_[i * shape_[1] + j]; }
  Real at(size_t i, size_t j) const { return data_[i * shape_[1] + j]; }
  Real& at(size_t i, size_t j, size_t k) { return data_[(i * shape_[1] + j) * shape_[2] + k]; }
  Real at(size_t i, size_t j, size_t k) const { return data_[(i * shape_[1] + j) * shape_[2] + k]; }

  std::span<Real> row(size_t i) { return {data_.data() + i * cols(), cols()}; }
  std::span<const Real> row(size_t i) const { return {data_.data() + i * cols(), cols()}; }

  void fill(Real v);
  void reshape(std::vector<size_t> shape);
  bool all_finite() const;

  bool operator==(const Tensor& o) const = default;

 private:
  std::vector<size_t> shape_;
  std::vector<Real> data_;
};

size_t shape_product(const std::vector<size_t>& shape);
std::string shape_string(const std::vector<size_t>& shape);

// "FPT1" | u32 rank | u32 dims... | f32 payload, little-endian, row-major.
void write_fpt(std::ostream& out, const Tensor& t);
Tensor read_fpt(std::istream& in);
void save_fpt(const std::string& path, const Tensor& t);
Tensor load_fpt(const std::string& path);

// Rounds every element to the nearest 32-bit float, i.e. the value the
// tensor will have after an FPT1 round trip.
void round_to_storage(Tensor& t);

}  // namespace fprf
