#include "fprf/tensor.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <sstream>

#include "fprf/binary_io.hpp"
#include "fprf/error.hpp"

namespace fprf {

size_t shape_product(const std::vector<size_t>& shape) {
  size_t n = 1;
  for (size_t d : shape) n *= d;
  return n;
}

std::string shape_string(const std::vector<size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (size_t i = 0; i < shape.size(); ++i) os << (i ? "x" : "") << shape[i];
  os << ']';
  return os.str();
}

Tensor::Tensor(std::vector<size_t> shape, Real fill)
    : shape_(std::move(shape)), data_(shape_product(shape_), fill) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<Real> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  require(shape_product(shape_) == data_.size(), ErrorKind::Dimension,
          "tensor data length " + std::to_string(data_.size()) + " does not match shape " +
              shape_string(shape_));
}

size_t Tensor::rows() const {
  if (shape_.empty()) return 0;
  if (shape_.size() == 1) return 1;
  return data_.size() / shape_.back();
}

size_t Tensor::cols() const { return shape_.empty() ? 0 : shape_.back(); }

void Tensor::fill(Real v) { std::fill(data_.begin(), data_.end(), v); }

void Tensor::reshape(std::vector<size_t> shape) {
  require(shape_product(shape) == data_.size(), ErrorKind::Dimension,
          "cannot reshape " + shape_string(shape_) + " to " + shape_string(shape));
  shape_ = std::move(shape);
}

bool Tensor::all_finite() const {
  for (Real v : data_)
    if (!std::isfinite(v)) return false;
  return true;
}

void round_to_storage(Tensor& t) {
  for (Real& v : t.vec()) v = static_cast<Real>(static_cast<float>(v));
}

void write_fpt(std::ostream& out, const Tensor& t) {
  out.write("FPT1", 4);
  put_u32(out, static_cast<uint32_t>(t.rank()));
  for (size_t d : t.shape()) put_u32(out, static_cast<uint32_t>(d));
  for (Real v : t.vec()) put_f32(out, static_cast<float>(v));
}

Tensor read_fpt(std::istream& in) {
  char magic[4];
  in.read(magic, 4);
  require(in.good() && std::string(magic, 4) == "FPT1", ErrorKind::Data, "bad tensor magic (expected FPT1)");
  const uint32_t rank = get_u32(in);
  require(rank <= 8, ErrorKind::Data, "tensor rank " + std::to_string(rank) + " too large");
  std::vector<size_t> shape(rank);
  for (auto& d : shape) d = get_u32(in);
  const size_t n = shape_product(shape);
  require(n <= (size_t{1} << 32), ErrorKind::Data, "tensor too large");
  std::vector<Real> data(n);
  for (auto& v : data) v = get_f32(in);
  return Tensor(std::move(shape), std::move(data));
}

void save_fpt(const std::string& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::Data, "cannot open " + path + " for writing");
  write_fpt(out, t);
}

Tensor load_fpt(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::Data, "cannot open " + path);
  return read_fpt(in);
}

}  // namespace fprf
