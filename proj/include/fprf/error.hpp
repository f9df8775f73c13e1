#pragma once

#include <stdexcept>
#include <string>

namespace fprf {

enum class ErrorKind {
  Dimension,  // shape mismatch between operands
  Domain,     // argument outside the accepted range
  Config,     // bad configuration or command-line usage
  Data,       // malformed file, dataset or checkpoint
  Numeric,    // non-finite values / divergence
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) fail(kind, what);
}

}  // namespace fprf
