#pragma once

#include <stdexcept>
#include <string>

namespace entrobound {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sequence spec string / file could not be parsed or fails validation.
class SpecParseError : public Error {
 public:
  using Error::Error;
};

// Explicit spec indexed past its prefix with tail=none.
class IndexError : public Error {
 public:
  using Error::Error;
};

// sigma is not in ell_r, so the requested tail/bound does not exist.
class DivergenceError : public Error {
 public:
  using Error::Error;
};

// Explicit spec with tail=none cannot support tail-dependent operations.
class UnusableTailError : public Error {
 public:
  using Error::Error;
};

// Certified truncation could not reach the requested tolerance within the
// term cap.
class PrecisionError : public Error {
 public:
  using Error::Error;
};

// Wrong p/q branch access (s in the p>q branch, r in the p<q branch, p=q
// where a strict inequality is required).
class BranchError : public Error {
 public:
  using Error::Error;
};

// Oracle preconditions: dimension cap, grid resolution, memory guard.
class OracleError : public Error {
 public:
  using Error::Error;
};

}  // namespace entrobound
