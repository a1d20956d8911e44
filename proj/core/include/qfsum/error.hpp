#ifndef QFSUM_ERROR_HPP_
#define QFSUM_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace qfsum {

// Base for every error raised by the library. The CLI maps subclasses to
// exit codes: NumericalError -> 4, everything else -> 3.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input document (JSON, word2vec text, binary files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a contract (unknown enum, bad range).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Tensor or embedding dimensions that do not agree.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Lookup of a key that is not present (e.g. contextual slot).
class KeyError : public Error {
 public:
  using Error::Error;
};

// Operation invoked in the wrong lifecycle state (step after done).
class StateError : public Error {
 public:
  using Error::Error;
};

// Non-finite losses or parameters during training.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace qfsum

#endif  // QFSUM_ERROR_HPP_
