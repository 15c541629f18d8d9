#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace embspace {

// Base for all toolkit errors. Callers that only need a coarse
// succeeded/failed distinction can catch this type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Mismatched vector lengths, matrix shapes or cell counts.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// An argument outside its documented range (k < 1, epsilon <= 0, ...).
class ParameterError : public Error {
 public:
  using Error::Error;
};

// Malformed input file or stream; message carries the line number
// where applicable.
class FormatError : public Error {
 public:
  using Error::Error;
};

// A structurally valid record violating a semantic invariant
// (mention out of bounds etc.).
class ValidationError : public Error {
 public:
  using Error::Error;
};

class EmptyInputError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// QR hit a linearly dependent column.
class DegenerateColumnError : public Error {
 public:
  DegenerateColumnError(std::size_t column, const std::string& what)
      : Error(what), column(column) {}
  std::size_t column;
};

// No same-label pair exists, so a same-label statistic is undefined.
class DegenerateLabelsError : public Error {
 public:
  using Error::Error;
};

// No token of a sentence resolved to a word vector.
class EmptyEmbeddingError : public Error {
 public:
  using Error::Error;
};

// An id join between an embedding set and a corpus failed.
class JoinError : public Error {
 public:
  JoinError(std::vector<std::string> missing, const std::string& what)
      : Error(what), missing_ids(std::move(missing)) {}
  std::vector<std::string> missing_ids;
};

}  // namespace embspace
