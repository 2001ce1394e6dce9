#pragma once

#include <stdexcept>
#include <string>

namespace moltx {

// Base for all library errors. Subclasses exist where callers are expected
// to discriminate (parse diagnostics, shape checks, degenerate inputs).
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class ShapeMismatch : public Error {
 public:
  explicit ShapeMismatch(const std::string& msg) : Error(msg) {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& msg) : Error(msg) {}
};

class NonScalarLoss : public Error {
 public:
  explicit NonScalarLoss(const std::string& msg) : Error(msg) {}
};

// SMILES / dataset parse diagnostics carry the byte offset (or line number)
// of the offending input.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

class UnsupportedToken : public ParseError {
 public:
  UnsupportedToken(const std::string& msg, std::size_t offset)
      : ParseError(msg, offset) {}
};

class UnbalancedBranch : public ParseError {
 public:
  UnbalancedBranch(const std::string& msg, std::size_t offset)
      : ParseError(msg, offset) {}
};

class DanglingRingClosure : public ParseError {
 public:
  DanglingRingClosure(const std::string& msg, std::size_t offset)
      : ParseError(msg, offset) {}
};

class DatasetError : public Error {
 public:
  DatasetError(const std::string& msg, std::size_t line)
      : Error("line " + std::to_string(line) + ": " + msg), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public Error {
 public:
  explicit DuplicateId(const std::string& id)
      : Error("duplicate record id: " + id) {}
};

class DegenerateLabels : public Error {
 public:
  explicit DegenerateLabels(const std::string& msg) : Error(msg) {}
};

class EmptySet : public Error {
 public:
  explicit EmptySet(const std::string& msg) : Error(msg) {}
};

class InsufficientInactives : public Error {
 public:
  explicit InsufficientInactives(const std::string& msg) : Error(msg) {}
};

}  // namespace moltx
