#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace condyr {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnknownIdError : public Error {
 public:
  explicit UnknownIdError(std::uint64_t id)
      : Error("unknown term id " + std::to_string(id)), id_(id) {}
  std::uint64_t id() const noexcept { return id_; }

 private:
  std::uint64_t id_;
};

class EmptySnapshotError : public Error {
 public:
  EmptySnapshotError() : Error("snapshot contains no quads") {}
};

/// Malformed or incompatible persisted archive.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Parse failure with a 1-based source position.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " + message),
        line_(line),
        column_(column),
        message_(message) {}

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::size_t line_;
  std::size_t column_;
  std::string message_;
};

class NQuadsError : public ParseError {
 public:
  using ParseError::ParseError;
};

class SyntaxError : public ParseError {
 public:
  using ParseError::ParseError;
};

/// A recognised SPARQL construct outside the supported subset.
class UnsupportedFeature : public ParseError {
 public:
  UnsupportedFeature(std::size_t line, std::size_t column, const std::string& feature)
      : ParseError(line, column, "unsupported feature: " + feature), feature_(feature) {}
  const std::string& feature() const noexcept { return feature_; }

 private:
  std::string feature_;
};

class UndefinedPrefix : public ParseError {
 public:
  UndefinedPrefix(std::size_t line, std::size_t column, const std::string& prefix)
      : ParseError(line, column, "undefined prefix '" + prefix + ":'"), prefix_(prefix) {}
  const std::string& prefix() const noexcept { return prefix_; }

 private:
  std::string prefix_;
};

class UnknownVariable : public Error {
 public:
  explicit UnknownVariable(const std::string& name)
      : Error("unknown variable ?" + name), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

}  // namespace condyr
