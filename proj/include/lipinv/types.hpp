#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lipinv {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base of every error thrown by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Map DSL syntax or semantic error; carries the byte offset and line/column.
class ParseError : public Error {
 public:
  ParseError(const std::string& message, std::size_t offset, std::size_t line,
             std::size_t column)
      : Error("parse error at " + std::to_string(line) + ":" +
              std::to_string(column) + ": " + message),
        offset_(offset),
        line_(line),
        column_(column) {}

  std::size_t offset() const { return offset_; }
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t offset_;
  std::size_t line_;
  std::size_t column_;
};

/// Input that violates a documented precondition (dimensions, option ranges).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Floating-point failure during evaluation (near-zero division, overflow, NaN).
class NumericError : public Error {
 public:
  NumericError(const std::string& message, int node_id = -1)
      : Error(node_id >= 0 ? message + " (node " + std::to_string(node_id) + ")"
                           : message),
        node_id_(node_id) {}

  /// Offending DAG node, or -1 when the failure is not tied to a node.
  int node_id() const { return node_id_; }

 private:
  int node_id_;
};

/// Too many near-active kinks to enumerate their sign patterns.
class PatternExplosionError : public Error {
 public:
  PatternExplosionError(std::size_t active, std::size_t cap)
      : Error("pattern explosion: " + std::to_string(active) +
              " near-active nonsmooth nodes exceed the cap of " +
              std::to_string(cap)),
        active_(active),
        cap_(cap) {}

  std::size_t active_count() const { return active_; }
  std::size_t cap() const { return cap_; }

 private:
  std::size_t active_;
  std::size_t cap_;
};

}  // namespace lipinv
