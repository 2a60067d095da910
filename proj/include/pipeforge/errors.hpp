/*
 * Copyright 2026 The PipeForge Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef PIPEFORGE_ERRORS_HPP_
#define PIPEFORGE_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace pipeforge {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Data ingestion.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t row, std::size_t column)
      : Error("parse error at row " + std::to_string(row) + ", column " +
              std::to_string(column) + ": " + what),
        row_(row),
        column_(column) {}
  std::size_t row() const { return row_; }
  std::size_t column() const { return column_; }

 private:
  std::size_t row_;
  std::size_t column_;
};

class MissingTargetError : public Error {
 public:
  explicit MissingTargetError(const std::string& column)
      : Error("target column '" + column + "' not found") {}
};

class TooFewRowsError : public Error {
 public:
  explicit TooFewRowsError(const std::string& what) : Error(what) {}
};

// Metrics.
class ZeroDenominatorError : public Error {
 public:
  explicit ZeroDenominatorError(const std::string& what) : Error(what) {}
};

class DegenerateClassError : public Error {
 public:
  explicit DegenerateClassError(const std::string& what) : Error(what) {}
};

// Operations.
class InvalidHyperparamError : public Error {
 public:
  explicit InvalidHyperparamError(const std::string& what) : Error(what) {}
};

class SingularFitError : public Error {
 public:
  explicit SingularFitError(const std::string& what) : Error(what) {}
};

class SchemaMismatchError : public Error {
 public:
  explicit SchemaMismatchError(const std::string& what) : Error(what) {}
};

class DataShapeError : public Error {
 public:
  explicit DataShapeError(const std::string& what) : Error(what) {}
};

class UnknownOperationError : public Error {
 public:
  explicit UnknownOperationError(const std::string& operation_id)
      : Error("unknown operation '" + operation_id + "'") {}
};

/// Raised when a node's operation fails to fit; carries the node id so the
/// caller can attribute the failure inside a larger pipeline.
class OperationFitError : public Error {
 public:
  OperationFitError(int node_id, const std::string& what)
      : Error("node " + std::to_string(node_id) + ": " + what),
        node_id_(node_id) {}
  int node_id() const { return node_id_; }

 private:
  int node_id_;
};

// Pipeline structure.
class PipelineValidationError : public Error {
 public:
  explicit PipelineValidationError(const std::string& rule)
      : Error("pipeline validation failed: " + rule), rule_(rule) {}
  const std::string& rule() const { return rule_; }

 private:
  std::string rule_;
};

// Composer.
class InitialAssumptionInvalidError : public Error {
 public:
  InitialAssumptionInvalidError(std::size_t index, const std::string& rule)
      : Error("initial pipeline #" + std::to_string(index) +
              " is invalid: " + rule) {}
};

class ReproductionStallError : public Error {
 public:
  explicit ReproductionStallError(const std::string& what) : Error(what) {}
};

// Sensitivity analysis.
class NodeNotModifiableError : public Error {
 public:
  explicit NodeNotModifiableError(int node_id)
      : Error("node " + std::to_string(node_id) +
              " cannot be modified without invalidating the pipeline"),
        node_id_(node_id) {}
  int node_id() const { return node_id_; }

 private:
  int node_id_;
};

// Serialization.
class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what) {}
};

class UnserializableStateError : public Error {
 public:
  explicit UnserializableStateError(const std::string& what) : Error(what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& location, const std::string& what)
      : Error("schema error at " + location + ": " + what) {}
};

class DanglingReferenceError : public Error {
 public:
  explicit DanglingReferenceError(const std::string& what) : Error(what) {}
};

}  // namespace pipeforge

#endif  // PIPEFORGE_ERRORS_HPP_
