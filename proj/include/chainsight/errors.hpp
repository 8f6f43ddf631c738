#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace chainsight {

// Base of every error raised by the pipeline. The CLI maps ValidationError to
// exit code 1 and IoError to exit code 2.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ValidationError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

// ingest

class MalformedRecord : public ValidationError {
  public:
    MalformedRecord(std::uint64_t line_no, const std::string& why)
        : ValidationError("malformed record at line " + std::to_string(line_no) + ": " + why),
          line_no_(line_no) {}
    std::uint64_t line_no() const { return line_no_; }

  private:
    std::uint64_t line_no_;
};

class MissingField : public ValidationError {
  public:
    MissingField(std::uint64_t line_no, const std::string& name)
        : ValidationError("line " + std::to_string(line_no) + ": missing field '" + name + "'"),
          name_(name) {}
    const std::string& name() const { return name_; }

  private:
    std::string name_;
};

class RpcError : public IoError {
  public:
    RpcError(int code, const std::string& what) : IoError("rpc error " + std::to_string(code) + ": " + what), code_(code) {}
    int code() const { return code_; }

  private:
    int code_;
};

class RangeGap : public IoError {
  public:
    explicit RangeGap(std::uint64_t number)
        : IoError("node has no block " + std::to_string(number)), number_(number) {}
    std::uint64_t number() const { return number_; }

  private:
    std::uint64_t number_;
};

class UnknownSeries : public ValidationError {
  public:
    explicit UnknownSeries(const std::string& name) : ValidationError("unknown series '" + name + "'") {}
};

// ledger

class BlockOutOfOrder : public ValidationError {
  public:
    BlockOutOfOrder(std::uint64_t number, std::uint64_t last)
        : ValidationError("block " + std::to_string(number) + " is not after last applied block " +
                          std::to_string(last)) {}
};

// properties / distributions

class CoverageGap : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class TooShort : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class UnknownFeature : public ValidationError {
  public:
    explicit UnknownFeature(const std::string& name) : ValidationError("unknown account feature '" + name + "'") {}
};

// datasetgen

class DegenerateSeries : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class NonScalarProperty : public ValidationError {
  public:
    explicit NonScalarProperty(const std::string& name)
        : ValidationError("property '" + name + "' is tensor-valued; the matrix model needs scalars") {}
};

class EmptySplit : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class MissingProperty : public ValidationError {
  public:
    explicit MissingProperty(const std::string& name) : ValidationError("missing property '" + name + "'") {}
};

class BadMagic : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class VersionMismatch : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class TruncatedPayload : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

// modeling

class TargetNotInWindow : public ValidationError {
  public:
    explicit TargetNotInWindow(const std::string& target)
        : ValidationError("target '" + target + "' is not among the windowed inputs") {}
};

class ShapeMismatch : public ValidationError {
  public:
    using ValidationError::ValidationError;
};

class NonFiniteGradient : public ValidationError {
  public:
    NonFiniteGradient() : ValidationError("non-finite gradient") {}
};

class EmptyDataset : public ValidationError {
  public:
    EmptyDataset() : ValidationError("dataset has no samples") {}
};

// cli

class MissingInput : public ValidationError {
  public:
    MissingInput(const std::string& stage, const std::string& what)
        : ValidationError(stage + ": missing input " + what) {}
};

class ConfigError : public ValidationError {
  public:
    ConfigError(const std::string& field, const std::string& why)
        : ValidationError("config field '" + field + "': " + why) {}
};

} // namespace chainsight
