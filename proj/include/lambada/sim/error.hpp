#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace lambada {

enum class ErrorKind {
  // substrate
  kKeyTooLong,
  kThrottled,
  kNoSuchBucket,
  kNotFound,
  kInvalidRange,
  kConcurrencyLimitExceeded,
  kPayloadTooLarge,
  kTimeout,
  kInvalidArgument,
  kConfigError,
  // columnar format
  kTypeMismatch,
  kEmptyRowGroup,
  kBadMagic,
  kCorruptFooter,
  kCorruptChunk,
  // scan / engine
  kUnknownColumn,
  kNonAssociativeReduce,
  kWorkerError,
  kOutOfMemory,
  // econ
  kDegenerateInput,
};

std::string_view error_kind_name(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(error_kind_name(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

inline std::string_view error_kind_name(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kKeyTooLong: return "KeyTooLong";
    case ErrorKind::kThrottled: return "Throttled";
    case ErrorKind::kNoSuchBucket: return "NoSuchBucket";
    case ErrorKind::kNotFound: return "NotFound";
    case ErrorKind::kInvalidRange: return "InvalidRange";
    case ErrorKind::kConcurrencyLimitExceeded: return "ConcurrencyLimitExceeded";
    case ErrorKind::kPayloadTooLarge: return "PayloadTooLarge";
    case ErrorKind::kTimeout: return "Timeout";
    case ErrorKind::kInvalidArgument: return "InvalidArgument";
    case ErrorKind::kConfigError: return "ConfigError";
    case ErrorKind::kTypeMismatch: return "TypeMismatch";
    case ErrorKind::kEmptyRowGroup: return "EmptyRowGroup";
    case ErrorKind::kBadMagic: return "BadMagic";
    case ErrorKind::kCorruptFooter: return "CorruptFooter";
    case ErrorKind::kCorruptChunk: return "CorruptChunk";
    case ErrorKind::kUnknownColumn: return "UnknownColumn";
    case ErrorKind::kNonAssociativeReduce: return "NonAssociativeReduce";
    case ErrorKind::kWorkerError: return "WorkerError";
    case ErrorKind::kOutOfMemory: return "OutOfMemory";
    case ErrorKind::kDegenerateInput: return "DegenerateInput";
  }
  return "Unknown";
}

}  // namespace lambada
