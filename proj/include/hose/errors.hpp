#pragma once

#include <stdexcept>
#include <string>

namespace hose {

/// Stable error codes surfaced by the CLI as "ERROR <code>: <message>".
enum class ErrorCode {
  InvalidMode,
  InvalidRank,
  InvalidArgument,
  ShapeError,
  CapacityError,
  RankDeficient,
  DegenerateSpectrum,
  ThresholdAtKink,
  EmptyActiveSet,
  GsureUndefined,
  NonFinite,
  IoError,
};

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidMode: return "InvalidMode";
    case ErrorCode::InvalidRank: return "InvalidRank";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ShapeError: return "ShapeError";
    case ErrorCode::CapacityError: return "CapacityError";
    case ErrorCode::RankDeficient: return "RankDeficient";
    case ErrorCode::DegenerateSpectrum: return "DegenerateSpectrum";
    case ErrorCode::ThresholdAtKink: return "ThresholdAtKink";
    case ErrorCode::EmptyActiveSet: return "EmptyActiveSet";
    case ErrorCode::GsureUndefined: return "GsureUndefined";
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  const char* code_name() const noexcept { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

}  // namespace hose
