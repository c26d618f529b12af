#include "recbf/error.hpp"

namespace recbf {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::NonFiniteEvaluation: return "non-finite evaluation";
    case ErrorCode::NestingDepthExceeded: return "nesting depth exceeded";
    case ErrorCode::UnknownSystem: return "unknown system";
    case ErrorCode::WrongSystem: return "wrong system";
    case ErrorCode::UnknownExperiment: return "unknown experiment";
    case ErrorCode::Config: return "config error";
    case ErrorCode::Io: return "i/o error";
  }
  return "unknown error";
}

}  // namespace recbf
