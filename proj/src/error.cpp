#include "retarget/error.hpp"

namespace retarget {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::EmptyInput: return "empty input";
    case ErrorKind::Index: return "index";
    case ErrorKind::Solver: return "solver";
    case ErrorKind::Io: return "io";
  }
  return "unknown";
}

}  // namespace retarget
