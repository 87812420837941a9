#pragma once

#include <stdexcept>
#include <string>

namespace ccrn {

// Invalid model file or inconsistent network/parameter data.
class ModelError : public std::runtime_error {
 public:
  explicit ModelError(const std::string& what) : std::runtime_error(what) {}
};

// Operation invoked outside its contract (bad flags, wrong method for the
// model class, malformed perturbation, ...).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// Internal inconsistency that should be unreachable.
class InternalError : public std::logic_error {
 public:
  explicit InternalError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace ccrn
