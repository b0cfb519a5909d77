#pragma once

#include <stdexcept>
#include <string>

namespace iproj {

/// Raised for malformed or out-of-contract inputs (shape mismatches,
/// out-of-domain indices, unparsable files).
class InputError : public std::invalid_argument {
 public:
  explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

}  // namespace iproj
