#pragma once

#include <stdexcept>
#include <string>

namespace rsv {

/// Raised for malformed models, inconsistent data and out-of-domain arguments.
class Error : public std::runtime_error {
   public:
    using std::runtime_error::runtime_error;
};

}  // namespace rsv
