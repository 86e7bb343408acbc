#pragma once

#include <stdexcept>
#include <string>

namespace poseconsist {

// Bad invocation or configuration. The CLI maps this to exit code 2.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Missing, malformed or inconsistent input data. Exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace poseconsist
