#pragma once

#include <stdexcept>
#include <string>

namespace phyzzy {

// Error categories map onto CLI exit codes: usage 1, data validation 2,
// training failure 3.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TrainError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace phyzzy
