#pragma once

#include <stdexcept>
#include <string>

namespace chainscan {

/// Input or geometry does not have the shape an operation requires.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A communication slot was used against its single-writer contract.
class ProtocolError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// A bounded busy-wait ran out of budget.
class LivenessFault : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace chainscan
