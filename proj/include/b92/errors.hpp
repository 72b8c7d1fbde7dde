#pragma once

#include <stdexcept>
#include <string>

namespace b92 {

// Input outside an operation's mathematical domain (bad angle, unnormalized state, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A session/experiment description that cannot be run as written.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// The eavesdroppers cannot match Bob's honest detection rate at this placement.
class InfeasibleAttack : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class UnsupportedConfiguration : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace b92
