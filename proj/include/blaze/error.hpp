#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blaze {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad cluster configuration (rank out of range, duplicate rank, malformed peer).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Peer loss, connection failure, or socket I/O failure.
class TransportError : public Error {
 public:
  using Error::Error;
};

class DecodeError : public Error {
 public:
  DecodeError(const std::string& what, std::size_t offset)
      : Error(what + " at byte offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// A MapReduce job failed on some worker; every worker of the job raises it.
class JobError : public Error {
 public:
  using Error::Error;
};

class InputError : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

class UsageError : public Error {
 public:
  using Error::Error;
};

// Raised when an API precondition is violated and contract checks are enabled.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

}  // namespace blaze
