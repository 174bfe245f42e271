#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace farm {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A CSV row sequence with a missing, duplicated or out-of-order hour.
class IngestError : public Error {
 public:
  IngestError(std::size_t index, const std::string& what);
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class HorizonError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

class NumericsError : public Error {
 public:
  using Error::Error;
};

class DegenerateError : public Error {
 public:
  using Error::Error;
};

class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace farm
