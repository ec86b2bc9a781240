#pragma once

#include <stdexcept>
#include <string>

namespace patt {

/*
 * Error taxonomy used across the library. The CLI maps these to process
 * exit codes: usage_error -> 1, numerical_error -> 2, io_error -> 3.
 */
class usage_error : public std::runtime_error {
 public:
  explicit usage_error(const std::string& what) : std::runtime_error(what) {}
};

class numerical_error : public std::runtime_error {
 public:
  explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

class io_error : public std::runtime_error {
 public:
  explicit io_error(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace patt
