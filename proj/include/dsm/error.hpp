#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dsm {

// Base for every error the engine raises. Callers that only care about
// "something in dsm failed" catch this.
class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Glucose value outside the accepted sensor window.
class rejected_reading : public error {
 public:
  using error::error;
};

// Operation called without the inputs its contract requires.
class incomplete_input : public error {
 public:
  using error::error;
};

class template_error : public error {
 public:
  using error::error;
};

class validation_error : public error {
 public:
  using error::error;
};

class not_found : public error {
 public:
  using error::error;
};

// Same (reason, source_ref) awarded twice, or a conflicting re-import.
class conflict : public error {
 public:
  using error::error;
};

class unauthorized : public error {
 public:
  using error::error;
};

class no_data : public error {
 public:
  using error::error;
};

// Input file could not be parsed; carries the 1-based line number.
class parse_error : public error {
 public:
  parse_error(std::size_t line, const std::string& what)
      : error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace dsm
