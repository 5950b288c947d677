#pragma once

#include <stdexcept>
#include <string>

namespace racegame {

// Base for everything thrown by the library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed user input: bad config values, unparsable files, violated
// call preconditions that stem from data rather than from library bugs.
// The CLI maps these to exit code 1, everything else to exit code 2.
class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error(what) {}
};

}  // namespace racegame
