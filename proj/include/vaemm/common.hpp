// vaemm/common.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_COMMON_HPP_
#define VAEMM_COMMON_HPP_

#include <stdexcept>
#include <string>

namespace vaemm {

inline constexpr const char* kVersion = "0.1.0";

/// Bad user input: malformed files, inconsistent dimensions, invalid config.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Filesystem / format failures while reading or writing artifacts.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Non-finite values escaping the numerical core.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

}  // namespace vaemm

#endif  // VAEMM_COMMON_HPP_
