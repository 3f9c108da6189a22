// breathid/error.h

// Copyright 2026  The breathid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef BREATHID_ERROR_H_
#define BREATHID_ERROR_H_

#include <stdexcept>
#include <string>

namespace breathid {

/// Error categories. The numeric values double as process exit codes for
/// the command-line tool, so they must stay stable.
enum class ErrorCode : int {
  kInvalidArgument = 2,    // bad parameter, config key or precondition
  kNotFound = 3,           // missing file or upstream artifact
  kDimensionMismatch = 4,  // stored model does not fit the input
  kFormat = 5,             // malformed WAV, container or CSV
  kNumerical = 6,          // non-finite loss or similar
  kIo = 7,                 // read/write failure on an existing path
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string &what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void Fail(ErrorCode code, const std::string &what) {
  throw Error(code, what);
}

inline void Require(bool condition, const std::string &what,
                    ErrorCode code = ErrorCode::kInvalidArgument) {
  if (!condition) throw Error(code, what);
}

}  // namespace breathid

#endif  // BREATHID_ERROR_H_
