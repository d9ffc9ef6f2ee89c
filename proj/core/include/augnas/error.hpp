/* Copyright 2026 The augnas Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <stdexcept>
#include <string>

namespace augnas {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Incompatible tensor shapes passed to an operation.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Argument outside its documented domain.
class ValueError : public Error {
 public:
  using Error::Error;
};

// Malformed text or binary input.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Tape misuse: recording on a frozen tape, second backward, non-scalar loss.
class TapeError : public Error {
 public:
  using Error::Error;
};

// NaN or Inf detected during optimization.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace augnas
