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

#include <string>
#include <string_view>

#include "augnas/policy.hpp"

namespace augnas {

// JSON document
//   {"eta": .., "op_set": [names], "sub_policies": [[{"z": [..], "p": [..], "mu": [..]} x K] x L]}
// Numbers are written as the shortest decimal that round-trips the float32
// value, so save -> load is exact.
std::string policy_to_json(const Policy& policy);
// Throws ParseError with the offending location on malformed input.
Policy policy_from_json(std::string_view text);

}  // namespace augnas
