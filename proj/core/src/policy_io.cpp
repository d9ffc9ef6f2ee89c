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

#include "augnas/policy_io.hpp"

#include <json.hpp>

#include "augnas/error.hpp"

namespace augnas {

using nlohmann::json;

namespace {

json tensor_json(const Tensor& t) {
  json arr = json::array();
  for (float v : t.values()) arr.push_back(v);
  return arr;
}

Tensor tensor_from(const json& node, std::size_t expected, const std::string& where) {
  if (!node.is_array() || node.size() != expected) {
    throw ParseError(where + ": expected an array of " + std::to_string(expected) + " numbers");
  }
  std::vector<float> values;
  values.reserve(expected);
  for (const auto& v : node) {
    if (!v.is_number()) throw ParseError(where + ": non-numeric entry");
    values.push_back(static_cast<float>(v.get<double>()));
  }
  return Tensor::vector(std::move(values));
}

}  // namespace

std::string policy_to_json(const Policy& policy) {
  json doc;
  doc["eta"] = policy.eta();
  json names = json::array();
  for (auto id : policy.op_set()) names.push_back(std::string(image_op(id).name));
  doc["op_set"] = names;
  json sps = json::array();
  for (const auto& sp : policy.sub_policies()) {
    json stages = json::array();
    for (const auto& st : sp.stages) {
      stages.push_back({{"z", tensor_json(st.z)}, {"p", tensor_json(st.p)}, {"mu", tensor_json(st.mu)}});
    }
    sps.push_back(stages);
  }
  doc["sub_policies"] = sps;
  return doc.dump(1) + "\n";
}

Policy policy_from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError("policy: " + std::string(e.what()));
  }
  if (!doc.is_object() || !doc.contains("eta") || !doc.contains("op_set") ||
      !doc.contains("sub_policies")) {
    throw ParseError("policy: expected object with eta, op_set and sub_policies");
  }
  std::vector<ImageOpId> ops;
  for (const auto& name : doc["op_set"]) {
    if (!name.is_string()) throw ParseError("policy: op_set entries must be strings");
    try {
      ops.push_back(image_op_by_name(name.get<std::string>()).id);
    } catch (const ValueError& e) {
      throw ParseError(std::string("policy: ") + e.what());
    }
  }
  const json& sps = doc["sub_policies"];
  if (!sps.is_array() || sps.empty() || !sps[0].is_array() || sps[0].empty()) {
    throw ParseError("policy: sub_policies must be a non-empty array of non-empty arrays");
  }
  if (!doc["eta"].is_number()) throw ParseError("policy: eta must be a number");
  const int L = static_cast<int>(sps.size());
  const int K = static_cast<int>(sps[0].size());
  Policy policy(ops, L, K, static_cast<float>(doc["eta"].get<double>()));
  for (int l = 0; l < L; ++l) {
    if (!sps[l].is_array() || static_cast<int>(sps[l].size()) != K) {
      throw ParseError("policy: sub_policies[" + std::to_string(l) + "] must have " +
                       std::to_string(K) + " stages");
    }
    for (int k = 0; k < K; ++k) {
      const json& st = sps[l][k];
      const std::string where = "policy: sub_policies[" + std::to_string(l) + "][" +
                                std::to_string(k) + "]";
      if (!st.is_object()) throw ParseError(where + ": expected an object");
      for (const char* key : {"z", "p", "mu"}) {
        if (!st.contains(key)) throw ParseError(where + ": missing '" + key + "'");
      }
      auto& stage = policy.stage(l, k);
      stage.z = tensor_from(st["z"], ops.size(), where + ".z");
      stage.p = tensor_from(st["p"], ops.size(), where + ".p");
      stage.mu = tensor_from(st["mu"], ops.size(), where + ".mu");
    }
  }
  return policy;
}

}  // namespace augnas
