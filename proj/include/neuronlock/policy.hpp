// Copyright 2026 The neuronlock Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Access-policy trees and the disjoint neuron subsets they guard.
//
// Policies use a prefix grammar:
//
//   expr := and(expr, ...) | or(expr, ...) | th(k, expr, ...) | attribute
//
// where an attribute is an exact-match "Key=Value" token. A policy file holds
// one `task := expr` line per task; blank lines and `#` comments are ignored.

#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "neuronlock/selector.hpp"

namespace neuronlock {

struct PolicyNode {
  enum class Kind : std::uint8_t { kAnd, kOr, kThreshold, kLeaf };

  Kind kind = Kind::kLeaf;
  std::uint32_t k = 1;    // threshold, only for kThreshold
  std::string attribute;  // only for kLeaf
  std::vector<PolicyNode> children;

  static PolicyNode leaf(std::string attribute);
  static PolicyNode all_of(std::vector<PolicyNode> children);
  static PolicyNode any_of(std::vector<PolicyNode> children);
  static PolicyNode threshold(std::uint32_t k, std::vector<PolicyNode> children);

  // Number of satisfied children required at this gate.
  std::uint32_t required() const;
  std::size_t leaf_count() const;

  bool operator==(const PolicyNode&) const = default;
};

// Throws kInvalidPolicy on syntax errors or structural violations.
PolicyNode parse_policy(std::string_view text);
std::string to_string(const PolicyNode& policy);
void validate_policy(const PolicyNode& policy);

using AttributeSet = std::set<std::string>;
bool satisfies(const PolicyNode& policy, const AttributeSet& attributes);

// Ordered by task name.
using TaskPolicies = std::map<std::string, PolicyNode>;
TaskPolicies parse_policy_file(std::string_view text);

struct Subset {
  std::uint32_t id = 0;
  std::vector<std::string> owners;  // sorted; empty for the common subset
  std::vector<std::uint64_t> neurons;

  bool common() const { return owners.empty(); }
  bool operator==(const Subset&) const = default;
};

struct SubsetPartition {
  std::vector<std::string> tasks;  // sorted; bit i of an owner bitmap is tasks[i]
  std::uint64_t total_neurons = 0;
  std::vector<Subset> subsets;

  std::uint32_t owner_bitmap(const Subset& s) const;
  // subset id per global neuron
  std::vector<std::uint32_t> neuron_to_subset() const;
};

inline constexpr std::size_t kMaxTasks = 32;

// Groups neurons by their exact owner-task set. Subsets are ordered by their
// sorted owner lists compared lexicographically, the common subset last.
// Empty subsets are omitted. Throws kIndexOutOfRange, kInvalidArgument for
// more than kMaxTasks tasks.
SubsetPartition decompose_subsets(const std::map<std::string, std::vector<std::uint64_t>>& sets,
                                  std::uint64_t total_neurons);
SubsetPartition decompose_subsets(const SelectionResult& selection, std::uint64_t total_neurons);

// Neuron-level layer of the policy tree: an owner subset is guarded by the OR
// of its owners' user-level policies, the common subset by the OR of all of
// them. Single-child ORs collapse. Throws kMissingTaskPolicy.
std::map<std::uint32_t, PolicyNode> build_policies(const SubsetPartition& partition,
                                                   const TaskPolicies& user_policies);

}  // namespace neuronlock
