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

#include "neuronlock/policy.hpp"

#include <algorithm>
#include <cctype>

namespace neuronlock {

PolicyNode PolicyNode::leaf(std::string attribute) {
  PolicyNode n;
  n.kind = Kind::kLeaf;
  n.attribute = std::move(attribute);
  return n;
}

PolicyNode PolicyNode::all_of(std::vector<PolicyNode> children) {
  PolicyNode n;
  n.kind = Kind::kAnd;
  n.children = std::move(children);
  return n;
}

PolicyNode PolicyNode::any_of(std::vector<PolicyNode> children) {
  PolicyNode n;
  n.kind = Kind::kOr;
  n.children = std::move(children);
  return n;
}

PolicyNode PolicyNode::threshold(std::uint32_t k, std::vector<PolicyNode> children) {
  PolicyNode n;
  n.kind = Kind::kThreshold;
  n.k = k;
  n.children = std::move(children);
  return n;
}

std::uint32_t PolicyNode::required() const {
  switch (kind) {
    case Kind::kAnd:
      return static_cast<std::uint32_t>(children.size());
    case Kind::kOr:
      return 1;
    case Kind::kThreshold:
      return k;
    case Kind::kLeaf:
      return 1;
  }
  return 1;
}

std::size_t PolicyNode::leaf_count() const {
  if (kind == Kind::kLeaf) return 1;
  std::size_t n = 0;
  for (const auto& c : children) n += c.leaf_count();
  return n;
}

namespace {

bool is_attr_char(char c) {
  return c != '(' && c != ')' && c != ',' && !std::isspace(static_cast<unsigned char>(c));
}

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  PolicyNode parse() {
    PolicyNode n = expr();
    skip_ws();
    if (pos_ != text_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  [[noreturn]] void fail(const std::string& why) {
    throw Error(Errc::kInvalidPolicy, why + " at offset " + std::to_string(pos_) + " in '" +
                                          std::string(text_) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool consume(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  std::string token() {
    skip_ws();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && is_attr_char(text_[pos_])) ++pos_;
    if (start == pos_) fail("expected an attribute or gate");
    return std::string(text_.substr(start, pos_ - start));
  }

  std::vector<PolicyNode> children() {
    std::vector<PolicyNode> out;
    do {
      out.push_back(expr());
    } while (consume(','));
    if (!consume(')')) fail("expected ')'");
    return out;
  }

  PolicyNode expr() {
    std::string tok = token();
    skip_ws();
    const bool call = pos_ < text_.size() && text_[pos_] == '(';
    if (!call) return PolicyNode::leaf(std::move(tok));
    ++pos_;
    if (tok == "and") return PolicyNode::all_of(children());
    if (tok == "or") return PolicyNode::any_of(children());
    if (tok == "th") {
      std::string k = token();
      if (!std::all_of(k.begin(), k.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); }) ||
          k.size() > 9) {
        fail("threshold must be a positive integer");
      }
      if (!consume(',')) fail("expected ',' after threshold");
      return PolicyNode::threshold(static_cast<std::uint32_t>(std::stoul(k)), children());
    }
    fail("unknown gate '" + tok + "'");
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

void validate_policy(const PolicyNode& p) {
  if (p.kind == PolicyNode::Kind::kLeaf) {
    NL_ENFORCE(!p.attribute.empty() && std::all_of(p.attribute.begin(), p.attribute.end(), is_attr_char),
               Errc::kInvalidPolicy, "malformed attribute '" + p.attribute + "'");
    NL_ENFORCE(p.children.empty(), Errc::kInvalidPolicy, "leaf with children");
    return;
  }
  NL_ENFORCE(!p.children.empty(), Errc::kInvalidPolicy, "gate without children");
  if (p.kind == PolicyNode::Kind::kThreshold) {
    NL_ENFORCE(p.k >= 1 && p.k <= p.children.size(), Errc::kInvalidPolicy,
               "threshold " + std::to_string(p.k) + " over " + std::to_string(p.children.size()) +
                   " children");
  }
  for (const auto& c : p.children) validate_policy(c);
}

PolicyNode parse_policy(std::string_view text) {
  PolicyNode n = Parser(text).parse();
  validate_policy(n);
  return n;
}

std::string to_string(const PolicyNode& p) {
  if (p.kind == PolicyNode::Kind::kLeaf) return p.attribute;
  std::string out;
  switch (p.kind) {
    case PolicyNode::Kind::kAnd:
      out = "and(";
      break;
    case PolicyNode::Kind::kOr:
      out = "or(";
      break;
    default:
      out = "th(" + std::to_string(p.k) + ",";
      break;
  }
  for (std::size_t i = 0; i < p.children.size(); ++i) {
    if (i) out += ",";
    out += to_string(p.children[i]);
  }
  return out + ")";
}

bool satisfies(const PolicyNode& p, const AttributeSet& attributes) {
  if (p.kind == PolicyNode::Kind::kLeaf) return attributes.count(p.attribute) > 0;
  std::uint32_t ok = 0;
  for (const auto& c : p.children) ok += satisfies(c, attributes) ? 1 : 0;
  return ok >= p.required();
}

TaskPolicies parse_policy_file(std::string_view text) {
  TaskPolicies out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t eol = text.find('\n');
    std::string_view line = text.substr(0, eol);
    text = eol == std::string_view::npos ? std::string_view{} : text.substr(eol + 1);
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t def = line.find(":=");
    NL_ENFORCE(def != std::string_view::npos, Errc::kInvalidPolicy,
               "line " + std::to_string(line_no) + ": expected 'task := policy'");
    std::string task(trim(line.substr(0, def)));
    NL_ENFORCE(!task.empty(), Errc::kInvalidPolicy, "line " + std::to_string(line_no) + ": empty task name");
    NL_ENFORCE(!out.count(task), Errc::kDuplicateTask, "line " + std::to_string(line_no) + ": task '" + task + "'");
    try {
      out.emplace(std::move(task), parse_policy(trim(line.substr(def + 2))));
    } catch (const Error& e) {
      throw Error(e.code(), "line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::uint32_t SubsetPartition::owner_bitmap(const Subset& s) const {
  std::uint32_t bits = 0;
  for (const auto& o : s.owners) {
    auto it = std::lower_bound(tasks.begin(), tasks.end(), o);
    bits |= 1u << (it - tasks.begin());
  }
  return bits;
}

std::vector<std::uint32_t> SubsetPartition::neuron_to_subset() const {
  std::vector<std::uint32_t> map(total_neurons, 0);
  for (const auto& s : subsets) {
    for (auto n : s.neurons) map[n] = s.id;
  }
  return map;
}

SubsetPartition decompose_subsets(const std::map<std::string, std::vector<std::uint64_t>>& sets,
                                  std::uint64_t total_neurons) {
  NL_ENFORCE(sets.size() <= kMaxTasks, Errc::kInvalidArgument,
             std::to_string(sets.size()) + " tasks exceed the owner bitmap width");
  SubsetPartition part;
  part.total_neurons = total_neurons;
  for (const auto& [task, _] : sets) part.tasks.push_back(task);

  std::vector<std::uint32_t> owners(total_neurons, 0);
  std::uint32_t bit = 0;
  for (const auto& [task, neurons] : sets) {
    for (auto n : neurons) {
      NL_ENFORCE(n < total_neurons, Errc::kIndexOutOfRange,
                 "task '" + task + "' selects neuron " + std::to_string(n) + " of " +
                     std::to_string(total_neurons));
      owners[n] |= 1u << bit;
    }
    ++bit;
  }

  std::map<std::uint32_t, std::vector<std::uint64_t>> groups;
  for (std::uint64_t n = 0; n < total_neurons; ++n) groups[owners[n]].push_back(n);

  for (auto& [mask, neurons] : groups) {
    Subset s;
    for (std::uint32_t i = 0; i < part.tasks.size(); ++i) {
      if (mask & (1u << i)) s.owners.push_back(part.tasks[i]);
    }
    s.neurons = std::move(neurons);
    part.subsets.push_back(std::move(s));
  }
  std::sort(part.subsets.begin(), part.subsets.end(), [](const Subset& a, const Subset& b) {
    if (a.common() != b.common()) return b.common();
    return a.owners < b.owners;
  });
  for (std::uint32_t i = 0; i < part.subsets.size(); ++i) part.subsets[i].id = i;
  return part;
}

SubsetPartition decompose_subsets(const SelectionResult& selection, std::uint64_t total_neurons) {
  std::map<std::string, std::vector<std::uint64_t>> sets;
  for (const auto& [task, sel] : selection.sets) sets.emplace(task, sel.neurons);
  return decompose_subsets(sets, total_neurons);
}

std::map<std::uint32_t, PolicyNode> build_policies(const SubsetPartition& partition,
                                                   const TaskPolicies& user_policies) {
  auto policy_of = [&](const std::string& task) -> const PolicyNode& {
    auto it = user_policies.find(task);
    NL_ENFORCE(it != user_policies.end(), Errc::kMissingTaskPolicy, "task '" + task + "'");
    return it->second;
  };
  auto any = [](std::vector<PolicyNode> children) {
    return children.size() == 1 ? std::move(children.front()) : PolicyNode::any_of(std::move(children));
  };

  std::map<std::uint32_t, PolicyNode> out;
  for (const auto& s : partition.subsets) {
    const auto& owners = s.common() ? partition.tasks : s.owners;
    NL_ENFORCE(!owners.empty(), Errc::kMissingTaskPolicy, "partition has no tasks");
    std::vector<PolicyNode> children;
    for (const auto& t : owners) children.push_back(policy_of(t));
    out.emplace(s.id, any(std::move(children)));
  }
  return out;
}

}  // namespace neuronlock
