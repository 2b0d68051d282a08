#include "hsda/hierarchy.hpp"

#include <algorithm>
#include <set>

#include "hsda/error.hpp"

namespace hsda {

namespace {

[[noreturn]] void invalid(const std::string& what) {
  throw Error(ErrorKind::validation, "validation error: " + what);
}

void check_name(std::string_view name) {
  if (name.empty()) invalid("empty node name in hierarchy");
  for (char c : name) {
    if (c == ',' || c == ':' || c == ';' || c == ' ' || c == '\t' || c == '\n' ||
        c == '\r') {
      invalid("node name '" + std::string(name) +
              "' contains a reserved character (',', ':', ';' or whitespace)");
    }
  }
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    out.push_back(text.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace

Hierarchy::Hierarchy(std::vector<Node> parents) {
  if (parents.empty()) invalid("hierarchy needs at least one parent");
  std::set<std::string, std::less<>> parent_seen;
  std::set<std::string, std::less<>> child_seen;
  for (auto& node : parents) {
    check_name(node.name);
    if (!parent_seen.insert(node.name).second) {
      invalid("duplicate parent '" + node.name + "'");
    }
    if (node.children.empty()) invalid("parent '" + node.name + "' has no children");
    const int parent = static_cast<int>(parent_names_.size());
    parent_names_.push_back(std::move(node.name));
    children_.emplace_back();
    for (auto& child : node.children) {
      check_name(child);
      if (!child_seen.insert(child).second) {
        invalid("child '" + child + "' is listed more than once");
      }
      children_.back().push_back(static_cast<int>(child_names_.size()));
      child_names_.push_back(std::move(child));
      parent_of_.push_back(parent);
    }
  }
}

Hierarchy Hierarchy::parse(std::string_view text) {
  std::vector<Node> nodes;
  for (std::string_view group : split(text, ';')) {
    const std::size_t colon = group.find(':');
    if (colon == std::string_view::npos) {
      invalid("hierarchy group '" + std::string(group) + "' lacks 'parent:children'");
    }
    Node node;
    node.name = std::string(group.substr(0, colon));
    for (std::string_view child : split(group.substr(colon + 1), ',')) {
      node.children.emplace_back(child);
    }
    nodes.push_back(std::move(node));
  }
  return Hierarchy(std::move(nodes));
}

std::string Hierarchy::to_string() const {
  std::string out;
  for (int p = 0; p < parent_count(); ++p) {
    if (p > 0) out += ';';
    out += parent_names_[static_cast<std::size_t>(p)];
    out += ':';
    bool first = true;
    for (int c : children_of(p)) {
      if (!first) out += ',';
      out += child_names_[static_cast<std::size_t>(c)];
      first = false;
    }
  }
  return out;
}

const std::string& Hierarchy::parent_name(int parent) const {
  if (parent < 0 || parent >= parent_count()) {
    throw Error(ErrorKind::range, "range error: parent index out of range");
  }
  return parent_names_[static_cast<std::size_t>(parent)];
}

const std::string& Hierarchy::child_name(int child) const {
  if (child < 0 || child >= child_count()) {
    throw Error(ErrorKind::range, "range error: child index out of range");
  }
  return child_names_[static_cast<std::size_t>(child)];
}

const std::vector<int>& Hierarchy::children_of(int parent) const {
  if (parent < 0 || parent >= parent_count()) {
    throw Error(ErrorKind::range, "range error: parent index out of range");
  }
  return children_[static_cast<std::size_t>(parent)];
}

int Hierarchy::parent_of(int child) const {
  if (child < 0 || child >= child_count()) {
    throw Error(ErrorKind::range, "range error: child index out of range");
  }
  return parent_of_[static_cast<std::size_t>(child)];
}

std::optional<int> Hierarchy::find_parent(std::string_view name) const {
  const auto it = std::find(parent_names_.begin(), parent_names_.end(), name);
  if (it == parent_names_.end()) return std::nullopt;
  return static_cast<int>(it - parent_names_.begin());
}

std::optional<int> Hierarchy::find_child(std::string_view name) const {
  const auto it = std::find(child_names_.begin(), child_names_.end(), name);
  if (it == child_names_.end()) return std::nullopt;
  return static_cast<int>(it - child_names_.begin());
}

bool Hierarchy::consistent(const HierLabel& label) const noexcept {
  return label.child >= 0 && label.child < child_count() && label.parent >= 0 &&
         label.parent < parent_count() &&
         parent_of_[static_cast<std::size_t>(label.child)] == label.parent;
}

HierLabel Hierarchy::label_for_child(int child) const {
  return HierLabel{parent_of(child), child};
}

void validate_labels(const Hierarchy& hierarchy, std::span<const HierLabel> labels) {
  for (std::size_t row = 0; row < labels.size(); ++row) {
    if (!hierarchy.consistent(labels[row])) {
      invalid("row " + std::to_string(row) + " carries label (" +
              std::to_string(labels[row].parent) + ", " +
              std::to_string(labels[row].child) + ") inconsistent with the hierarchy");
    }
  }
}

std::vector<int> parent_labels(std::span<const HierLabel> labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.parent);
  return out;
}

std::vector<int> child_labels(std::span<const HierLabel> labels) {
  std::vector<int> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back(l.child);
  return out;
}

}  // namespace hsda
