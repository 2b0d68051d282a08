#pragma once

#include <compare>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hsda {

/// Two-level label: index of the parent node and global index of the child
/// (leaf) category, both relative to a Hierarchy.
struct HierLabel {
  int parent = 0;
  int child = 0;

  friend auto operator<=>(const HierLabel&, const HierLabel&) = default;
};

/// Root -> parents -> children tree. Child lists are disjoint, so every
/// child determines its parent. Children are numbered globally in the order
/// they are listed.
class Hierarchy {
 public:
  struct Node {
    std::string name;
    std::vector<std::string> children;
  };

  explicit Hierarchy(std::vector<Node> parents);

  /// Parses `parent:child,child;parent:child,...`.
  static Hierarchy parse(std::string_view text);
  std::string to_string() const;

  int parent_count() const noexcept { return static_cast<int>(parent_names_.size()); }
  int child_count() const noexcept { return static_cast<int>(child_names_.size()); }

  const std::string& parent_name(int parent) const;
  const std::string& child_name(int child) const;
  const std::vector<int>& children_of(int parent) const;
  int parent_of(int child) const;

  std::optional<int> find_parent(std::string_view name) const;
  std::optional<int> find_child(std::string_view name) const;

  bool consistent(const HierLabel& label) const noexcept;

  /// Label for a child index, with its parent filled in.
  HierLabel label_for_child(int child) const;

  friend bool operator==(const Hierarchy&, const Hierarchy&) = default;

 private:
  std::vector<std::string> parent_names_;
  std::vector<std::string> child_names_;
  std::vector<std::vector<int>> children_;
  std::vector<int> parent_of_;
};

/// Throws a validation error naming the first row whose label does not fit
/// the hierarchy.
void validate_labels(const Hierarchy& hierarchy, std::span<const HierLabel> labels);

std::vector<int> parent_labels(std::span<const HierLabel> labels);
std::vector<int> child_labels(std::span<const HierLabel> labels);

}  // namespace hsda
