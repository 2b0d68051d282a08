#include "hsda/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <set>

#include "hsda/error.hpp"

namespace hsda {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9E3779B97F4A7C15ULL);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

namespace {

std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t stream_id) {
  std::uint64_t state = seed;
  std::uint64_t mixed = splitmix64(state);
  state = mixed ^ stream_id;
  return splitmix64(state);
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::uint64_t stream_id)
    : engine_(stream_seed(seed, stream_id)) {}

std::uint64_t RandomStream::next_u64() { return engine_(); }

double RandomStream::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RandomStream::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t RandomStream::below(std::uint64_t n) {
  if (n == 0) return 0;
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

namespace {

[[noreturn]] void bad_config(const std::string& what) {
  throw Error(ErrorKind::configuration, "configuration error: " + what);
}

template <typename T>
void shuffle(std::vector<T>& items, RandomStream& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

void apply_givens(Eigen::MatrixXd& rotation, int a, int b, double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const Eigen::VectorXd row_a = rotation.row(a);
  const Eigen::VectorXd row_b = rotation.row(b);
  rotation.row(a) = c * row_a - s * row_b;
  rotation.row(b) = s * row_a + c * row_b;
}

// Stream ids. Instance streams pack (domain, parent, child) so every class
// of every domain draws from its own sequence.
constexpr std::uint64_t kGlobalStream = 1;
constexpr std::uint64_t kShuffleStream = 2;
constexpr std::uint64_t kParentStreamBase = 1ULL << 20;

std::uint64_t instance_stream(int domain, int parent, int child) {
  return (static_cast<std::uint64_t>(domain + 1) << 48) |
         (static_cast<std::uint64_t>(parent) << 24) | static_cast<std::uint64_t>(child);
}

constexpr double kSpreadDecay = 0.8;

}  // namespace

void validate(const SynthConfig& cfg) {
  if (cfg.n_parents < 1) bad_config("n_parents must be positive");
  if (cfg.children_per_parent < 1) bad_config("children_per_parent must be positive");
  if (cfg.source_instances_per_child < 1 || cfg.target_instances_per_child < 1) {
    bad_config("instances per child must be positive");
  }
  if (cfg.subspace_dim < 1) bad_config("subspace_dim must be positive");
  if (cfg.ambient_dim < 2 * cfg.subspace_dim) {
    bad_config("ambient_dim must be at least 2 * subspace_dim");
  }
  const int axes = (cfg.n_parents + 1) / 2;
  if (cfg.ambient_dim <= axes) {
    bad_config("ambient_dim leaves no room for child structure");
  }
  if (!(cfg.parent_separation > 0.0) || !(cfg.child_separation > 0.0)) {
    bad_config("separations must be positive");
  }
  if (!(cfg.cluster_spread >= 0.0) || !(cfg.noise >= 0.0)) {
    bad_config("spread and noise must be non-negative");
  }
  if (!(cfg.global_rotation >= 0.0) || !(cfg.per_parent_rotation >= 0.0) ||
      !(cfg.global_translation >= 0.0)) {
    bad_config("shift magnitudes must be non-negative");
  }
}

SynthResult synth_generate(const SynthConfig& cfg) {
  validate(cfg);
  const int P = cfg.n_parents;
  const int C = cfg.children_per_parent;
  const int D = cfg.ambient_dim;
  const int b = cfg.subspace_dim;
  const int axes = (P + 1) / 2;
  std::vector<std::string> warnings;

  if (axes + P * b > D) {
    warnings.push_back("parent blocks overlap: ambient_dim " + std::to_string(D) +
                       " < " + std::to_string(axes + P * b));
  }
  if ((C + 1) / 2 > b) {
    warnings.push_back("more child axes than subspace_dim; children share axes");
  }
  const double sigma = std::hypot(cfg.cluster_spread, cfg.noise);
  if (cfg.child_separation <= 2.0 * sigma) {
    warnings.push_back("child_separation within two standard deviations of spread and "
                       "noise; children overlap");
  }
  if (cfg.parent_separation <= cfg.child_separation) {
    warnings.push_back("parent_separation does not exceed child_separation");
  }

  // Layout: parent p sits at +/- parent_separation on axis p / 2 and owns the
  // block of `b` coordinates that follows the parent axes.
  std::vector<std::vector<int>> blocks(static_cast<std::size_t>(P));
  std::set<int> support;
  for (int a = 0; a < axes; ++a) support.insert(a);
  for (int p = 0; p < P; ++p) {
    for (int j = 0; j < b; ++j) {
      const int coord = axes + (p * b + j) % (D - axes);
      blocks[static_cast<std::size_t>(p)].push_back(coord);
      support.insert(coord);
    }
  }
  std::vector<int> free_coords;
  for (int i = 0; i < D; ++i) {
    if (!support.contains(i)) free_coords.push_back(i);
  }

  std::vector<Eigen::VectorXd> parent_centers;
  for (int p = 0; p < P; ++p) {
    Eigen::VectorXd center = Eigen::VectorXd::Zero(D);
    center(p / 2) = (p % 2 == 0 ? 1.0 : -1.0) * cfg.parent_separation;
    parent_centers.push_back(std::move(center));
  }

  // Global rotation on a random perfect pairing of coordinates, so every
  // vector turns by at most `global_rotation`.
  RandomStream global_rng(cfg.seed, kGlobalStream);
  Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(D, D);
  {
    std::vector<int> coords(static_cast<std::size_t>(D));
    std::iota(coords.begin(), coords.end(), 0);
    shuffle(coords, global_rng);
    for (std::size_t i = 0; i + 1 < coords.size(); i += 2) {
      const double angle = global_rng.uniform(-1.0, 1.0) * cfg.global_rotation;
      apply_givens(Q, coords[i], coords[i + 1], angle);
    }
  }
  // The translation moves the data along the coordinates that carry class
  // structure; a random direction in the full space would mostly miss them.
  Eigen::VectorXd translation = Eigen::VectorXd::Zero(D);
  for (int i : support) translation(i) = global_rng.normal();
  const double norm = translation.norm();
  translation = norm > 0.0 ? Eigen::VectorXd(translation * (cfg.global_translation / norm))
                           : Eigen::VectorXd::Zero(D);

  // Per-parent rotations pair each coordinate the parent lives on (its center
  // axis and its block) with a distinct free coordinate.
  std::vector<Eigen::MatrixXd> parent_rotations;
  for (int p = 0; p < P; ++p) {
    RandomStream rng(cfg.seed, kParentStreamBase + static_cast<std::uint64_t>(p));
    Eigen::MatrixXd R = Eigen::MatrixXd::Identity(D, D);
    std::vector<int> partners = free_coords;
    shuffle(partners, rng);
    std::vector<int> own{p / 2};
    own.insert(own.end(), blocks[static_cast<std::size_t>(p)].begin(),
               blocks[static_cast<std::size_t>(p)].end());
    if (partners.size() < own.size() && cfg.per_parent_rotation > 0.0) {
      warnings.push_back("parent " + std::to_string(p) +
                         ": not enough free coordinates for a full rotation");
    }
    for (std::size_t i = 0; i < own.size() && i < partners.size(); ++i) {
      const double sign = rng.uniform() < 0.5 ? -1.0 : 1.0;
      const double angle = sign * rng.uniform(0.5, 1.0) * cfg.per_parent_rotation;
      apply_givens(R, own[i], partners[i], angle);
    }
    parent_rotations.push_back(std::move(R));
  }

  Eigen::VectorXd spread(b);
  for (int j = 0; j < b; ++j) spread(j) = cfg.cluster_spread * std::pow(kSpreadDecay, j);

  std::vector<Hierarchy::Node> nodes;
  for (int p = 0; p < P; ++p) {
    Hierarchy::Node node{"p" + std::to_string(p), {}};
    for (int c = 0; c < C; ++c) {
      node.children.push_back("p" + std::to_string(p) + "c" + std::to_string(c));
    }
    nodes.push_back(std::move(node));
  }
  Hierarchy hierarchy(std::move(nodes));

  const auto draw = [&](RandomStream& rng, int p, int c) {
    const auto& block = blocks[static_cast<std::size_t>(p)];
    Eigen::VectorXd x = parent_centers[static_cast<std::size_t>(p)];
    const int axis = (c / 2) % b;
    x(block[static_cast<std::size_t>(axis)]) +=
        (c % 2 == 0 ? 1.0 : -1.0) * cfg.child_separation;
    for (int j = 0; j < b; ++j) {
      x(block[static_cast<std::size_t>(j)]) += spread(j) * rng.normal();
    }
    for (int i = 0; i < D; ++i) x(i) += cfg.noise * rng.normal();
    return x;
  };

  const int n_source = P * C * cfg.source_instances_per_child;
  const int n_target = P * C * cfg.target_instances_per_child;
  Eigen::MatrixXd source(n_source, D);
  Eigen::MatrixXd target(n_target, D);
  std::vector<HierLabel> source_labels;
  std::vector<HierLabel> target_labels;

  for (int p = 0; p < P; ++p) {
    for (int c = 0; c < C; ++c) {
      const int child = hierarchy.children_of(p)[static_cast<std::size_t>(c)];
      RandomStream src_rng(cfg.seed, instance_stream(0, p, c));
      for (int i = 0; i < cfg.source_instances_per_child; ++i) {
        source.row(static_cast<Eigen::Index>(source_labels.size())) =
            draw(src_rng, p, c).transpose();
        source_labels.push_back({p, child});
      }
      RandomStream tgt_rng(cfg.seed, instance_stream(1, p, c));
      const Eigen::MatrixXd& R = parent_rotations[static_cast<std::size_t>(p)];
      for (int i = 0; i < cfg.target_instances_per_child; ++i) {
        const Eigen::VectorXd x = Q * (R * draw(tgt_rng, p, c)) + translation;
        target.row(static_cast<Eigen::Index>(target_labels.size())) = x.transpose();
        target_labels.push_back({p, child});
      }
    }
  }

  // The unlabeled target should not arrive sorted by class.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_target));
  std::iota(order.begin(), order.end(), 0);
  RandomStream shuffle_rng(cfg.seed, kShuffleStream);
  shuffle(order, shuffle_rng);
  Eigen::MatrixXd shuffled(n_target, D);
  std::vector<HierLabel> shuffled_labels;
  shuffled_labels.reserve(order.size());
  for (std::size_t i = 0; i < order.size(); ++i) {
    shuffled.row(static_cast<Eigen::Index>(i)) = target.row(order[i]);
    shuffled_labels.push_back(target_labels[static_cast<std::size_t>(order[i])]);
  }

  SynthResult result{
      DatasetBundle{FeatureMatrix(std::move(source)), std::move(source_labels), hierarchy,
                    "source"},
      DatasetBundle{FeatureMatrix(std::move(shuffled)), std::nullopt, hierarchy, "target"},
      std::move(shuffled_labels),
      std::move(Q),
      std::move(translation),
      std::move(parent_rotations),
      std::move(blocks),
      std::move(warnings)};
  return result;
}

}  // namespace hsda
