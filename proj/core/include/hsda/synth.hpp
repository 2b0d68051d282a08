#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "hsda/dataset.hpp"

namespace hsda {

/// Identity of the pseudo-random scheme behind synth_generate. Changing any
/// part of the scheme must change this string.
inline constexpr std::string_view kSynthPrng =
    "mt19937_64/splitmix64-streams/box-muller v1";

/// Deterministic random stream. Each (seed, stream id) pair selects an
/// independent mt19937_64 sequence; the seed words come from splitmix64 so
/// nearby ids do not produce correlated streams.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t next_u64();
  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  double normal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

struct SynthConfig {
  int n_parents = 3;
  int children_per_parent = 3;
  int source_instances_per_child = 60;
  int target_instances_per_child = 60;
  int ambient_dim = 40;
  int subspace_dim = 5;
  double cluster_spread = 1.0;
  double parent_separation = 10.0;
  double child_separation = 3.0;
  /// Bound on every Givens angle of the global rotation (radians).
  double global_rotation = 0.15;
  double global_translation = 12.0;
  /// Bound on every Givens angle of a parent's own rotation (radians).
  double per_parent_rotation = 0.45;
  double noise = 0.2;
  std::uint64_t seed = 0;
};

/// Throws a configuration error for counts or dimensions that cannot work.
void validate(const SynthConfig& cfg);

struct SynthResult {
  DatasetBundle source;
  DatasetBundle target;  // labels held out
  std::vector<HierLabel> target_truth;
  /// Ground truth of the shift: target = global_rotation * parent_rotation[p] * x
  /// + global_translation for a source-distributed x of parent p.
  Eigen::MatrixXd global_rotation;
  Eigen::VectorXd global_translation;
  std::vector<Eigen::MatrixXd> parent_rotations;
  /// Noise-free coordinates carrying each parent's child structure.
  std::vector<std::vector<int>> parent_blocks;
  std::vector<std::string> warnings;
};

/// Hierarchical Gaussian clusters for a source domain and a shifted target.
/// Parent centers sit on signed coordinate axes, each parent's children sit
/// on signed axes of that parent's own coordinate block, and instances
/// spread anisotropically inside the block plus isotropic noise everywhere.
/// The target applies a per-parent rotation about the origin (moving the
/// parent center and turning its child layout), then a global rotation and
/// translation. Rotations are products of Givens rotations on disjoint
/// coordinate pairs.
SynthResult synth_generate(const SynthConfig& cfg);

}  // namespace hsda
