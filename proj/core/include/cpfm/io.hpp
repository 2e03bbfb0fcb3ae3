#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "cpfm/gwot.hpp"
#include "cpfm/lowrank.hpp"
#include "cpfm/types.hpp"

namespace cpfm::io {

enum class TargetDist { gaussian, uniform_square, unit_circle };

TargetDist target_dist_from_string(const std::string& s);
std::string to_string(TargetDist d);

/// Solver and training hyperparameters, JSON-backed.
struct RunConfig {
  double epsilon_init = 0.01;
  double tau = 1e-6;
  double delta = 0.01 / 1024.0;
  double eta = 0.95;
  double alpha = 0.5;
  double mixture_weight = 0.5;
  int knn_k = 5;
  int steps_T = 100;
  double lr = 1e-4;
  int epochs = 200;
  int batch = 128;
  std::uint64_t seed = 0;
  int max_ot_points = 10000;
  TargetDist target_dist = TargetDist::gaussian;
  int d_y = 2;
  bool deterministic = true;
  // Drift-net size knobs (not part of the solver contract).
  int net_width = 256;
  int net_depth = 3;

  void validate() const;
};

RunConfig load_config(const std::filesystem::path& path);
void save_config(const std::filesystem::path& path, const RunConfig& cfg);

/// Dataset CSV: header f0..f{d-1} plus optional `label` and `property`
/// columns, one sample per row.
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const std::filesystem::path& path, const Dataset& ds);

/// Fingerprint CSV: header b0..b{F-1} of 0/1 entries, optional `property`.
struct FingerprintData {
  Matrix bits;  // n x F
  Vector properties;
};
FingerprintData load_fingerprints(const std::filesystem::path& path);
void save_fingerprints(const std::filesystem::path& path,
                       const FingerprintData& fp);

/// Headerless numeric CSV, one matrix row per line, 17 significant digits
/// (round-trips bitwise).
Matrix load_matrix(const std::filesystem::path& path);
void save_matrix(const std::filesystem::path& path, const Matrix& m);
void save_vector(const std::filesystem::path& path, const Vector& v);

/// GramFactor persistence: phi CSV + weights CSV + JSON header.
void save_factor(const std::filesystem::path& phi_path,
                 const std::filesystem::path& weights_path,
                 const std::filesystem::path& header_path,
                 const lowrank::GramFactor& f);
lowrank::GramFactor load_factor(const std::filesystem::path& phi_path,
                                const std::filesystem::path& weights_path,
                                const std::filesystem::path& header_path);

/// Draw n embedding targets from the requested latent marginal.
gwot::EmbeddingSet draw_target(TargetDist dist, Index n, int d_y,
                               std::uint64_t seed);

struct MixtureSpec {
  Index n = 200;
  int d_x = 10;
  int classes = 2;
  double separation = 6.0;  // centroid distance in within-class sigmas
  std::uint64_t seed = 0;
};

/// Balanced labeled Gaussian mixture with unit within-class scale and
/// pairwise-equidistant centroids. Requires classes <= d_x.
Dataset make_synthetic(const MixtureSpec& spec);

struct MoleculeSpec {
  Index n = 100;
  int bits = 64;
  std::uint64_t seed = 0;
};

/// Random fingerprints (at least one set bit each) with scalar properties.
FingerprintData make_synthetic_molecules(const MoleculeSpec& spec);

}  // namespace cpfm::io
