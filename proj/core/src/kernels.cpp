#include "cpfm/kernels.hpp"

#include <cmath>

namespace cpfm {

void Dataset::validate() const {
  const Index n = features.rows();
  if (n < 1) throw ValidationError("dataset must contain at least one sample");
  if (!features.allFinite())
    throw ValidationError("dataset features must be finite");
  if (labels && labels->size() != n)
    throw ValidationError("label vector length does not match sample count");
  if (properties) {
    if (properties->size() != n)
      throw ValidationError("property vector length does not match sample count");
    if (!properties->allFinite())
      throw ValidationError("property values must be finite");
  }
}

namespace kernels {
namespace {

// Pairwise squared Euclidean distances, exact zero diagonal.
Matrix sq_dists(const Matrix& pts) {
  const Index n = pts.rows();
  Matrix d2(n, n);
  for (Index i = 0; i < n; ++i) {
    d2(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) {
      const double d = (pts.row(i) - pts.row(j)).squaredNorm();
      d2(i, j) = d;
      d2(j, i) = d;
    }
  }
  return d2;
}

}  // namespace

double gaussian_bandwidth(const Dataset& ds) {
  const Index n = ds.size();
  if (n < 2) throw SingletonDataset("bandwidth needs at least two samples");
  double total = 0.0;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      total += 2.0 * (ds.features.row(i) - ds.features.row(j)).norm();
  const double sigma = total / (static_cast<double>(n) * static_cast<double>(n));
  if (sigma == 0.0)
    throw DegenerateBandwidth("all samples identical, bandwidth is zero");
  return sigma;
}

GramMatrix image_kernel(const Dataset& ds, double sigma) {
  if (!ds.labels) throw MissingLabels("image kernel requires labels");
  if (!(sigma > 0.0)) throw NonpositiveBandwidth("sigma must be positive");
  const Index n = ds.size();
  const auto& l = *ds.labels;
  Matrix g = (-sq_dists(ds.features) / (2.0 * sigma * sigma)).array().exp();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (l[i] != l[j]) g(i, j) = 0.0;
  return GramMatrix{std::move(g)};
}

GramMatrix molecule_kernel(const Matrix& fingerprints, const Vector& properties) {
  const Index n = fingerprints.rows();
  if (properties.size() != n)
    throw ShapeMismatch("fingerprint and property counts differ");
  if (!properties.allFinite())
    throw ValidationError("property values must be finite");
  const Vector ones_count = fingerprints.rowwise().sum();
  for (Index i = 0; i < n; ++i)
    if (ones_count[i] == 0.0)
      throw EmptyFingerprint("fingerprint " + std::to_string(i) +
                             " has no set bits");
  Matrix g(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = i; j < n; ++j) {
      const double inter = fingerprints.row(i).dot(fingerprints.row(j));
      const double tanimoto = inter / (ones_count[i] + ones_count[j] - inter);
      const double v = 0.5 * tanimoto + 0.5 * std::abs(properties[i] - properties[j]);
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return GramMatrix{std::move(g)};
}

GramMatrix neg_sqdist_kernel(const Dataset& ds) {
  return GramMatrix{-sq_dists(ds.features)};
}

GramMatrix rbf_kernel(const Dataset& ds, double sigma) {
  if (!(sigma > 0.0)) throw NonpositiveBandwidth("sigma must be positive");
  Matrix g = (-sq_dists(ds.features) / (2.0 * sigma * sigma)).array().exp();
  return GramMatrix{std::move(g)};
}

}  // namespace kernels
}  // namespace cpfm
