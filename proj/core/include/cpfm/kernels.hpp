#pragma once

#include "cpfm/types.hpp"

namespace cpfm::kernels {

/// Mean Euclidean distance over all n^2 ordered sample pairs (i=j included).
/// Throws SingletonDataset for n < 2 and DegenerateBandwidth when the mean
/// distance is zero.
double gaussian_bandwidth(const Dataset& ds);

/// Heat kernel gated by label agreement:
/// k(x_i,x_j) = exp(-|x_i-x_j|^2 / (2 sigma^2)) * 1{l_i = l_j}.
GramMatrix image_kernel(const Dataset& ds, double sigma);

/// Half Tanimoto similarity on binary fingerprints plus half absolute
/// property gap: k(i,j) = <f_i,f_j> / (|f_i|_1 + |f_j|_1 - <f_i,f_j>) / 2
/// + |l_i - l_j| / 2.
GramMatrix molecule_kernel(const Matrix& fingerprints, const Vector& properties);

/// k(x_i,x_j) = -|x_i - x_j|^2 (indefinite; factor via eigen_factor).
GramMatrix neg_sqdist_kernel(const Dataset& ds);

/// Plain heat kernel, the label-free default for unlabeled data.
GramMatrix rbf_kernel(const Dataset& ds, double sigma);

}  // namespace cpfm::kernels
