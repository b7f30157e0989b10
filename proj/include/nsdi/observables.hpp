#pragma once

#include <Eigen/Dense>
#include <vector>

#include "nsdi/kernels.hpp"
#include "nsdi/wavefunction.hpp"

namespace nsdi {

/// Probability of finding both electrons beyond the threshold, plus what the
/// absorber already removed from that region.
double di_yield(const WaveFunction2D& psi, double absorbed_di, double threshold = 5.0);
/// Exactly one electron beyond the threshold, plus absorbed SI probability.
double si_yield(const WaveFunction2D& psi, double absorbed_si, double threshold = 5.0);
/// Probability on the grid split by region, without absorbed contributions.
ChannelSums region_probabilities(const WaveFunction2D& psi, double threshold = 5.0);

/// One-body reduced density matrix as a discretized operator: entries are
/// rho(x_a, x_b) times the (possibly coarsened) spacing, normalized to unit
/// trace, so its eigenvalues are the natural occupations.
struct ReducedDensityMatrix {
  Eigen::MatrixXcd matrix;
  std::vector<double> eigenvalues;  // descending, clamped to [0, 1]
  double raw_min_eigenvalue = 0.0;  // before clamping
  double hermiticity_error = 0.0;   // max |rho - rho^dagger|
};

/// Builds the RDM from its unit-trace matrix and diagonalizes it.
/// Throws ErrorKind::numerical_hermiticity for eigenvalues below -1e-10.
ReducedDensityMatrix make_reduced_density_matrix(Eigen::MatrixXcd matrix);

/// rho(x, x') = sum_j Psi(x, x2_j) Psi*(x', x2_j) dx for electron 1 (electron 2
/// traces over x1 instead). `stride` keeps every stride-th point of the free
/// coordinate; the traced coordinate is always summed at full resolution.
ReducedDensityMatrix reduced_density_matrix(const WaveFunction2D& psi, int electron = 1, std::size_t stride = 1);

/// -sum lambda ln lambda in nats with 0 ln 0 = 0.
double von_neumann_entropy(const ReducedDensityMatrix& rho);
double von_neumann_entropy(const std::vector<double>& eigenvalues);
/// 1 / sum lambda^2.
double inverse_purity(const ReducedDensityMatrix& rho);

}  // namespace nsdi
