#include "nsdi/observables.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "nsdi/absorber.hpp"
#include "nsdi/errors.hpp"

namespace nsdi {

ChannelSums region_probabilities(const WaveFunction2D& psi, double threshold) {
  const auto flags = beyond_threshold(psi.grid().axis(), threshold);
  ChannelSums sums = kernels::omp::region_sums(psi.values(), flags, psi.size());
  const double area = psi.grid().cell_area();
  sums.double_ion *= area;
  sums.single_ion *= area;
  sums.bound *= area;
  return sums;
}

double di_yield(const WaveFunction2D& psi, double absorbed_di, double threshold) {
  return region_probabilities(psi, threshold).double_ion + absorbed_di;
}

double si_yield(const WaveFunction2D& psi, double absorbed_si, double threshold) {
  return region_probabilities(psi, threshold).single_ion + absorbed_si;
}

ReducedDensityMatrix make_reduced_density_matrix(Eigen::MatrixXcd matrix) {
  ReducedDensityMatrix rho;
  rho.hermiticity_error = (matrix - matrix.adjoint()).cwiseAbs().maxCoeff();
  const double trace = matrix.trace().real();
  if (!(trace > 0.0)) throw Error(ErrorKind::domain, "density matrix has zero trace");
  matrix /= trace;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(matrix, Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw Error(ErrorKind::numerical_hermiticity, "eigensolver did not converge");
  const Eigen::VectorXd& ev = solver.eigenvalues();
  rho.raw_min_eigenvalue = ev.minCoeff();
  if (rho.raw_min_eigenvalue < -1e-10)
    throw Error(ErrorKind::numerical_hermiticity,
                "density matrix eigenvalue " + std::to_string(rho.raw_min_eigenvalue) + " below -1e-10");
  rho.eigenvalues.resize(static_cast<std::size_t>(ev.size()));
  for (Eigen::Index a = 0; a < ev.size(); ++a) rho.eigenvalues[static_cast<std::size_t>(a)] = std::clamp(ev[a], 0.0, 1.0);
  std::sort(rho.eigenvalues.rbegin(), rho.eigenvalues.rend());
  rho.matrix = std::move(matrix);
  return rho;
}

ReducedDensityMatrix reduced_density_matrix(const WaveFunction2D& psi, int electron, std::size_t stride) {
  if (electron != 1 && electron != 2) throw Error(ErrorKind::domain, "electron must be 1 or 2");
  if (stride == 0 || psi.size() % stride != 0) throw Error(ErrorKind::domain, "stride must divide the grid size");
  const std::size_t n = psi.size();
  const std::size_t m = n / stride;
  // Rows index the kept coordinate, columns the traced one.
  Eigen::MatrixXcd a(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(n));
  for (std::size_t r = 0; r < m; ++r)
    for (std::size_t c = 0; c < n; ++c)
      a(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
          electron == 1 ? psi(r * stride, c) : psi(c, r * stride);
  const double dx = psi.grid().spacing();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(a.rows(), a.rows());
  rho.selfadjointView<Eigen::Lower>().rankUpdate(a);
  rho = rho.selfadjointView<Eigen::Lower>();
  const double weight = dx * dx * static_cast<double>(stride);
  rho *= weight;
  if (!(rho.trace().real() > 0.0)) throw Error(ErrorKind::domain, "zero-norm wavefunction has no density matrix");
  return make_reduced_density_matrix(std::move(rho));
}

double von_neumann_entropy(const std::vector<double>& eigenvalues) {
  double s = 0.0;
  for (double l : eigenvalues) {
    if (l < -1e-10) throw Error(ErrorKind::numerical_hermiticity, "negative eigenvalue " + std::to_string(l));
    if (l > 0.0) s -= l * std::log(l);
  }
  return s;
}

double von_neumann_entropy(const ReducedDensityMatrix& rho) { return von_neumann_entropy(rho.eigenvalues); }

double inverse_purity(const ReducedDensityMatrix& rho) {
  double p = 0.0;
  for (double l : rho.eigenvalues) {
    if (l < -1e-10) throw Error(ErrorKind::numerical_hermiticity, "negative eigenvalue " + std::to_string(l));
    p += l * l;
  }
  return 1.0 / p;
}

}  // namespace nsdi
