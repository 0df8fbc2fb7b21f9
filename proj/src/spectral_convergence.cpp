#include "thin_epi/spectral_convergence.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace thin_epi {

SpectralConvergenceReport verify_spectral_convergence(GridPtr grid, const BlowupProfile& p,
                                                      const std::vector<double>& deltas, int count,
                                                      const EigenOptions& opts) {
  require(!deltas.empty(), "verify_spectral_convergence: empty delta sequence");
  for (std::size_t i = 0; i < deltas.size(); ++i) {
    require(deltas[i] >= 0.0, "verify_spectral_convergence: deltas must be nonnegative");
    if (i > 0) require(deltas[i] < deltas[i - 1], "verify_spectral_convergence: deltas must strictly decrease");
  }
  int max_degree = 1, have = 0;
  while (have < count) have += half_sphere_multiplicity(grid->n, max_degree++);
  BasisPtr exact = half_sphere_basis(grid->n, max_degree, grid);

  SpectralConvergenceReport rep;
  for (double delta : deltas) {
    EquatorMask mask = zero_set(p, delta, *grid);
    BasisPtr b = eigenbasis(grid, mask, count, opts);
    SpectralConvergenceRow row;
    row.delta = delta;
    row.masked_nodes = static_cast<int>(std::count(mask.begin(), mask.end(), 1));
    for (int j = 0; j < count; ++j) {
      double lam = b->eigenvalues[j];
      row.eigenvalues.push_back(lam);
      row.eigenvalue_errors.push_back(std::abs(lam - exact->eigenvalues[j]));
      Eigen::VectorXd phi = b->modes.col(j);
      double n2 = grid->inner(phi, phi), proj = 0.0;
      for (int k = 0; k < exact->count(); ++k) {
        if (exact->degrees[k] != exact->degrees[j]) continue;
        double c = grid->inner(phi, exact->modes.col(k));
        proj += c * c;
      }
      row.eigenfunction_errors.push_back(std::sqrt(std::max(0.0, n2 - proj)));
    }
    row.max_eigenvalue_error = *std::max_element(row.eigenvalue_errors.begin(), row.eigenvalue_errors.end());
    row.max_eigenfunction_error = *std::max_element(row.eigenfunction_errors.begin(), row.eigenfunction_errors.end());
    if (!rep.rows.empty()) {
      const auto& prev = rep.rows.back();
      if (row.max_eigenvalue_error > prev.max_eigenvalue_error * (1.0 + 1e-9) + 1e-12) {
        rep.monotone = false;
        std::ostringstream os;
        os << "eigenvalue error grew from " << prev.max_eigenvalue_error << " at delta=" << prev.delta << " to "
           << row.max_eigenvalue_error << " at delta=" << delta;
        rep.flags.push_back(os.str());
      }
    }
    rep.rows.push_back(std::move(row));
  }
  return rep;
}

}  // namespace thin_epi
