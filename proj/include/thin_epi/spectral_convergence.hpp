#pragma once

#include <string>
#include <vector>

#include "thin_epi/catalog.hpp"
#include "thin_epi/spectral.hpp"

namespace thin_epi {

struct SpectralConvergenceRow {
  double delta = 0;
  int masked_nodes = 0;
  std::vector<double> eigenvalues;
  std::vector<double> eigenvalue_errors;     // |lambda_j^delta - lambda_j|
  std::vector<double> eigenfunction_errors;  // distance to the limit eigenspace
  double max_eigenvalue_error = 0;
  double max_eigenfunction_error = 0;
};

struct SpectralConvergenceReport {
  std::vector<SpectralConvergenceRow> rows;
  bool monotone = true;  // errors never grow along the sequence
  std::vector<std::string> flags;
};

// Eigenbases with Dirichlet conditions on Z_delta for each delta, compared
// against the exact half-sphere spectrum.
SpectralConvergenceReport verify_spectral_convergence(GridPtr grid, const BlowupProfile& p,
                                                      const std::vector<double>& deltas, int count,
                                                      const EigenOptions& opts = {});

}  // namespace thin_epi
