#include "thin_epi/spectral.hpp"

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace thin_epi {

EquatorMask empty_mask(const SphereGrid& grid) { return EquatorMask(grid.equator.size(), 0); }
EquatorMask full_mask(const SphereGrid& grid) { return EquatorMask(grid.equator.size(), 1); }

std::string mask_hash(const EquatorMask& mask) {
  std::uint64_t h = 1469598103934665603ull;
  for (char c : mask) {
    h ^= static_cast<unsigned char>(c ? 1 : 0);
    h *= 1099511628211ull;
  }
  h ^= mask.size();
  h *= 1099511628211ull;
  std::ostringstream os;
  os << std::hex << h;
  return os.str();
}

SphereFn EigenBasis::mode(int j) const {
  if (is_exact()) return polynomial_trace(harmonics[j], grid->n);
  return mesh_function(grid, modes.col(j));
}

Eigen::VectorXd EigenBasis::project(const Eigen::VectorXd& values) const {
  Eigen::VectorXd wv = values;
  for (int i = 0; i < grid->size(); ++i) wv[i] *= grid->weights[i];
  return modes.transpose() * wv;
}

namespace {

using SpMat = Eigen::SparseMatrix<double>;

struct Reduced {
  std::vector<int> free;  // positions in grid->upper
  SpMat K;
  Eigen::VectorXd M;
};

Reduced reduce(const SphereGrid& g, const EquatorMask& mask) {
  std::vector<char> fixed(g.upper.size(), 0);
  for (std::size_t e = 0; e < g.equator.size(); ++e)
    if (mask[e]) fixed[g.upper_pos[g.equator[e]]] = 1;
  Reduced r;
  std::vector<int> pos(g.upper.size(), -1);
  for (std::size_t k = 0; k < g.upper.size(); ++k)
    if (!fixed[k]) {
      pos[k] = static_cast<int>(r.free.size());
      r.free.push_back(static_cast<int>(k));
    }
  const int nf = static_cast<int>(r.free.size());
  std::vector<Eigen::Triplet<double>> trip;
  for (int col = 0; col < g.stiffness.outerSize(); ++col)
    for (SpMat::InnerIterator it(g.stiffness, col); it; ++it)
      if (pos[it.row()] >= 0 && pos[it.col()] >= 0) trip.emplace_back(pos[it.row()], pos[it.col()], it.value());
  r.K.resize(nf, nf);
  r.K.setFromTriplets(trip.begin(), trip.end());
  r.M.resize(nf);
  for (int i = 0; i < nf; ++i) r.M[i] = g.mass[r.free[i]];
  return r;
}

void dense_solve(const Reduced& r, int count, Eigen::VectorXd& lam, Eigen::MatrixXd& X) {
  Eigen::VectorXd s = r.M.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd A = s.asDiagonal() * Eigen::MatrixXd(r.K) * s.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(A);
  if (es.info() != Eigen::Success) fail(ErrorCode::NotConverged, "eigenbasis: dense eigensolver failed");
  lam = es.eigenvalues().head(count);
  X = s.asDiagonal() * es.eigenvectors().leftCols(count);
}

void subspace_solve(const Reduced& r, int count, const EigenOptions& opts, Eigen::VectorXd& lam,
                    Eigen::MatrixXd& X) {
  const int nf = static_cast<int>(r.free.size());
  const int p = std::min(nf, count + std::max(10, count / 2));
  SpMat S = r.K;
  for (int i = 0; i < nf; ++i) S.coeffRef(i, i) += r.M[i];  // shift -1 keeps S positive definite
  Eigen::SimplicialLDLT<SpMat> ldlt(S);
  if (ldlt.info() != Eigen::Success) fail(ErrorCode::NotConverged, "eigenbasis: factorization failed");

  Eigen::VectorXd sq = r.M.cwiseSqrt(), isq = sq.cwiseInverse();
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  Eigen::MatrixXd Y(nf, p);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < nf; ++i) Y(i, j) = unif(rng);

  double worst = 0.0;
  for (int it = 0; it < opts.max_iterations; ++it) {
    Eigen::MatrixXd Z = sq.asDiagonal() * Y;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(Z);
    Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(nf, p);
    Y = isq.asDiagonal() * Q;
    Eigen::MatrixXd Kr = Y.transpose() * (r.K * Y);
    Kr = 0.5 * (Kr + Kr.transpose());
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(Kr);
    Y = Y * es.eigenvectors();
    Eigen::VectorXd ev = es.eigenvalues();
    worst = 0.0;
    for (int j = 0; j < count; ++j) {
      Eigen::VectorXd res = isq.asDiagonal() * (r.K * Y.col(j) - ev[j] * r.M.asDiagonal() * Y.col(j));
      worst = std::max(worst, res.norm() / std::max(1.0, std::abs(ev[j])));
    }
    if (worst <= opts.tol) {
      lam = ev.head(count);
      X = Y.leftCols(count);
      return;
    }
    Eigen::MatrixXd MY = r.M.asDiagonal() * Y;
    Y = ldlt.solve(MY);
  }
  std::ostringstream os;
  os << "eigenbasis: shifted inverse iteration did not converge (residual " << worst << ")";
  fail(ErrorCode::NotConverged, os.str());
}

std::string cache_path(const SphereGrid& g, const EquatorMask& mask, int count, const EigenOptions& opts) {
  std::string dir = opts.cache_dir;
  if (dir.empty()) {
    const char* env = std::getenv("THIN_EPI_CACHE");
    if (env) dir = env;
  }
  if (dir.empty()) return {};
  std::ostringstream os;
  os << dir << "/eig_n" << g.n << "_k" << static_cast<int>(g.kind) << "_r" << g.resolution << "_m" << mask_hash(mask)
     << "_c" << count << ".json";
  return os.str();
}

bool load_cached(const std::string& path, const SphereGrid& g, const EquatorMask& mask, int count,
                 Eigen::VectorXd& lam, Eigen::MatrixXd& up) {
  std::ifstream in(path);
  if (!in) return false;
  try {
    nlohmann::json j;
    in >> j;
    if (j.at("version").get<int>() != 1 || j.at("n").get<int>() != g.n || j.at("resolution").get<int>() != g.resolution ||
        j.at("kind").get<int>() != static_cast<int>(g.kind) || j.at("mask").get<std::string>() != mask_hash(mask) ||
        j.at("count").get<int>() != count)
      return false;
    auto ev = j.at("eigenvalues").get<std::vector<double>>();
    auto md = j.at("modes").get<std::vector<std::vector<double>>>();
    if (static_cast<int>(ev.size()) != count || static_cast<int>(md.size()) != count) return false;
    lam.resize(count);
    up.resize(g.upper.size(), count);
    for (int c = 0; c < count; ++c) {
      lam[c] = ev[c];
      if (md[c].size() != g.upper.size()) return false;
      for (std::size_t i = 0; i < g.upper.size(); ++i) up(i, c) = md[c][i];
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

void store_cached(const std::string& path, const SphereGrid& g, const EquatorMask& mask, int count,
                  const Eigen::VectorXd& lam, const Eigen::MatrixXd& up) {
  std::error_code ec;
  std::filesystem::create_directories(std::filesystem::path(path).parent_path(), ec);
  nlohmann::json j;
  j["version"] = 1;
  j["n"] = g.n;
  j["kind"] = static_cast<int>(g.kind);
  j["resolution"] = g.resolution;
  j["mask"] = mask_hash(mask);
  j["count"] = count;
  j["eigenvalues"] = std::vector<double>(lam.data(), lam.data() + lam.size());
  std::vector<std::vector<double>> md;
  for (int c = 0; c < count; ++c) md.emplace_back(up.col(c).data(), up.col(c).data() + up.rows());
  j["modes"] = md;
  std::ofstream out(path);
  if (out) out << j.dump();
}

// Sign convention and deterministic ordering inside clusters of equal
// eigenvalues.
void canonicalize(Eigen::VectorXd& lam, Eigen::MatrixXd& up) {
  const int count = static_cast<int>(lam.size());
  for (int c = 0; c < count; ++c) {
    double mx = up.col(c).cwiseAbs().maxCoeff();
    for (int i = 0; i < up.rows(); ++i)
      if (std::abs(up(i, c)) > 1e-8 * mx) {
        if (up(i, c) < 0) up.col(c) *= -1.0;
        break;
      }
  }
  std::vector<int> order(count);
  for (int c = 0; c < count; ++c) order[c] = c;
  auto lex_less = [&](int a, int b) {
    for (int i = 0; i < up.rows(); ++i) {
      if (up(i, a) < up(i, b)) return true;
      if (up(i, a) > up(i, b)) return false;
    }
    return false;
  };
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    if (std::abs(lam[a] - lam[b]) > 1e-9) return lam[a] < lam[b];
    return lex_less(a, b);
  });
  Eigen::VectorXd l2(count);
  Eigen::MatrixXd u2(up.rows(), count);
  for (int c = 0; c < count; ++c) {
    l2[c] = lam[order[c]];
    u2.col(c) = up.col(order[c]);
  }
  lam = l2;
  up = u2;
}

}  // namespace

BasisPtr eigenbasis(GridPtr grid, const EquatorMask& mask, int count, const EigenOptions& opts) {
  require(grid != nullptr, "eigenbasis: null grid");
  require(grid->has_operator(), "eigenbasis: grid has no Laplace-Beltrami operator");
  require(mask.size() == grid->equator.size(), "eigenbasis: mask must have one entry per equator node");
  require(count >= 1, "eigenbasis: count must be positive");
  const SphereGrid& g = *grid;
  Reduced r = reduce(g, mask);
  const int nf = static_cast<int>(r.free.size());
  require(count <= nf, "eigenbasis: more modes requested than free even unknowns");

  Eigen::VectorXd lam;
  Eigen::MatrixXd up;
  std::string path = cache_path(g, mask, count, opts);
  if (path.empty() || !load_cached(path, g, mask, count, lam, up)) {
    Eigen::MatrixXd X;
    if (nf < opts.dense_limit)
      dense_solve(r, count, lam, X);
    else
      subspace_solve(r, count, opts, lam, X);
    up = Eigen::MatrixXd::Zero(g.upper.size(), count);
    for (int c = 0; c < count; ++c) {
      double nrm2 = 0.0;
      for (int i = 0; i < nf; ++i) nrm2 += r.M[i] * X(i, c) * X(i, c);
      double s = 1.0 / std::sqrt(2.0 * nrm2);
      for (int i = 0; i < nf; ++i) up(r.free[i], c) = s * X(i, c);
    }
    canonicalize(lam, up);
    if (!path.empty()) store_cached(path, g, mask, count, lam, up);
  }

  auto b = std::make_shared<EigenBasis>();
  b->grid = grid;
  b->mask = mask;
  b->eigenvalues = lam;
  b->modes.resize(g.size(), count);
  for (int c = 0; c < count; ++c) b->modes.col(c) = g.extend_even(up.col(c));
  return b;
}

int half_sphere_multiplicity(int n, int j) {
  require(n == 1 || n == 2, "half_sphere_multiplicity: unsupported dimension");
  require(j >= 1, "half_sphere_multiplicity: degree must be positive");
  return n == 1 ? 1 : j;
}

int mode_count_ell(int n, int m) {
  require(m >= 0, "mode_count_ell: m must be nonnegative");
  int ell = 0;
  for (int j = 1; j <= 2 * m + 1; ++j) ell += half_sphere_multiplicity(n, j);
  return ell;
}

double trace_norm(int n, const Polynomial& p) { return std::sqrt(sphere_polynomial_integral(n, p * p)); }

namespace {

double factorial(int k) { return std::exp(std::lgamma(k + 1.0)); }

// Real and imaginary parts of (x + i y)^k.
std::pair<Polynomial, Polynomial> complex_power(int k) {
  Polynomial re = Polynomial::constant(1.0), im;
  const Polynomial x = Polynomial::variable(0), y = Polynomial::variable(1);
  for (int i = 0; i < k; ++i) {
    Polynomial nre = re * x - im * y;
    Polynomial nim = re * y + im * x;
    re = nre;
    im = nim;
  }
  return {re, im};
}

}  // namespace

std::vector<Polynomial> odd_harmonics(int n, int j) {
  require(n == 1 || n == 2, "odd_harmonics: unsupported dimension");
  require(j >= 1, "odd_harmonics: degree must be positive");
  std::vector<Polynomial> out;
  if (n == 1) {
    out.push_back(complex_power(j).second);
  } else {
    const Polynomial z = Polynomial::variable(2);
    Polynomial r2 = Polynomial::variable(0) * Polynomial::variable(0) + Polynomial::variable(1) * Polynomial::variable(1) +
                    z * z;
    for (int k = 0; k <= j; ++k) {
      if ((j - k) % 2 == 0) continue;
      // r^j P_j^k(z/r) / rho^k as a polynomial in z and r^2
      Polynomial zpart;
      Polynomial r2t = Polynomial::constant(1.0);
      for (int t = 0; 2 * t <= j - k; ++t) {
        double coef = (t % 2 ? -1.0 : 1.0) * factorial(2 * j - 2 * t) / (factorial(t) * factorial(j - t) * factorial(j - 2 * t - k));
        Polynomial zp = Polynomial::constant(coef);
        for (int e = 0; e < j - k - 2 * t; ++e) zp = zp * z;
        zpart += zp * r2t;
        r2t = r2t * r2;
      }
      auto [re, im] = complex_power(k);
      out.push_back(re * zpart);
      if (k > 0) out.push_back(im * zpart);
    }
  }
  for (auto& p : out) p = p * (1.0 / trace_norm(n, p));
  return out;
}

BasisPtr half_sphere_basis(int n, int max_degree, GridPtr grid, const Polynomial* lead) {
  require(n == 1 || n == 2, "half_sphere_basis: unsupported dimension");
  require(max_degree >= 1, "half_sphere_basis: max_degree must be at least 1");
  if (!grid) grid = n == 1 ? build_grid(1, 720) : build_grid(2, 128);
  require(grid->n == n, "half_sphere_basis: grid dimension mismatch");

  auto b = std::make_shared<EigenBasis>();
  b->grid = grid;
  b->mask = full_mask(*grid);
  int lead_degree = lead ? lead->degree() : -1;
  if (lead) {
    require(lead_degree >= 1 && lead_degree <= max_degree, "half_sphere_basis: lead degree outside the basis");
    require(lead->is_homogeneous(lead_degree), "half_sphere_basis: lead must be homogeneous");
  }
  std::vector<double> lam;
  for (int j = 1; j <= max_degree; ++j) {
    std::vector<Polynomial> block = odd_harmonics(n, j);
    if (j == lead_degree) {
      const int d = static_cast<int>(block.size());
      Polynomial L = *lead * (1.0 / trace_norm(n, *lead));
      Eigen::VectorXd a(d);
      Polynomial recon;
      for (int k = 0; k < d; ++k) {
        a[k] = sphere_polynomial_integral(n, L * block[k]);
        recon += block[k] * a[k];
      }
      double miss = trace_norm(n, L - recon);
      if (miss > 1e-8)
        fail(ErrorCode::Precondition, "half_sphere_basis: lead is not an odd harmonic of its degree");
      Eigen::VectorXd v = a - Eigen::VectorXd::Unit(d, d - 1);
      Eigen::MatrixXd Q = Eigen::MatrixXd::Identity(d, d);
      if (v.norm() > 1e-14) Q -= 2.0 * v * v.transpose() / v.squaredNorm();
      std::vector<Polynomial> rotated(d);
      for (int i = 0; i < d; ++i)
        for (int k = 0; k < d; ++k) rotated[i] += block[k] * Q(k, i);
      rotated[d - 1] = L;
      block = rotated;
    }
    for (auto& p : block) {
      b->harmonics.push_back(p);
      b->degrees.push_back(j);
      lam.push_back(lambda_of(j, n));
    }
  }
  const int count = static_cast<int>(lam.size());
  b->eigenvalues = Eigen::Map<Eigen::VectorXd>(lam.data(), count);
  b->modes.resize(grid->size(), count);
  for (int c = 0; c < count; ++c) b->modes.col(c) = sample(*polynomial_trace(b->harmonics[c], n), *grid);
  return b;
}

SphereFn SphericalTrace::function() const {
  if (has_coefficients() && basis->is_exact()) {
    std::vector<std::pair<double, SphereFn>> terms;
    for (int j = 0; j < coefficients.size(); ++j)
      if (coefficients[j] != 0.0) terms.emplace_back(coefficients[j], basis->mode(j));
    return combine(std::move(terms));
  }
  return mesh_function(grid, values);
}

SphericalTrace trace_from_coefficients(BasisPtr basis, const Eigen::VectorXd& coefficients) {
  require(coefficients.size() <= basis->count(), "trace_from_coefficients: more coefficients than modes");
  SphericalTrace t;
  t.grid = basis->grid;
  t.basis = basis;
  t.coefficients = coefficients;
  t.values = basis->modes.leftCols(coefficients.size()) * coefficients;
  return t;
}

SphericalTrace trace_from_function(GridPtr grid, const SphereFunction& f) {
  SphericalTrace t;
  t.values = sample(f, *grid);
  t.grid = std::move(grid);
  return t;
}

}  // namespace thin_epi
