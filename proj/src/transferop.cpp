#include "mllab/transferop.hpp"

#include "mllab/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>

namespace mllab {

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Doubling: return "doubling";
    case MapKind::Gauss: return "gauss";
    case MapKind::BetaMap: return "beta";
  }
  return "unknown";
}

MapKind parse_map_kind(const std::string& name) {
  if (name == "doubling") return MapKind::Doubling;
  if (name == "gauss") return MapKind::Gauss;
  if (name == "beta") return MapKind::BetaMap;
  throw std::invalid_argument("unknown map '" + name + "' (expected doubling, gauss, beta)");
}

void MapSpec::validate() const {
  if (kind == MapKind::BetaMap && !(beta > 1.0)) throw std::invalid_argument("beta map needs beta > 1");
  if (kind == MapKind::Gauss && digit_cutoff < 1) throw std::invalid_argument("digit cutoff must be >= 1");
}

namespace {

/// Part [lo, hi] of one cell on which the map is a single branch with digit
/// `digit`. Residual pieces have no explicit branch and are spread evenly.
struct Piece {
  long digit;
  double lo;
  double hi;
  bool residual;
};

std::vector<Piece> cell_pieces(const MapSpec& map, double a, double b) {
  std::vector<Piece> pieces;
  if (map.kind == MapKind::Gauss) {
    const double residual_end = 1.0 / static_cast<double>(map.digit_cutoff + 1);
    if (a < residual_end) {
      pieces.push_back({map.digit_cutoff + 1, a, std::min(b, residual_end), true});
    }
    const long k_lo = std::max(1L, static_cast<long>(std::floor(1.0 / b)));
    const long k_hi = a > 0.0 ? std::min(map.digit_cutoff, static_cast<long>(std::floor(1.0 / a)))
                              : map.digit_cutoff;
    for (long k = k_lo; k <= k_hi; ++k) {
      const double p = std::max(a, 1.0 / static_cast<double>(k + 1));
      const double q = std::min(b, 1.0 / static_cast<double>(k));
      if (q > p) pieces.push_back({k, p, q, false});
    }
  } else {
    const double beta = map.kind == MapKind::Doubling ? 2.0 : map.beta;
    const long k_max = static_cast<long>(std::ceil(beta)) - 1;
    const long k_lo = std::min(k_max, static_cast<long>(std::floor(beta * a)));
    const long k_hi = std::min(k_max, static_cast<long>(std::floor(beta * b)));
    for (long k = k_lo; k <= k_hi; ++k) {
      const double p = std::max(a, static_cast<double>(k) / beta);
      const double q = std::min({b, static_cast<double>(k + 1) / beta, 1.0});
      if (q > p) pieces.push_back({k, p, q, false});
    }
  }
  return pieces;
}

/// Adds weight * (fraction of the piece landing in cell j) / h to row[j].
template <class Scalar>
void scatter_piece(const MapSpec& map, const Piece& piece, Eigen::Index m, Scalar weight,
                   std::vector<Scalar>& row) {
  const double h = 1.0 / static_cast<double>(m);
  if (piece.residual) {
    const Scalar share = weight * ((piece.hi - piece.lo) / h / static_cast<double>(m));
    for (auto& v : row) v += share;
    return;
  }
  const double k = static_cast<double>(piece.digit);
  double u0, u1;
  const bool gauss = map.kind == MapKind::Gauss;
  const double beta = map.kind == MapKind::Doubling ? 2.0 : map.beta;
  if (gauss) {
    u0 = 1.0 / piece.hi - k;
    u1 = 1.0 / piece.lo - k;
  } else {
    u0 = beta * piece.lo - k;
    u1 = beta * piece.hi - k;
  }
  u0 = std::clamp(u0, 0.0, 1.0);
  u1 = std::clamp(u1, 0.0, 1.0);
  if (!(u1 > u0)) return;
  const auto j0 = std::min<Eigen::Index>(m - 1, static_cast<Eigen::Index>(std::floor(u0 * m)));
  const auto j1 = std::min<Eigen::Index>(m - 1, static_cast<Eigen::Index>(std::ceil(u1 * m)) - 1);
  for (Eigen::Index j = j0; j <= j1; ++j) {
    const double c = std::max(u0, static_cast<double>(j) * h);
    const double d = std::min(u1, static_cast<double>(j + 1) * h);
    if (!(d > c)) continue;
    // Preimage length on the branch: |T^-1(d) - T^-1(c)|.
    const double len = gauss ? (d - c) / ((k + c) * (k + d)) : (d - c) / beta;
    row[static_cast<std::size_t>(j)] += weight * (len / h);
  }
}

template <class Scalar, class Phase>
Eigen::SparseMatrix<Scalar, Eigen::RowMajor> assemble(const MapSpec& map, Eigen::Index m,
                                                      Phase phase) {
  const double h = 1.0 / static_cast<double>(m);
  std::vector<std::vector<std::pair<Eigen::Index, Scalar>>> rows(static_cast<std::size_t>(m));
  parallel_for(static_cast<std::size_t>(m), default_thread_count(), [&](std::size_t i) {
    std::vector<Scalar> row(static_cast<std::size_t>(m), Scalar(0));
    const double a = static_cast<double>(i) * h;
    const double b = (i + 1 == static_cast<std::size_t>(m)) ? 1.0 : static_cast<double>(i + 1) * h;
    for (const Piece& piece : cell_pieces(map, a, b)) {
      scatter_piece<Scalar>(map, piece, m, phase(piece.digit), row);
    }
    auto& out = rows[i];
    for (Eigen::Index j = 0; j < m; ++j) {
      if (row[static_cast<std::size_t>(j)] != Scalar(0)) out.emplace_back(j, row[static_cast<std::size_t>(j)]);
    }
  });
  std::vector<Eigen::Triplet<Scalar>> triplets;
  std::size_t nnz = 0;
  for (const auto& r : rows) nnz += r.size();
  triplets.reserve(nnz);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (const auto& [j, v] : rows[i]) triplets.emplace_back(static_cast<Eigen::Index>(i), j, v);
  }
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> mat(m, m);
  mat.setFromTriplets(triplets.begin(), triplets.end());
  return mat;
}

}  // namespace

UlamOperator<double> ulam_discretize(const MapSpec& map, Eigen::Index resolution) {
  map.validate();
  if (resolution < 2) throw std::invalid_argument("Ulam resolution must be at least 2");
  UlamOperator<double> op;
  op.map = map;
  op.resolution = resolution;
  op.t = 0.0;
  op.matrix = assemble<double>(map, resolution, [](long) { return 1.0; });
  return op;
}

UlamOperator<Complex> perturbed_matrix(const UlamOperator<double>& op, double t) {
  UlamOperator<Complex> out;
  out.map = op.map;
  out.resolution = op.resolution;
  out.t = t;
  if (t == 0.0) {
    out.matrix = op.matrix.cast<Complex>();
    return out;
  }
  out.matrix = assemble<Complex>(op.map, op.resolution, [t](long digit) {
    return std::polar(1.0, t * static_cast<double>(digit));
  });
  return out;
}

// ---------------------------------------------------------------------------
// Power iteration

namespace {

constexpr double kNullNorm = 1e-13;

template <class Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <class Scalar>
Complex to_complex(Scalar s) {
  return Complex(s);
}

/// Power iteration for the dominant eigenvalue of apply(). Returns false on
/// hitting the cap.
template <class Scalar, class Apply>
bool power_iterate(Apply apply, Vec<Scalar>& v, Scalar& lambda, int cap, double tol, int& iters) {
  v.normalize();
  Scalar prev = Scalar(0);
  for (int it = 1; it <= cap; ++it) {
    Vec<Scalar> w = apply(v);
    lambda = v.dot(w);
    const double nw = w.norm();
    iters = it;
    if (nw < kNullNorm) {
      lambda = Scalar(0);
      return true;
    }
    v = w / nw;
    if (it > 1 && std::abs(lambda - prev) < tol) return true;
    prev = lambda;
  }
  return false;
}

}  // namespace

template <class Scalar>
EigenEstimate leading_eigenvalue(const UlamOperator<Scalar>& op, const PowerIterationOptions& opts) {
  const auto& P = op.matrix;
  const Eigen::Index m = P.rows();
  if (!P.coeffs().allFinite()) throw std::invalid_argument("Ulam matrix has non-finite entries");

  EigenEstimate est;
  Vec<Scalar> v = Vec<Scalar>::Ones(m);
  Scalar lambda = Scalar(0);
  int iters = 0;
  auto right = [&P](const Vec<Scalar>& x) -> Vec<Scalar> { return P.transpose() * x; };
  if (!power_iterate<Scalar>(right, v, lambda, opts.max_iterations, opts.tolerance, iters)) {
    throw NonConvergenceError("power iteration did not converge within " +
                              std::to_string(opts.max_iterations) +
                              " iterations (near-degenerate leading eigenvalues?)");
  }
  est.lambda = to_complex(lambda);
  est.eigenvector = v.template cast<Complex>();
  est.iterations = iters;
  if (std::abs(est.lambda) == 0.0) {
    est.second_abs = 0.0;
    return est;
  }

  // Left eigenvector for the spectral projection.
  Vec<Scalar> u = Vec<Scalar>::Ones(m);
  Scalar mu = Scalar(0);
  int left_iters = 0;
  auto left = [&P](const Vec<Scalar>& x) -> Vec<Scalar> { return P.conjugate() * x; };
  if (!power_iterate<Scalar>(left, u, mu, opts.max_iterations, opts.tolerance, left_iters)) {
    throw NonConvergenceError("left power iteration did not converge");
  }
  const Scalar uv = u.dot(v);
  if (std::abs(uv) < 1e-12) throw NonConvergenceError("leading eigenvalue is defective");

  // Deflated iteration on the complementary invariant subspace.
  Vec<Scalar> x(m);
  for (Eigen::Index i = 0; i < m; ++i) {
    x(i) = Scalar(std::cos(0.7 * static_cast<double>(i) + 0.3) +
                  static_cast<double>(i) / static_cast<double>(m));
  }
  auto project = [&](Vec<Scalar>& y) { y -= v * (u.dot(y) / uv); };
  project(x);
  double xn = x.norm();
  if (xn < kNullNorm) return est;
  x /= xn;
  Scalar prev = Scalar(0);
  std::vector<double> log_growth;
  bool converged = false;
  for (int it = 1; it <= opts.second_max_iterations; ++it) {
    Vec<Scalar> w = P.transpose() * x;
    project(w);
    const Scalar rq = x.dot(w);
    const double nw = w.norm();
    if (nw < kNullNorm) {
      est.second_abs = 0.0;
      converged = true;
      break;
    }
    log_growth.push_back(std::log(nw));
    x = w / nw;
    if (it > 1 && std::abs(rq - prev) < 1e-9) {
      est.second_abs = std::abs(rq);
      converged = true;
      break;
    }
    prev = rq;
  }
  if (!converged) {
    // Equal-modulus pair: geometric mean growth over the trailing window.
    const std::size_t window = std::min<std::size_t>(log_growth.size(), 500);
    double s = 0.0;
    for (std::size_t i = log_growth.size() - window; i < log_growth.size(); ++i) s += log_growth[i];
    est.second_abs = std::exp(s / static_cast<double>(window));
  }
  return est;
}

template EigenEstimate leading_eigenvalue<double>(const UlamOperator<double>&,
                                                  const PowerIterationOptions&);
template EigenEstimate leading_eigenvalue<Complex>(const UlamOperator<Complex>&,
                                                   const PowerIterationOptions&);

Eigen::VectorXd invariant_density(const UlamOperator<double>& op, const PowerIterationOptions& opts) {
  const EigenEstimate est = leading_eigenvalue(op, opts);
  Eigen::VectorXd v = est.eigenvector.real();
  return v / (v.sum() * op.cell_width());
}

double gauss_density_sup_error(const Eigen::VectorXd& density) {
  const Eigen::Index m = density.size();
  const double h = 1.0 / static_cast<double>(m);
  double err = 0.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    const double a = static_cast<double>(i) * h;
    const double b = static_cast<double>(i + 1) * h;
    const double avg = (std::log1p(b) - std::log1p(a)) / (std::numbers::ln2 * h);
    err = std::max(err, std::abs(density(i) - avg));
  }
  return err;
}

// ---------------------------------------------------------------------------

std::vector<double> symmetric_grid(double half_width, int points) {
  if (points < 2) throw std::invalid_argument("grid needs at least 2 points");
  std::vector<double> grid(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i) {
    grid[static_cast<std::size_t>(i)] =
        -half_width + 2.0 * half_width * static_cast<double>(i) / static_cast<double>(points - 1);
  }
  // Exact mirror symmetry.
  for (int i = 0; i < points / 2; ++i) grid[static_cast<std::size_t>(points - 1 - i)] = -grid[static_cast<std::size_t>(i)];
  if (points % 2 == 1) grid[static_cast<std::size_t>(points / 2)] = 0.0;
  return grid;
}

SpectralSummary eigenvalue_curve_check(const MapSpec& map, Eigen::Index resolution,
                                       const std::vector<double>& t_grid, double d_exp) {
  if (t_grid.size() < 8) throw std::invalid_argument("t grid too coarse for a fit (< 8 points)");
  for (double t : t_grid) {
    const bool mirrored = std::any_of(t_grid.begin(), t_grid.end(),
                                      [t](double s) { return std::abs(s + t) < 1e-12; });
    if (!mirrored) throw std::invalid_argument("t grid must be symmetric about 0");
  }
  SpectralSummary summary;
  summary.map = map;
  summary.resolution = resolution;
  summary.d_exp = d_exp;
  const UlamOperator<double> op0 = ulam_discretize(map, resolution);
  const EigenEstimate at_zero = leading_eigenvalue(op0);
  summary.lambda_at_zero = at_zero.lambda;
  summary.gap = 1.0 - at_zero.second_abs;

  double k_bound = std::numeric_limits<double>::infinity();
  for (double t : t_grid) {
    summary.delta = std::max(summary.delta, std::abs(t));
    const EigenEstimate est = t == 0.0 ? at_zero : leading_eigenvalue(perturbed_matrix(op0, t));
    summary.curve.push_back({t, est.lambda, est.second_abs});
    summary.theta1 = std::max(summary.theta1, est.second_abs);
    if (t != 0.0) {
      k_bound = std::min(k_bound, (1.0 - std::abs(est.lambda)) / std::pow(std::abs(t), d_exp));
    }
  }
  summary.k_bound = k_bound;
  for (const auto& p : summary.curve) {
    for (const auto& q : summary.curve) {
      if (std::abs(p.t + q.t) < 1e-12) {
        summary.conjugate_symmetry_error =
            std::max(summary.conjugate_symmetry_error, std::abs(p.lambda - std::conj(q.lambda)));
      }
    }
  }
  summary.pass = summary.k_bound > 0.0 && summary.theta1 < 1.0;
  return summary;
}

TailNormReport tail_norm_check(const MapSpec& map, Eigen::Index resolution,
                               const std::vector<double>& t_grid, double delta) {
  TailNormReport report;
  report.delta = delta;
  const UlamOperator<double> op0 = ulam_discretize(map, resolution);
  for (double t : t_grid) {
    if (!(std::abs(t) > delta && std::abs(t) <= std::numbers::pi + 1e-12)) continue;
    const EigenEstimate est = leading_eigenvalue(perturbed_matrix(op0, t));
    report.curve.push_back({t, est.lambda, est.second_abs});
    report.theta2 = std::max(report.theta2, std::abs(est.lambda));
  }
  if (report.curve.empty()) throw std::invalid_argument("no grid point in delta < |t| <= pi");
  report.pass = report.theta2 < 1.0 - 1e-3;
  return report;
}

void write_spectrum_csv(std::ostream& os, const std::vector<SpectralPoint>& curve) {
  os << "t,re_lambda,im_lambda,abs_lambda,second_abs\n";
  char buf[160];
  for (const auto& p : curve) {
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g\n", p.t, p.lambda.real(),
                  p.lambda.imag(), std::abs(p.lambda), p.second_abs);
    os << buf;
  }
}

}  // namespace mllab
