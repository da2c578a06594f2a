#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace mllab {

enum class MapKind { Doubling, Gauss, BetaMap };

std::string to_string(MapKind kind);
MapKind parse_map_kind(const std::string& name);

/// Piecewise-monotone interval map with integer digit function phi.
///   Doubling: x -> 2x mod 1, phi = floor(2x)
///   BetaMap:  x -> beta x mod 1, phi = floor(beta x)
///   Gauss:    x -> 1/x - floor(1/x), phi = floor(1/x); branches above
///             digit_cutoff are lumped (see ulam_discretize).
struct MapSpec {
  MapKind kind = MapKind::Doubling;
  double beta = 2.0;
  long digit_cutoff = 10000;

  static MapSpec doubling() { return {MapKind::Doubling, 2.0}; }
  static MapSpec gauss(long cutoff = 10000) { return {MapKind::Gauss, 2.0, cutoff}; }
  static MapSpec beta_map(double beta) { return {MapKind::BetaMap, beta}; }
  void validate() const;
};

class NonConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Complex = std::complex<double>;

/// Ulam matrix on m uniform cells of [0, 1]: entry (i, j) is the fraction
/// of cell i carried into cell j, each branch piece weighted by
/// exp(i t phi). Rows act on densities from the left: p' = p P.
template <class Scalar>
struct UlamOperator {
  MapSpec map;
  Eigen::Index resolution = 0;
  double t = 0.0;
  Eigen::SparseMatrix<Scalar, Eigen::RowMajor> matrix;

  double cell_width() const { return 1.0 / static_cast<double>(resolution); }
};

/// Real operator at t = 0. Fractions come from closed-form inverse
/// branches. For the Gauss map the residual interval (0, 1/(cutoff+1))
/// is spread uniformly over all target cells with digit cutoff+1.
UlamOperator<double> ulam_discretize(const MapSpec& map, Eigen::Index resolution);

/// Twisted operator P_t f = P_T(exp(i t phi) f); reassembled from the same
/// branch pieces. At t = 0 its entries equal those of `op`.
UlamOperator<Complex> perturbed_matrix(const UlamOperator<double>& op, double t);

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 100000;
  int second_max_iterations = 5000;
};

/// Dominant eigenpair of the density action v -> P^T v, and a deflation
/// estimate of the second eigenvalue modulus.
struct EigenEstimate {
  Complex lambda{0.0, 0.0};
  Eigen::VectorXcd eigenvector;  // right eigenvector of P^T (a density at t = 0)
  double second_abs = 0.0;
  int iterations = 0;
};

template <class Scalar>
EigenEstimate leading_eigenvalue(const UlamOperator<Scalar>& op,
                                 const PowerIterationOptions& opts = {});

/// Leading eigenvector at t = 0 scaled to a probability density
/// (cell values, integrating to one).
Eigen::VectorXd invariant_density(const UlamOperator<double>& op,
                                  const PowerIterationOptions& opts = {});

/// Sup distance between the Ulam density and the cell averages of the
/// Gauss density 1/((1+x) ln 2).
double gauss_density_sup_error(const Eigen::VectorXd& density);

struct SpectralPoint {
  double t = 0.0;
  Complex lambda{0.0, 0.0};
  double second_abs = 0.0;
};

struct SpectralSummary {
  MapSpec map;
  Eigen::Index resolution = 0;
  double delta = 0.0;
  double d_exp = 2.0;
  Complex lambda_at_zero{1.0, 0.0};
  double gap = 0.0;      // 1 - |second eigenvalue| at t = 0
  double theta1 = 0.0;   // max second-eigenvalue modulus over |t| <= delta
  double theta2 = 0.0;   // max |lambda_t| over delta < |t| <= pi (tail check)
  double k_bound = 0.0;  // largest K with |lambda_t| <= 1 - K |t|^d on the grid
  double conjugate_symmetry_error = 0.0;
  std::vector<SpectralPoint> curve;
  bool pass = false;
};

/// K fit and theta1 over a symmetric grid in [-delta, delta]; needs >= 8
/// points. Pass iff K > 0 and theta1 < 1.
SpectralSummary eigenvalue_curve_check(const MapSpec& map, Eigen::Index resolution,
                                       const std::vector<double>& t_grid, double d_exp);

struct TailNormReport {
  double delta = 0.0;
  double theta2 = 0.0;
  std::vector<SpectralPoint> curve;
  bool pass = false;  // theta2 < 1 - 1e-3
};

/// Spectral radius of P_t over delta < |t| <= pi.
TailNormReport tail_norm_check(const MapSpec& map, Eigen::Index resolution,
                               const std::vector<double>& t_grid, double delta);

/// Symmetric grid of `points` values on [-half_width, half_width].
std::vector<double> symmetric_grid(double half_width, int points);

/// CSV "t,re_lambda,im_lambda,abs_lambda,second_abs".
void write_spectrum_csv(std::ostream& os, const std::vector<SpectralPoint>& curve);

}  // namespace mllab
