#pragma once

#include <Eigen/Core>
#include <memory>

#include "worstrisk/grid.hpp"

namespace worstrisk {

/// Orthonormal function system on [t_start, t_end].
///
/// The builtin kind is the sine system phi_k(t) = sqrt(2/T) sin(2 k pi (t-T1)/T),
/// k = 1..N, which is orthonormal w.r.t. Lebesgue measure on the interval.
/// Custom systems are supplied tabulated on a reference grid; orthonormality of
/// custom input is the caller's responsibility beyond the quadrature check below.
class BasisSet {
 public:
  enum class Kind { Sine, Tabulated };

  static BasisSet sine(int n_basis, double t_start = 0.0, double t_end = 1.0);
  /// columns of `values` are phi_1..phi_N sampled on `grid`.
  static BasisSet tabulated(GridPtr grid, Eigen::MatrixXd values);

  Kind kind() const { return kind_; }
  int size() const { return n_basis_; }
  double t_start() const { return t_start_; }
  double t_end() const { return t_end_; }

  /// phi_k(t) with k zero-based. Tabulated systems interpolate linearly.
  double eval(int k, double t) const;

  /// (grid.size() x N) matrix of basis values.
  Eigen::MatrixXd tabulate(const TimeGrid& grid) const;

 private:
  BasisSet() = default;
  Kind kind_ = Kind::Sine;
  int n_basis_ = 0;
  double t_start_ = 0.0;
  double t_end_ = 1.0;
  GridPtr ref_grid_;          // Tabulated only
  Eigen::MatrixXd ref_values_;  // Tabulated only
};

using BasisPtr = std::shared_ptr<const BasisSet>;

inline BasisPtr make_sine_basis(int n_basis, double t_start = 0.0, double t_end = 1.0) {
  return std::make_shared<const BasisSet>(BasisSet::sine(n_basis, t_start, t_end));
}

/// Largest deviation of the left-endpoint quadrature Gram matrix from identity.
double max_gram_deviation(const BasisSet& basis, const TimeGrid& grid);

}  // namespace worstrisk
