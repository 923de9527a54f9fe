#pragma once

#include <Eigen/Dense>

#include <cstddef>

namespace episcale {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Entries at or below this magnitude are structural zeros for regularity.
inline constexpr double kStructuralZero = 1e-15;

/// Largest eigenvalue modulus. Closed form for 1x1 and 2x2; power iteration
/// (shifted by the identity when the matrix is nonnegative) otherwise.
/// Throws NumericalError if the iteration does not settle.
double spectral_radius(const Matrix& m);

/// Eigenvalue moduli of a 2x2 matrix from its characteristic polynomial.
double spectral_radius_2x2(double a, double b, double c, double d);

/// max_j |sum_i m(i,j) - 1|
double column_sum_defect(const Matrix& m);

/// Some power up to the Wielandt bound n^2 - 2n + 2 is entrywise positive.
bool is_regular(const Matrix& m);

/// m^k by binary exponentiation. k = 0 gives the identity.
Matrix matrix_power(const Matrix& m, unsigned long k);

double max_abs(const Vector& v);

} // namespace episcale
