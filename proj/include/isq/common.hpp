#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace isq {

using Complex = std::complex<double>;
using Matrix  = Eigen::MatrixXd;
using Vector  = Eigen::VectorXd;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

namespace tol {
// Stochasticity checks (entry sign, column sums).
inline constexpr double stoch = 1e-9;
// Divisibility witness: R counts as stochastic within this slack.
inline constexpr double divis = 1e-7;
// Condition-number ceiling beyond which a witness is inconclusive.
inline constexpr double kappa_max = 1e8;
// Hermiticity / unitarity / normalization slack.
inline constexpr double herm = 1e-9;
inline constexpr double unit = 1e-9;
inline constexpr double norm = 1e-9;
// Unitarity deviations in (unit, polar_fix] are repaired by polar projection.
inline constexpr double polar_fix = 1e-6;
// Moduli below this are left untouched by gauge fixing.
inline constexpr double gauge = 1e-12;
}  // namespace tol

// Base class for every library error.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionMismatch : public Error { using Error::Error; };
class IndexOutOfRange : public Error { using Error::Error; };
class InvalidArgs : public Error { using Error::Error; };

// stochastic-core
class NegativeEntry : public Error {
 public:
  NegativeEntry(int i, int j, double value)
      : Error("negative entry at (" + std::to_string(i) + "," + std::to_string(j) +
              "): " + std::to_string(value)),
        row(i), col(j), entry(value) {}
  int row, col;
  double entry;
};

class ColumnSumViolation : public Error {
 public:
  ColumnSumViolation(int j, double sum)
      : Error("column " + std::to_string(j) + " sums to " + std::to_string(sum)),
        col(j), column_sum(sum) {}
  int col;
  double column_sum;
};

class TimeNotInFamily : public Error { using Error::Error; };

// quantum-correspondence
class NotHermitian : public Error { using Error::Error; };
class NotUnitary : public Error { using Error::Error; };
class NotNormalized : public Error { using Error::Error; };
class EigenDecompositionFailure : public Error { using Error::Error; };
class StepTooSmall : public Error { using Error::Error; };
class EvaluationFailure : public Error { using Error::Error; };

// unistochastic-dilation
class NotDoublyStochastic : public Error { using Error::Error; };
class InvalidProblem : public Error { using Error::Error; };

// measurement-division
class TimeBeforeInteraction : public Error { using Error::Error; };
class ZeroProbabilityOutcome : public Error { using Error::Error; };

// classical-limit
class InvalidSpec : public Error { using Error::Error; };
class UnboundedDistribution : public Error { using Error::Error; };
class StepUnstable : public Error { using Error::Error; };

// fock-scattering
class BasisTooLarge : public Error { using Error::Error; };
class OrderUnsupported : public Error { using Error::Error; };
class QuadratureUnderflow : public Error { using Error::Error; };

// cli-runner
class SchemaViolation : public Error { using Error::Error; };
class OutputDirUnwritable : public Error { using Error::Error; };

// Max-abs norm used by nearly every invariant check.
template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  if (m.size() == 0) return 0.0;
  return m.cwiseAbs().maxCoeff();
}

// Deviation of U from unitarity, max-abs of U U^dagger - I.
inline double unitarity_deviation(const CMatrix& u) {
  return max_abs((u * u.adjoint() - CMatrix::Identity(u.rows(), u.cols())).eval());
}

inline double hermiticity_deviation(const CMatrix& h) {
  return max_abs((h - h.adjoint()).eval());
}

}  // namespace isq
