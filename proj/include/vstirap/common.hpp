#pragma once

// Shared aliases and unit conventions.
//
// All angular frequencies inside the library are in rad/us and all times in
// microseconds, so that a rate quoted as nu = omega/2pi in MHz converts as
// omega = 2*pi*nu. Detection-chain code works in SI seconds instead; the
// conversion happens at that boundary.

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>
#include <Eigen/SparseCore>

namespace vstirap {

inline constexpr const char* kVersion = "0.1.0";

using cplx = std::complex<double>;
using SparseOp = Eigen::SparseMatrix<cplx>;
using DenseOp = Eigen::MatrixXcd;
using StateVec = Eigen::VectorXcd;

inline constexpr double kPi = std::numbers::pi;
inline constexpr cplx kImag{0.0, 1.0};

inline double angular_from_mhz(double nu_mhz) { return 2.0 * kPi * nu_mhz; }
inline double mhz_from_angular(double omega) { return omega / (2.0 * kPi); }

/// Integration failure that carries the time at which the solver gave up.
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double t_fail)
      : std::runtime_error(what + " (at t = " + std::to_string(t_fail) + " us)"),
        t_fail_(t_fail) {}
  double failing_time() const { return t_fail_; }

 private:
  double t_fail_;
};

}  // namespace vstirap
