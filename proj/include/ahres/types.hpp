#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ahres {

// Extended precision is used for assembly and refinement; deep resonances are
// badly conditioned (eigenvalue condition numbers near 1e12) in double.
using Real = long double;
using Cplx = std::complex<Real>;
using VecR = Eigen::Matrix<Real, Eigen::Dynamic, 1>;
using VecC = Eigen::Matrix<Cplx, Eigen::Dynamic, 1>;
using MatR = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic>;
using MatC = Eigen::Matrix<Cplx, Eigen::Dynamic, Eigen::Dynamic>;

using VecCd = Eigen::VectorXcd;
using MatCd = Eigen::MatrixXcd;

inline constexpr Real kPi = 3.141592653589793238462643383279502884L;
inline constexpr Cplx kI{0.0L, 1.0L};

enum class ErrorKind { domain, validation, numerical, branch, near_pole, internal };

inline const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::validation: return "validation";
    case ErrorKind::numerical: return "numerical";
    case ErrorKind::branch: return "branch";
    case ErrorKind::near_pole: return "near_pole";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace ahres
