#include "friedrichs/torus.hpp"

#include <cmath>

#include "friedrichs/error.hpp"

namespace friedrichs {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "invalid input";
    case ErrorCode::TrivialFormFactor: return "trivial form factor";
    case ErrorCode::InvalidDispersion: return "invalid dispersion";
    case ErrorCode::DegenerateMaximum: return "degenerate maximum";
    case ErrorCode::NonUniqueMaximum: return "non-unique maximum";
    case ErrorCode::NoConvergence: return "no convergence";
    case ErrorCode::BelowThreshold: return "below threshold";
    case ErrorCode::QuadratureNotConverged: return "quadrature not converged";
    case ErrorCode::ExpansionFitFailed: return "expansion fit failed";
    case ErrorCode::Precondition: return "precondition violated";
    case ErrorCode::SizeError: return "size error";
    case ErrorCode::FamilyMismatch: return "family mismatch";
    case ErrorCode::ConfigParse: return "config parse error";
    case ErrorCode::Internal: return "internal error";
  }
  return "unknown error";
}

double wrap_angle(double x) {
  if (!std::isfinite(x)) {
    throw Error(ErrorCode::InvalidInput, "torus coordinate is not finite");
  }
  // remainder() is exact and lands in [-pi, pi]; fold -pi onto pi.
  double y = std::remainder(x, kTwoPi);
  if (y <= -kPi) y += kTwoPi;
  if (y > kPi) y -= kTwoPi;
  return y;
}

TorusVector::TorusVector(double x, double y, double z)
    : c_{wrap_angle(x), wrap_angle(y), wrap_angle(z)} {}

TorusVector::TorusVector(const Vec3& v) : TorusVector(v[0], v[1], v[2]) {}

TorusVector::TorusVector(const std::array<double, 3>& v) : TorusVector(v[0], v[1], v[2]) {}

TorusVector TorusVector::operator+(const TorusVector& o) const {
  return {c_[0] + o.c_[0], c_[1] + o.c_[1], c_[2] + o.c_[2]};
}

TorusVector TorusVector::operator-(const TorusVector& o) const {
  return {c_[0] - o.c_[0], c_[1] - o.c_[1], c_[2] - o.c_[2]};
}

TorusVector TorusVector::operator-() const { return {-c_[0], -c_[1], -c_[2]}; }

TorusVector TorusVector::scaled(double s) const { return {s * c_[0], s * c_[1], s * c_[2]}; }

TorusVector wrap_torus(const std::array<double, 3>& x) { return TorusVector(x); }

Vec3 torus_displacement(const TorusVector& a, const TorusVector& b) {
  return (b - a).vec();
}

double torus_distance(const TorusVector& a, const TorusVector& b) {
  return torus_displacement(a, b).norm();
}

std::ostream& operator<<(std::ostream& os, const TorusVector& v) {
  return os << '(' << v[0] << ", " << v[1] << ", " << v[2] << ')';
}

}  // namespace friedrichs
