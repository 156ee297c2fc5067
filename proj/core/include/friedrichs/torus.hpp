#pragma once

#include <array>
#include <numbers>
#include <ostream>

#include "friedrichs/linalg.hpp"

namespace friedrichs {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Reduces an angle to (-pi, pi]. The result differs from x by an exact
// multiple of the floating-point 2*pi. Throws on non-finite input.
double wrap_angle(double x);

// A point of the torus (-pi, pi]^3. Every constructor and arithmetic
// operation wraps, so the components always stay in the fundamental domain.
class TorusVector {
 public:
  TorusVector() = default;
  TorusVector(double x, double y, double z);
  explicit TorusVector(const Vec3& v);
  explicit TorusVector(const std::array<double, 3>& v);

  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  const std::array<double, 3>& components() const { return c_; }
  Vec3 vec() const { return {c_[0], c_[1], c_[2]}; }

  TorusVector operator+(const TorusVector& o) const;
  TorusVector operator-(const TorusVector& o) const;
  TorusVector operator-() const;
  TorusVector scaled(double s) const;

  bool operator==(const TorusVector&) const = default;

 private:
  std::array<double, 3> c_{0.0, 0.0, 0.0};
};

TorusVector wrap_torus(const std::array<double, 3>& x);

// Minimal-image displacement b - a, each component in (-pi, pi].
Vec3 torus_displacement(const TorusVector& a, const TorusVector& b);
double torus_distance(const TorusVector& a, const TorusVector& b);

std::ostream& operator<<(std::ostream& os, const TorusVector& v);

}  // namespace friedrichs
