#pragma once

#include <array>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "friedrichs/error.hpp"
#include "friedrichs/torus.hpp"

namespace friedrichs::cli {

enum ExitCode : int {
  kSuccess = 0,
  kUsageError = 1,     // bad arguments, unreadable or invalid config
  kModelValidity = 2,  // degenerate or non-unique maximum
  kNumerical = 3,      // quadrature / root / fit failures
};

int exit_code_for(ErrorCode code);

// Entry point shared by the executable and the tests.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// "0.3", "-pi/2", "3*pi/4", "pi"
double parse_angle(const std::string& text);
// "x,y,z" with each component an angle expression.
TorusVector parse_point(const std::string& text);
// "x,y,z;x,y,z;..."
std::vector<std::array<double, 3>> parse_waypoints(const std::string& text);

// "x1.5" is 1.5 mu(p); a bare number is an absolute coupling.
struct MuSpec {
  bool relative = false;
  double value = 0.0;
  std::string text;
  double resolve(double mu_threshold) const { return relative ? value * mu_threshold : value; }
};
MuSpec parse_mu_spec(const std::string& text);
std::vector<MuSpec> parse_mu_list(const std::string& text);

// Waypoints joined by straight segments with `samples` points each, shared
// endpoints counted once.
std::vector<TorusVector> sample_path(const std::vector<std::array<double, 3>>& waypoints, int samples);

// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& bytes);

// Number formatted with 17 significant digits.
std::string format_double(double v);

}  // namespace friedrichs::cli
