#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "cli.hpp"

namespace friedrichs::cli {
namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  parts.push_back(cur);
  return parts;
}

double parse_number(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  const char* end = t.data() + t.size();
  auto [ptr, ec] = std::from_chars(t.data(), end, v);
  if (t.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidInput, "cannot parse " + what + " '" + text + "'");
  }
  return v;
}

double parse_factor(const std::string& text) {
  const std::string t = trim(text);
  if (t == "pi") return kPi;
  return parse_number(t, "angle factor");
}

}  // namespace

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::DegenerateMaximum:
    case ErrorCode::NonUniqueMaximum:
      return kModelValidity;
    case ErrorCode::InvalidInput:
    case ErrorCode::TrivialFormFactor:
    case ErrorCode::InvalidDispersion:
    case ErrorCode::ConfigParse:
    case ErrorCode::FamilyMismatch:
    case ErrorCode::SizeError:
      return kUsageError;
    default:
      return kNumerical;
  }
}

double parse_angle(const std::string& text) {
  std::string t = trim(text);
  double sign = 1.0;
  if (!t.empty() && (t[0] == '-' || t[0] == '+')) {
    if (t[0] == '-') sign = -1.0;
    t = trim(t.substr(1));
  }
  if (t.empty()) throw Error(ErrorCode::InvalidInput, "empty angle '" + text + "'");
  const auto slash = split(t, '/');
  if (slash.size() > 2) throw Error(ErrorCode::InvalidInput, "cannot parse angle '" + text + "'");
  double v = 1.0;
  for (const auto& f : split(slash[0], '*')) v *= parse_factor(f);
  if (slash.size() == 2) {
    const double d = parse_factor(slash[1]);
    if (d == 0.0) throw Error(ErrorCode::InvalidInput, "division by zero in '" + text + "'");
    v /= d;
  }
  return sign * v;
}

TorusVector parse_point(const std::string& text) {
  const auto parts = split(text, ',');
  if (parts.size() != 3) throw Error(ErrorCode::InvalidInput, "expected x,y,z but got '" + text + "'");
  return TorusVector(parse_angle(parts[0]), parse_angle(parts[1]), parse_angle(parts[2]));
}

std::vector<std::array<double, 3>> parse_waypoints(const std::string& text) {
  std::vector<std::array<double, 3>> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ';')) {
    const auto parts = split(item, ',');
    if (parts.size() != 3) throw Error(ErrorCode::InvalidInput, "expected x,y,z but got '" + item + "'");
    out.push_back({parse_angle(parts[0]), parse_angle(parts[1]), parse_angle(parts[2])});
  }
  return out;
}

MuSpec parse_mu_spec(const std::string& text) {
  MuSpec m;
  m.text = trim(text);
  if (!m.text.empty() && (m.text[0] == 'x' || m.text[0] == 'X')) {
    m.relative = true;
    m.value = parse_number(m.text.substr(1), "coupling multiple");
  } else {
    m.value = parse_number(m.text, "coupling");
  }
  if (!(m.value > 0.0)) throw Error(ErrorCode::InvalidInput, "coupling must be positive: '" + text + "'");
  return m;
}

std::vector<MuSpec> parse_mu_list(const std::string& text) {
  std::vector<MuSpec> out;
  for (const auto& item : split(text, ',')) out.push_back(parse_mu_spec(item));
  return out;
}

std::vector<TorusVector> sample_path(const std::vector<std::array<double, 3>>& waypoints, int samples) {
  if (waypoints.empty()) throw Error(ErrorCode::InvalidInput, "p-path has no waypoints");
  if (samples < 1) throw Error(ErrorCode::InvalidInput, "samples per segment must be >= 1");
  std::vector<TorusVector> out;
  if (waypoints.size() == 1 || samples == 1) {
    for (const auto& w : waypoints) out.emplace_back(w);
    return out;
  }
  for (std::size_t s = 0; s + 1 < waypoints.size(); ++s) {
    const auto& a = waypoints[s];
    const auto& b = waypoints[s + 1];
    for (int k = (s == 0 ? 0 : 1); k < samples; ++k) {
      const double t = static_cast<double>(k) / (samples - 1);
      out.emplace_back(a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1]), a[2] + t * (b[2] - a[2]));
    }
  }
  return out;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace friedrichs::cli
