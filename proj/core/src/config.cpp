#include "hetmpc/config.hpp"

#include <cmath>
#include <numeric>

#include "hetmpc/errors.hpp"

namespace hetmpc {

Rational parse_rational(const std::string& text) {
  Rational r;
  try {
    auto slash = text.find('/');
    if (slash == std::string::npos) {
      r.num = std::stoll(text);
      r.den = 1;
    } else {
      r.num = std::stoll(text.substr(0, slash));
      r.den = std::stoll(text.substr(slash + 1));
    }
  } catch (const std::exception&) {
    throw ConfigError("not a rational number: '" + text + "'");
  }
  if (r.den <= 0) throw ConfigError("rational denominator must be positive: '" + text + "'");
  auto g = std::gcd(r.num, r.den);
  if (g > 1) {
    r.num /= g;
    r.den /= g;
  }
  return r;
}

void ClusterConfig::validate() const {
  if (n < 2) throw ConfigError("n must be at least 2");
  if (!(gamma > 0.0 && gamma < 1.0)) throw ConfigError("gamma must lie in (0, 1)");
  if (!(polylog_c > 0.0)) throw ConfigError("polylog constant must be positive");
  if (polylog_e < 0) throw ConfigError("polylog exponent must be non-negative");
  if (superlinear) {
    if (superlinear->num <= 0) throw ConfigError("superlinear exponent f must be positive");
    if (superlinear->value() > 1.0) throw ConfigError("superlinear exponent f must be at most 1");
  }
}

std::uint64_t ceil_log2(std::uint64_t x) {
  std::uint64_t r = 0;
  while ((std::uint64_t{1} << r) < x) ++r;
  return r == 0 ? 1 : r;
}

std::uint64_t snap_floor(double x) {
  if (x <= 0.0) return 0;
  double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return static_cast<std::uint64_t>(r);
  return static_cast<std::uint64_t>(std::floor(x));
}

double rational_pow(double base, const Rational& e) {
  double x = std::pow(base, e.value());
  double r = std::round(x);
  if (std::abs(x - r) <= 1e-9 * std::max(1.0, x)) return r;
  return x;
}

namespace {

double snapped_pow(double base, double e) {
  double x = std::pow(base, e);
  double r = std::round(x);
  return std::abs(x - r) <= 1e-9 * std::max(1.0, x) ? r : x;
}

double polylog(const ClusterConfig& cfg) { return std::pow(static_cast<double>(ceil_log2(cfg.n)), cfg.polylog_e); }

}  // namespace

std::uint64_t small_machine_count(const ClusterConfig& cfg) {
  double cap = snapped_pow(static_cast<double>(cfg.n), cfg.gamma);
  auto k = static_cast<std::uint64_t>(std::ceil(static_cast<double>(cfg.m) / cap - 1e-9));
  return std::max<std::uint64_t>(1, k);
}

std::uint64_t small_budget_words(const ClusterConfig& cfg) {
  double cap = snapped_pow(static_cast<double>(cfg.n), cfg.gamma);
  return snap_floor(cfg.polylog_c * cap * polylog(cfg));
}

std::uint64_t large_budget_words(const ClusterConfig& cfg) {
  double base = static_cast<double>(cfg.n);
  if (cfg.superlinear)
    base = rational_pow(static_cast<double>(cfg.n),
                        Rational{cfg.superlinear->num + cfg.superlinear->den, cfg.superlinear->den});
  return snap_floor(cfg.polylog_c * base * polylog(cfg));
}

std::size_t tree_depth_bound(double gamma) {
  return static_cast<std::size_t>(std::ceil((1.0 - gamma) / gamma - 1e-12)) + 1;
}

}  // namespace hetmpc
