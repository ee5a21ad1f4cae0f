#pragma once

#include <cstdint>
#include <optional>
#include <string>

namespace hetmpc {

struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  std::string str() const { return std::to_string(num) + "/" + std::to_string(den); }
};

// Parses "p/q" or a plain integer.
Rational parse_rational(const std::string& text);

struct ClusterConfig {
  std::uint64_t n = 0;  // vertices
  std::uint64_t m = 0;  // edges
  double gamma = 0.5;
  double polylog_c = 1.0;
  int polylog_e = 1;
  std::optional<Rational> superlinear;  // large machine gets n^(1+f) memory
  std::uint64_t seed = 1;

  void validate() const;
};

// ceil(log2 x) for x >= 1, at least 1.
std::uint64_t ceil_log2(std::uint64_t x);

// floor(x) with results within 1e-9 relative of an integer snapped to it.
std::uint64_t snap_floor(double x);

// n^e for rational e, snapped.
double rational_pow(double base, const Rational& e);

std::uint64_t small_machine_count(const ClusterConfig& cfg);
std::uint64_t small_budget_words(const ClusterConfig& cfg);
std::uint64_t large_budget_words(const ClusterConfig& cfg);

// Depth bound for aggregation trees: ceil((1-gamma)/gamma) + 1.
std::size_t tree_depth_bound(double gamma);

}  // namespace hetmpc
