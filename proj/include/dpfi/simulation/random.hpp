#pragma once

/**
 * @file
 * @brief Counter-based random streams and beta-distributed uncertainty draws.
 *
 * Every (seed, seller, draw, node) tuple owns an independent stream, so draws
 * can be generated in any order or in parallel with identical results.
 */

#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "dpfi/error.hpp"
#include "dpfi/model.hpp"

namespace dpfi {

namespace detail {

inline std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace detail

/// UniformRandomBitGenerator whose i-th output is a hash of (key, i).
class KeyedStream
{
 public:
  using result_type = std::uint64_t;

  KeyedStream(std::uint64_t seed, std::uint64_t a, std::uint64_t b, std::uint64_t c)
      : key_(detail::mix64(detail::mix64(detail::mix64(detail::mix64(seed) ^ a) ^ b) ^ c))
  {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return detail::mix64(key_ + 0xd1b54a32d192ed03ULL * ++counter_); }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

struct DistributionSpec
{
  std::string family = "beta";
  double a = 1.0;
  double b = 1.0;

  void validate() const
  {
    if (family != "beta") { throw ConfigError("unsupported distribution family '" + family + "' (only beta)"); }
    if (!(a > 0.0) || !(b > 0.0) || !std::isfinite(a) || !std::isfinite(b)) {
      throw ConfigError("beta parameters must be positive");
    }
  }

  std::string label() const;
};

inline std::string DistributionSpec::label() const
{
  auto num = [](double v) {
    std::string s = std::to_string(v);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.') { s.pop_back(); }
    return s;
  };
  return family + "(" + num(a) + "," + num(b) + ")";
}

/// "beta:1,3" -> {beta, 1, 3}
inline DistributionSpec parse_distribution(const std::string& text)
{
  const auto colon = text.find(':');
  const auto comma = text.find(',', colon == std::string::npos ? 0 : colon);
  if (colon == std::string::npos || comma == std::string::npos) {
    throw ConfigError("distribution must look like beta:a,b (got '" + text + "')");
  }
  DistributionSpec d;
  d.family = text.substr(0, colon);
  try {
    std::size_t used = 0;
    const std::string as = text.substr(colon + 1, comma - colon - 1);
    const std::string bs = text.substr(comma + 1);
    d.a = std::stod(as, &used);
    if (used != as.size()) { throw std::invalid_argument(as); }
    d.b = std::stod(bs, &used);
    if (used != bs.size()) { throw std::invalid_argument(bs); }
  } catch (const std::logic_error&) {
    throw ConfigError("distribution parameters must be numbers (got '" + text + "')");
  }
  d.validate();
  return d;
}

/// One Beta(a, b) variate from the stream keyed on (seed, seller, draw, node).
inline double beta_variate(const DistributionSpec& dist, std::uint64_t seed, std::size_t seller, std::size_t draw,
                           std::size_t node)
{
  KeyedStream gen(seed, seller, draw, node);
  if (dist.a == 1.0 && dist.b == 1.0) { return std::uniform_real_distribution<double>(0.0, 1.0)(gen); }
  std::gamma_distribution<double> ga(dist.a, 1.0);
  std::gamma_distribution<double> gb(dist.b, 1.0);
  const double x = ga(gen);
  const double y = gb(gen);
  return x + y > 0.0 ? x / (x + y) : 0.5;
}

/// xi_i = xi0(t_i) + tau (2 B_i - 1), one independent B per node.
inline std::vector<double> sample_xi(const UncertaintyModel& u, const DistributionSpec& dist, const TimeGrid& grid,
                                     std::size_t seller, std::size_t draw, std::uint64_t seed)
{
  std::vector<double> xi(grid.n);
  for (std::size_t i = 0; i < grid.n; ++i) {
    const double base = u.xi0(grid.nodes[i]);
    xi[i] = u.tau == 0.0 ? base : base + u.tau * (2.0 * beta_variate(dist, seed, seller, draw, i) - 1.0);
  }
  return xi;
}

}  // namespace dpfi
