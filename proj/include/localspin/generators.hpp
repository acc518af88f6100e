#pragma once

// Random instance families modelled on the Biq Mac benchmark collection.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "localspin/error.hpp"
#include "localspin/instance.hpp"
#include "localspin/rng.hpp"

namespace localspin {

enum class FamilyKind { g05, pm1s, pm1d, w, pw, ising, torus };

/// A random-instance family with its parameters. Use the named constructors.
struct FamilySpec {
  FamilyKind kind = FamilyKind::g05;
  std::size_t n = 0;       // vertex count (all but torus)
  double density = 0.0;    // edge probability (w, pw; fixed for g05/pm1s/pm1d)
  double sigma = 0.0;      // ising decay exponent
  std::size_t dim = 0;     // torus dimension D
  std::size_t side = 0;    // torus side length L

  static FamilySpec g05(std::size_t n) { return {FamilyKind::g05, n, 0.5}; }
  static FamilySpec pm1s(std::size_t n) { return {FamilyKind::pm1s, n, 0.1}; }
  static FamilySpec pm1d(std::size_t n) { return {FamilyKind::pm1d, n, 0.5}; }
  static FamilySpec w(std::size_t n, double d) { return {FamilyKind::w, n, d}; }
  static FamilySpec pw(std::size_t n, double d) { return {FamilyKind::pw, n, d}; }
  static FamilySpec ising(std::size_t n, double sigma) {
    return {FamilyKind::ising, n, 0.0, sigma};
  }
  static FamilySpec torus(std::size_t dim, std::size_t side) {
    return {FamilyKind::torus, 0, 0.0, 0.0, dim, side};
  }

  std::size_t vertex_count() const {
    if (kind != FamilyKind::torus) return n;
    std::size_t v = 1;
    for (std::size_t d = 0; d < dim; ++d) v *= side;
    return v;
  }

  /// Biq Mac style name: g05_60, pm1s_80, w05_100, pw09_100, ising2.5_100, t2g5.
  std::string tag() const {
    char buf[64];
    switch (kind) {
      case FamilyKind::g05: return "g05_" + std::to_string(n);
      case FamilyKind::pm1s: return "pm1s_" + std::to_string(n);
      case FamilyKind::pm1d: return "pm1d_" + std::to_string(n);
      case FamilyKind::w:
      case FamilyKind::pw:
        std::snprintf(buf, sizeof buf, "%s%02d_%zu", kind == FamilyKind::w ? "w" : "pw",
                      static_cast<int>(std::lround(density * 10.0)), n);
        return buf;
      case FamilyKind::ising:
        std::snprintf(buf, sizeof buf, "ising%g_%zu", sigma, n);
        return buf;
      case FamilyKind::torus:
        return "t" + std::to_string(dim) + "g" + std::to_string(side);
    }
    return "unknown";
  }

  void validate() const {
    if (kind == FamilyKind::torus) {
      if (dim != 2 && dim != 3) throw InvalidArgument("torus dimension must be 2 or 3");
      if (side < 2) throw InvalidArgument("torus side length must be at least 2");
      return;
    }
    if (n == 0) throw InvalidArgument("vertex count must be positive");
    if (kind == FamilyKind::ising) {
      if (!std::isfinite(sigma) || sigma < 0.0) {
        throw InvalidArgument("ising exponent must be finite and nonnegative");
      }
      return;
    }
    if (!(density > 0.0 && density <= 1.0)) throw InvalidArgument("density must lie in (0,1]");
  }
};

namespace detail {

inline Instance generate_density(const FamilySpec& f, Rng& rng) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t j = i + 1; j < f.n; ++j) {
      if (!rng.bernoulli(f.density)) continue;
      double w = 1.0;
      switch (f.kind) {
        case FamilyKind::pm1s:
        case FamilyKind::pm1d:
          w = rng.index(2) == 0 ? -1.0 : 1.0;
          break;
        case FamilyKind::w: {
          // {-10..-1, 1..10}
          const auto k = static_cast<double>(rng.index(20));
          w = k < 10.0 ? k - 10.0 : k - 9.0;
          break;
        }
        case FamilyKind::pw:
          w = static_cast<double>(rng.index(10) + 1);
          break;
        default:
          break;
      }
      edges.push_back({i, j, w});
    }
  }
  Instance inst;
  inst.n = f.n;
  inst.edges = std::move(edges);
  return inst;
}

inline Instance generate_ising(const FamilySpec& f, Rng& rng) {
  std::vector<Edge> edges;
  edges.reserve(f.n * (f.n - 1) / 2);
  for (std::size_t i = 0; i < f.n; ++i) {
    for (std::size_t j = i + 1; j < f.n; ++j) {
      const double eps = rng.normal();
      edges.push_back({i, j, eps / std::pow(static_cast<double>(j - i), f.sigma)});
    }
  }
  Instance inst;
  inst.n = f.n;
  inst.edges = std::move(edges);
  return inst;
}

inline Instance generate_torus(const FamilySpec& f, Rng& rng) {
  const std::size_t n = f.vertex_count();
  std::vector<std::size_t> stride(f.dim, 1);
  for (std::size_t d = 1; d < f.dim; ++d) stride[d] = stride[d - 1] * f.side;
  std::vector<Edge> edges;
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t d = 0; d < f.dim; ++d) {
      const std::size_t coord = (v / stride[d]) % f.side;
      const std::size_t u = v - coord * stride[d] + ((coord + 1) % f.side) * stride[d];
      // For L = 2 the forward and wrap-around bonds coincide; keep one.
      if (f.side == 2 && u < v) continue;
      edges.push_back({std::min(u, v), std::max(u, v), rng.index(2) == 0 ? -1.0 : 1.0});
    }
  }
  return make_instance(n, std::move(edges));
}

}  // namespace detail

/// Draws an instance of `family`. Deterministic in (family, seed); the random
/// stream is keyed on the family tag as well, so families do not alias.
inline Instance generate(const FamilySpec& family, std::uint64_t seed) {
  family.validate();
  const std::string tag = family.tag();
  Rng rng(derive_seed(seed, fnv1a(tag)));
  Instance inst;
  switch (family.kind) {
    case FamilyKind::ising:
      inst = detail::generate_ising(family, rng);
      break;
    case FamilyKind::torus:
      inst = detail::generate_torus(family, rng);
      break;
    default:
      inst = detail::generate_density(family, rng);
      break;
  }
  inst.family = tag;
  inst.seed = seed;
  inst.validate();
  return inst;
}

/// Inverse of FamilySpec::tag(). Throws InvalidArgument on unknown tags.
inline FamilySpec parse_family_tag(const std::string& tag) {
  auto number_after = [&](std::size_t pos) -> std::size_t {
    auto v = detail::parse_number<std::size_t>(std::string_view(tag).substr(pos));
    if (!v) throw InvalidArgument("bad family tag: " + tag);
    return *v;
  };
  auto underscore = tag.rfind('_');
  if (tag.rfind("g05_", 0) == 0) return FamilySpec::g05(number_after(4));
  if (tag.rfind("pm1s_", 0) == 0) return FamilySpec::pm1s(number_after(5));
  if (tag.rfind("pm1d_", 0) == 0) return FamilySpec::pm1d(number_after(5));
  if (tag.rfind("ising", 0) == 0 && underscore != std::string::npos) {
    auto sigma = detail::parse_number<double>(std::string_view(tag).substr(5, underscore - 5));
    if (!sigma) throw InvalidArgument("bad family tag: " + tag);
    return FamilySpec::ising(number_after(underscore + 1), *sigma);
  }
  if ((tag.rfind("pw", 0) == 0 || tag.rfind('w', 0) == 0) && underscore != std::string::npos) {
    const bool positive = tag[0] == 'p';
    const std::size_t start = positive ? 2 : 1;
    auto d = detail::parse_number<std::size_t>(
        std::string_view(tag).substr(start, underscore - start));
    if (!d) throw InvalidArgument("bad family tag: " + tag);
    const double density = static_cast<double>(*d) / 10.0;
    const std::size_t n = number_after(underscore + 1);
    return positive ? FamilySpec::pw(n, density) : FamilySpec::w(n, density);
  }
  if (tag.size() > 1 && tag[0] == 't') {
    auto g = tag.find('g');
    if (g != std::string::npos) {
      auto dim = detail::parse_number<std::size_t>(std::string_view(tag).substr(1, g - 1));
      if (dim) return FamilySpec::torus(*dim, number_after(g + 1));
    }
  }
  throw InvalidArgument("unknown family tag: " + tag);
}

}  // namespace localspin
