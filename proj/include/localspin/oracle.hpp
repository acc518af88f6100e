#pragma once

// Exact MAXCUT by exhaustive Gray-code enumeration, for small instances.

#include <bit>
#include <cmath>
#include <cstdint>
#include <vector>

#include "json.hpp"
#include "localspin/error.hpp"
#include "localspin/instance.hpp"
#include "localspin/parallel.hpp"

namespace localspin {

inline constexpr std::size_t kOracleMaxVertices = 28;

struct ExactSolution {
  double max_cut = 0.0;
  std::vector<int> argmax_spins;
  std::uint64_t num_optima = 0;  // counted up to the global flip
};

/// Relative tolerance used for real-valued cut comparisons.
inline constexpr double kCutRelTol = 1e-9;

inline bool cuts_equal(double a, double b) {
  return std::abs(a - b) <= kCutRelTol * std::max(1.0, std::abs(b));
}

/// Walks spin configurations in reflected Gray-code order, maintaining the cut
/// and each vertex's local field h_k = sum_j w_kj s_j so that a flip costs
/// O(n). Spin 0 is pinned to +1; `prefix_bits` top free spins are pinned to the
/// bits of `prefix`, and the remaining spins are enumerated.
class GrayCodeEnumerator {
 public:
  GrayCodeEnumerator(const std::vector<std::vector<double>>& w, std::size_t prefix_bits,
                     std::uint64_t prefix)
      : w_(w), n_(w.size()), s_(w.size(), 1), h_(w.size(), 0.0) {
    const std::size_t free = n_ == 0 ? 0 : n_ - 1;
    if (prefix_bits > free) throw InvalidArgument("prefix longer than free spins");
    free_bits_ = free - prefix_bits;
    for (std::size_t b = 0; b < prefix_bits; ++b) {
      if ((prefix >> b) & 1U) s_[1 + free_bits_ + b] = -1;
    }
    recompute();
  }

  std::uint64_t count() const { return std::uint64_t{1} << free_bits_; }
  double cut() const { return cut_; }
  const std::vector<int>& spins() const { return s_; }

  /// Advances from configuration `index` to `index + 1` in Gray order.
  void advance(std::uint64_t index) {
    const auto k = 1 + static_cast<std::size_t>(std::countr_zero(index + 1));
    // Flipping k toggles every incident edge: cut changes by s_k h_k.
    cut_ += s_[k] * h_[k];
    const double sk = s_[k];
    for (std::size_t j = 0; j < n_; ++j) h_[j] -= 2.0 * sk * w_[j][k];
    s_[k] = -s_[k];
  }

  /// Cut recomputed from scratch for the current spins.
  double recompute_cut() const {
    double c = 0.0;
    for (std::size_t i = 0; i < n_; ++i) {
      for (std::size_t j = i + 1; j < n_; ++j) {
        if (s_[i] != s_[j]) c += w_[i][j];
      }
    }
    return c;
  }

 private:
  void recompute() {
    cut_ = recompute_cut();
    for (std::size_t i = 0; i < n_; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n_; ++j) acc += w_[i][j] * s_[j];
      h_[i] = acc;
    }
  }

  const std::vector<std::vector<double>>& w_;
  std::size_t n_;
  std::size_t free_bits_ = 0;
  std::vector<int> s_;
  std::vector<double> h_;
  double cut_ = 0.0;
};

namespace detail {

inline std::vector<std::vector<double>> dense_weights(const Instance& inst) {
  std::vector<std::vector<double>> w(inst.n, std::vector<double>(inst.n, 0.0));
  for (const auto& e : inst.edges) {
    w[e.i][e.j] = e.w;
    w[e.j][e.i] = e.w;
  }
  return w;
}

}  // namespace detail

/// Exact maximum cut. The search space is split into a fixed number of chunks
/// (independent of `threads`), merged in chunk order, so the reported argmax is
/// the same for every thread count.
inline ExactSolution brute_force(const Instance& inst, std::size_t threads = 1) {
  if (inst.n > kOracleMaxVertices) {
    throw OracleCapExceeded("exact oracle supports n <= " + std::to_string(kOracleMaxVertices) +
                            ", instance has n = " + std::to_string(inst.n));
  }
  if (inst.n == 0) throw InvalidArgument("empty instance");
  const auto w = detail::dense_weights(inst);
  const std::size_t free = inst.n - 1;
  const std::size_t prefix_bits = std::min<std::size_t>(free, 4);
  const std::size_t chunks = std::size_t{1} << prefix_bits;
  std::vector<ExactSolution> partial(chunks);
  parallel_for(chunks, threads, [&](std::size_t chunk) {
    GrayCodeEnumerator walk(w, prefix_bits, chunk);
    ExactSolution best{walk.cut(), walk.spins(), 1};
    const std::uint64_t total = walk.count();
    for (std::uint64_t idx = 0; idx + 1 < total; ++idx) {
      walk.advance(idx);
      const double c = walk.cut();
      if (cuts_equal(c, best.max_cut)) {
        ++best.num_optima;
      } else if (c > best.max_cut) {
        best = {c, walk.spins(), 1};
      }
    }
    partial[chunk] = std::move(best);
  });
  ExactSolution result = partial.front();
  for (std::size_t k = 1; k < chunks; ++k) {
    if (partial[k].max_cut > result.max_cut && !cuts_equal(partial[k].max_cut, result.max_cut)) {
      result.max_cut = partial[k].max_cut;
      result.argmax_spins = partial[k].argmax_spins;
    }
  }
  result.num_optima = 0;
  for (const auto& p : partial) {
    if (cuts_equal(p.max_cut, result.max_cut)) result.num_optima += p.num_optima;
  }
  return result;
}

/// True iff claimed_cut matches the exact optimum within 1e-9 relative.
inline bool verify_optimum(const Instance& inst, double claimed_cut, std::size_t threads = 1) {
  return cuts_equal(claimed_cut, brute_force(inst, threads).max_cut);
}

inline void to_json(nlohmann::json& j, const ExactSolution& s) {
  j = {{"max_cut", s.max_cut}, {"spins", s.argmax_spins}, {"num_optima", s.num_optima}};
}

inline void from_json(const nlohmann::json& j, ExactSolution& s) {
  s.max_cut = j.at("max_cut").get<double>();
  s.argmax_spins = j.at("spins").get<std::vector<int>>();
  s.num_optima = j.at("num_optima").get<std::uint64_t>();
}

}  // namespace localspin
