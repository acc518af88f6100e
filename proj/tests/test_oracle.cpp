#include <set>

#include "gtest/gtest.h"
#include "localspin/generators.hpp"
#include "localspin/oracle.hpp"
#include "localspin/solver.hpp"

using namespace localspin;

namespace {

// Reference: every one of the 2^n configurations, cut recomputed from scratch.
std::pair<double, std::uint64_t> naive_max_cut(const Instance& inst) {
  double best = -1e300;
  std::uint64_t count = 0;
  std::vector<int> s(inst.n);
  for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << inst.n); ++mask) {
    for (std::size_t i = 0; i < inst.n; ++i) s[i] = (mask >> i) & 1U ? -1 : 1;
    const double c = cut_value(inst, s);
    if (cuts_equal(c, best)) {
      ++count;
    } else if (c > best) {
      best = c;
      count = 1;
    }
  }
  return {best, count / 2};  // up to the global flip
}

}  // namespace

TEST(BruteForce, SmallCases) {
  const auto one = brute_force(Instance{2, {{0, 1, 1.0}}});
  EXPECT_EQ(one.max_cut, 1.0);
  EXPECT_EQ(one.num_optima, 1u);
  EXPECT_EQ(one.argmax_spins, (std::vector<int>{1, -1}));

  const auto tri = brute_force(Instance{3, {{0, 1, 1.0}, {0, 2, 1.0}, {1, 2, 1.0}}});
  EXPECT_EQ(tri.max_cut, 2.0);
  EXPECT_EQ(tri.num_optima, 3u);

  const auto single = brute_force(Instance{1, {}});
  EXPECT_EQ(single.max_cut, 0.0);
}

TEST(BruteForce, FerromagneticEvenTorusCutsEverything) {
  auto inst = generate(FamilySpec::torus(2, 4), 1);
  for (auto& e : inst.edges) e.w = 1.0;
  // checkerboard colouring cuts every bond
  std::vector<int> checker(16);
  for (std::size_t v = 0; v < 16; ++v) checker[v] = ((v % 4) + (v / 4)) % 2 ? -1 : 1;
  EXPECT_EQ(cut_value(inst, checker), 32.0);
  const auto sol = brute_force(inst);
  EXPECT_EQ(sol.max_cut, 32.0);
  EXPECT_EQ(sol.num_optima, 1u);
  EXPECT_EQ(cut_value(inst, sol.argmax_spins), 32.0);
}

TEST(BruteForce, AgreesWithNaiveEnumeration) {
  const FamilySpec fams[] = {FamilySpec::g05(9),    FamilySpec::pm1d(11),   FamilySpec::w(12, 0.5),
                             FamilySpec::pw(10, 0.3), FamilySpec::ising(12, 2.5), FamilySpec::torus(2, 3)};
  std::uint64_t seed = 0;
  for (const auto& f : fams) {
    for (int k = 0; k < 3; ++k, ++seed) {
      const auto inst = generate(f, seed);
      const auto sol = brute_force(inst);
      const auto [best, count] = naive_max_cut(inst);
      EXPECT_TRUE(cuts_equal(sol.max_cut, best)) << f.tag();
      EXPECT_EQ(sol.num_optima, count) << f.tag();
      EXPECT_TRUE(cuts_equal(cut_value(inst, sol.argmax_spins), sol.max_cut));
    }
  }
}

TEST(BruteForce, ThreadCountInvariant) {
  const auto inst = generate(FamilySpec::w(18, 0.5), 4);
  const auto a = brute_force(inst, 1), b = brute_force(inst, 5);
  EXPECT_EQ(a.max_cut, b.max_cut);
  EXPECT_EQ(a.argmax_spins, b.argmax_spins);
  EXPECT_EQ(a.num_optima, b.num_optima);
}

TEST(BruteForce, CapRefusal) {
  EXPECT_THROW(brute_force(generate(FamilySpec::g05(29), 1)), OracleCapExceeded);
}

TEST(GrayCode, IncrementalCutMatchesRecomputation) {
  const auto inst = generate(FamilySpec::w(16, 0.6), 2);
  const auto w = detail::dense_weights(inst);
  GrayCodeEnumerator walk(w, 0, 0);
  Rng rng(1);
  std::vector<std::uint64_t> checkpoints;
  for (int k = 0; k < 1000; ++k) checkpoints.push_back(rng.index(walk.count() - 1));
  std::sort(checkpoints.begin(), checkpoints.end());
  std::size_t next = 0;
  for (std::uint64_t idx = 0; idx + 1 < walk.count() && next < checkpoints.size(); ++idx) {
    walk.advance(idx);
    while (next < checkpoints.size() && checkpoints[next] == idx) {
      EXPECT_NEAR(walk.cut(), walk.recompute_cut(), 1e-9);
      EXPECT_EQ(walk.cut(), cut_value(inst, walk.spins()));
      ++next;
    }
  }
  EXPECT_EQ(next, checkpoints.size());
}

TEST(GrayCode, VisitsEveryConfigurationOnce) {
  const auto inst = generate(FamilySpec::g05(8), 1);
  const auto w = detail::dense_weights(inst);
  GrayCodeEnumerator walk(w, 2, 3);
  std::set<std::vector<int>> seen{walk.spins()};
  for (std::uint64_t idx = 0; idx + 1 < walk.count(); ++idx) {
    walk.advance(idx);
    seen.insert(walk.spins());
    EXPECT_EQ(walk.spins()[0], 1);
    EXPECT_EQ(walk.spins()[6], -1);
    EXPECT_EQ(walk.spins()[7], -1);
  }
  EXPECT_EQ(seen.size(), walk.count());
}

TEST(VerifyOptimum, Basics) {
  const auto inst = generate(FamilySpec::pw(14, 0.5), 3);
  const double best = brute_force(inst).max_cut;
  EXPECT_TRUE(verify_optimum(inst, best));
  EXPECT_FALSE(verify_optimum(inst, best - 1));
  EXPECT_TRUE(verify_optimum(inst, best * (1 + 1e-12)));
}

TEST(OracleJson, RoundTrip) {
  const auto sol = brute_force(generate(FamilySpec::pm1d(10), 2));
  const nlohmann::json j = sol;
  const auto back = j.get<ExactSolution>();
  EXPECT_EQ(back.max_cut, sol.max_cut);
  EXPECT_EQ(back.argmax_spins, sol.argmax_spins);
  EXPECT_EQ(back.num_optima, sol.num_optima);
}
