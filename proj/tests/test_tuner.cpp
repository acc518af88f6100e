#include <algorithm>
#include <cmath>

#include "gtest/gtest.h"
#include "localspin/generators.hpp"
#include "localspin/tuner.hpp"

using namespace localspin;

TEST(DefaultHyperparams, FormulaAtUnitScale) {
  InstanceStats s;
  s.cbar = 1.0;
  s.spectral_radius_estimate = 1.0;
  const auto hp = default_hyperparams(s);
  EXPECT_EQ(hp.eta, 1.0);
  EXPECT_DOUBLE_EQ(hp.beta, 0.5);
  EXPECT_EQ(hp.max_rounds, Hyperparams{}.max_rounds);
  EXPECT_EQ(hp.threshold, Hyperparams{}.threshold);
}

TEST(DefaultHyperparams, UsesRegressionWhenGiven) {
  InstanceStats s;
  s.cbar = 1.0;
  s.spectral_radius_estimate = 1.6;  // normalized abscissa 0.8
  const auto hp = default_hyperparams(s, LinearFit{1.0, 0.0, 1.0});
  EXPECT_DOUBLE_EQ(hp.beta, 1.0 / 1.8);
}

TEST(DefaultHyperparams, BetaInUnitInterval) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const FamilySpec fams[] = {FamilySpec::g05(30), FamilySpec::pm1s(40), FamilySpec::ising(30, 3.0),
                               FamilySpec::torus(3, 3)};
    const auto hp = default_hyperparams(generate(fams[seed % 4], seed));
    EXPECT_GT(hp.beta, 0.0);
    EXPECT_LE(hp.beta, 1.0);
  }
}

TEST(PredictB, LinearWithFloor) {
  EXPECT_DOUBLE_EQ(predict_b(0.8, {1.0, 0.0, 1.0}), 0.8);
  EXPECT_EQ(predict_b(0.1, {1.0, -0.5, 1.0}), 0.0);
}

TEST(LogGrid, Endpoints) {
  const auto g = log_grid(0.05, 2.0, 12);
  ASSERT_EQ(g.size(), 12u);
  EXPECT_EQ(g.front(), 0.05);
  EXPECT_EQ(g.back(), 2.0);
  for (std::size_t k = 1; k < g.size(); ++k) EXPECT_NEAR(g[k] / g[k - 1], g[1] / g[0], 1e-12);
  EXPECT_THROW(log_grid(0.0, 1.0, 3), InvalidArgument);
}

TEST(GridSearch, SinglePoint) {
  Problem p(generate(FamilySpec::torus(2, 4), 1));
  const double eta[] = {0.7}, beta[] = {0.4};
  const auto t = grid_search(p, eta, beta, 5, 3);
  EXPECT_EQ(t.eta_star, 0.7);
  EXPECT_EQ(t.beta_star, 0.4);
  ASSERT_EQ(t.grid_evaluations.size(), 1u);
  EXPECT_EQ(t.median_energy, t.grid_evaluations[0].median_energy);
}

TEST(GridSearch, DominatesDefaultPoint) {
  Problem p(generate(FamilySpec::pm1d(30), 2));
  const auto hp = default_hyperparams(p.stats);
  auto betas = default_beta_grid();
  betas.push_back(hp.beta);
  std::sort(betas.begin(), betas.end());
  const auto etas = default_eta_grid();
  const auto t = grid_search(p, etas, betas, 9, 4);
  Hyperparams base;
  base.eta = hp.eta;
  base.beta = hp.beta;
  std::vector<double> e;
  for (std::size_t k = 0; k < 9; ++k) e.push_back(run(p, base, restart_seed(4, k)).energy);
  EXPECT_LE(t.median_energy, median(e));
}

TEST(GridSearch, OrderInvariantAndReproducible) {
  Problem p(generate(FamilySpec::w(20, 0.5), 5));
  std::vector<double> etas{0.5, 1.0, 2.0}, betas{0.2, 0.4, 0.8};
  const auto a = grid_search(p, etas, betas, 7, 10, {}, 1);
  std::reverse(etas.begin(), etas.end());
  std::rotate(betas.begin(), betas.begin() + 1, betas.end());
  const auto b = grid_search(p, etas, betas, 7, 10, {}, 3);
  EXPECT_EQ(a.eta_star, b.eta_star);
  EXPECT_EQ(a.beta_star, b.beta_star);
  EXPECT_EQ(a.median_energy, b.median_energy);
  auto key = [](const GridPoint& g) { return std::tuple(g.eta, g.beta, g.median_energy); };
  std::vector<std::tuple<double, double, double>> ka, kb;
  for (const auto& g : a.grid_evaluations) ka.push_back(key(g));
  for (const auto& g : b.grid_evaluations) kb.push_back(key(g));
  std::sort(ka.begin(), ka.end());
  std::sort(kb.begin(), kb.end());
  EXPECT_EQ(ka, kb);
}

TEST(GridSearch, TieBreakSmallestEtaThenBeta) {
  // Every setting converges to the optimum on a single edge.
  Problem p(Instance{2, {{0, 1, 1.0}}});
  std::vector<double> etas{2.0, 1.0}, betas{3.0, 2.0};
  const auto t = grid_search(p, etas, betas, 3, 1);
  EXPECT_EQ(t.eta_star, 1.0);
  EXPECT_EQ(t.beta_star, 2.0);
}

TEST(GridSearch, LocusDecreasesWithEta) {
  Problem p(generate(FamilySpec::torus(2, 5), 3));
  const auto etas = log_grid(0.25, 4.0, 5);
  const auto betas = log_grid(0.05, 2.0, 30);
  Hyperparams base;
  base.max_rounds = 2000;
  const auto locus = extract_locus(grid_search(p, etas, betas, 40, 7, base));
  ASSERT_EQ(locus.size(), etas.size());
  for (std::size_t k = 1; k < locus.size(); ++k) {
    EXPECT_LE(locus[k].beta_opt, locus[k - 1].beta_opt) << "eta " << locus[k].eta;
  }
  EXPECT_LT(locus.back().beta_opt, locus.front().beta_opt);
}

TEST(ExtractLocus, CentreOfTiedRun) {
  TuneResult t;
  t.grid_evaluations = {{1.0, 0.1, -3}, {1.0, 0.2, -5}, {1.0, 0.4, -5}, {1.0, 0.8, -5},
                        {1.0, 1.6, -4}, {2.0, 0.1, -1}, {2.0, 0.2, -2}};
  const auto locus = extract_locus(t);
  ASSERT_EQ(locus.size(), 2u);
  EXPECT_DOUBLE_EQ(locus[0].beta_opt, 0.4);
  EXPECT_EQ(locus[0].median_energy, -5);
  EXPECT_DOUBLE_EQ(locus[1].beta_opt, 0.2);
}

namespace {
std::vector<LocusPoint> synthetic_locus(double a, double b, double noise, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<LocusPoint> locus;
  // 17 responses spanning two decades around eta = 1
  for (double eta : log_grid(0.1, 10.0, 17)) {
    const double beta = a / (1.0 + b * eta);
    locus.push_back({eta, beta * (1.0 + noise * rng.normal()), 0.0});
  }
  return locus;
}
}  // namespace

TEST(FitBetaEta, RecoversNoiselessParameters) {
  for (auto [a, b] : {std::pair{1.0, 2.0}, std::pair{0.7, 0.3}, std::pair{1.3, 5.0}}) {
    const auto fit = fit_beta_eta(synthetic_locus(a, b, 0.0, 1));
    EXPECT_NEAR(fit.a, a, 1e-6);
    EXPECT_NEAR(fit.b, b, 1e-6);
    EXPECT_NEAR(fit.r_squared, 1.0, 1e-12);
  }
}

TEST(FitBetaEta, OnePercentNoise) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    const auto fit = fit_beta_eta(synthetic_locus(1.0, 2.0, 0.01, seed));
    EXPECT_LE(std::abs(fit.a - 1.0), 0.05) << seed;
    EXPECT_LE(std::abs(fit.b - 2.0), 0.1) << seed;
  }
}

TEST(FitBetaEta, Degenerate) {
  std::vector<LocusPoint> same{{1.0, 0.5, 0}, {1.0, 0.4, 0}, {1.0, 0.6, 0}};
  EXPECT_THROW(fit_beta_eta(same), InvalidArgument);
  std::vector<LocusPoint> two{{1.0, 0.5, 0}, {2.0, 0.4, 0}};
  EXPECT_THROW(fit_beta_eta(two), InvalidArgument);
}

TEST(FitBVsSpectral, Basics) {
  std::vector<std::pair<double, double>> two{{1.0, 3.0}, {2.0, 5.0}};
  const auto f = fit_b_vs_spectral(two);
  EXPECT_DOUBLE_EQ(f.slope, 2.0);
  EXPECT_DOUBLE_EQ(f.intercept, 1.0);
  EXPECT_DOUBLE_EQ(f.r_squared, 1.0);
  std::vector<std::pair<double, double>> diag{{0.1, 0.1}, {0.5, 0.5}, {0.9, 0.9}, {2.0, 2.0}};
  const auto g = fit_b_vs_spectral(diag);
  EXPECT_NEAR(g.slope, 1.0, 1e-12);
  EXPECT_NEAR(g.intercept, 0.0, 1e-12);
  std::vector<std::pair<double, double>> flat{{1.0, 3.0}, {1.0, 5.0}};
  EXPECT_THROW(fit_b_vs_spectral(flat), InvalidArgument);
  EXPECT_THROW(fit_b_vs_spectral(std::vector<std::pair<double, double>>{{1.0, 1.0}}),
               InvalidArgument);
}

TEST(ScaleCovariance, RunsAndTuning) {
  const auto base = generate(FamilySpec::w(30, 0.5), 6);
  Problem p(base);
  Hyperparams hp;
  hp.beta = 0.6;
  const auto etas = default_eta_grid();
  const auto betas = log_grid(0.1, 1.5, 6);
  const auto t = grid_search(p, etas, betas, 5, 2);
  for (double lambda : {0.5, 3.0}) {
    Problem q(scaled(base, lambda));
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const auto a = run(p, hp, seed), b = run(q, hp, seed);
      EXPECT_EQ(a.spins, b.spins);
      EXPECT_EQ(a.rounds_used, b.rounds_used);
    }
    const auto u = grid_search(q, etas, betas, 5, 2);
    EXPECT_EQ(t.eta_star, u.eta_star);
    EXPECT_EQ(t.beta_star, u.beta_star);
  }
}

TEST(Serialization, LocusCsv) {
  std::vector<LocusPoint> locus{{0.5, 0.75, -12}, {1, 0.5, -13.5}};
  EXPECT_EQ(locus_csv(locus), "eta,beta_opt,median_energy\n0.5,0.75,-12\n1,0.5,-13.5\n");
  const nlohmann::json j = fit_beta_eta(synthetic_locus(1.0, 2.0, 0.0, 1));
  EXPECT_NEAR(j["a"].get<double>(), 1.0, 1e-6);
  EXPECT_EQ(j["locus"].size(), 17u);
}
