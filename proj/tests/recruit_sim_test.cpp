#include <cmath>
#include <map>
#include <sstream>

#include <gtest/gtest.h>

#include "instances.hpp"
#include "rdsgraph/recruit_sim.hpp"
#include "stats.hpp"

namespace {

using namespace rdsgraph;

SeedSelection explicit_seeds(std::vector<std::size_t> v, StallRule stall = StallRule::stop) {
  SeedSelection s;
  s.count = v.size();
  s.rule = SeedRule::explicit_list;
  s.on_stall = stall;
  s.vertices = std::move(v);
  return s;
}

TEST(ErGraph, Extremes) {
  Rng rng(1);
  EXPECT_EQ(generate_er_graph(50, 0.0, rng).edge_count(), 0u);
  const auto complete = generate_er_graph(4, 1.0, rng);
  EXPECT_EQ(complete.edge_count(), 6u);
  EXPECT_THROW(generate_er_graph(10, 1.5, rng), std::invalid_argument);
}

TEST(ErGraph, MeanEdgeCount) {
  Rng rng(2024);
  const double n = 1000, p = 5.0 / 1000.0;
  const double pairs = n * (n - 1) / 2;
  const int draws = 200;
  double total = 0.0;
  for (int k = 0; k < draws; ++k) total += static_cast<double>(generate_er_graph(1000, p, rng).edge_count());
  const double se = std::sqrt(pairs * p * (1 - p) / draws);
  EXPECT_NEAR(total / draws, pairs * p, 3 * se);
}

TEST(ErGraph, SimpleGraph) {
  Rng rng(3);
  const auto g = generate_er_graph(200, 0.1, rng);
  for (std::size_t v = 0; v < g.size(); ++v) {
    EXPECT_TRUE(std::is_sorted(g.neighbors[v].begin(), g.neighbors[v].end()));
    EXPECT_EQ(std::adjacent_find(g.neighbors[v].begin(), g.neighbors[v].end()), g.neighbors[v].end());
    for (std::size_t w : g.neighbors[v]) {
      EXPECT_NE(v, w);
      EXPECT_TRUE(g.has_edge(w, v));
    }
  }
}

TEST(LoadGraph, TwoEdges) {
  std::istringstream in("a b\nb c\n");
  const auto g = load_population_graph(in);
  EXPECT_EQ(g.size(), 3u);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.label(0), "a");
}

TEST(LoadGraph, MergesDuplicatesAndDropsLoops) {
  std::istringstream in("# comment\na,b\nb a\nc c\n\n");
  LoadReport report;
  const auto g = load_population_graph(in, &report);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_EQ(report.duplicates, 1u);
  EXPECT_EQ(report.self_loops, 1u);
}

TEST(LoadGraph, EmptyFile) {
  std::istringstream in("");
  LoadReport report;
  const auto g = load_population_graph(in, &report);
  EXPECT_EQ(g.size(), 0u);
  EXPECT_TRUE(report.empty);
}

TEST(LoadGraph, MalformedLineNamesTheLine) {
  std::istringstream in("a b\nlonely\n");
  try {
    load_population_graph(in);
    FAIL();
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

// Two seeds holding one coupon each; r1 knows u and v, r2 knows v.
std::map<std::size_t, int> first_recruits(bool turn_taking, int reps, RaceEngine engine = RaceEngine::gillespie) {
  const auto g = testing_support::toy_population();
  std::map<std::size_t, int> counts;
  Rng rng(turn_taking ? 11 : 12);
  for (int r = 0; r < reps; ++r) {
    const auto seeds = explicit_seeds({0, 1});
    const auto sim = turn_taking ? simulate_turn_taking(g, 3, seeds, 1, rng)
                                 : simulate_rds(g, 3, seeds, 1, RecruitmentModel{}, rng, engine);
    ++counts[sim.population_vertex[2]];
  }
  return counts;
}

TEST(Recruitment, ToyCompetitionFavoursTheSharedNeighbour) {
  const int reps = 30000;
  for (auto engine : {RaceEngine::gillespie, RaceEngine::edge_clocks}) {
    const auto counts = first_recruits(false, reps, engine);
    const double pu = static_cast<double>(counts.at(2)) / reps;
    EXPECT_NEAR(pu, 1.0 / 3.0, 4 * std::sqrt(2.0 / 9.0 / reps));
  }
  const auto turns = first_recruits(true, reps);
  EXPECT_NEAR(static_cast<double>(turns.at(2)) / reps, 0.25, 4 * std::sqrt(3.0 / 16.0 / reps));
}

// Small fixed graph: the first recruit's law is |R_v| / sum |R_k| under the
// race and (1/|R|) sum_{u in R_v} 1/|S_u| under turn-taking.
TEST(Recruitment, FirstRecruitLawOnSmallGraph) {
  // Seeds 0, 1, 2. Susceptible: 3, 4, 5.
  const auto g = PopulationGraph::from_edges(6, {{0, 3}, {0, 4}, {1, 4}, {1, 5}, {2, 4}, {0, 1}});
  const std::vector<double> race{1.0 / 5.0, 3.0 / 5.0, 1.0 / 5.0};
  // R = {0, 1, 2}; |S_0| = 2, |S_1| = 2, |S_2| = 1.
  const std::vector<double> turns{(1.0 / 3.0) * 0.5, (1.0 / 3.0) * (0.5 + 0.5 + 1.0), (1.0 / 3.0) * 0.5};
  const int reps = 20000;
  for (bool turn_taking : {false, true}) {
    Rng rng(turn_taking ? 5 : 6);
    std::vector<double> observed(3, 0.0);
    for (int r = 0; r < reps; ++r) {
      const auto seeds = explicit_seeds({0, 1, 2});
      const auto sim = turn_taking ? simulate_turn_taking(g, 4, seeds, 2, rng)
                                   : simulate_rds(g, 4, seeds, 2, RecruitmentModel{}, rng);
      observed[sim.population_vertex[3] - 3] += 1.0;
    }
    const auto& probs = turn_taking ? turns : race;
    EXPECT_LT(stats::chi2_statistic(observed, probs), stats::chi2_critical_99(2)) << "turn-taking " << turn_taking;
  }
}

TEST(Recruitment, SingleRecruiterLawsAgree) {
  const auto g = PopulationGraph::from_edges(5, {{0, 1}, {0, 2}, {0, 3}, {3, 4}});
  const int reps = 15000;
  for (bool turn_taking : {false, true}) {
    Rng rng(31 + turn_taking);
    std::vector<double> observed(3, 0.0);
    for (int r = 0; r < reps; ++r) {
      const auto sim = turn_taking ? simulate_turn_taking(g, 2, explicit_seeds({0}), 3, rng)
                                   : simulate_rds(g, 2, explicit_seeds({0}), 3, RecruitmentModel{}, rng);
      observed[sim.population_vertex[1] - 1] += 1.0;
    }
    EXPECT_LT(stats::chi2_statistic(observed, {1.0 / 3, 1.0 / 3, 1.0 / 3}), stats::chi2_critical_99(2));
  }
}

// Given the recruiter, the recruit is uniform over its unrecruited neighbours.
TEST(Recruitment, RecruitUniformGivenRecruiter) {
  const auto g = PopulationGraph::from_edges(7, {{0, 2}, {0, 3}, {0, 4}, {1, 4}, {1, 5}, {1, 6}, {0, 1}});
  std::map<std::size_t, std::vector<double>> by_recruiter{{0, std::vector<double>(7, 0.0)},
                                                           {1, std::vector<double>(7, 0.0)}};
  Rng rng(8);
  for (int r = 0; r < 30000; ++r) {
    const auto sim = simulate_rds(g, 3, explicit_seeds({0, 1}), 1, RecruitmentModel{}, rng);
    by_recruiter[sim.events[2].recruiter][sim.events[2].recruit] += 1.0;
  }
  const std::vector<double> from0{by_recruiter[0][2], by_recruiter[0][3], by_recruiter[0][4]};
  const std::vector<double> from1{by_recruiter[1][4], by_recruiter[1][5], by_recruiter[1][6]};
  EXPECT_LT(stats::chi2_statistic(from0, {1.0 / 3, 1.0 / 3, 1.0 / 3}), stats::chi2_critical_99(2));
  EXPECT_LT(stats::chi2_statistic(from1, {1.0 / 3, 1.0 / 3, 1.0 / 3}), stats::chi2_critical_99(2));
}

// With k susceptible edges frozen, the first wait is Exponential(lambda k)
// and carries no information about who is recruited.
TEST(Recruitment, FirstWaitIsExponentialAndIndependentOfRecruit) {
  const auto g = testing_support::toy_population();  // 3 susceptible edges
  const double rate = 2.0;
  std::vector<double> waits;
  std::vector<double> is_u;
  for (auto engine : {RaceEngine::gillespie, RaceEngine::edge_clocks}) {
    waits.clear();
    is_u.clear();
    Rng rng(engine == RaceEngine::gillespie ? 41 : 42);
    RecruitmentModel model;
    model.rate = rate;
    for (int r = 0; r < 20000; ++r) {
      const auto sim = simulate_rds(g, 3, explicit_seeds({0, 1}), 1, model, rng, engine);
      waits.push_back(sim.observed.waits[2]);
      is_u.push_back(sim.population_vertex[2] == 2 ? 1.0 : 0.0);
    }
    const double k = 3.0;
    const double d = stats::ks_distance(waits, [&](double x) { return 1.0 - std::exp(-rate * k * x); });
    EXPECT_LT(d, stats::ks_critical_99(waits.size()));

    double mw = 0, mu = 0;
    for (std::size_t i = 0; i < waits.size(); ++i) {
      mw += waits[i];
      mu += is_u[i];
    }
    mw /= waits.size();
    mu /= waits.size();
    double cov = 0, vw = 0, vu = 0;
    for (std::size_t i = 0; i < waits.size(); ++i) {
      cov += (waits[i] - mw) * (is_u[i] - mu);
      vw += (waits[i] - mw) * (waits[i] - mw);
      vu += (is_u[i] - mu) * (is_u[i] - mu);
    }
    const double corr = cov / std::sqrt(vw * vu);
    EXPECT_LT(std::abs(corr), 4.0 / std::sqrt(static_cast<double>(waits.size())));
  }
}

TEST(Recruitment, GammaWaitsHaveMeanOneOverRate) {
  const auto g = PopulationGraph::from_edges(2, {{0, 1}});
  for (double shape : {0.5, 1.5}) {
    RecruitmentModel model;
    model.variant = WaitingTime::gamma;
    model.shape = shape;
    model.rate = 1.0;
    Rng rng(static_cast<std::uint64_t>(shape * 10));
    const int reps = 20000;
    double total = 0.0;
    for (int r = 0; r < reps; ++r) total += simulate_rds(g, 2, explicit_seeds({0}), 1, model, rng).observed.waits[1];
    const double sd = std::sqrt(1.0 / shape);  // variance of Gamma(shape, scale 1/shape)
    EXPECT_NEAR(total / reps, 1.0, 4 * sd / std::sqrt(static_cast<double>(reps)));
  }
}

TEST(Recruitment, ZeroCouponsGivesSeedsOnly) {
  Rng rng(1);
  const auto g = generate_er_graph(50, 0.2, rng);
  const auto sim = simulate_rds(g, 20, explicit_seeds({3}), 0, RecruitmentModel{}, rng);
  EXPECT_EQ(sim.observed.size(), 1u);
  EXPECT_TRUE(sim.truncated);
  EXPECT_EQ(sim.observed.recruit_count(), 0u);
}

TEST(Recruitment, StallAddsSeedsUntilTarget) {
  Rng rng(1);
  const auto g = generate_er_graph(50, 0.2, rng);
  SeedSelection seeds;
  seeds.count = 1;
  const auto sim = simulate_rds(g, 20, seeds, 0, RecruitmentModel{}, rng);
  EXPECT_EQ(sim.observed.size(), 20u);
  EXPECT_FALSE(sim.truncated);
  EXPECT_EQ(sim.observed.graph.seed_count(), 20u);
}

TEST(Recruitment, SampleLargerThanPopulationThrows) {
  Rng rng(1);
  const auto g = generate_er_graph(10, 0.5, rng);
  EXPECT_THROW(simulate_rds(g, 11, SeedSelection{}, 3, RecruitmentModel{}, rng), std::invalid_argument);
}

TEST(Recruitment, TruthIsCompatibleWithObservations) {
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto sim = testing_support::random_instance(seed, 80);
    const auto& obs = sim.observed;
    EXPECT_TRUE(check_compatibility(sim.truth, obs.graph, obs.degrees).empty());
    for (std::size_t k = 1; k < obs.size(); ++k) EXPECT_GE(obs.times[k], obs.times[k - 1]);
  }
}

TEST(Recruitment, GammaAndTurnTakingTruthsAreCompatible) {
  Rng rng(5);
  const auto g = generate_er_graph(400, 0.015, rng);
  SeedSelection seeds;
  seeds.count = 4;
  RecruitmentModel gamma;
  gamma.variant = WaitingTime::gamma;
  gamma.shape = 0.5;
  for (const auto& sim : {simulate_rds(g, 100, seeds, 3, gamma, rng), simulate_turn_taking(g, 100, seeds, 3, rng)}) {
    EXPECT_TRUE(check_compatibility(sim.truth, sim.observed.graph, sim.observed.degrees).empty());
    EXPECT_EQ(sim.observed.size(), 100u);
  }
}

TEST(Recruitment, TurnTakingUsesUnitTimes) {
  Rng rng(5);
  const auto g = generate_er_graph(100, 0.05, rng);
  SeedSelection seeds;
  seeds.count = 2;
  const auto sim = simulate_turn_taking(g, 30, seeds, 3, rng);
  for (std::size_t k = 0; k < sim.observed.size(); ++k) EXPECT_EQ(sim.observed.times[k], static_cast<double>(k));
}

TEST(Recruitment, SameSeedSameRun) {
  const auto a = testing_support::random_instance(77, 60);
  const auto b = testing_support::random_instance(77, 60);
  EXPECT_EQ(a.population_vertex, b.population_vertex);
  EXPECT_EQ(a.observed.times, b.observed.times);
  EXPECT_EQ(a.truth, b.truth);
}

TEST(Recruitment, DegreeBiasedSeedsAvoidIsolates) {
  const auto g = PopulationGraph::from_edges(10, {{0, 1}});
  SeedSelection seeds;
  seeds.count = 1;
  seeds.rule = SeedRule::degree_biased;
  Rng rng(4);
  for (int r = 0; r < 50; ++r) {
    const auto sim = simulate_rds(g, 1, seeds, 1, RecruitmentModel{}, rng);
    EXPECT_LE(sim.population_vertex[0], 1u);
  }
}

TEST(RecruitmentModel, Validation) {
  RecruitmentModel m;
  m.rate = 0.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
  m.rate = 1.0;
  m.shape = -1.0;
  EXPECT_THROW(m.validate(), std::invalid_argument);
}

}  // namespace
