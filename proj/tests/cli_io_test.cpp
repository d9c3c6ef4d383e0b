#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "instances.hpp"
#include "rdsgraph/config.hpp"
#include "rdsgraph/experiment.hpp"
#include "rdsgraph/export.hpp"
#include "rdsgraph/ingest.hpp"

namespace {

using namespace rdsgraph;
namespace fs = std::filesystem;

constexpr const char* kHeader = "subject_id,recruiter_id,interview_time,reported_degree,coupons_issued,coupon_id_redeemed\n";

IngestResult ingest(const std::string& body, const CalendarMask& mask = {}) {
  std::istringstream in(std::string(kHeader) + body);
  return ingest_recruitment_csv(in, mask);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() / ("rdsgraph_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                         "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::remove_all(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

TEST(Ingest, CleanFileNeedsNoRepair) {
  const auto r = ingest("a,,0,3,3,\nb,a,1.5,2,3,c1\nc,a,2,4,3,c2\nd,b,2.5,1,3,\n");
  EXPECT_EQ(r.report.total(), 0u);
  EXPECT_EQ(r.observed.size(), 4u);
  EXPECT_EQ(r.observed.ids, (std::vector<std::string>{"a", "b", "c", "d"}));
  EXPECT_EQ(r.observed.graph.recruiter(3), 1u);
  EXPECT_EQ(r.observed.waits, (std::vector<double>{0.0, 1.5, 0.5, 0.5}));
}

TEST(Ingest, DegreeBelowRecruitmentEdgesIsRaised) {
  const auto r = ingest("a,,0,1,3,\nr,a,1,1,3,\nx,r,2,1,3,\ny,r,3,1,3,\nz,r,4,1,3,\n");
  EXPECT_EQ(r.observed.degrees[1], 4);
  EXPECT_EQ(r.report.degree_floor, 1u);
}

TEST(Ingest, RecruiterTieIsBrokenByJitter) {
  const auto r = ingest("a,,0,3,3,\nb,a,5,3,3,\nc,b,5,3,3,\nd,a,7,3,3,\n");
  EXPECT_EQ(r.report.tie_jitter, 1u);
  const auto& t = r.observed.times;
  EXPECT_LT(t[1], t[2]);
  EXPECT_EQ(t[2], 5.0);
  // Jitter is half the smallest positive gap between distinct times.
  EXPECT_DOUBLE_EQ(t[2] - t[1], 1.0);
  for (std::size_t k = 1; k < t.size(); ++k) EXPECT_LT(t[k - 1], t[k]);
}

TEST(Ingest, SeedTiesAreLeftAlone) {
  const auto r = ingest("a,,0,3,3,\nb,,0,3,3,\nc,a,1,3,3,\n");
  EXPECT_EQ(r.report.tie_jitter, 0u);
  EXPECT_EQ(r.observed.times[0], r.observed.times[1]);
}

TEST(Ingest, ExtraRedemptionRaisesCouponsIssued) {
  const auto r = ingest("a,,0,5,3,\nb,a,1,1,3,\nc,a,2,1,3,\nd,a,3,1,3,\ne,a,4,1,3,\n");
  EXPECT_EQ(r.observed.coupons_issued[0], 4);
  EXPECT_EQ(r.report.duplicated_coupon, 1u);
  EXPECT_EQ(r.report.excess_redemptions, 1u);
}

TEST(Ingest, RecruiterMustAppearEarlier) {
  EXPECT_THROW(ingest("a,,0,3,3,\nb,zz,1,3,3,\n"), std::runtime_error);
  EXPECT_THROW(ingest("a,,0,3,3,\nb,c,1,3,3,\nc,a,2,3,3,\n"), std::runtime_error);
  EXPECT_THROW(ingest("a,,0,3,3,\na,,1,3,3,\n"), std::runtime_error);
}

TEST(Ingest, MalformedRowsNameTheLine) {
  try {
    ingest("a,,0,3,3,\nb,a,1,three,3,\n");
    FAIL() << "expected a parse error";
  } catch (const std::runtime_error& e) {
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
  std::istringstream no_column("subject_id,recruiter_id,interview_time\n");
  EXPECT_THROW(ingest_recruitment_csv(no_column), std::runtime_error);
}

TEST(Ingest, CleanedOutputIsAFixedPoint) {
  const auto first = ingest("a,,0,1,1,\nb,a,0.25,1,3,\nc,b,0.25,2,3,\nd,a,0.3,1,1,\ne,b,1,1,3,\nf,,1,2,3,\n");
  EXPECT_GT(first.report.total(), 0u);
  std::stringstream csv;
  write_recruitment_csv(first.observed, csv);
  const auto second = ingest_recruitment_csv(csv);
  EXPECT_EQ(second.report.total(), 0u);
  EXPECT_EQ(second.observed.times, first.observed.times);
  EXPECT_EQ(second.observed.degrees, first.observed.degrees);
  EXPECT_EQ(second.observed.coupons_issued, first.observed.coupons_issued);
  EXPECT_EQ(second.observed.ids, first.observed.ids);
}

TEST(Ingest, SimulatedDataRoundTrips) {
  const auto sim = testing_support::random_instance(5, 60);
  std::stringstream csv;
  write_recruitment_csv(sim.observed, csv);
  const auto back = ingest_recruitment_csv(csv);
  EXPECT_EQ(back.report.total(), 0u);
  EXPECT_EQ(back.observed.times, sim.observed.times);
  EXPECT_EQ(back.observed.waits, sim.observed.waits);
  EXPECT_EQ(back.observed.degrees, sim.observed.degrees);
  for (std::size_t k = 0; k < sim.observed.size(); ++k) {
    EXPECT_EQ(back.observed.graph.recruiter(k), sim.observed.graph.recruiter(k));
  }
}

TEST(Ingest, Timestamps) {
  EXPECT_EQ(parse_time("1970-01-02"), 1.0);
  EXPECT_DOUBLE_EQ(parse_time("1970-01-02T12:00"), 1.5);
  EXPECT_DOUBLE_EQ(parse_time("2000-03-01 06:00:00"), 11017.25);
  EXPECT_EQ(parse_time("2.75"), 2.75);
  EXPECT_THROW(parse_time("2000-13-01"), std::runtime_error);
  EXPECT_THROW(parse_time("soon"), std::runtime_error);
}

TEST(Ingest, CalendarMaskRemovesWeekendsAndBreaks) {
  CalendarMask mask;
  mask.skip_weekends = true;
  // Day 0 is Thursday: Friday noon to Monday noon keeps one working day.
  EXPECT_DOUBLE_EQ(mask.apply(4.5) - mask.apply(1.5), 1.0);
  EXPECT_DOUBLE_EQ(mask.apply(3.0), mask.apply(2.0));
  mask.breaks = {{7.0, 8.0}};
  EXPECT_DOUBLE_EQ(mask.apply(8.5) - mask.apply(6.5), 1.0);
  const auto r = ingest("a,,1.5,3,3,\nb,a,4.5,3,3,\n", mask);
  EXPECT_DOUBLE_EQ(r.observed.waits[1], 1.0);
}

TEST(Config, DefaultsAndCanonicalRoundTrip) {
  const auto c = parse_config(nlohmann::json::object());
  EXPECT_EQ(c.network.size, 1000u);
  EXPECT_DOUBLE_EQ(c.network.edge_probability(), 0.005);
  EXPECT_EQ(c.simulation.sample_size, 150u);
  EXPECT_EQ(c.simulation.coupons, 3);
  const auto j = to_json(c);
  EXPECT_EQ(to_json(parse_config(j)), j);
}

TEST(Config, ParsesNestedSections) {
  const auto j = nlohmann::json::parse(R"({
    "mode": "posterior", "seed": 9,
    "network": {"size": 200, "mean_degree": 4},
    "simulation": {"sample_size": 40, "seeds": 2, "waiting_time": "gamma", "shape": 0.5},
    "prior": {"mean": 1, "sd": 0.1},
    "chain": {"iterations": 50, "lambda_proposal": "likelihood", "annealing": {"decay": 0.9}}
  })");
  const auto c = parse_config(j);
  EXPECT_EQ(c.mode, RunMode::posterior);
  EXPECT_DOUBLE_EQ(c.network.edge_probability(), 4.0 / 199.0);
  EXPECT_EQ(c.simulation.model.variant, WaitingTime::gamma);
  EXPECT_EQ(c.chain.lambda_proposal, LambdaProposal::likelihood);
  EXPECT_DOUBLE_EQ(c.chain.annealing.decay, 0.9);
  const auto prior = c.prior.resolve(nullptr, 1.0);
  EXPECT_NEAR(prior.mean(), 1.0, 1e-12);
  EXPECT_NEAR(prior.sd(), 0.1, 1e-12);
  EXPECT_EQ(to_json(parse_config(to_json(c))), to_json(c));
}

TEST(Config, RejectsBadInput) {
  using nlohmann::json;
  EXPECT_THROW(parse_config(json::parse(R"({"chian": {}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"chain": {"iterations": -1}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"chain": {"iterations": 2.5}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"chain": {"lambda_proposal": "mle"}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"prior": {"mean": 1}})")).prior.resolve(nullptr, 1.0), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"prior": {"mean": 1, "sd": 1, "shape": 2, "rate": 2}})")), ConfigError);
  EXPECT_THROW(parse_config(json::parse(R"({"mode": "fast"})")), ConfigError);
  try {
    parse_config(json::parse(R"({"network": {"size": "big"}})"));
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(std::string(e.what()).find("network.size"), std::string::npos) << e.what();
  }
}

TEST(Export, EdgeListRoundTrip) {
  const auto sim = testing_support::random_instance(4, 30);
  std::stringstream ss;
  write_edge_list(sim.truth, sim.observed.ids, ss);
  EXPECT_EQ(ss.str().rfind("# ", 0), 0u);
  EXPECT_EQ(read_edge_list(ss, sim.observed.ids), sim.truth);
}

TEST(Export, EmptyPosteriorWritesOnlySummary) {
  TempDir dir;
  const auto sim = testing_support::random_instance(3, 20);
  PosteriorResult empty;
  export_posterior(dir.path(), empty, sim.observed, nlohmann::json{{"samples", 0}});
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir.path())) names.push_back(e.path().filename().string());
  EXPECT_EQ(names, std::vector<std::string>{"summary.json"});
}

TEST(Export, PosteriorOutputsAreConsistent) {
  TempDir dir;
  const auto sim = testing_support::random_instance(8, 30);
  ChainConfig config;
  config.iterations = 30;
  config.keep_snapshots = true;
  Rng rng(1);
  const auto result = run_posterior(sim.observed, PriorSpec{}, config, rng);
  export_posterior(dir.path(), result, sim.observed, nlohmann::json::object());
  for (const char* f : {"summary.json", "trace.csv", "mean_adjacency.csv", "lambda.csv", "final_edges.txt"}) {
    EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
  }
  EXPECT_EQ(static_cast<std::size_t>(std::distance(fs::directory_iterator(dir.path() / "snapshots"),
                                                   fs::directory_iterator{})),
            result.samples + 1);  // plus the starting closure
  std::ifstream in(dir.path() / "mean_adjacency.csv");
  std::string line;
  std::getline(in, line);
  const std::size_t n = sim.observed.size();
  for (std::size_t i = 0; i < n; ++i) {
    ASSERT_TRUE(std::getline(in, line));
    std::stringstream row(line);
    std::string cell;
    for (std::size_t j = 0; j < n; ++j) {
      ASSERT_TRUE(std::getline(row, cell, ','));
      const double f = std::stod(cell);
      EXPECT_GE(f, 0.0);
      EXPECT_LE(f, 1.0);
      if (sim.observed.graph.is_recruitment_edge(i, j)) {
        EXPECT_EQ(f, 1.0);
      }
      if (i == j) {
        EXPECT_EQ(f, 0.0);
      }
    }
  }
}

TEST(Export, SeededRunsAreByteIdentical) {
  TempDir dir;
  const auto sim = testing_support::random_instance(9, 40);
  ChainConfig config;
  config.iterations = 40;
  config.mode = ChainMode::map;
  config.annealing.decay = 0.95;
  for (const char* sub : {"a", "b"}) {
    Rng rng(77);
    const auto result = run_map(sim.observed, PriorSpec::from_mean_sd(1.0, 0.1), config, rng);
    export_map(dir.path() / sub, result, sim.observed, nlohmann::json{{"seed", 77}});
  }
  for (const char* f : {"trace.csv", "map_edges.txt", "summary.json"}) {
    EXPECT_EQ(slurp(dir.path() / "a" / f), slurp(dir.path() / "b" / f)) << f;
  }
  EXPECT_EQ(slurp(dir.path() / "a" / "trace.csv").rfind("iteration,edge_count,lambda,log_posterior,accept_rate\n", 0), 0u);
}

TEST(Export, UnwritableDirectoryThrows) {
  TempDir dir;
  fs::create_directories(dir.path());
  std::ofstream(dir.path() / "file") << "x";
  EXPECT_THROW(open_output(dir.path() / "file" / "sub", "x.txt"), std::runtime_error);
}

RunConfig tiny_experiment() {
  RunConfig c;
  c.network.size = 3;
  c.network.p = 1.0;
  c.simulation.sample_size = 3;
  c.simulation.seeds.count = 1;
  c.chain.iterations = 5;
  c.experiment.replications = 1;
  c.seed = 4;
  return c;
}

TEST(Experiment, TinyRunYieldsOneFiniteRow) {
  auto c = tiny_experiment();
  const auto result = run_experiment(c);
  ASSERT_EQ(result.cells.size(), 1u);
  ASSERT_EQ(result.cells[0].replications.size(), 1u);
  const auto& rec = result.cells[0].replications[0];
  ASSERT_TRUE(rec.ok) << rec.error;
  EXPECT_TRUE(std::isfinite(rec.lambda_map));
  EXPECT_TRUE(rec.score.accuracy.has_value());
  EXPECT_FALSE(result.cells[0].summary.has_value());
  std::stringstream table;
  write_experiment_summary(result, table);
  std::string header, row, extra;
  std::getline(table, header);
  EXPECT_TRUE(std::getline(table, row));
  EXPECT_FALSE(std::getline(table, extra));
}

TEST(Experiment, FailuresAreRecordedNotThrown) {
  auto c = tiny_experiment();
  c.simulation.sample_size = 10;  // larger than the population
  c.simulation.seeds.on_stall = StallRule::stop;
  c.experiment.replications = 2;
  const auto result = run_experiment(c);
  EXPECT_EQ(result.cells[0].failures + (result.cells[0].replications[0].ok ? 1u : 0u) +
                (result.cells[0].replications[1].ok ? 1u : 0u),
            2u);
}

TEST(Experiment, WorkerCountDoesNotChangeResults) {
  RunConfig c;
  c.network.size = 120;
  c.network.mean_degree = 5.0;
  c.simulation.sample_size = 25;
  c.simulation.seeds.count = 2;
  c.chain.iterations = 20;
  c.experiment.replications = 3;
  c.experiment.shapes = {1.0, 1.5};
  c.experiment.prior_sds = {0.1};
  std::stringstream one, three;
  c.experiment.workers = 1;
  write_experiment_raw(run_experiment(c), one);
  c.experiment.workers = 3;
  write_experiment_raw(run_experiment(c), three);
  EXPECT_EQ(one.str(), three.str());
}

}  // namespace
