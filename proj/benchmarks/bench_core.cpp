#include <benchmark/benchmark.h>

#include <Eigen/Dense>

#include "consensusflow/cli.hpp"
#include "consensusflow/dynamics.hpp"
#include "consensusflow/eig.hpp"
#include "consensusflow/oracle.hpp"
#include "consensusflow/sets.hpp"

namespace cf = consensusflow;

namespace {

void BM_ProjectBox(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  cf::ConvexSet box(cf::Box{Eigen::VectorXd::Constant(d, -1.0),
                            Eigen::VectorXd::Constant(d, 1.0)});
  Eigen::VectorXd x = Eigen::VectorXd::LinSpaced(d, -3.0, 3.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cf::project(box, x));
  }
}
BENCHMARK(BM_ProjectBox)->Arg(8)->Arg(64)->Arg(512);

void BM_ProjectIntersection(benchmark::State& state) {
  const Eigen::Index d = state.range(0);
  std::vector<cf::ConvexSet> members;
  members.emplace_back(cf::Box{Eigen::VectorXd::Constant(d, -1.0),
                               Eigen::VectorXd::Constant(d, 1.0)});
  members.emplace_back(cf::Ball{Eigen::VectorXd::Zero(d), 0.9});
  cf::ConvexSet set{cf::Intersection{std::move(members)}};
  Eigen::VectorXd x = Eigen::VectorXd::Constant(d, 2.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cf::project(set, x));
  }
}
BENCHMARK(BM_ProjectIntersection)->Arg(4)->Arg(16);

void BM_VelocityField(benchmark::State& state) {
  const cf::ExperimentConfig cfg = cf::builtin_experiment_config(false);
  const cf::ProblemInstance p = cf::build_instance(cfg);
  cf::SystemState s{0.0, p.stacked_x0(), p.stacked_lambda0()};
  for (auto _ : state) {
    benchmark::DoNotOptimize(cf::velocity_field(p, s));
  }
}
BENCHMARK(BM_VelocityField);

void BM_StepProjectedEuler(benchmark::State& state) {
  const cf::ExperimentConfig cfg = cf::builtin_experiment_config(false);
  const cf::ProblemInstance p = cf::build_instance(cfg);
  cf::SystemState s{0.0, p.stacked_x0(), p.stacked_lambda0()};
  for (auto _ : state) {
    cf::SystemState next = cf::step_projected_euler(p, s, 1e-3);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_StepProjectedEuler);

void BM_JacobiEig(benchmark::State& state) {
  const Eigen::Index n = state.range(0);
  Eigen::MatrixXd m(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j)
      m(i, j) = 1.0 / static_cast<double>(i + j + 1);
  for (auto _ : state) {
    benchmark::DoNotOptimize(cf::jacobi_eigensymm(m));
  }
}
BENCHMARK(BM_JacobiEig)->Arg(8)->Arg(16)->Arg(32);

void BM_RandomInstanceStep(benchmark::State& state) {
  const cf::ProblemInstance p = cf::random_instance_1d(7);
  cf::SystemState s{0.0, p.stacked_x0(), p.stacked_lambda0()};
  for (auto _ : state) {
    cf::SystemState next = cf::step_projected_euler(p, s, 1e-3);
    benchmark::DoNotOptimize(next);
  }
}
BENCHMARK(BM_RandomInstanceStep);

}  // namespace

BENCHMARK_MAIN();
