#include <benchmark/benchmark.h>

#include "retool/dynamics.hpp"
#include "retool/io.hpp"
#include "retool/models.hpp"
#include "retool/resolve.hpp"

namespace {

void BM_IntegrateToy(benchmark::State& state) {
  auto m = retool::make_builtin_model("toy_so3_s1", {});
  retool::BundleState s0;
  s0.g = retool::GroupElement::identity(m.alg);
  s0.rho = retool::VectorXd::Constant(2, 0.05);
  s0.v = retool::VectorXd::Constant(4, 0.1);
  retool::VectorXd eta = retool::VectorXd::Constant(1, 2.0);
  for (auto _ : state) {
    auto rep = retool::integrate_bundle(m, eta, s0, 1.0, 1e-3, 1000);
    benchmark::DoNotOptimize(rep.max_jy_drift);
  }
}
BENCHMARK(BM_IntegrateToy);

void BM_VortexSolve(benchmark::State& state) {
  auto m = retool::build_vortex_slice(2.0, 1.0);
  retool::VectorXd eta = retool::VectorXd::Zero(1);
  retool::VectorXd guess = retool::VectorXd::Constant(2, 0.01);
  for (auto _ : state) {
    auto p = retool::solve_re(m, retool::VectorXd(0), eta, guess);
    benchmark::DoNotOptimize(p.r2_norm);
  }
}
BENCHMARK(BM_VortexSolve);

}  // namespace
