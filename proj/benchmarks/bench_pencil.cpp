#include <benchmark/benchmark.h>

#include "retool/io.hpp"
#include "retool/pencil.hpp"

namespace {

void BM_CertifyToy(benchmark::State& state) {
  auto m = retool::make_builtin_model("toy_so3_s1", {});
  auto p = retool::pencil_at(m, retool::VectorXd::Zero(m.dim_mstar));
  auto box = retool::EtaBox::cube(1, 5.0);
  for (auto _ : state) {
    auto cert = retool::certify_definite(p, box);
    benchmark::DoNotOptimize(cert.margin);
  }
}
BENCHMARK(BM_CertifyToy);

void BM_CertifyTop(benchmark::State& state) {
  auto m = retool::make_builtin_model("lagrange_top", {{"lambda", 5.0}});
  auto p = retool::pencil_at(m, retool::VectorXd::Zero(m.dim_mstar));
  auto box = retool::EtaBox::cube(1, 20.0);
  for (auto _ : state) {
    auto cert = retool::certify_definite(p, box);
    benchmark::DoNotOptimize(cert.margin);
  }
}
BENCHMARK(BM_CertifyTop);

void BM_EigSym8(benchmark::State& state) {
  retool::MatrixXd A = retool::MatrixXd::Random(8, 8);
  retool::MatrixXd M = 0.5 * (A + A.transpose());
  for (auto _ : state) {
    auto r = retool::eig_sym(M);
    benchmark::DoNotOptimize(r.values(0));
  }
}
BENCHMARK(BM_EigSym8);

}  // namespace
