#include <benchmark/benchmark.h>

#include "critmag/functionals.hpp"
#include "critmag/melnikov.hpp"
#include "critmag/spectral.hpp"

using namespace critmag;

namespace {

const Dimension& dim() {
  static const Dimension d(5);
  return d;
}

DiscretizationPtr disc() {
  static const DiscretizationPtr d = Discretization::create(dim());
  return d;
}

HessianPtr hess() {
  static const HessianPtr h = build_hessian_blocks(disc());
  return h;
}

Eigen::VectorXd xi(double t) {
  Eigen::VectorXd x = Eigen::VectorXd::Zero(5);
  x[0] = t;
  return x;
}

}  // namespace

static void BM_bubble_field(benchmark::State& s) {
  const Bubble b(0.3, 0.7, xi(0.2));
  for (auto _ : s) benchmark::DoNotOptimize(bubble_field(b, disc()));
}
BENCHMARK(BM_bubble_field)->Unit(benchmark::kMillisecond);

static void BM_angular_round_trip(benchmark::State& s) {
  const ComplexField u = bubble_field(Bubble(0.0, 1.0, xi(0.0)), disc());
  const AngularBasis& a = disc()->angular();
  for (auto _ : s) benchmark::DoNotOptimize(a.analysis(a.synthesis(u.re())));
}
BENCHMARK(BM_angular_round_trip)->Unit(benchmark::kMillisecond);

static void BM_apply_Lz(benchmark::State& s) {
  const PotentialPair p = make_potential({}, dim());
  const Bubble b(0.0, 0.5, xi(0.3));
  const ComplexField k = grad_G1(b, p.A, disc());
  for (auto _ : s) benchmark::DoNotOptimize(apply_Lz(*hess(), b, k));
}
BENCHMARK(BM_apply_Lz)->Unit(benchmark::kMillisecond);

static void BM_grad_G1(benchmark::State& s) {
  const PotentialPair p = make_potential({}, dim());
  const Bubble b(0.0, 0.5, xi(0.3));
  for (auto _ : s) benchmark::DoNotOptimize(grad_G1_load(b, p.A, disc()));
}
BENCHMARK(BM_grad_G1)->Unit(benchmark::kMillisecond);

static void BM_gamma(benchmark::State& s) {
  double t = 0.0;
  for (auto _ : s) {
    // A fresh evaluator per sample so the cache does not hide the cost.
    const Melnikov m(make_potential({}, dim()), disc(), hess());
    benchmark::DoNotOptimize(m.gamma(0.8, xi(t)));
    t += 1e-3;
  }
}
BENCHMARK(BM_gamma)->Unit(benchmark::kMillisecond)->Iterations(3);

static void BM_gamma_no_A(benchmark::State& s) {
  PotentialConfig c;
  c.A.amplitude = Eigen::VectorXd::Zero(5);
  const Melnikov m(make_potential(c, dim()), disc(), hess());
  double t = 0.0;
  for (auto _ : s) {
    benchmark::DoNotOptimize(m.gamma(0.8, xi(t)));
    t += 1e-3;
  }
}
BENCHMARK(BM_gamma_no_A)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
