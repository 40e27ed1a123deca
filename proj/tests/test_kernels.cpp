#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "equideg/kernels.hpp"

using namespace equideg;

namespace {

std::vector<double> random_vector(std::mt19937_64& rng, std::size_t size, double scale) {
  std::uniform_real_distribution<double> u(-scale, scale);
  std::vector<double> v(size);
  for (double& x : v) x = u(rng);
  return v;
}

double max_rel_diff(const std::vector<double>& a, const std::vector<double>& b) {
  double m = 0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]) / std::max(1.0, std::abs(a[i])));
  return m;
}

}  // namespace

TEST_CASE("scalar and avx2 kernels agree") {
  if (!kernels::avx2_supported()) {
    MESSAGE("AVX2/FMA not available; only the scalar path is exercised");
    return;
  }
  std::mt19937_64 rng(2024);
  for (std::size_t n = 1; n <= 5; ++n)
    for (std::size_t m : {1u, 3u, 4u, 7u, 64u, 81u, 1031u}) {
      CAPTURE(n);
      CAPTURE(m);
      const kernels::KeplerArgs k{n, m, 0.7, 1.3};
      const auto x = random_vector(rng, n * m, 50.0);
      const auto v = random_vector(rng, n * m, 1.0);
      const auto base = random_vector(rng, n * m, 1.0);

      auto gs = base, ga = base;
      kernels::scalar::kepler_gradient(k, x.data(), gs.data());
      kernels::avx2::kepler_gradient(k, x.data(), ga.data());
      CHECK(max_rel_diff(gs, ga) < 1e-14);

      auto hs = base, ha = base;
      kernels::scalar::kepler_hessian_apply(k, x.data(), v.data(), hs.data());
      kernels::avx2::kepler_hessian_apply(k, x.data(), v.data(), ha.data());
      CHECK(max_rel_diff(hs, ha) < 1e-14);

      std::vector<double> ws(base.begin(), base.begin() + std::ptrdiff_t(m)), wa = ws;
      kernels::scalar::kepler_potential(k, x.data(), ws.data());
      kernels::avx2::kepler_potential(k, x.data(), wa.data());
      CHECK(max_rel_diff(ws, wa) < 1e-14);

      const double ds = kernels::scalar::dot(n * m, x.data(), v.data());
      const double da = kernels::avx2::dot(n * m, x.data(), v.data());
      CHECK(std::abs(ds - da) <= 1e-12 * (1 + std::abs(ds)) * std::sqrt(double(n * m)));

      auto ys = base, ya = base;
      kernels::scalar::axpy(n * m, -0.3, x.data(), ys.data());
      kernels::avx2::axpy(n * m, -0.3, x.data(), ya.data());
      CHECK(max_rel_diff(ys, ya) < 1e-14);
    }
}

TEST_CASE("scalar kernels match the closed forms") {
  // One node, n = 2: x = (3, 4), |x|^2 = 25, a = 11, q = 36.
  const kernels::KeplerArgs k{2, 1, 2.0, 11.0};
  const double x[2] = {3, 4};
  double g[2] = {0, 0};
  kernels::scalar::kepler_gradient(k, x, g);
  CHECK(g[0] == doctest::Approx(2.0 * 3 / 216));
  CHECK(g[1] == doctest::Approx(2.0 * 4 / 216));
  double w = 1;
  kernels::scalar::kepler_potential(k, x, &w);
  CHECK(w == doctest::Approx(1 - 2.0 / 6));
  const double v[2] = {1, 0};
  double y[2] = {0, 0};
  kernels::scalar::kepler_hessian_apply(k, x, v, y);
  CHECK(y[0] == doctest::Approx(2.0 * (36 - 27) / 7776));
  CHECK(y[1] == doctest::Approx(2.0 * (-36) / 7776));
}

TEST_CASE("dispatch reports a usable isa") {
  const kernels::Isa isa = kernels::active_isa();
  if (isa == kernels::Isa::avx2) CHECK(kernels::avx2_supported());
  CHECK(!kernels::isa_name(isa).empty());
}
