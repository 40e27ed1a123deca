#include <cmath>
#include <random>

#include "doctest.h"
#include "equideg/catalog.hpp"
#include "equideg/error.hpp"
#include "equideg/spectral.hpp"
#include "generators.hpp"
#include "oracles.hpp"

using namespace equideg;

TEST_CASE("eigen_sym basics") {
  const SpectralData s = eigen_sym(SymmetricMatrix::diagonal({3, 1, 1}));
  REQUIRE(s.eigenvalues.size() == 2);
  CHECK(s.eigenvalues[0].value == doctest::Approx(1.0));
  CHECK(s.eigenvalues[0].multiplicity == 2);
  CHECK(s.eigenvalues[1].value == doctest::Approx(3.0));
  CHECK(s.dimension() == 3);
  const SpectralData t = eigen_sym(SymmetricMatrix{{0, 1}, {1, 0}});
  REQUIRE(t.eigenvalues.size() == 2);
  CHECK(t.eigenvalues[0].value == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(t.eigenvalues[1].value == doctest::Approx(1.0).epsilon(1e-14));
  CHECK_THROWS_AS(eigen_sym(SymmetricMatrix::diagonal({1}), 0.0), PreconditionError);
}

TEST_CASE("eigen_sym vs characteristic polynomial bisection") {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = 1 + std::size_t(t % 8);
    const auto a = oracle::random_symmetric(rng, n, 5.0);
    const auto want = oracle::eigenvalues_by_bisection(a);
    const auto got = jacobi_eigen(SymmetricMatrix(n, oracle::row_major(a))).values;
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(got[i] - want[i]) < 1e-8);
    const SpectralData s = eigen_sym(SymmetricMatrix(n, oracle::row_major(a)));
    CHECK(s.dimension() == n);
    for (std::size_t i = 1; i < s.eigenvalues.size(); ++i)
      CHECK(s.eigenvalues[i].value - s.eigenvalues[i - 1].value > s.tol);
  }
}

TEST_CASE("eigenvalues invariant under orthogonal conjugation") {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = 2 + std::size_t(t % 7);
    const auto a = oracle::random_symmetric(rng, n, 3.0);
    const auto b = oracle::conjugate(oracle::random_orthogonal(rng, n), a);
    const auto ea = jacobi_eigen(SymmetricMatrix(n, oracle::row_major(a))).values;
    const auto eb = jacobi_eigen(SymmetricMatrix(n, oracle::row_major(b))).values;
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(ea[i] - eb[i]) < 1e-8);
  }
}

TEST_CASE("morse_index") {
  CHECK(morse_index(eigen_sym(SymmetricMatrix::diagonal({-1, -1, 2}))) == 2);
  const auto e1 = catalog::example1();
  CHECK(morse_index(eigen_sym(e1.problem.linear_part(1.0))) == 1);
  CHECK(morse_index(eigen_sym(SymmetricMatrix::diagonal({1, 2, 3}))) == 0);
  CHECK_THROWS_AS(morse_index(eigen_sym(SymmetricMatrix::diagonal({0, 1})), true), DegenerateSpectrumError);
}

TEST_CASE("j_k paper values") {
  const auto e1 = catalog::example1();
  CHECK(j_k(e1.problem.linear_part(1.0), 1) == 2);
  CHECK(j_k(e1.problem.linear_part(-1.0), 1) == 1);
  const auto e2 = catalog::example2();
  CHECK(j_k(e2.problem.linear_part(0.5), 2) == 1);
  CHECK(j_k(e2.problem.linear_part(-0.5), 2) == 0);
  const auto e3 = catalog::example3();
  CHECK(j_k(e3.problem.linear_part(1.0), 2) == 4);
  CHECK(j_k(e3.problem.linear_part(-1.0), 2) == 3);
}

TEST_CASE("j_k on resonant input names the eigenvalue") {
  try {
    (void)j_k(SymmetricMatrix::diagonal({4, 1}), 2);
    FAIL("expected DegenerateSpectrumError");
  } catch (const DegenerateSpectrumError& e) {
    CHECK(e.eigenvalue() == doctest::Approx(4.0));
  }
}

TEST_CASE("j_k against direct counting on random diagonals") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-5.0, 60.0);
  for (int t = 0; t < 200; ++t) {
    std::vector<double> d(1 + std::size_t(t % 6));
    for (double& x : d) x = u(rng);
    const SpectralData s = eigen_sym(SymmetricMatrix::diagonal(d));
    int prev = int(d.size());
    for (int k = 0; k <= 8; ++k) {
      const int jk = j_k(s, k);
      CHECK(jk == oracle::count_above(d, k));
      CHECK(jk <= prev);
      prev = jk;
      // j_k = n - m^-(A - k^2) - dim ker(A - k^2)
      const SpectralData sh = eigen_sym(SymmetricMatrix::diagonal(d).shifted(-double(k) * k));
      CHECK(jk == int(d.size()) - morse_index(sh) - sh.multiplicity_of(0.0));
    }
  }
}

TEST_CASE("k_set") {
  const auto e1 = catalog::example1();
  CHECK(k_set(eigen_sym(e1.problem.linear_part(-1)), eigen_sym(e1.problem.linear_part(1))).empty());
  const auto e2 = catalog::example2();
  CHECK(k_set(eigen_sym(e2.problem.linear_part(-0.5)), eigen_sym(e2.problem.linear_part(0.5))).empty());
  const SpectralData m = eigen_sym(SymmetricMatrix::diagonal({4, 36, 7}));
  const SpectralData p = eigen_sym(SymmetricMatrix::diagonal({9, 2}));
  CHECK(k_set(m, p) == std::set<int>{2, 3, 6});
}

TEST_CASE("polynomial families") {
  MatrixFamily f(2);
  f.set_entry(0, 0, {{0, 1.0}, {3, 2.0}});
  f.set_entry(1, 0, {{1, -1.0}});
  const SymmetricMatrix a = f.at(2.0);
  CHECK(a(0, 0) == 17.0);
  CHECK(a(0, 1) == -2.0);
  CHECK(a(1, 0) == -2.0);
  CHECK(f.derivative_at(2.0)(0, 0) == 24.0);
  CHECK(f.times_power(2).at(2.0)(0, 0) == 68.0);
  CHECK_FALSE(f.is_constant());
  CHECK(MatrixFamily::constant(a).is_constant());
}

TEST_CASE("scan: paper examples") {
  const auto e1 = catalog::example1();
  const ScanResult s1 = scan_resonances(e1.problem.effective_family(), e1.lambda_minus, e1.lambda_plus);
  REQUIRE(s1.interior.size() == 1);
  CHECK(std::abs(s1.interior[0].lambda0 - (1 - std::sqrt(2.0))) < 1e-9);
  CHECK(s1.interior[0].frequencies == std::set<int>{1});
  CHECK_FALSE(s1.interior[0].tangential);
  REQUIRE(s1.at_lower.size() == 1);
  REQUIRE(s1.at_upper.size() == 1);
  CHECK(s1.at_lower[0].frequencies == std::set<int>{0});
  CHECK(s1.at_upper[0].frequencies == std::set<int>{0});
  CHECK(s1.k_max == 3);

  const auto e2 = catalog::example2();
  const ScanResult s2 = scan_resonances(e2.problem.effective_family(), e2.lambda_minus, e2.lambda_plus);
  REQUIRE(s2.interior.size() == 1);
  CHECK(std::abs(s2.interior[0].lambda0) < 1e-12);
  CHECK(s2.interior[0].frequencies == std::set<int>{2});
  CHECK(s2.interior[0].kernel_rep == RepDecomposition{{1, 2}});
  CHECK(s2.interior[0].det_nonzero);
  CHECK_FALSE(s2.endpoints_resonant());

  // lambda^3 + sqrt10 crosses 4 inside the interval; lambda = 0 is a touch.
  const auto e3 = catalog::example3();
  const ScanResult s3 = scan_resonances(e3.problem.effective_family(), e3.lambda_minus, e3.lambda_plus);
  REQUIRE(s3.interior.size() == 2);
  CHECK(std::abs(s3.interior[0].lambda0) < 1e-12);
  CHECK(s3.interior[0].frequencies == std::set<int>{2, 3, 5});
  CHECK(s3.interior[0].tangential);
  CHECK(std::abs(s3.interior[1].lambda0 - std::cbrt(4 - std::sqrt(10.0))) < 1e-9);
  CHECK(s3.interior[1].frequencies == std::set<int>{2});
  CHECK_FALSE(s3.interior[1].tangential);
  CHECK_FALSE(s3.warnings.empty());
}

TEST_CASE("scan: simple families") {
  const ScanResult none = scan_resonances(MatrixFamily::constant(SymmetricMatrix::diagonal({-1, -2})), -1, 1);
  CHECK(none.interior.empty());
  CHECK_FALSE(none.endpoints_resonant());

  MatrixFamily f(1);
  f.set_entry(0, 0, {{1, 1.0}});
  const ScanResult one = scan_resonances(f, 0.5, 1.5);
  REQUIRE(one.interior.size() == 1);
  CHECK(std::abs(one.interior[0].lambda0 - 1.0) < 1e-12);
  CHECK(one.interior[0].frequencies == std::set<int>{1});

  // Off-grid crossing located by bisection.
  MatrixFamily g(2);
  g.set_entry(0, 0, {{0, 3.3}, {1, 1.0}});
  g.set_entry(1, 1, {{0, -1.0}});
  const ScanResult two = scan_resonances(g, 0.0, 1.0, {37, 1e-9});
  REQUIRE(two.interior.size() == 1);
  CHECK(std::abs(two.interior[0].lambda0 - 0.7) < 1e-12);
  CHECK(two.interior[0].frequencies == std::set<int>{2});

  // Off-grid tangency found by the distance minimisation.
  MatrixFamily t(1);
  t.set_entry(0, 0, {{0, 4.0 + 0.0361}, {1, -0.38}, {2, 1.0}});  // 4 + (l - 0.19)^2
  const ScanResult tan = scan_resonances(t, -1.0, 1.0, {10, 1e-9});
  REQUIRE(tan.interior.size() == 1);
  CHECK(std::abs(tan.interior[0].lambda0 - 0.19) < 1e-6);
  CHECK(tan.interior[0].tangential);
}

TEST_CASE("scan: non-isolated resonance") {
  MatrixFamily f(2);
  f.set_entry(0, 0, {{0, 1.0}});
  f.set_entry(1, 1, {{1, 1.0}});
  CHECK_THROWS_AS(scan_resonances(f, -1, 1), TangencyError);
}

TEST_CASE("scan: thread count does not change results") {
  std::mt19937_64 rng(17);
  const MatrixFamily f = gen::full_family(rng, 4);
  setenv("EQUIDEG_THREADS", "1", 1);
  const ScanResult a = scan_resonances(f, -1, 1);
  setenv("EQUIDEG_THREADS", "3", 1);
  const ScanResult b = scan_resonances(f, -1, 1);
  unsetenv("EQUIDEG_THREADS");
  CHECK(a.interior == b.interior);
  CHECK(a.warnings == b.warnings);
}
