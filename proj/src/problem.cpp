#include "equideg/problem.hpp"

#include <cmath>
#include <sstream>

#include "equideg/eqdeg.hpp"
#include "equideg/error.hpp"

namespace equideg {

void ProblemSpec::validate() const {
  if (n == 0) throw PreconditionError("problem dimension must be positive");
  if (family.size() != n) throw PreconditionError("matrix family dimension does not match n");
  if (scaled && !family.is_constant()) throw PreconditionError("scaled problems need a constant matrix A");
  if (const auto* k = std::get_if<KeplerPerturbation>(&perturbation); k && !(k->a > 0))
    throw DomainError("kepler perturbation needs a > 0");
  if (const auto* u = std::get_if<UserPerturbation>(&perturbation); u && !u->gradient)
    throw PreconditionError("user perturbation without gradient");
}

MatrixFamily ProblemSpec::effective_family() const { return scaled ? family.times_power(2) : family; }

SymmetricMatrix ProblemSpec::linear_part(double lambda) const {
  return scaled ? family.at(lambda).scaled(lambda * lambda) : family.at(lambda);
}

bool ProblemSpec::has_potential() const {
  if (const auto* u = std::get_if<UserPerturbation>(&perturbation)) return bool(u->potential);
  return true;
}

bool ProblemSpec::is_builtin_class() const { return !std::holds_alternative<UserPerturbation>(perturbation); }

double ProblemSpec::kepler_scale(double lambda) const {
  const auto* k = std::get_if<KeplerPerturbation>(&perturbation);
  if (!k) return 0;
  double s = k->scale == KeplerScale::lambda_squared ? lambda * lambda : 1.0;
  if (scaled) s *= lambda * lambda;
  return s;
}

double ProblemSpec::kepler_scale_derivative(double lambda) const {
  const auto* k = std::get_if<KeplerPerturbation>(&perturbation);
  if (!k) return 0;
  const bool sq = k->scale == KeplerScale::lambda_squared;
  if (sq && scaled) return 4 * lambda * lambda * lambda;
  if (sq || scaled) return 2 * lambda;
  return 0;
}

namespace {

void check_len(std::span<const double> x, std::size_t n) {
  if (x.size() != n) throw PreconditionError("state vector has wrong dimension");
}

double kepler_a(const Perturbation& p) {
  const double a = std::get<KeplerPerturbation>(p).a;
  if (!(a > 0)) throw DomainError("kepler perturbation needs a > 0");
  return a;
}

double norm2(std::span<const double> x) {
  double r2 = 0;
  for (double v : x) r2 += v * v;
  return r2;
}

}  // namespace

double ProblemSpec::potential(std::span<const double> x, double lambda) const {
  check_len(x, n);
  const SymmetricMatrix a = linear_part(lambda);
  std::vector<double> ax(n);
  a.apply(x, ax);
  double v = 0;
  for (std::size_t i = 0; i < n; ++i) v += 0.5 * ax[i] * x[i];
  if (std::holds_alternative<KeplerPerturbation>(perturbation)) {
    v += -kepler_scale(lambda) / std::sqrt(norm2(x) + kepler_a(perturbation));
  } else if (const auto* u = std::get_if<UserPerturbation>(&perturbation)) {
    if (!u->potential) throw PreconditionError("user perturbation has no potential");
    v += (scaled ? lambda * lambda : 1.0) * u->potential(x, lambda);
  }
  return v;
}

void ProblemSpec::gradient(std::span<const double> x, double lambda, std::span<double> g) const {
  check_len(x, n);
  linear_part(lambda).apply(x, g);
  if (std::holds_alternative<KeplerPerturbation>(perturbation)) {
    const double q = norm2(x) + kepler_a(perturbation);
    const double f = kepler_scale(lambda) / (q * std::sqrt(q));
    for (std::size_t i = 0; i < n; ++i) g[i] += f * x[i];
  } else if (const auto* u = std::get_if<UserPerturbation>(&perturbation)) {
    std::vector<double> e(n, 0.0);
    u->gradient(x, lambda, e);
    const double w = scaled ? lambda * lambda : 1.0;
    for (std::size_t i = 0; i < n; ++i) g[i] += w * e[i];
  }
}

void ProblemSpec::gradient_dlambda(std::span<const double> x, double lambda, std::span<double> g) const {
  check_len(x, n);
  if (std::holds_alternative<UserPerturbation>(perturbation)) {
    const double h = 1e-6 * (1 + std::abs(lambda));
    std::vector<double> gp(n), gm(n);
    gradient(x, lambda + h, gp);
    gradient(x, lambda - h, gm);
    for (std::size_t i = 0; i < n; ++i) g[i] = (gp[i] - gm[i]) / (2 * h);
    return;
  }
  SymmetricMatrix da = family.derivative_at(lambda);
  if (scaled) da = family.at(lambda).scaled(2 * lambda);  // family is constant
  da.apply(x, g);
  if (std::holds_alternative<KeplerPerturbation>(perturbation)) {
    const double q = norm2(x) + kepler_a(perturbation);
    const double f = kepler_scale_derivative(lambda) / (q * std::sqrt(q));
    for (std::size_t i = 0; i < n; ++i) g[i] += f * x[i];
  }
}

void ProblemSpec::hessian(std::span<const double> x, double lambda, std::span<double> h) const {
  check_len(x, n);
  const SymmetricMatrix a = linear_part(lambda);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) h[i * n + j] = a(i, j);
  if (std::holds_alternative<KeplerPerturbation>(perturbation)) {
    const double q = norm2(x) + kepler_a(perturbation);
    const double f = kepler_scale(lambda) / (q * q * std::sqrt(q));
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h[i * n + j] += f * ((i == j ? q : 0.0) - 3 * x[i] * x[j]);
  } else if (const auto* u = std::get_if<UserPerturbation>(&perturbation)) {
    // Central differences of the user gradient, symmetrised.
    const double w = scaled ? lambda * lambda : 1.0;
    std::vector<double> xp(x.begin(), x.end()), gp(n), gm(n), fd(n * n);
    for (std::size_t j = 0; j < n; ++j) {
      const double step = 1e-6 * (1 + std::abs(x[j]));
      std::fill(gp.begin(), gp.end(), 0.0);
      std::fill(gm.begin(), gm.end(), 0.0);
      xp[j] = x[j] + step;
      u->gradient(xp, lambda, gp);
      xp[j] = x[j] - step;
      u->gradient(xp, lambda, gm);
      xp[j] = x[j];
      for (std::size_t i = 0; i < n; ++i) fd[i * n + j] = (gp[i] - gm[i]) / (2 * step);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) h[i * n + j] += w * 0.5 * (fd[i * n + j] + fd[j * n + i]);
  }
}

int ProblemSpec::index_at_infinity(double lambda, double tol) const {
  switch (index_rule.kind) {
    case IndexRule::Kind::unavailable:
      throw MissingIndexError("index at infinity is unavailable for problem '" + name + "'");
    case IndexRule::Kind::user: {
      for (const auto& [l, v] : index_rule.user_values)
        if (std::abs(l - lambda) <= 1e-12 * (1 + std::abs(lambda))) return v;
      std::ostringstream os;
      os.precision(17);
      os << "no user-supplied index at infinity for lambda=" << lambda;
      throw MissingIndexError(os.str());
    }
    case IndexRule::Kind::builtin:
      break;
  }
  if (!is_builtin_class())
    throw MissingIndexError("builtin index formula needs a builtin perturbation; supply the index explicitly");
  const SymmetricMatrix a = scaled ? family.at(0.0) : family.at(lambda);
  return ind_infinity(a, n, tol);
}

}  // namespace equideg
