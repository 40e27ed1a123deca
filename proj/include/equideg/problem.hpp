#pragma once

// A parameterised Hamiltonian problem  u'' = -grad_u V(u, lambda)  with
//   V(x, lambda) = 1/2 <A(lambda) x, x> + eta(x, lambda).
// For scaled problems the whole potential is multiplied by lambda^2.

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "equideg/spectral.hpp"

namespace equideg {

struct NoPerturbation {
  friend bool operator==(const NoPerturbation&, const NoPerturbation&) = default;
};

enum class KeplerScale { constant, lambda_squared };

// eta(x, lambda) = -s(lambda) / sqrt(|x|^2 + a), s = 1 or lambda^2.
struct KeplerPerturbation {
  double a = 1.0;
  KeplerScale scale = KeplerScale::constant;
  friend bool operator==(const KeplerPerturbation&, const KeplerPerturbation&) = default;
};

struct UserPerturbation {
  // Required: grad_x eta(x, lambda) written into g.
  std::function<void(std::span<const double> x, double lambda, std::span<double> g)> gradient;
  // Optional: eta itself (only needed for energy checks).
  std::function<double(std::span<const double> x, double lambda)> potential;
};

using Perturbation = std::variant<NoPerturbation, KeplerPerturbation, UserPerturbation>;

struct IndexRule {
  enum class Kind { builtin, user, unavailable };
  Kind kind = Kind::builtin;
  std::vector<std::pair<double, int>> user_values;  // (lambda, ind(-grad V, infinity))

  static IndexRule builtin() { return {}; }
  static IndexRule unavailable() { return {Kind::unavailable, {}}; }
  static IndexRule user(std::vector<std::pair<double, int>> v) { return {Kind::user, std::move(v)}; }
};

struct ProblemSpec {
  std::string name;
  std::size_t n = 0;
  MatrixFamily family;  // A(lambda); for scaled problems the constant A
  Perturbation perturbation;
  IndexRule index_rule;
  bool scaled = false;

  // Throws PreconditionError / DomainError on inconsistent data.
  void validate() const;

  // Matrix of the linear part of grad V at lambda: A(lambda), or lambda^2 A.
  MatrixFamily effective_family() const;
  SymmetricMatrix linear_part(double lambda) const;

  bool has_potential() const;
  bool is_builtin_class() const;
  // Kepler weight s(lambda) including the lambda^2 of scaled problems, and
  // its derivative. Zero without a Kepler perturbation.
  double kepler_scale(double lambda) const;
  double kepler_scale_derivative(double lambda) const;

  // Pointwise evaluation; x and outputs have length n.
  double potential(std::span<const double> x, double lambda) const;
  void gradient(std::span<const double> x, double lambda, std::span<double> g) const;
  // d/dlambda of grad V at fixed x.
  void gradient_dlambda(std::span<const double> x, double lambda, std::span<double> g) const;
  // Row-major n x n Hessian of V; finite differences for user gradients.
  void hessian(std::span<const double> x, double lambda, std::span<double> h) const;

  // ind(-grad V(., lambda), infinity) according to index_rule. For scaled
  // problems this is the index of the unscaled V.
  int index_at_infinity(double lambda, double tol = kDefaultTol) const;
};

}  // namespace equideg
