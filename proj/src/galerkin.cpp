#include "equideg/galerkin.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "equideg/error.hpp"
#include "equideg/kernels.hpp"

namespace equideg {

// ---------------------------------------------------------------------------
// FourierLoop

FourierLoop FourierLoop::cosine(std::size_t n, int modes, int k, std::span<const double> direction, double amplitude) {
  if (direction.size() != n) throw PreconditionError("FourierLoop::cosine: direction has wrong size");
  if (k < 1 || k > modes) throw PreconditionError("FourierLoop::cosine: mode out of range");
  FourierLoop u(n, modes);
  auto c = u.acos(k);
  for (std::size_t i = 0; i < n; ++i) c[i] = amplitude * direction[i];
  return u;
}

std::vector<double> FourierLoop::eval(double t) const {
  std::vector<double> x(a0().begin(), a0().end());
  for (int k = 1; k <= modes; ++k) {
    const double c = std::cos(k * t), s = std::sin(k * t);
    for (std::size_t i = 0; i < n; ++i) x[i] += acos(k)[i] * c + asin(k)[i] * s;
  }
  return x;
}

FourierLoop FourierLoop::resized(int new_modes) const {
  FourierLoop u(n, new_modes);
  const std::size_t keep = std::min(coeffs.size(), u.coeffs.size());
  std::copy(coeffs.begin(), coeffs.begin() + std::ptrdiff_t(keep), u.coeffs.begin());
  return u;
}

FourierLoop FourierLoop::shifted(double s) const {
  FourierLoop u = *this;
  for (int k = 1; k <= modes; ++k) {
    const double c = std::cos(k * s), sn = std::sin(k * s);
    for (std::size_t i = 0; i < n; ++i) {
      const double a = acos(k)[i], b = asin(k)[i];
      u.acos(k)[i] = a * c + b * sn;
      u.asin(k)[i] = b * c - a * sn;
    }
  }
  return u;
}

FourierLoop FourierLoop::derivative() const {
  FourierLoop u(n, modes);
  for (int k = 1; k <= modes; ++k)
    for (std::size_t i = 0; i < n; ++i) {
      u.acos(k)[i] = k * asin(k)[i];
      u.asin(k)[i] = -k * acos(k)[i];
    }
  return u;
}

double FourierLoop::mode_energy(int k) const {
  double e = 0;
  if (k == 0) {
    for (double v : a0()) e += v * v;
    return e;
  }
  for (std::size_t i = 0; i < n; ++i) e += acos(k)[i] * acos(k)[i] + asin(k)[i] * asin(k)[i];
  return e;
}

double FourierLoop::amplitude(std::size_t nodes) const {
  const FourierTransform ft(n, modes, nodes);
  std::vector<double> x(n * ft.nodes());
  ft.synthesize(coeffs, x);
  double best = 0;
  for (std::size_t j = 0; j < ft.nodes(); ++j) {
    double r2 = 0;
    for (std::size_t i = 0; i < n; ++i) r2 += x[i * ft.nodes() + j] * x[i * ft.nodes() + j];
    best = std::max(best, r2);
  }
  return std::sqrt(best);
}

namespace {

std::size_t index_a0(std::size_t, std::size_t i) { return i; }
std::size_t index_cos(std::size_t n, int k, std::size_t i) { return n * (2 * std::size_t(k) - 1) + i; }
std::size_t index_sin(std::size_t n, int k, std::size_t i) { return n * 2 * std::size_t(k) + i; }

double norm(std::span<const double> v) { return std::sqrt(kernels::dot(v.size(), v.data(), v.data())); }

enum class Kind { linear, kepler, user };

// Pointwise evaluation of grad V and its derivatives on the collocation
// nodes, for a fixed problem, truncation and lambda.
class Discretization {
 public:
  Discretization(const ProblemSpec& p, int modes, std::size_t nodes)
      : p_(p), n_(p.n), ft_(p.n, modes, nodes), m_(ft_.nodes()), d_(coefficient_count(p.n, modes)) {
    p.validate();
    if (std::holds_alternative<KeplerPerturbation>(p.perturbation)) {
      kind_ = Kind::kepler;
      a_ = std::get<KeplerPerturbation>(p.perturbation).a;
    } else if (std::holds_alternative<UserPerturbation>(p.perturbation)) {
      kind_ = Kind::user;
      user_ = &std::get<UserPerturbation>(p.perturbation);
    }
  }

  std::size_t n() const { return n_; }
  std::size_t m() const { return m_; }
  std::size_t dim() const { return d_; }
  int modes() const { return ft_.modes(); }
  const FourierTransform& ft() const { return ft_; }
  Kind kind() const { return kind_; }

  void set_lambda(double lambda) {
    lambda_ = lambda;
    a_mat_ = dense(p_.linear_part(lambda));
    if (p_.scaled)
      da_mat_ = dense(p_.family.at(lambda).scaled(2 * lambda));
    else
      da_mat_ = dense(p_.family.derivative_at(lambda));
    s_ = p_.kepler_scale(lambda);
    ds_ = p_.kepler_scale_derivative(lambda);
  }
  double lambda() const { return lambda_; }

  std::vector<double> synth(std::span<const double> coeffs) const {
    std::vector<double> x(n_ * m_);
    ft_.synthesize(coeffs, x);
    return x;
  }
  std::vector<double> analyze(std::span<const double> samples) const {
    std::vector<double> c(d_);
    ft_.analyze(samples, c);
    return c;
  }

  // G = grad V(X)
  void gradient(const std::vector<double>& x, std::vector<double>& g) const {
    linear_apply(a_mat_, x, g);
    switch (kind_) {
      case Kind::linear: break;
      case Kind::kepler: kernels::kepler_gradient({n_, m_, s_, a_}, x.data(), g.data()); break;
      case Kind::user: user_gradient(x, lambda_, user_weight(), g); break;
    }
  }

  // G = d/dlambda grad V(X)
  void dlambda(const std::vector<double>& x, std::vector<double>& g) const {
    linear_apply(da_mat_, x, g);
    switch (kind_) {
      case Kind::linear: break;
      case Kind::kepler: kernels::kepler_gradient({n_, m_, ds_, a_}, x.data(), g.data()); break;
      case Kind::user: {
        const double h = 1e-6 * (1 + std::abs(lambda_));
        const double wp = p_.scaled ? (lambda_ + h) * (lambda_ + h) : 1.0;
        const double wm = p_.scaled ? (lambda_ - h) * (lambda_ - h) : 1.0;
        std::vector<double> gp(n_ * m_, 0.0), gm(n_ * m_, 0.0);
        user_gradient(x, lambda_ + h, wp, gp);
        user_gradient(x, lambda_ - h, wm, gm);
        for (std::size_t i = 0; i < g.size(); ++i) g[i] += (gp[i] - gm[i]) / (2 * h);
        break;
      }
    }
  }

  // n*n rows of Hessian entries: rows[(i*n + l)*M + j] = d_i d_l V(x(t_j)).
  std::vector<double> hessian_rows(const std::vector<double>& x) const {
    std::vector<double> h(n_ * n_ * m_);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t l = 0; l < n_; ++l) std::fill_n(h.begin() + std::ptrdiff_t((i * n_ + l) * m_), m_, a_mat_[i * n_ + l]);
    if (kind_ == Kind::kepler) {
      for (std::size_t j = 0; j < m_; ++j) {
        double r2 = 0;
        for (std::size_t i = 0; i < n_; ++i) r2 += x[i * m_ + j] * x[i * m_ + j];
        const double q = r2 + a_;
        const double f = s_ / (q * q * std::sqrt(q));
        for (std::size_t i = 0; i < n_; ++i)
          for (std::size_t l = 0; l < n_; ++l)
            h[(i * n_ + l) * m_ + j] += f * ((i == l ? q : 0.0) - 3 * x[i * m_ + j] * x[l * m_ + j]);
      }
    } else if (kind_ == Kind::user) {
      std::vector<double> xj(n_), hj(n_ * n_);
      ProblemSpec local = p_;  // hessian() adds the linear part; strip it
      local.family = MatrixFamily(n_);
      for (std::size_t j = 0; j < m_; ++j) {
        for (std::size_t i = 0; i < n_; ++i) xj[i] = x[i * m_ + j];
        local.hessian(xj, lambda_, hj);
        for (std::size_t e = 0; e < n_ * n_; ++e) h[e * m_ + j] += hj[e];
      }
    }
    return h;
  }

  // Y = Hess V(X) . V, pointwise. `rows` must be hessian_rows(X) for user
  // perturbations and may be empty otherwise.
  void hessian_apply(const std::vector<double>& x, const std::vector<double>& v, const std::vector<double>& rows,
                     std::vector<double>& y) const {
    if (kind_ == Kind::user) {
      std::fill(y.begin(), y.end(), 0.0);
      for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t l = 0; l < n_; ++l) {
          const double* h = rows.data() + (i * n_ + l) * m_;
          const double* vl = v.data() + l * m_;
          double* yi = y.data() + i * m_;
          for (std::size_t j = 0; j < m_; ++j) yi[j] += h[j] * vl[j];
        }
      return;
    }
    linear_apply(a_mat_, v, y);
    if (kind_ == Kind::kepler) kernels::kepler_hessian_apply({n_, m_, s_, a_}, x.data(), v.data(), y.data());
  }

  // Potential values at the nodes.
  std::vector<double> potential(const std::vector<double>& x) const {
    std::vector<double> ax(n_ * m_), w(m_, 0.0);
    linear_apply(a_mat_, x, ax);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t j = 0; j < m_; ++j) w[j] += 0.5 * ax[i * m_ + j] * x[i * m_ + j];
    if (kind_ == Kind::kepler) {
      kernels::kepler_potential({n_, m_, s_, a_}, x.data(), w.data());
    } else if (kind_ == Kind::user) {
      if (!user_->potential) throw PreconditionError("user perturbation has no potential");
      std::vector<double> xj(n_);
      for (std::size_t j = 0; j < m_; ++j) {
        for (std::size_t i = 0; i < n_; ++i) xj[i] = x[i * m_ + j];
        w[j] += user_weight() * user_->potential(xj, lambda_);
      }
    }
    return w;
  }

  std::vector<double> residual(std::span<const double> coeffs) const {
    const std::vector<double> x = synth(coeffs);
    std::vector<double> g(n_ * m_);
    gradient(x, g);
    std::vector<double> r = analyze(g);
    subtract_second_derivative(coeffs, r);
    return r;
  }

  // r += k^2 a_k per mode, i.e. the -u'' term.
  void subtract_second_derivative(std::span<const double> coeffs, std::vector<double>& r) const {
    for (int k = 1; k <= modes(); ++k) {
      const double k2 = double(k) * k;
      for (std::size_t i = 0; i < n_; ++i) {
        r[index_cos(n_, k, i)] -= k2 * coeffs[index_cos(n_, k, i)];
        r[index_sin(n_, k, i)] -= k2 * coeffs[index_sin(n_, k, i)];
      }
    }
  }

 private:
  static std::vector<double> dense(const SymmetricMatrix& a) { return {a.data().begin(), a.data().end()}; }

  double user_weight() const { return p_.scaled ? lambda_ * lambda_ : 1.0; }

  void linear_apply(const std::vector<double>& a, const std::vector<double>& x, std::vector<double>& y) const {
    std::fill(y.begin(), y.end(), 0.0);
    for (std::size_t i = 0; i < n_; ++i)
      for (std::size_t l = 0; l < n_; ++l)
        if (a[i * n_ + l] != 0.0) kernels::axpy(m_, a[i * n_ + l], x.data() + l * m_, y.data() + i * m_);
  }

  void user_gradient(const std::vector<double>& x, double lambda, double w, std::vector<double>& g) const {
    std::vector<double> xj(n_), gj(n_);
    for (std::size_t j = 0; j < m_; ++j) {
      for (std::size_t i = 0; i < n_; ++i) xj[i] = x[i * m_ + j];
      std::fill(gj.begin(), gj.end(), 0.0);
      user_->gradient(xj, lambda, gj);
      for (std::size_t i = 0; i < n_; ++i) g[i * m_ + j] += w * gj[i];
    }
  }

  const ProblemSpec& p_;
  std::size_t n_;
  FourierTransform ft_;
  std::size_t m_;
  std::size_t d_;
  Kind kind_ = Kind::linear;
  const UserPerturbation* user_ = nullptr;
  double a_ = 1, s_ = 0, ds_ = 0, lambda_ = 0;
  std::vector<double> a_mat_, da_mat_;
};

// Coupling block of the discrete Jacobian for modes 0..L, from the DFT
// coefficients H_m of the pointwise Hessian (m up to 2L), minus k^2 on the
// diagonal. Exact for the discrete residual.
Eigen::MatrixXd low_mode_block(const Discretization& disc, const std::vector<double>& hrows, int L) {
  const std::size_t n = disc.n();
  const int kmax = 2 * L;
  std::vector<std::complex<double>> h(n * n * (std::size_t(kmax) + 1));
  disc.ft().spectrum(hrows, n * n, kmax, h);
  auto H = [&](std::size_t i, std::size_t l, int m) {
    const std::complex<double> v = h[(i * n + l) * (std::size_t(kmax) + 1) + std::size_t(std::abs(m))];
    return m >= 0 ? v : std::conj(v);
  };
  const std::size_t dl = coefficient_count(n, L);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(Eigen::Index(dl), Eigen::Index(dl));
  auto at = [&](std::size_t r, std::size_t c) -> double& { return b(Eigen::Index(r), Eigen::Index(c)); };
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t l = 0; l < n; ++l) {
      at(index_a0(n, i), index_a0(n, l)) = H(i, l, 0).real();
      for (int q = 1; q <= L; ++q) {
        at(index_a0(n, i), index_cos(n, q, l)) = H(i, l, q).real();
        at(index_a0(n, i), index_sin(n, q, l)) = -H(i, l, q).imag();
        at(index_cos(n, q, i), index_a0(n, l)) = 2 * H(i, l, q).real();
        at(index_sin(n, q, i), index_a0(n, l)) = -2 * H(i, l, q).imag();
      }
      for (int p = 1; p <= L; ++p)
        for (int q = 1; q <= L; ++q) {
          const std::complex<double> s = H(i, l, p - q), t = H(i, l, p + q);
          at(index_cos(n, p, i), index_cos(n, q, l)) = (s + t).real();
          at(index_cos(n, p, i), index_sin(n, q, l)) = (s - t).imag();
          at(index_sin(n, p, i), index_cos(n, q, l)) = -(s + t).imag();
          at(index_sin(n, p, i), index_sin(n, q, l)) = (s - t).real();
        }
    }
  for (int p = 1; p <= L; ++p)
    for (std::size_t i = 0; i < n; ++i) {
      at(index_cos(n, p, i), index_cos(n, p, i)) -= double(p) * p;
      at(index_sin(n, p, i), index_sin(n, p, i)) -= double(p) * p;
    }
  return b;
}

std::vector<double> jacobian_apply_at(const Discretization& disc, const std::vector<double>& x,
                                      const std::vector<double>& hrows, std::span<const double> v) {
  const std::vector<double> vs = disc.synth(v);
  std::vector<double> y(vs.size());
  disc.hessian_apply(x, vs, hrows, y);
  std::vector<double> out = disc.analyze(y);
  disc.subtract_second_derivative(v, out);
  return out;
}

// Restarted GMRES with right preconditioning. Returns the iteration count.
template <class Op, class Prec>
int gmres(const Op& apply, const Prec& precondition, std::span<const double> b, std::vector<double>& x, double abs_tol,
          int restart, int max_iter) {
  const std::size_t n = b.size();
  x.assign(n, 0.0);
  std::vector<double> r(b.begin(), b.end());
  double beta = norm(r);
  int total = 0;
  while (beta > abs_tol && total < max_iter) {
    std::vector<std::vector<double>> v(1, r);
    for (double& e : v[0]) e /= beta;
    std::vector<std::vector<double>> z;
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(restart + 1, restart);
    std::vector<double> cs(static_cast<std::size_t>(restart)), sn(static_cast<std::size_t>(restart)), g(static_cast<std::size_t>(restart) + 1, 0.0);
    g[0] = beta;
    int j = 0;
    for (; j < restart && total < max_iter; ++j, ++total) {
      z.push_back(precondition(v[std::size_t(j)]));
      std::vector<double> w = apply(z.back());
      for (int i = 0; i <= j; ++i) {
        h(i, j) = kernels::dot(n, w.data(), v[std::size_t(i)].data());
        kernels::axpy(n, -h(i, j), v[std::size_t(i)].data(), w.data());
      }
      h(j + 1, j) = norm(w);
      for (int i = 0; i < j; ++i) {
        const double t = cs[std::size_t(i)] * h(i, j) + sn[std::size_t(i)] * h(i + 1, j);
        h(i + 1, j) = -sn[std::size_t(i)] * h(i, j) + cs[std::size_t(i)] * h(i + 1, j);
        h(i, j) = t;
      }
      const double rr = std::hypot(h(j, j), h(j + 1, j));
      cs[std::size_t(j)] = rr == 0 ? 1 : h(j, j) / rr;
      sn[std::size_t(j)] = rr == 0 ? 0 : h(j + 1, j) / rr;
      const double hnext = h(j + 1, j);
      h(j, j) = rr;
      h(j + 1, j) = 0;
      g[std::size_t(j) + 1] = -sn[std::size_t(j)] * g[std::size_t(j)];
      g[std::size_t(j)] = cs[std::size_t(j)] * g[std::size_t(j)];
      if (std::abs(g[std::size_t(j) + 1]) <= abs_tol || hnext == 0) {
        ++j;
        ++total;
        break;
      }
      for (double& e : w) e /= hnext;
      v.push_back(std::move(w));
    }
    // Back substitution and update.
    std::vector<double> y(std::size_t(j), 0.0);
    for (int i = j - 1; i >= 0; --i) {
      double s = g[std::size_t(i)];
      for (int k = i + 1; k < j; ++k) s -= h(i, k) * y[std::size_t(k)];
      y[std::size_t(i)] = h(i, i) == 0 ? 0 : s / h(i, i);
    }
    for (int i = 0; i < j; ++i) kernels::axpy(n, y[std::size_t(i)], z[std::size_t(i)].data(), x.data());
    const std::vector<double> ax = apply(x);
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ax[i];
    const double prev = beta;
    beta = norm(r);
    if (beta >= prev) break;  // stagnation
  }
  return total;
}

// Augmented system: unknowns [x (D) | lambda? | sigma?], rows
// [R(x, lambda) + sigma xi (D) | pin? | phase?].
struct Augmentation {
  bool free_lambda = false;
  bool phase = false;
  std::vector<double> xi;  // unit orbit tangent of the reference loop
  int k0 = 0;
  double target = 0;
};

struct AugmentedSystem {
  const ProblemSpec& p;
  Discretization& disc;
  const Augmentation& aug;
  double fixed_lambda;

  std::size_t extras() const { return std::size_t(aug.free_lambda) + std::size_t(aug.phase); }
  std::size_t size() const { return disc.dim() + extras(); }
  std::size_t lambda_index() const { return disc.dim(); }
  std::size_t sigma_index() const { return disc.dim() + std::size_t(aug.free_lambda); }

  double lambda_of(const std::vector<double>& z) const { return aug.free_lambda ? z[lambda_index()] : fixed_lambda; }
  double sigma_of(const std::vector<double>& z) const { return aug.phase ? z[sigma_index()] : 0.0; }
  std::span<const double> x_of(const std::vector<double>& z) const { return {z.data(), disc.dim()}; }

  double pin_norm(std::span<const double> x) const {
    double s = 0;
    for (std::size_t i = 0; i < disc.n(); ++i) {
      s += x[index_cos(disc.n(), aug.k0, i)] * x[index_cos(disc.n(), aug.k0, i)];
      s += x[index_sin(disc.n(), aug.k0, i)] * x[index_sin(disc.n(), aug.k0, i)];
    }
    return std::sqrt(s);
  }

  // Plain Galerkin residual at z.
  std::vector<double> galerkin_residual(const std::vector<double>& z) {
    disc.set_lambda(lambda_of(z));
    return disc.residual(x_of(z));
  }

  std::vector<double> evaluate(const std::vector<double>& z) {
    std::vector<double> r = galerkin_residual(z);
    const std::size_t d = disc.dim();
    r.resize(size());
    if (aug.phase) kernels::axpy(d, sigma_of(z), aug.xi.data(), r.data());
    if (aug.free_lambda) r[d] = pin_norm(x_of(z)) - aug.target;
    if (aug.phase) r[d + std::size_t(aug.free_lambda)] = kernels::dot(d, aug.xi.data(), z.data());
    return r;
  }
};

struct LinearSolveStats {
  int iterations = 0;
};

// Throws RankError when the LU has a (numerically) zero pivot; the condition
// estimate is the pivot ratio.
void require_nonsingular(const Eigen::FullPivLU<Eigen::MatrixXd>& lu, const char* what) {
  const Eigen::VectorXd piv = lu.matrixLU().diagonal().cwiseAbs();
  const double big = piv.size() ? piv.maxCoeff() : 0.0, small = piv.size() ? piv.minCoeff() : 0.0;
  const double cond = small > 0 ? big / small : INFINITY;
  if (lu.rank() == lu.rows() && cond < 1e14) return;
  std::ostringstream os;
  os << "singular augmented Jacobian (" << what << " rank " << lu.rank() << " of " << lu.rows() << ")";
  throw RankError(os.str(), cond);
}

// Newton-Krylov step: solves J dz = -F at z.
std::vector<double> krylov_step(AugmentedSystem& sys, const std::vector<double>& z, const std::vector<double>& f,
                                double abs_tol, LinearSolveStats& stats) {
  Discretization& disc = sys.disc;
  const std::size_t n = disc.n(), d = disc.dim(), e = sys.extras();
  disc.set_lambda(sys.lambda_of(z));
  const std::vector<double> x = disc.synth(sys.x_of(z));
  const std::vector<double> hrows = disc.hessian_rows(x);
  const std::vector<double> no_rows;
  const std::vector<double>& apply_rows = disc.kind() == Kind::user ? hrows : no_rows;

  std::vector<double> drdl;
  if (sys.aug.free_lambda) {
    std::vector<double> g(n * disc.m());
    disc.dlambda(x, g);
    drdl = disc.analyze(g);
  }
  std::vector<double> pin_row;
  if (sys.aug.free_lambda) {
    pin_row.assign(d, 0.0);
    const double pn = sys.pin_norm(sys.x_of(z));
    if (pn > 0)
      for (std::size_t i = 0; i < n; ++i) {
        pin_row[index_cos(n, sys.aug.k0, i)] = z[index_cos(n, sys.aug.k0, i)] / pn;
        pin_row[index_sin(n, sys.aug.k0, i)] = z[index_sin(n, sys.aug.k0, i)] / pn;
      }
  }

  auto apply = [&](const std::vector<double>& dz) {
    std::vector<double> out = jacobian_apply_at(disc, x, apply_rows, std::span<const double>(dz.data(), d));
    out.resize(d + e);
    if (sys.aug.free_lambda) {
      kernels::axpy(d, dz[sys.lambda_index()], drdl.data(), out.data());
      out[d] = kernels::dot(d, pin_row.data(), dz.data());
    }
    if (sys.aug.phase) {
      kernels::axpy(d, dz[sys.sigma_index()], sys.aug.xi.data(), out.data());
      out[d + std::size_t(sys.aug.free_lambda)] = kernels::dot(d, sys.aug.xi.data(), dz.data());
    }
    return out;
  };

  // Preconditioner: exact low-mode block with the border, per-mode blocks
  // -k^2 + mean Hessian above it.
  const int L = std::min(disc.modes(), std::max(32, 2 * sys.aug.k0));
  const std::size_t dl = coefficient_count(n, L);
  Eigen::MatrixXd b = Eigen::MatrixXd::Zero(Eigen::Index(dl + e), Eigen::Index(dl + e));
  b.topLeftCorner(Eigen::Index(dl), Eigen::Index(dl)) = low_mode_block(disc, hrows, L);
  if (sys.aug.free_lambda) {
    const Eigen::Index c = Eigen::Index(dl);
    for (std::size_t i = 0; i < dl; ++i) {
      b(Eigen::Index(i), c) = drdl[i];
      b(c, Eigen::Index(i)) = pin_row[i];
    }
  }
  if (sys.aug.phase) {
    const Eigen::Index c = Eigen::Index(dl + std::size_t(sys.aug.free_lambda));
    for (std::size_t i = 0; i < dl; ++i) {
      b(Eigen::Index(i), c) = sys.aug.xi[i];
      b(c, Eigen::Index(i)) = sys.aug.xi[i];
    }
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(b);
  require_nonsingular(lu, "low-mode block");
  Eigen::MatrixXd h0(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  {
    std::vector<std::complex<double>> mean(n * n);
    disc.ft().spectrum(hrows, n * n, 0, mean);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t l = 0; l < n; ++l)
        h0(Eigen::Index(i), Eigen::Index(l)) = 0.5 * (mean[i * n + l].real() + mean[l * n + i].real());
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(h0);
  const Eigen::MatrixXd q = es.eigenvectors();
  const Eigen::VectorXd lam = es.eigenvalues();

  auto precondition = [&](const std::vector<double>& r) {
    std::vector<double> out(d + e);
    Eigen::VectorXd rl(Eigen::Index(dl + e));
    for (std::size_t i = 0; i < dl; ++i) rl(Eigen::Index(i)) = r[i];
    for (std::size_t i = 0; i < e; ++i) rl(Eigen::Index(dl + i)) = r[d + i];
    const Eigen::VectorXd sl = lu.solve(rl);
    for (std::size_t i = 0; i < dl; ++i) out[i] = sl(Eigen::Index(i));
    for (std::size_t i = 0; i < e; ++i) out[d + i] = sl(Eigen::Index(dl + i));
    Eigen::VectorXd t(static_cast<Eigen::Index>(n)), u(static_cast<Eigen::Index>(n));
    for (int k = L + 1; k <= disc.modes(); ++k) {
      const double k2 = double(k) * k;
      for (std::size_t base : {index_cos(n, k, 0), index_sin(n, k, 0)}) {
        for (std::size_t i = 0; i < n; ++i) t(Eigen::Index(i)) = r[base + i];
        u = q.transpose() * t;
        for (Eigen::Index i = 0; i < u.size(); ++i) {
          double den = lam(i) - k2;
          if (std::abs(den) < 1e-8) den = den < 0 ? -1e-8 : 1e-8;
          u(i) /= den;
        }
        t = q * u;
        for (std::size_t i = 0; i < n; ++i) out[base + i] = t(Eigen::Index(i));
      }
    }
    return out;
  };

  std::vector<double> rhs(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
  std::vector<double> dz;
  stats.iterations += gmres(apply, precondition, rhs, dz, abs_tol, 60, 600);
  return dz;
}

// Dense forward-difference Newton step (reference path for small N).
std::vector<double> dense_fd_step(AugmentedSystem& sys, const std::vector<double>& z, const std::vector<double>& f) {
  const std::size_t sz = sys.size();
  if (sz > 6000) throw PreconditionError("finite-difference Jacobian is limited to small truncations");
  Eigen::MatrixXd j(static_cast<Eigen::Index>(sz), static_cast<Eigen::Index>(sz));
  std::vector<double> zp = z;
  for (std::size_t c = 0; c < sz; ++c) {
    const double h = 1e-7 * (1 + std::abs(z[c]));
    zp[c] = z[c] + h;
    const std::vector<double> fp = sys.evaluate(zp);
    zp[c] = z[c];
    for (std::size_t r = 0; r < sz; ++r) j(Eigen::Index(r), Eigen::Index(c)) = (fp[r] - f[r]) / h;
  }
  const Eigen::FullPivLU<Eigen::MatrixXd> lu(j);
  require_nonsingular(lu, "dense");
  Eigen::VectorXd rhs(static_cast<Eigen::Index>(sz));
  for (std::size_t i = 0; i < sz; ++i) rhs(Eigen::Index(i)) = -f[i];
  const Eigen::VectorXd dz = lu.solve(rhs);
  return {dz.data(), dz.data() + dz.size()};
}

Augmentation make_augmentation(const FourierLoop& ref, bool free_lambda, int k0, double target) {
  Augmentation aug;
  aug.free_lambda = free_lambda;
  aug.k0 = k0;
  aug.target = target;
  const FourierLoop xi = ref.derivative();
  const double nx = norm(xi.coeffs);
  if (nx > 1e-12 * std::max(1.0, norm(ref.coeffs))) {
    aug.phase = true;
    aug.xi = xi.coeffs;
    for (double& v : aug.xi) v /= nx;
  }
  return aug;
}

// Newton at fixed truncation.
SolveResult newton_fixed(const ProblemSpec& p, const FourierLoop& guess, double lambda, const Augmentation& aug,
                         const GalerkinOptions& opts) {
  Discretization disc(p, guess.modes, 0);
  AugmentedSystem sys{p, disc, aug, lambda};
  std::vector<double> z = guess.coeffs;
  if (aug.free_lambda) z.push_back(lambda);
  if (aug.phase) z.push_back(0.0);

  SolveResult res;
  std::vector<double> f = sys.evaluate(z);
  double nf = norm(f);
  LinearSolveStats stats;
  int it = 0;
  for (; it < opts.max_iter && nf > opts.tol; ++it) {
    const double gm_tol = std::max(std::min(0.1, nf) * nf, 1e-2 * opts.tol);
    const std::vector<double> dz =
        opts.jacobian == JacobianMethod::finite_difference ? dense_fd_step(sys, z, f) : krylov_step(sys, z, f, gm_tol, stats);
    // Backtracking on |F|.
    double t = 1;
    std::vector<double> zt(z.size()), ft;
    double nt = INFINITY;
    for (int ls = 0; ls < 12; ++ls, t *= 0.5) {
      for (std::size_t i = 0; i < z.size(); ++i) zt[i] = z[i] + t * dz[i];
      ft = sys.evaluate(zt);
      nt = norm(ft);
      if (nt < (1 - 1e-4 * t) * nf) break;
    }
    if (!(nt < nf)) break;  // no progress: at the rounding floor or stuck
    z = zt;
    f = ft;
    nf = nt;
  }
  res.iterations = it;
  res.linear_iterations = stats.iterations;
  res.augmented_norm = nf;
  res.converged = nf <= opts.tol;
  res.lambda = sys.lambda_of(z);
  res.sigma = sys.sigma_of(z);
  res.loop = FourierLoop(p.n, guess.modes);
  std::copy(z.begin(), z.begin() + std::ptrdiff_t(disc.dim()), res.loop.coeffs.begin());
  res.residual_norm = norm(sys.galerkin_residual(z));
  return res;
}

double spectral_tail(const FourierLoop& u) {
  double total = 0, tail = 0;
  for (int k = 0; k <= u.modes; ++k) {
    const double e = u.mode_energy(k);
    total += e;
    if (2 * k > u.modes) tail += e;
  }
  return total > 0 ? std::sqrt(tail / total) : 0.0;
}

SolveResult solve_adaptive(const ProblemSpec& p, FourierLoop guess, double lambda, bool free_lambda, int k0,
                           double target, const GalerkinOptions& opts) {
  std::string last_failure;
  for (;;) {
    const Augmentation aug = make_augmentation(guess, free_lambda, k0, target);
    const SolveResult r = newton_fixed(p, guess, lambda, aug, opts);
    const bool ok = r.converged;
    if (!ok) {
      std::ostringstream os;
      os << "Newton did not converge at N=" << guess.modes << " (|F|=" << r.augmented_norm << " after "
         << r.iterations << " iterations)";
      last_failure = os.str();
    }
    const bool can_refine = opts.adaptive && 2 * guess.modes <= opts.max_modes;
    if (ok && (!can_refine || spectral_tail(r.loop) <= opts.tail_tol)) return r;
    if (!can_refine) throw ConvergenceError(last_failure);
    if (ok) {
      guess = r.loop.resized(2 * guess.modes);
      lambda = r.lambda;
    } else {
      guess = guess.resized(2 * guess.modes);
    }
  }
}

}  // namespace

std::vector<double> residual(const FourierLoop& u, double lambda, const ProblemSpec& p, std::size_t nodes) {
  if (u.n != p.n) throw PreconditionError("residual: loop dimension does not match the problem");
  Discretization disc(p, u.modes, nodes);
  disc.set_lambda(lambda);
  return disc.residual(u.coeffs);
}

std::vector<double> jacobian_apply(const FourierLoop& u, double lambda, const ProblemSpec& p, std::span<const double> v,
                                   std::size_t nodes) {
  Discretization disc(p, u.modes, nodes);
  disc.set_lambda(lambda);
  const std::vector<double> x = disc.synth(u.coeffs);
  const std::vector<double> rows = disc.kind() == Kind::user ? disc.hessian_rows(x) : std::vector<double>{};
  return jacobian_apply_at(disc, x, rows, v);
}

std::vector<double> assemble_jacobian(const FourierLoop& u, double lambda, const ProblemSpec& p, JacobianMethod method,
                                      std::size_t nodes) {
  Discretization disc(p, u.modes, nodes);
  disc.set_lambda(lambda);
  const std::size_t d = disc.dim();
  std::vector<double> j(d * d);
  if (method == JacobianMethod::analytic) {
    const Eigen::MatrixXd b = low_mode_block(disc, disc.hessian_rows(disc.synth(u.coeffs)), u.modes);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) j[r * d + c] = b(Eigen::Index(r), Eigen::Index(c));
    return j;
  }
  const std::vector<double> r0 = disc.residual(u.coeffs);
  std::vector<double> x = u.coeffs;
  for (std::size_t c = 0; c < d; ++c) {
    const double h = 1e-7 * (1 + std::abs(x[c]));
    x[c] += h;
    const std::vector<double> r1 = disc.residual(x);
    x[c] = u.coeffs[c];
    for (std::size_t r = 0; r < d; ++r) j[r * d + c] = (r1[r] - r0[r]) / h;
  }
  return j;
}

SolveResult newton_solve_detailed(const FourierLoop& guess, double lambda, const ProblemSpec& p,
                                  const GalerkinOptions& opts) {
  if (guess.n != p.n) throw PreconditionError("newton_solve: guess dimension does not match the problem");
  return solve_adaptive(p, guess, lambda, false, 0, 0.0, opts);
}

FourierLoop newton_solve(const FourierLoop& guess, double lambda, const ProblemSpec& p, const GalerkinOptions& opts) {
  return newton_solve_detailed(guess, lambda, p, opts).loop;
}

SolveResult solve_pinned(const FourierLoop& guess, double lambda_guess, int k0, double target, const ProblemSpec& p,
                         const GalerkinOptions& opts) {
  if (guess.n != p.n) throw PreconditionError("solve_pinned: guess dimension does not match the problem");
  if (k0 < 1 || k0 > guess.modes) throw PreconditionError("solve_pinned: pinned mode outside the truncation");
  if (!(target > 0)) throw PreconditionError("solve_pinned: amplitude must be positive");
  return solve_adaptive(p, guess, lambda_guess, true, k0, target, opts);
}

std::set<int> active_modes(const FourierLoop& u, double rel_threshold) {
  double total = 0;
  for (int k = 1; k <= u.modes; ++k) total += u.mode_energy(k);
  std::set<int> out;
  if (total <= 0) return out;
  for (int k = 1; k <= u.modes; ++k)
    if (u.mode_energy(k) > rel_threshold * total) out.insert(k);
  return out;
}

int minimal_period_divisor(const FourierLoop& u, double rel_threshold) {
  int g = 0;
  for (int k : active_modes(u, rel_threshold)) g = std::gcd(g, k);
  return g;
}

double minimal_period(const FourierLoop& u, double rel_threshold) {
  if (!(rel_threshold > 0 && rel_threshold < 1)) throw PreconditionError("minimal_period: threshold must be in (0,1)");
  const int g = minimal_period_divisor(u, rel_threshold);
  return g == 0 ? 0.0 : 2 * std::numbers::pi / g;
}

std::vector<double> energy_samples(const FourierLoop& u, double lambda, const ProblemSpec& p, std::size_t nodes) {
  Discretization disc(p, u.modes, nodes);
  disc.set_lambda(lambda);
  const std::vector<double> x = disc.synth(u.coeffs);
  const std::vector<double> v = disc.synth(u.derivative().coeffs);
  std::vector<double> e = disc.potential(x);
  for (std::size_t i = 0; i < p.n; ++i)
    for (std::size_t j = 0; j < disc.m(); ++j) e[j] += 0.5 * v[i * disc.m() + j] * v[i * disc.m() + j];
  return e;
}

double energy_variation(const FourierLoop& u, double lambda, const ProblemSpec& p, std::size_t nodes) {
  const std::vector<double> e = energy_samples(u, lambda, p, nodes);
  const double mean = std::accumulate(e.begin(), e.end(), 0.0) / double(e.size());
  double dev = 0;
  for (double v : e) dev = std::max(dev, std::abs(v - mean));
  return dev / std::max(1.0, std::abs(mean));
}

std::vector<Branch> continue_to_infinity(const ProblemSpec& p, const ResonancePoint& r,
                                         const std::vector<double>& amplitudes, const ContinuationOptions& opts) {
  p.validate();
  int k0 = opts.k0;
  if (k0 == 0)
    for (int k : r.frequencies)
      if (k >= 1) {
        k0 = k;
        break;
      }
  if (k0 < 1) throw PreconditionError("continue_to_infinity: resonance has no frequency k >= 1");
  for (std::size_t i = 1; i < amplitudes.size(); ++i)
    if (!(amplitudes[i] > amplitudes[i - 1])) throw PreconditionError("amplitudes must be increasing");

  const SymmetricMatrix a = p.linear_part(r.lambda0);
  const EigenDecomposition ed = jacobi_eigen(a);
  const double k2 = double(k0) * k0;
  std::vector<std::vector<double>> directions;
  for (std::size_t j = 0; j < ed.n; ++j)
    if (std::abs(ed.values[j] - k2) <= 1e-6 * (1 + a.norm())) directions.push_back(ed.vector(j));
  if (directions.empty())
    throw PreconditionError("continue_to_infinity: " + std::to_string(k0) + "^2 is not an eigenvalue of A(lambda0)");

  std::vector<Branch> out;
  for (std::size_t dir = 0; dir < directions.size(); ++dir) {
    Branch br;
    br.k0 = k0;
    br.direction = int(dir);
    br.lambda0 = r.lambda0;
    const int start_modes = std::max(opts.modes, 2 * k0);
    FourierLoop guess;
    double lambda = r.lambda0;
    for (std::size_t ai = 0; ai < amplitudes.size(); ++ai) {
      const double target = amplitudes[ai];
      if (ai == 0) {
        guess = FourierLoop::cosine(p.n, start_modes, k0, directions[dir], target);
      } else {
        const double scale = target / amplitudes[ai - 1];
        for (double& c : guess.coeffs) c *= scale;
      }
      try {
        const SolveResult s = solve_pinned(guess, lambda, k0, target, p, opts);
        BranchPoint bp;
        bp.loop = s.loop;
        bp.lambda = s.lambda;
        bp.amplitude = target;
        bp.sup_amplitude = s.loop.amplitude();
        bp.residual_norm = s.residual_norm;
        bp.active = active_modes(s.loop, opts.period_threshold);
        bp.min_period_divisor = minimal_period_divisor(s.loop, opts.period_threshold);
        bp.energy_variation = p.has_potential() ? energy_variation(s.loop, s.lambda, p) : NAN;
        bp.newton_iterations = s.iterations;
        br.points.push_back(bp);
        guess = s.loop;
        lambda = s.lambda;
      } catch (const Error& e) {
        br.failed = true;
        std::ostringstream os;
        os.precision(17);
        os << "amplitude " << target << ": " << e.what();
        br.failure = os.str();
        break;
      }
    }
    const std::size_t count = br.points.size();
    for (std::size_t i = count / 2; i < count; ++i)
      br.drift_sup_tail = std::max(br.drift_sup_tail, std::abs(br.points[i].lambda - r.lambda0));
    for (std::size_t i = 0; i < count; ++i)
      if (std::abs(br.points[i].lambda - r.lambda0) > opts.drift_window) {
        br.warnings.push_back("lambda drift exceeds the window: branch may diverge from lambda0");
        break;
      }
    for (std::size_t i = 1; i < count; ++i)
      if (std::abs(br.points[i].lambda - r.lambda0) > std::abs(br.points[i - 1].lambda - r.lambda0)) {
        br.warnings.push_back("lambda drift is not monotone along the branch");
        break;
      }
    out.push_back(std::move(br));
  }
  return out;
}

}  // namespace equideg
