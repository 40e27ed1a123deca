#include "equideg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "equideg/error.hpp"
#include "equideg/parallel.hpp"

namespace equideg {

std::size_t SpectralData::dimension() const {
  std::size_t n = 0;
  for (const auto& e : eigenvalues) n += static_cast<std::size_t>(e.multiplicity);
  return n;
}

int SpectralData::multiplicity_of(double alpha) const {
  for (const auto& e : eigenvalues)
    if (std::abs(e.value - alpha) <= tol) return e.multiplicity;
  return 0;
}

std::vector<Eigenvalue> SpectralData::positive_part() const {
  std::vector<Eigenvalue> out;
  for (const auto& e : eigenvalues)
    if (e.value > tol) out.push_back(e);
  return out;
}

namespace {

SpectralData cluster(const std::vector<double>& sorted, double abs_tol) {
  SpectralData s;
  s.tol = abs_tol;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i + 1;
    while (j < sorted.size() && sorted[j] - sorted[j - 1] <= abs_tol) ++j;
    const double mean = std::accumulate(sorted.begin() + i, sorted.begin() + j, 0.0) / double(j - i);
    s.eigenvalues.push_back({mean, int(j - i)});
    i = j;
  }
  return s;
}

}  // namespace

SpectralData eigen_sym(const SymmetricMatrix& a, double tol) {
  if (!(tol > 0)) throw PreconditionError("eigen_sym: tol must be positive");
  const EigenDecomposition ed = jacobi_eigen(a);
  const std::size_t n = a.size();
  const double abs_tol = tol * (1.0 + a.norm());
  std::vector<double> av(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::vector<double> v = ed.vector(j);
    a.apply(v, av);
    double r = 0;
    for (std::size_t i = 0; i < n; ++i) r += (av[i] - ed.values[j] * v[i]) * (av[i] - ed.values[j] * v[i]);
    if (std::sqrt(r) > abs_tol) {
      std::ostringstream os;
      os << "eigen_sym: eigenpair " << j << " residual " << std::sqrt(r) << " exceeds " << abs_tol;
      throw ConvergenceError(os.str());
    }
  }
  return cluster(ed.values, abs_tol);
}

int morse_index(const SpectralData& s, bool strict) {
  int m = 0;
  for (const auto& e : s.eigenvalues) {
    if (strict && std::abs(e.value) <= s.tol)
      throw DegenerateSpectrumError("morse_index: eigenvalue within tolerance of zero", e.value);
    if (e.value < -s.tol) m += e.multiplicity;
  }
  return m;
}

int j_k(const SpectralData& s, int k) {
  if (k < 0) throw PreconditionError("j_k: negative frequency");
  const double k2 = double(k) * double(k);
  int count = 0;
  for (const auto& e : s.eigenvalues) {
    if (std::abs(e.value - k2) <= s.tol) {
      std::ostringstream os;
      os << "j_" << k << ": eigenvalue " << e.value << " is resonant with k^2 = " << k2;
      throw DegenerateSpectrumError(os.str(), e.value);
    }
    if (e.value > k2) count += e.multiplicity;
  }
  return count;
}

int j_k(const SymmetricMatrix& a, int k, double tol) { return j_k(eigen_sym(a, tol), k); }

std::set<int> resonant_frequencies(const SpectralData& s) {
  std::set<int> out;
  for (const auto& e : s.eigenvalues) {
    if (e.value < -s.tol) continue;
    const double k = std::round(std::sqrt(std::max(e.value, 0.0)));
    if (std::abs(e.value - k * k) <= s.tol) out.insert(int(k));
  }
  return out;
}

std::set<int> k_set(const SpectralData& s_minus, const SpectralData& s_plus) {
  std::set<int> out;
  for (const SpectralData* s : {&s_minus, &s_plus}) {
    std::set<int> nonzero;
    for (int k : resonant_frequencies(*s))
      if (k >= 1) nonzero.insert(k);
    const std::set<int> closed = gcd_closure(nonzero);
    out.insert(closed.begin(), closed.end());
  }
  return out;
}

// ---------------------------------------------------------------------------

double evaluate(const Polynomial& p, double x) {
  double sum = 0;
  for (const auto& t : p) {
    double xp = 1;
    for (int i = 0; i < t.power; ++i) xp *= x;
    sum += t.coefficient * xp;
  }
  return sum;
}

double derivative(const Polynomial& p, double x) {
  double sum = 0;
  for (const auto& t : p) {
    if (t.power == 0) continue;
    double xp = 1;
    for (int i = 1; i < t.power; ++i) xp *= x;
    sum += t.coefficient * t.power * xp;
  }
  return sum;
}

MatrixFamily MatrixFamily::constant(const SymmetricMatrix& a) {
  MatrixFamily f(a.size());
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = i; j < a.size(); ++j)
      if (a(i, j) != 0.0) f.set_entry(i, j, {{0, a(i, j)}});
  return f;
}

void MatrixFamily::set_entry(std::size_t i, std::size_t j, Polynomial p) {
  if (i >= n_ || j >= n_) throw PreconditionError("MatrixFamily: entry index out of range");
  for (const auto& t : p)
    if (t.power < 0) throw PreconditionError("MatrixFamily: negative power");
  if (i > j) std::swap(i, j);
  // Canonical form: ascending powers, merged, no zero terms.
  std::map<int, double> merged;
  for (const auto& t : p) merged[t.power] += t.coefficient;
  p.clear();
  for (const auto& [power, c] : merged)
    if (c != 0.0) p.push_back({power, c});
  entries_[{i, j}] = std::move(p);
}

const Polynomial* MatrixFamily::entry(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  auto it = entries_.find({i, j});
  return it == entries_.end() ? nullptr : &it->second;
}

SymmetricMatrix MatrixFamily::at(double lambda) const {
  SymmetricMatrix m(n_);
  for (const auto& [ij, p] : entries_) m.set(ij.first, ij.second, evaluate(p, lambda));
  return m;
}

SymmetricMatrix MatrixFamily::derivative_at(double lambda) const {
  SymmetricMatrix m(n_);
  for (const auto& [ij, p] : entries_) m.set(ij.first, ij.second, derivative(p, lambda));
  return m;
}

MatrixFamily MatrixFamily::times_power(int p) const {
  if (p < 0) throw PreconditionError("MatrixFamily::times_power: negative power");
  MatrixFamily out = *this;
  for (auto& [ij, poly] : out.entries_)
    for (auto& t : poly) t.power += p;
  return out;
}

bool MatrixFamily::is_constant() const {
  for (const auto& [ij, p] : entries_)
    for (const auto& t : p)
      if (t.power != 0 && t.coefficient != 0.0) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Resonance scan

namespace {

struct Node {
  double lambda = 0;
  std::vector<double> eig;  // ascending, raw
  double scale = 1;         // 1 + ||A||
};

Node sample(const MatrixFamily& f, double lambda) {
  const SymmetricMatrix a = f.at(lambda);
  return {lambda, jacobi_eigen(a).values, 1.0 + a.norm()};
}

double distance_to(const std::vector<double>& eig, double target) {
  double d = std::numeric_limits<double>::infinity();
  for (double v : eig) d = std::min(d, std::abs(v - target));
  return d;
}

int count_above(const std::vector<double>& eig, double target) {
  return int(std::count_if(eig.begin(), eig.end(), [&](double v) { return v > target; }));
}

double shifted_det(const MatrixFamily& f, double lambda, double k2) { return determinant(f.at(lambda).shifted(-k2)); }

double bisect_det(const MatrixFamily& f, double a, double b, double k2) {
  double fa = shifted_det(f, a, k2);
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = shifted_det(f, m, k2);
    if (fm == 0.0) return m;
    if ((fm < 0) == (fa < 0)) {
      a = m;
      fa = fm;
    } else {
      b = m;
    }
  }
  return 0.5 * (a + b);
}

// Minimizes dist(sigma(A(lambda)), k^2) on [a, b] by golden section.
double golden_min(const MatrixFamily& f, double a, double b, double k2) {
  const double g = 0.5 * (std::sqrt(5.0) - 1.0);
  auto d = [&](double x) { return distance_to(jacobi_eigen(f.at(x)).values, k2); };
  double c = b - g * (b - a), e = a + g * (b - a);
  double dc = d(c), de = d(e);
  for (int it = 0; it < 200 && (b - a) > 4 * std::numeric_limits<double>::epsilon() * (1 + std::abs(a)); ++it) {
    if (dc <= de) {
      b = e;
      e = c;
      de = dc;
      c = b - g * (b - a);
      dc = d(c);
    } else {
      a = c;
      c = e;
      dc = de;
      e = a + g * (b - a);
      de = d(e);
    }
  }
  return dc <= de ? c : e;
}

struct Root {
  double lambda;
  int k;
  bool tangential;
  bool refined;  // located by bisection of a sign change
};

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

ResonancePoint resonance_at(const MatrixFamily& family, double lambda, double tol) {
  const SymmetricMatrix a = family.at(lambda);
  const SpectralData s = eigen_sym(a, tol);
  ResonancePoint p;
  p.lambda0 = lambda;
  p.frequencies = resonant_frequencies(s);
  p.kernel_rep = kernel_rep_at_infinity(a, tol);
  p.det_nonzero = p.frequencies.count(0) == 0;
  return p;
}

ScanResult scan_resonances(const MatrixFamily& family, double lo, double hi, const ScanOptions& opts) {
  if (!(lo < hi)) throw PreconditionError("scan_resonances: need lo < hi");
  if (opts.grid < 2) throw PreconditionError("scan_resonances: grid must be at least 2");
  if (!(opts.tol > 0)) throw PreconditionError("scan_resonances: tol must be positive");

  const int grid = opts.grid;
  const double h = (hi - lo) / grid;
  std::vector<Node> nodes(std::size_t(grid) + 1);
  parallel_for(nodes.size(), [&](std::size_t i) {
    const double lambda = i == std::size_t(grid) ? hi : lo + h * double(i);
    nodes[i] = sample(family, lambda);
  });

  double max_eig = 0;
  for (const auto& nd : nodes)
    if (!nd.eig.empty()) max_eig = std::max(max_eig, nd.eig.back());
  ScanResult out;
  out.k_max = int(std::ceil(std::sqrt(max_eig))) + 1;

  const double merge_tol = std::max(1e-7, 1e3 * opts.tol);
  std::vector<Root> roots;

  for (int k = 0; k <= out.k_max; ++k) {
    const double k2 = double(k) * k;
    std::vector<double> d(nodes.size());
    std::vector<char> zero(nodes.size());
    std::vector<double> det(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      d[i] = distance_to(nodes[i].eig, k2);
      zero[i] = d[i] <= opts.tol * nodes[i].scale;
      det[i] = zero[i] ? 0.0 : shifted_det(family, nodes[i].lambda, k2);
    }

    std::vector<Root> found;
    std::vector<char> crossing_cell(nodes.size(), 0);  // cell i = [i, i+1]
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (zero[i]) {
        if (i + 1 < nodes.size() && zero[i + 1]) {
          const double mid = 0.5 * (nodes[i].lambda + nodes[i + 1].lambda);
          const Node m = sample(family, mid);
          if (distance_to(m.eig, k2) <= opts.tol * m.scale)
            throw TangencyError("scan_resonances: det(A(lambda) - " + std::to_string(k) +
                                "^2 Id) vanishes on [" + fmt(nodes[i].lambda) + ", " + fmt(nodes[i + 1].lambda) +
                                "]; resonance is not isolated");
        }
        found.push_back({nodes[i].lambda, k, false, false});
        continue;
      }
      if (i + 1 < nodes.size() && !zero[i + 1] && (det[i] < 0) != (det[i + 1] < 0)) {
        crossing_cell[i] = 1;
        found.push_back({bisect_det(family, nodes[i].lambda, nodes[i + 1].lambda, k2), k, false, true});
      }
    }
    // Touches between nodes: local minima of the distance to k^2.
    for (std::size_t i = 1; i + 1 < nodes.size(); ++i) {
      if (zero[i - 1] || zero[i] || zero[i + 1]) continue;
      if (crossing_cell[i - 1] || crossing_cell[i]) continue;
      if (!(d[i] <= d[i - 1] && d[i] <= d[i + 1])) continue;
      const double x = golden_min(family, nodes[i - 1].lambda, nodes[i + 1].lambda, k2);
      const Node m = sample(family, x);
      if (distance_to(m.eig, k2) <= opts.tol * m.scale) found.push_back({x, k, false, false});
    }

    // Classify by the j_k jump between the nearest nonresonant nodes.
    for (auto& r : found) {
      const double width = merge_tol * (1 + std::abs(r.lambda));
      const bool at_lo = std::abs(r.lambda - lo) <= width;
      const bool at_hi = std::abs(r.lambda - hi) <= width;
      if (at_lo || at_hi) {
        roots.push_back(r);
        continue;
      }
      std::ptrdiff_t left = -1, right = -1;
      for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (zero[i]) continue;
        if (nodes[i].lambda < r.lambda - width) left = std::ptrdiff_t(i);
        if (nodes[i].lambda > r.lambda + width && right < 0) right = std::ptrdiff_t(i);
      }
      if (left >= 0 && right >= 0)
        r.tangential = count_above(nodes[std::size_t(left)].eig, k2) == count_above(nodes[std::size_t(right)].eig, k2);
      roots.push_back(r);
    }
  }

  std::sort(roots.begin(), roots.end(), [](const Root& a, const Root& b) {
    return a.lambda != b.lambda ? a.lambda < b.lambda : a.k < b.k;
  });

  // Merge coincident roots across (and within) frequencies.
  std::vector<std::vector<Root>> groups;
  for (const auto& r : roots) {
    if (!groups.empty()) {
      const double ref = groups.back().front().lambda;
      if (std::abs(r.lambda - ref) <= merge_tol * (1 + std::abs(ref))) {
        groups.back().push_back(r);
        continue;
      }
    }
    groups.push_back({r});
  }

  const double loose = std::max(1e-6, 1e3 * opts.tol);
  for (const auto& g : groups) {
    // Prefer a bisection-refined location; otherwise the first found.
    double lambda = g.front().lambda;
    for (const auto& r : g)
      if (r.refined) {
        lambda = r.lambda;
        break;
      }
    const double width = merge_tol * (1 + std::abs(lambda));
    if (std::abs(lambda - lo) <= width) lambda = lo;
    if (std::abs(lambda - hi) <= width) lambda = hi;

    const SymmetricMatrix a = family.at(lambda);
    const std::vector<double> eig = jacobi_eigen(a).values;
    const double scale = 1 + a.norm();
    ResonancePoint p;
    p.lambda0 = lambda;
    bool all_tangential = true;
    std::vector<RepPart> parts;
    for (const auto& r : g) {
      if (!p.frequencies.insert(r.k).second) continue;
      const double k2 = double(r.k) * r.k;
      const int mult = int(std::count_if(eig.begin(), eig.end(), [&](double v) { return std::abs(v - k2) <= loose * scale; }));
      parts.push_back({std::max(mult, 1), r.k});
    }
    for (const auto& r : g) all_tangential = all_tangential && r.tangential;
    p.kernel_rep = RepDecomposition(std::move(parts));
    p.det_nonzero = p.frequencies.count(0) == 0;

    if (lambda == lo) {
      out.at_lower.push_back(std::move(p));
      continue;
    }
    if (lambda == hi) {
      out.at_upper.push_back(std::move(p));
      continue;
    }
    p.tangential = all_tangential;
    if (p.tangential) {
      std::ostringstream os;
      os << "tangential resonance at lambda=" << fmt(lambda) << ": spectrum touches k^2 without crossing";
      out.warnings.push_back(os.str());
    }
    out.interior.push_back(std::move(p));
  }

  // Resolution warning: two distinct interior resonances in one grid cell.
  for (std::size_t i = 1; i < out.interior.size(); ++i) {
    const double a = out.interior[i - 1].lambda0, b = out.interior[i].lambda0;
    if (std::floor((a - lo) / h) == std::floor((b - lo) / h)) {
      out.warnings.push_back("resonances at lambda=" + fmt(a) + " and lambda=" + fmt(b) +
                             " share one grid cell; increase grid to resolve");
    }
  }
  return out;
}

}  // namespace equideg
