#include "kslab/inequalities.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "kslab/diagnostics.hpp"
#include "kslab/rng.hpp"

namespace kslab {

namespace {

template <typename F>
double integrate_pointwise(const Grid& g, F&& f) {
  double sum = 0.0, comp = 0.0;
  const std::size_t np = g.points();
  for (std::size_t i = 0; i < np; ++i) {
    const double y = f(i) - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  double w = g.spacing();
  if (g.dim == 2) w *= g.spacing();
  return w * sum;
}

}  // namespace

Field random_positive_trig(const Grid& g, int degree, double floor_value, std::uint64_t seed) {
  DetRng rng(seed);
  Field f = make_field(g, 1);
  if (g.dim == 1) {
    for (int k = 1; k <= degree; ++k) {
      const double a = rng.uniform(-1.0, 1.0) / (1.0 + k);
      const double b = rng.uniform(-1.0, 1.0) / (1.0 + k);
      for (int i = 0; i < g.n; ++i) {
        const double x = g.coord(i);
        f.values[static_cast<std::size_t>(i)] += a * std::cos(k * x) + b * std::sin(k * x);
      }
    }
  } else {
    // modest 2D corpus: products of low modes along each axis
    for (int k0 = 0; k0 <= degree; ++k0) {
      for (int k1 = (k0 == 0 ? 1 : 0); k1 <= degree; ++k1) {
        const double a = rng.uniform(-1.0, 1.0) / ((1.0 + k0) * (1.0 + k1));
        const double b = rng.uniform(-1.0, 1.0) / ((1.0 + k0) * (1.0 + k1));
        for (int i0 = 0; i0 < g.n; ++i0) {
          const double x = g.coord(i0);
          for (int i1 = 0; i1 < g.n; ++i1) {
            const double y = g.coord(i1);
            f.values[static_cast<std::size_t>(i0) * g.n + i1] +=
                a * std::cos(k0 * x + k1 * y) + b * std::sin(k0 * x - k1 * y);
          }
        }
      }
    }
  }
  const double min_v = reduce(f, Reduce::inf).value;
  for (auto& v : f.values) v += floor_value - min_v;
  return f;
}

std::vector<std::vector<int>> integer_partitions(int m) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  // descending-part recursion keeps each partition sorted and unique
  auto rec = [&](auto&& self, int rest, int max_part) -> void {
    if (rest == 0) {
      out.push_back(cur);
      return;
    }
    for (int p = std::min(rest, max_part); p >= 1; --p) {
      cur.push_back(p);
      self(self, rest - p, p);
      cur.pop_back();
    }
  };
  rec(rec, m, m);
  return out;
}

double gns_I(const Field& g, int l, int m, double gamma, double eps, int comp) {
  if (l < 1 || l > m) throw std::invalid_argument("gns_I needs 1 <= l <= m");
  const std::vector<double> tensor_sq = gradient_tensor_squared(g, l, comp);
  const double p = 2.0 * static_cast<double>(m) / static_cast<double>(l);
  const double wexp = p - 2.0 + gamma;
  const double* gv = g.data(comp);
  return integrate_pointwise(g.grid, [&](std::size_t i) {
    return std::pow(tensor_sq[i], 0.5 * p) / std::pow(gv[i] + eps, wexp);
  });
}

HolderCheck holder_step_check(const Field& g, const std::vector<int>& partition, int m,
                              double gamma, double eps) {
  int sum = 0;
  for (int l : partition) {
    if (l < 1) throw std::invalid_argument("partition parts must be positive");
    sum += l;
  }
  if (sum != m) throw std::invalid_argument("partition must sum to m");
  const int k = static_cast<int>(partition.size());

  std::vector<std::vector<double>> tensor_sq;
  tensor_sq.reserve(partition.size());
  for (int l : partition) tensor_sq.push_back(gradient_tensor_squared(g, l));

  const double wexp = 2.0 * k - 2.0 + gamma;
  const double* gv = g.data(0);
  HolderCheck hc;
  hc.lhs = integrate_pointwise(g.grid, [&](std::size_t i) {
    double prod = 1.0;
    for (const auto& sq : tensor_sq) prod *= sq[i];
    return prod / std::pow(gv[i] + eps, wexp);
  });
  hc.bound = 1.0;
  for (int l : partition)
    hc.bound *= std::pow(gns_I(g, l, m, gamma, eps),
                         static_cast<double>(l) / static_cast<double>(m));
  hc.ratio = hc.bound > 0.0 ? hc.lhs / hc.bound : 0.0;
  return hc;
}

ChainCheck gns_chain_check(const Field& g, int m, double gamma, double eps) {
  ChainCheck cc;
  const double ends = gns_I(g, 1, m, gamma, eps) + gns_I(g, m, m, gamma, eps);
  for (int l = 2; l < m; ++l) {
    cc.rungs.push_back(l);
    const double ratio = gns_I(g, l, m, gamma, eps) / ends;
    cc.ratios.push_back(ratio);
    cc.worst_ratio = std::max(cc.worst_ratio, ratio);
  }
  return cc;
}

M2ChainCheck m2_chain_check(const Field& c, double eps) {
  const Grid& g = c.grid;
  const Field grad = gradient(c);
  const Field lap = laplacian(c);
  const double* cv = c.data(0);

  std::vector<double> grad_sq(g.points(), 0.0);
  for (std::size_t i = 0; i < g.points(); ++i)
    for (int a = 0; a < g.dim; ++a) grad_sq[i] += grad.at(a, i) * grad.at(a, i);

  M2ChainCheck r;
  r.A = integrate_pointwise(g, [&](std::size_t i) {
    const double w = cv[i] + eps;
    return grad_sq[i] * grad_sq[i] / (w * w * w);
  });
  r.B = integrate_pointwise(g, [&](std::size_t i) {
    const double w = cv[i] + eps;
    return grad_sq[i] * lap.values[i] / (w * w);
  });

  // H = (grad c)^T Hess(c) (grad c) / c^2 assembled from second derivatives
  Field dxx = derivative(c, {2, 0});
  std::optional<Field> dyy, dxy;
  if (g.dim == 2) {
    dyy = derivative(c, {0, 2});
    dxy = derivative(c, {1, 1});
  }
  r.H = integrate_pointwise(g, [&](std::size_t i) {
    const double w = cv[i] + eps;
    double hess_quad = grad.at(0, i) * grad.at(0, i) * dxx.values[i];
    if (g.dim == 2) {
      hess_quad += grad.at(1, i) * grad.at(1, i) * dyy->values[i];
      hess_quad += 2.0 * grad.at(0, i) * grad.at(1, i) * dxy->values[i];
    }
    return hess_quad / (w * w);
  });

  r.young_rhs = r.A + 0.25 * integrate_pointwise(g, [&](std::size_t i) {
                        const double w = cv[i] + eps;
                        return lap.values[i] * lap.values[i] / w;
                      });
  if (g.dim == 1) {
    r.cauchy_rhs = 2.25 * integrate_pointwise(g, [&](std::size_t i) {
      const double w = cv[i] + eps;
      return dxx.values[i] * dxx.values[i] / w;
    });
    r.repaired_holds = r.A <= r.cauchy_rhs * (1.0 + 1e-12);
  } else {
    r.cauchy_rhs = std::numeric_limits<double>::quiet_NaN();
    r.repaired_holds = false;
  }
  r.identity_residual = r.B - (2.0 * r.A - 2.0 * r.H);
  r.first_step_holds = 2.0 * r.A <= r.B * (1.0 + 1e-12);
  r.second_step_holds = r.B <= r.young_rhs * (1.0 + 1e-12);
  return r;
}

HardyCheck hardy_variant_check(const Field& g, const std::array<double, 2>& center) {
  const Grid& grid = g.grid;
  const double L = grid.length;
  auto torus_dist_1 = [L](double x, double c) {
    double d = std::fmod(std::abs(x - c), L);
    if (d > 0.5 * L) d = L - d;
    return d;
  };

  Field w = make_field(grid, 1);
  if (grid.dim == 1) {
    for (int i = 0; i < grid.n; ++i) {
      const double d = torus_dist_1(grid.coord(i), center[0]);
      w.values[static_cast<std::size_t>(i)] = d / (1.0 + d);
    }
  } else {
    for (int i0 = 0; i0 < grid.n; ++i0)
      for (int i1 = 0; i1 < grid.n; ++i1) {
        const double d0 = torus_dist_1(grid.coord(i0), center[0]);
        const double d1 = torus_dist_1(grid.coord(i1), center[1]);
        const double d = std::hypot(d0, d1);
        w.values[static_cast<std::size_t>(i0) * grid.n + i1] = d / (1.0 + d);
      }
  }

  const Field grad = gradient(g);
  HardyCheck hc;
  hc.lhs = l2_norm(g);
  const double wg = std::sqrt(integrate_pointwise(grid, [&](std::size_t i) {
    return w.values[i] * w.values[i] * g.values[i] * g.values[i];
  }));
  const double wgrad = std::sqrt(integrate_pointwise(grid, [&](std::size_t i) {
    double g2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) g2 += grad.at(a, i) * grad.at(a, i);
    return w.values[i] * w.values[i] * g2;
  }));
  hc.rhs = wg + wgrad;
  hc.ratio = hc.rhs > 0.0 ? hc.lhs / hc.rhs : std::numeric_limits<double>::infinity();
  return hc;
}

LinftyCheck linfty_weighted_check(const Field& g, int k, double gamma, double eps) {
  const Grid& grid = g.grid;
  const std::vector<double> grad_sq = gradient_tensor_squared(g, 1);
  const double* gv = g.data(0);

  LinftyCheck lc;
  for (std::size_t i = 0; i < grid.points(); ++i) {
    const double num = std::pow(grad_sq[i], 0.5 * k);
    const double den = std::pow(gv[i] + eps, static_cast<double>(k) - 1.0 + 0.5 * gamma);
    lc.lhs = std::max(lc.lhs, num / den);
  }

  const int m_top = grid.dim / 2 + 1 + k;
  for (int m = 1; m <= m_top; ++m) {
    const std::vector<double> high_sq = m == 1 ? grad_sq : gradient_tensor_squared(g, m);
    lc.rhs += integrate_pointwise(grid, [&](std::size_t i) {
      return high_sq[i] / std::pow(gv[i] + eps, gamma);
    });
    lc.rhs += integrate_pointwise(grid, [&](std::size_t i) {
      return std::pow(grad_sq[i], static_cast<double>(m)) /
             std::pow(gv[i] + eps, 2.0 * m - 2.0 + gamma);
    });
  }
  lc.ratio = lc.rhs > 0.0 ? lc.lhs / lc.rhs : std::numeric_limits<double>::infinity();
  return lc;
}

ConstantTable ConstantTable::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open constant table: " + path);
  std::string header;
  std::getline(in, header);
  if (header != "kslab-constants v1")
    throw std::runtime_error("unrecognized constant table header: " + header);
  ConstantTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    const std::size_t pos = line.find_last_of(' ');
    if (pos == std::string::npos) throw std::runtime_error("malformed table line: " + line);
    t.entries_[line.substr(0, pos)] = std::stod(line.substr(pos + 1));
  }
  return t;
}

void ConstantTable::save(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write constant table: " + path);
  out << "kslab-constants v1\n";
  char buf[64];
  for (const auto& [key, value] : entries_) {
    std::snprintf(buf, sizeof buf, "%.17g", value);
    out << key << ' ' << buf << '\n';
  }
}

std::optional<double> ConstantTable::get(const std::string& key) const {
  const auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ConstantTable::set(const std::string& key, double value) { entries_[key] = value; }

void ConstantTable::record_max(const std::string& key, double value) {
  const auto it = entries_.find(key);
  if (it == entries_.end() || it->second < value) entries_[key] = value;
}

std::string chain_key(int m, double gamma, int dim, int l) {
  std::ostringstream os;
  os << "chain m=" << m << " gamma=" << gamma << " d=" << dim << " l=" << l;
  return os.str();
}

std::string hardy_key(int dim) {
  std::ostringstream os;
  os << "hardy d=" << dim;
  return os.str();
}

std::string linfty_key(int k, double gamma, int dim) {
  std::ostringstream os;
  os << "linfty k=" << k << " gamma=" << gamma << " d=" << dim;
  return os.str();
}

int survey_constants(ConstantTable& table, int dim, int n, int samples, std::uint64_t seed) {
  const Grid g = make_grid(dim, n);
  const int degree = dim == 1 ? std::min(n / 4, 24) : 4;
  for (int s = 0; s < samples; ++s) {
    const std::uint64_t field_seed = seed + static_cast<std::uint64_t>(s);
    const Field f = random_positive_trig(g, degree, 0.2, field_seed);
    for (const double gamma : {0.5, 1.0}) {
      for (const int m : {3, 4, 5}) {
        const ChainCheck cc = gns_chain_check(f, m, gamma, 0.0);
        for (std::size_t i = 0; i < cc.rungs.size(); ++i)
          table.record_max(chain_key(m, gamma, dim, cc.rungs[i]), cc.ratios[i]);
      }
      const LinftyCheck lc = linfty_weighted_check(f, 1, gamma, 0.0);
      table.record_max(linfty_key(1, gamma, dim), lc.ratio);
    }
    const HardyCheck hc = hardy_variant_check(f, {0.0, 0.0});
    table.record_max(hardy_key(dim), hc.ratio);
  }
  return samples;
}

}  // namespace kslab
