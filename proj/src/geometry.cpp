#include "tfa/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "json.hpp"

namespace tfa {

bool tree_contains(const Tree& T, const Point3& p) {
  if (T.s <= 0.0 || p.t <= 0.0) return false;
  const double sigma = p.t / T.s;
  if (sigma >= 1.0) return false;
  const double zeta = (p.y - T.x) / T.s;
  if (sigma >= 1.0 - std::abs(zeta)) return false;
  return T.theta.contains(p.t * (p.eta - T.xi));
}

bool strip_contains(const Strip& D, const Point3& p) {
  if (D.s <= 0.0 || p.t <= 0.0) return false;
  return p.t < (D.s - std::abs(p.y - D.x)) / D.beta;
}

ModelPoint model_coords(const Tree& T, const Point3& p) {
  if (T.s <= 0.0) throw parameter_error("model_coords: tree scale must be positive");
  if (p.t <= 0.0) throw precondition_error("model_coords: t must be positive");
  ModelPoint m;
  m.sigma = p.t / T.s;
  m.zeta = (p.y - T.x) / T.s;
  m.theta = p.t * (p.eta - T.xi);
  return m;
}

Point3 from_model(const Tree& T, const ModelPoint& m) {
  if (T.s <= 0.0) throw parameter_error("from_model: tree scale must be positive");
  if (m.sigma <= 0.0) throw precondition_error("from_model: sigma must be positive");
  Point3 p;
  p.t = T.s * m.sigma;
  p.y = T.x + T.s * m.zeta;
  p.eta = T.xi + m.theta / p.t;
  return p;
}

bool in_model_tree(const Tree& T, const ModelPoint& m) {
  if (m.sigma <= 0.0 || m.sigma >= 1.0) return false;
  if (std::abs(m.zeta) >= 1.0) return false;
  if (m.sigma >= 1.0 - std::abs(m.zeta)) return false;
  return T.theta.contains(m.theta);
}

bool Region::contains(const Point3& p) const {
  switch (kind) {
    case Kind::tree:
      return tree_contains(tree, p);
    case Kind::strip:
      return strip_contains(strip, p);
    case Kind::unite:
      return a->contains(p) || b->contains(p);
    case Kind::intersect:
      return a->contains(p) && b->contains(p);
    case Kind::subtract:
      return a->contains(p) && !b->contains(p);
  }
  return false;
}

Region region_of(const Tree& T) {
  Region r;
  r.kind = Region::Kind::tree;
  r.tree = T;
  return r;
}

Region region_of(const Strip& D) {
  Region r;
  r.kind = Region::Kind::strip;
  r.strip = D;
  return r;
}

static Region combine(Region a, Region b, Region::Kind k) {
  Region r;
  r.kind = k;
  r.a = std::make_shared<Region>(std::move(a));
  r.b = std::make_shared<Region>(std::move(b));
  return r;
}

Region region_union(Region a, Region b) { return combine(std::move(a), std::move(b), Region::Kind::unite); }
Region region_intersect(Region a, Region b) { return combine(std::move(a), std::move(b), Region::Kind::intersect); }
Region region_subtract(Region a, Region b) { return combine(std::move(a), std::move(b), Region::Kind::subtract); }

Region region_of(const Forest& W) {
  if (W.trees.empty()) throw parameter_error("region_of: empty forest");
  Region r = region_of(W.trees.front());
  for (std::size_t i = 1; i < W.trees.size(); ++i) r = region_union(std::move(r), region_of(W.trees[i]));
  return r;
}

Region region_of(const StripUnion& V) {
  if (V.strips.empty()) throw parameter_error("region_of: empty strip union");
  Region r = region_of(V.strips.front());
  for (std::size_t i = 1; i < V.strips.size(); ++i) r = region_union(std::move(r), region_of(V.strips[i]));
  return r;
}

int CountingFunction::at(double z) const {
  if (breakpoints.empty()) return 0;
  auto it = std::upper_bound(breakpoints.begin(), breakpoints.end(), z);
  if (it == breakpoints.begin() || it == breakpoints.end()) return 0;
  return counts[static_cast<std::size_t>(it - breakpoints.begin()) - 1];
}

static CountingFunction sweep(const std::vector<std::pair<double, double>>& intervals) {
  CountingFunction N;
  std::map<double, int> delta;
  for (const auto& [lo, hi] : intervals) {
    if (hi <= lo) continue;
    delta[lo] += 1;
    delta[hi] -= 1;
  }
  int running = 0;
  for (const auto& [z, d] : delta) {
    N.breakpoints.push_back(z);
    running += d;
    N.counts.push_back(running);
  }
  if (!N.counts.empty()) N.counts.pop_back();  // count after the last event is 0
  for (std::size_t i = 0; i < N.counts.size(); ++i) {
    const double len = N.breakpoints[i + 1] - N.breakpoints[i];
    N.l1 += static_cast<double>(N.counts[i]) * len;
    N.linf = std::max(N.linf, N.counts[i]);
  }
  return N;
}

CountingFunction counting_function(const Forest& W) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(W.trees.size());
  for (const auto& T : W.trees) iv.emplace_back(T.x - T.s, T.x + T.s);
  return sweep(iv);
}

CountingFunction counting_function(const StripUnion& V) {
  std::vector<std::pair<double, double>> iv;
  iv.reserve(V.strips.size());
  for (const auto& D : V.strips) iv.emplace_back(D.x - D.s, D.x + D.s);
  return sweep(iv);
}

namespace {

struct BoundaryMeta {
  std::set<double> betas;
  double theta_minus = -inf;  // loosest valid bounds across leaves
  double theta_plus = inf;
  bool has_tree = false;
};

double tree_boundary(const Tree& T, double eta, double y) {
  const double spatial = std::max(T.s - std::abs(y - T.x), 0.0);
  double freq = inf;
  if (eta > T.xi) {
    freq = T.theta.hi > 0.0 ? T.theta.hi / (eta - T.xi) : 0.0;
  } else if (eta < T.xi) {
    freq = T.theta.lo < 0.0 ? T.theta.lo / (eta - T.xi) : 0.0;
  }
  return std::min(spatial, freq);
}

double strip_boundary(const Strip& D, double eta, double y) {
  (void)eta;
  return std::max((D.s - std::abs(y - D.x)) / D.beta, 0.0);
}

std::function<double(double, double)> build_boundary(const Region& E, BoundaryMeta& meta) {
  switch (E.kind) {
    case Region::Kind::tree: {
      if (!E.tree.theta.contains(0.0))
        throw precondition_error("boundary_of: tree band must contain 0 (region not downward-closed)");
      meta.has_tree = true;
      meta.theta_plus = std::min(meta.theta_plus, E.tree.theta.hi);
      meta.theta_minus = std::max(meta.theta_minus, E.tree.theta.lo);
      Tree T = E.tree;
      return [T](double eta, double y) { return tree_boundary(T, eta, y); };
    }
    case Region::Kind::strip: {
      meta.betas.insert(E.strip.beta);
      Strip D = E.strip;
      return [D](double eta, double y) { return strip_boundary(D, eta, y); };
    }
    case Region::Kind::unite: {
      auto fa = build_boundary(*E.a, meta);
      auto fb = build_boundary(*E.b, meta);
      return [fa, fb](double eta, double y) { return std::max(fa(eta, y), fb(eta, y)); };
    }
    case Region::Kind::intersect: {
      auto fa = build_boundary(*E.a, meta);
      auto fb = build_boundary(*E.b, meta);
      return [fa, fb](double eta, double y) { return std::min(fa(eta, y), fb(eta, y)); };
    }
    case Region::Kind::subtract:
      throw parameter_error("boundary_of: subtraction is not downward-closed");
  }
  throw parameter_error("boundary_of: unknown region node");
}

}  // namespace

BoundaryFn boundary_of(const Region& E) {
  BoundaryMeta meta;
  BoundaryFn out;
  out.b = build_boundary(E, meta);
  if (meta.betas.size() > 1)
    throw parameter_error("boundary_of: strips with mixed beta in one region");
  out.beta = meta.betas.empty() ? 1.0 : *meta.betas.begin();
  out.theta_minus = meta.theta_minus;
  out.theta_plus = meta.theta_plus;
  return out;
}

CertificateReport check_certificates(const BoundaryFn& bf,
                                     const std::vector<double>& eta_nodes,
                                     const std::vector<double>& y_nodes) {
  CertificateReport rep;
  const double inv_beta = 1.0 / bf.beta;
  // cache samples
  std::vector<std::vector<double>> v(eta_nodes.size(), std::vector<double>(y_nodes.size()));
  for (std::size_t i = 0; i < eta_nodes.size(); ++i)
    for (std::size_t j = 0; j < y_nodes.size(); ++j) v[i][j] = bf.b(eta_nodes[i], y_nodes[j]);

  // spatial certificate: |b(eta, y2) - b(eta, y1)| <= beta^-1 |y2 - y1|
  for (std::size_t i = 0; i < eta_nodes.size(); ++i) {
    for (std::size_t j = 0; j + 1 < y_nodes.size(); ++j) {
      const double b1 = v[i][j], b2 = v[i][j + 1];
      if (std::isinf(b1) && std::isinf(b2)) continue;
      const double dy = std::abs(y_nodes[j + 1] - y_nodes[j]);
      const double margin = std::abs(b2 - b1) - inv_beta * dy;
      const double tol = 1e-12 * (1.0 + std::abs(b1) + std::abs(b2) + inv_beta * dy);
      rep.worst_y = std::max(rep.worst_y, margin);
      if (!(margin <= tol)) rep.y_ok = false;
    }
  }

  // frequency certificate:
  //   -M^2 / theta_plus * d_eta <= b(eta2) - b(eta1) <= M^2 / (-theta_minus) * d_eta
  // with M the larger of the two endpoint values
  for (std::size_t j = 0; j < y_nodes.size(); ++j) {
    for (std::size_t i = 0; i + 1 < eta_nodes.size(); ++i) {
      const double b1 = v[i][j], b2 = v[i + 1][j];
      if (std::isinf(b1) || std::isinf(b2)) continue;  // infinite M: bound is vacuous
      const double de = eta_nodes[i + 1] - eta_nodes[i];
      const double M = std::max(b1, b2);
      const double lower = std::isinf(bf.theta_plus) ? -inf : -M * M / bf.theta_plus * de;
      const double upper = std::isinf(bf.theta_minus) ? inf : M * M / (-bf.theta_minus) * de;
      const double d = b2 - b1;
      const double scale = 1.0 + std::abs(b1) + std::abs(b2) + M * M * de;
      const double tol = 1e-12 * scale;
      const double margin = std::max(lower - d, d - upper);
      if (std::isfinite(margin)) rep.worst_eta = std::max(rep.worst_eta, margin);
      if (!(d >= lower - tol) || !(d <= upper + tol)) rep.eta_ok = false;
    }
  }
  return rep;
}

ModelBoundary pullback_boundary(const Tree& T, const BoundaryFn& bf) {
  if (T.s <= 0.0) throw parameter_error("pullback_boundary: tree scale must be positive");
  const Tree Tc = T;
  auto b = bf.b;
  auto bstar = [Tc, b](double theta, double zeta) -> double {
    const double y = Tc.x + Tc.s * zeta;
    auto g = [&](double sigma) {
      const double t = Tc.s * sigma;
      return t - b(Tc.xi + theta / t, y);
    };
    // scan a geometric grid for sign changes; the regularity certificates
    // guarantee a single crossing
    const int n = 512;
    const double sig_min = 0x1p-40;
    double prev_sig = sig_min;
    double prev_g = g(prev_sig);
    if (prev_g >= 0.0) return 0.0;  // boundary below the resolvable range
    int crossings = 0;
    double lo = 0.0, hi = 0.0;
    for (int k = 1; k <= n; ++k) {
      const double sig = sig_min * std::pow(1.0 / sig_min, static_cast<double>(k) / n);
      const double gv = g(sig);
      if (prev_g < 0.0 && gv >= 0.0) {
        ++crossings;
        lo = prev_sig;
        hi = sig;
      }
      prev_sig = sig;
      prev_g = gv;
    }
    if (crossings > 1)
      throw precondition_error("pullback_boundary: multiple crossings, boundary not admissible");
    if (crossings == 0) return 1.0;  // region reaches past the tree top
    for (int it = 0; it < 80; ++it) {
      const double mid = 0.5 * (lo + hi);
      (g(mid) < 0.0 ? lo : hi) = mid;
    }
    return std::min(0.5 * (lo + hi), 1.0);
  };
  ModelBoundary out;
  out.bstar = bstar;
  return out;
}

namespace {

nlohmann::json region_json(const Region& E) {
  nlohmann::json j;
  switch (E.kind) {
    case Region::Kind::tree:
      j["kind"] = "tree";
      j["xi"] = E.tree.xi;
      j["x"] = E.tree.x;
      j["s"] = E.tree.s;
      j["theta"] = {E.tree.theta.lo, E.tree.theta.hi};
      break;
    case Region::Kind::strip:
      j["kind"] = "strip";
      j["x"] = E.strip.x;
      j["s"] = E.strip.s;
      j["beta"] = E.strip.beta;
      break;
    case Region::Kind::unite:
    case Region::Kind::intersect:
    case Region::Kind::subtract:
      j["kind"] = E.kind == Region::Kind::unite        ? "union"
                  : E.kind == Region::Kind::intersect  ? "intersect"
                                                       : "subtract";
      j["a"] = region_json(*E.a);
      j["b"] = region_json(*E.b);
      break;
  }
  return j;
}

Region region_parse(const nlohmann::json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "tree") {
    Tree T;
    T.xi = j.at("xi").get<double>();
    T.x = j.at("x").get<double>();
    T.s = j.at("s").get<double>();
    T.theta.lo = j.at("theta").at(0).get<double>();
    T.theta.hi = j.at("theta").at(1).get<double>();
    if (T.s <= 0.0) throw parameter_error("region_from_json: tree scale must be positive");
    return region_of(T);
  }
  if (kind == "strip") {
    Strip D;
    D.x = j.at("x").get<double>();
    D.s = j.at("s").get<double>();
    D.beta = j.at("beta").get<double>();
    if (D.s <= 0.0 || D.beta <= 0.0 || D.beta > 1.0)
      throw parameter_error("region_from_json: strip needs s > 0 and beta in (0, 1]");
    return region_of(D);
  }
  if (kind == "union" || kind == "intersect" || kind == "subtract") {
    Region a = region_parse(j.at("a"));
    Region b = region_parse(j.at("b"));
    if (kind == "union") return region_union(std::move(a), std::move(b));
    if (kind == "intersect") return region_intersect(std::move(a), std::move(b));
    return region_subtract(std::move(a), std::move(b));
  }
  throw parameter_error("region_from_json: unknown node kind '" + kind + "'");
}

}  // namespace

std::string region_to_json(const Region& E) { return region_json(E).dump(); }

Region region_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw parameter_error(std::string("region_from_json: ") + e.what());
  }
  try {
    return region_parse(j);
  } catch (const nlohmann::json::exception& e) {
    throw parameter_error(std::string("region_from_json: ") + e.what());
  }
}

void write_boundary_csv(const std::string& path, const BoundaryFn& bf,
                        const std::vector<double>& eta_nodes,
                        const std::vector<double>& y_nodes) {
  std::ofstream out(path);
  if (!out) throw parameter_error("write_boundary_csv: cannot open " + path);
  out.precision(17);
  out << "eta,y,b\n";
  for (double eta : eta_nodes)
    for (double y : y_nodes) {
      const double b = bf.b(eta, y);
      out << eta << ',' << y << ',';
      if (std::isinf(b))
        out << "inf";
      else
        out << b;
      out << '\n';
    }
}

}  // namespace tfa
