#include "tfa/outer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <numeric>
#include <sstream>

#include "json.hpp"

namespace tfa {

void validate(const OuterSpec& spec) {
  if (!(spec.aggregation == 1.0 || std::isinf(spec.aggregation)))
    throw parameter_error("OuterSpec: aggregation must be 1 or inf");
  if (!(spec.beta > 0.0 && spec.beta <= 1.0))
    throw parameter_error("OuterSpec: beta must lie in (0, 1]");
  if (!(spec.Theta.length() > 0.0)) throw parameter_error("OuterSpec: empty Theta band");
  if (!(spec.window > 1.0)) throw parameter_error("OuterSpec: window must exceed 1");
  if (spec.iteration_cap == 0) throw parameter_error("OuterSpec: zero iteration cap");
}

void validate(const ExponentTuple& e) {
  if (!(e.p >= 1.0)) throw parameter_error("ExponentTuple: p must be >= 1");
  const double pprime = e.p == 1.0 ? inf : e.p / (e.p - 1.0);
  if (!(e.q > std::max(pprime, 2.0)))
    throw parameter_error("ExponentTuple: q must exceed max(p', 2)");
  if (!(e.u >= 1.0 && e.u < e.r && e.r < e.q))
    throw parameter_error("ExponentTuple: need 1 <= u < r < q");
}

double cover_norm(const Forest& W, const OuterSpec& spec) {
  if (W.trees.empty()) return 0.0;
  const CountingFunction N = counting_function(W);
  return std::isinf(spec.aggregation) ? static_cast<double>(N.linf) : N.l1;
}

double cover_norm(const StripUnion& V, const OuterSpec& spec) {
  (void)spec;  // strip covers always aggregate in L^1 (the nu measure)
  if (V.strips.empty()) return 0.0;
  return counting_function(V).l1;
}

namespace {

// ---------------------------------------------------------------- regions --

void collect_leaves(const Region& E, std::vector<const Region*>& out) {
  switch (E.kind) {
    case Region::Kind::tree:
    case Region::Kind::strip:
      out.push_back(&E);
      break;
    default:
      if (E.a) collect_leaves(*E.a, out);
      if (E.b) collect_leaves(*E.b, out);
  }
}

// dense interior samples of every generating leaf, filtered by E membership
std::vector<Point3> sample_region(const Region& E) {
  std::vector<const Region*> leaves;
  collect_leaves(E, leaves);
  std::vector<Point3> cloud;
  for (const Region* L : leaves) {
    if (L->kind == Region::Kind::tree) {
      const Tree& T = L->tree;
      for (std::size_t i = 0; i < 7; ++i) {
        const double th = T.theta.lo + (i + 0.5) / 7.0 * T.theta.length();
        for (std::size_t j = 0; j < 9; ++j) {
          const double ze = -1.0 + (j + 0.5) * 2.0 / 9.0;
          for (std::size_t k = 0; k < 9; ++k) {
            const double si = std::exp2(-6.0 * (1.0 - (k + 0.5) / 9.0));
            if (si >= 1.0 - std::abs(ze)) continue;
            const Point3 p = from_model(T, {th, ze, si});
            if (E.contains(p)) cloud.push_back(p);
          }
        }
      }
    } else {
      const Strip& D = L->strip;
      for (std::size_t j = 0; j < 9; ++j) {
        const double y = D.x - D.s + (j + 0.5) * 2.0 * D.s / 9.0;
        const double tcap = (D.s - std::abs(y - D.x)) / D.beta;
        for (std::size_t k = 0; k < 9; ++k) {
          const double t = tcap * std::exp2(-6.0 * (1.0 - (k + 0.5) / 9.0));
          for (double eta : {D.x - D.s, D.x, D.x + D.s}) {
            const Point3 p{eta, y, t};
            if (E.contains(p)) cloud.push_back(p);
          }
        }
      }
    }
  }
  return cloud;
}

double pow2_floor(double v) { return std::exp2(std::floor(std::log2(v))); }
double pow2_ceil(double v) { return std::exp2(std::ceil(std::log2(v))); }

void push_tree_cand(std::vector<Tree>& out, double xi, double x, double s,
                    const Interval& band) {
  out.push_back(Tree{xi, x, s, band});
}

// the leaf itself, its lattice snaps, and dyadic enlargements
std::vector<Tree> tree_candidates_for(const Region& E, const OuterSpec& spec) {
  std::vector<const Region*> leaves;
  collect_leaves(E, leaves);
  std::vector<Tree> out;
  for (const Region* L : leaves) {
    if (L->kind != Region::Kind::tree) continue;
    const Tree& T = L->tree;
    push_tree_cand(out, T.xi, T.x, T.s, spec.Theta);
    for (double scale : {1.0, 2.0, 4.0}) {
      const double s0 = T.s * scale;
      push_tree_cand(out, T.xi, T.x, s0, spec.Theta);
      for (double s2 : {pow2_floor(s0), pow2_ceil(s0)}) {
        for (double x2 : {std::floor(T.x / s2) * s2, std::ceil(T.x / s2) * s2})
          for (double xi2 :
               {std::floor(T.xi * s2) / s2, std::ceil(T.xi * s2) / s2})
            push_tree_cand(out, xi2, x2, s2, spec.Theta);
      }
    }
  }
  return out;
}

std::vector<Strip> strip_candidates_for(const Region& E, const OuterSpec& spec) {
  std::vector<const Region*> leaves;
  collect_leaves(E, leaves);
  std::vector<Strip> out;
  for (const Region* L : leaves) {
    if (L->kind == Region::Kind::strip) {
      const Strip& D = L->strip;
      out.push_back(Strip{D.x, D.s, spec.beta});
      out.push_back(Strip{D.x, 2.0 * D.s, spec.beta});
      const double s2 = pow2_ceil(D.s);
      out.push_back(Strip{std::floor(D.x / s2) * s2, 2.0 * s2, spec.beta});
    } else {
      // a beta-strip over the tree's shadow covers the whole tree
      const Tree& T = L->tree;
      out.push_back(Strip{T.x, T.s * (1.0 + spec.beta) * 1.01, spec.beta});
    }
  }
  return out;
}

template <typename Gen>
bool gen_contains(const Gen& g, const Point3& p);
template <>
bool gen_contains<Tree>(const Tree& T, const Point3& p) {
  return tree_contains(T, p);
}
template <>
bool gen_contains<Strip>(const Strip& D, const Point3& p) {
  return strip_contains(D, p);
}

double gen_cost(const Tree& T) { return 2.0 * T.s; }
double gen_cost(const Strip& D) { return 2.0 * D.s; }

// cost-effectiveness greedy set cover with a reverse pruning pass
template <typename Gen>
std::vector<Gen> greedy_set_cover(std::vector<Gen> cands,
                                  const std::vector<Point3>& cloud,
                                  const std::function<Gen(const Point3&)>& fallback) {
  std::vector<bool> covered(cloud.size(), false);
  std::vector<Gen> picked;
  std::size_t n_cov = 0;
  while (n_cov < cloud.size()) {
    double best_ratio = inf;
    std::size_t best = cands.size(), best_cnt = 0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      std::size_t cnt = 0;
      for (std::size_t j = 0; j < cloud.size(); ++j)
        if (!covered[j] && gen_contains(cands[i], cloud[j])) ++cnt;
      if (cnt == 0) continue;
      const double ratio = gen_cost(cands[i]) / static_cast<double>(cnt);
      if (ratio < best_ratio - 1e-12 ||
          (ratio < best_ratio + 1e-12 && cnt > best_cnt)) {
        best_ratio = ratio;
        best = i;
        best_cnt = cnt;
      }
    }
    if (best == cands.size()) {
      // no candidate helps: seed a per-point generator and retry
      for (std::size_t j = 0; j < cloud.size(); ++j)
        if (!covered[j]) {
          cands.push_back(fallback(cloud[j]));
          break;
        }
      continue;
    }
    for (std::size_t j = 0; j < cloud.size(); ++j)
      if (!covered[j] && gen_contains(cands[best], cloud[j])) {
        covered[j] = true;
        ++n_cov;
      }
    picked.push_back(cands[best]);
    cands.erase(cands.begin() + static_cast<std::ptrdiff_t>(best));
  }
  // drop members whose points are covered by the rest
  for (std::size_t i = picked.size(); i-- > 0;) {
    bool redundant = true;
    for (const Point3& p : cloud) {
      if (!gen_contains(picked[i], p)) continue;
      bool other = false;
      for (std::size_t l = 0; l < picked.size() && !other; ++l)
        other = l != i && gen_contains(picked[l], p);
      if (!other) {
        redundant = false;
        break;
      }
    }
    if (redundant) picked.erase(picked.begin() + static_cast<std::ptrdiff_t>(i));
  }
  return picked;
}

}  // namespace

double outer_measure(const Region& E, const OuterSpec& spec) {
  validate(spec);
  const std::vector<Point3> cloud = sample_region(E);
  if (cloud.empty()) return 0.0;
  if (spec.generator == GeneratorKind::trees) {
    // trees are bounded in t; a set reaching above the window has no cover
    for (double t : {2.0 * spec.window, 4.0 * spec.window})
      for (int i = -4; i <= 4; ++i)
        for (int j = -4; j <= 4; ++j)
          if (E.contains({spec.window * i / 4.0, spec.window * j / 4.0, t}))
            throw precondition_error(
                "outer_measure: set unbounded in t, no finite tree cover");
    const double mid = 0.5 * (spec.Theta.lo + spec.Theta.hi);
    std::function<Tree(const Point3&)> fb = [&](const Point3& p) {
      return Tree{p.eta - mid / p.t, p.y, 2.0 * p.t, spec.Theta};
    };
    const auto picked = greedy_set_cover<Tree>(tree_candidates_for(E, spec), cloud, fb);
    return cover_norm(Forest{picked}, spec);
  }
  std::function<Strip(const Point3&)> fb = [&](const Point3& p) {
    return Strip{p.y, 2.0 * spec.beta * p.t, spec.beta};
  };
  const auto picked = greedy_set_cover<Strip>(strip_candidates_for(E, spec), cloud, fb);
  return cover_norm(StripUnion{picked}, spec);
}

double outer_measure_brute(const Region& E, const OuterSpec& spec,
                           const std::vector<Tree>& candidates) {
  validate(spec);
  if (candidates.size() > 20)
    throw parameter_error("outer_measure_brute: at most 20 candidates");
  const std::vector<Point3> cloud = sample_region(E);
  if (cloud.empty()) return 0.0;
  double best = inf;
  const std::size_t n = candidates.size();
  for (std::size_t mask = 1; mask < (1u << n); ++mask) {
    bool ok = true;
    for (const Point3& p : cloud) {
      bool cov = false;
      for (std::size_t i = 0; i < n && !cov; ++i)
        cov = (mask >> i & 1u) && tree_contains(candidates[i], p);
      if (!cov) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    Forest W;
    for (std::size_t i = 0; i < n; ++i)
      if (mask >> i & 1u) W.trees.push_back(candidates[i]);
    best = std::min(best, cover_norm(W, spec));
  }
  return best;
}

// ------------------------------------------------------- greedy field cover --

namespace {

// lattice candidates restricted to the support window and the frequency
// range the field can reach (fields without spatial decay are truncated to
// |x| <= window; the truncation is part of the toolkit's contract)
std::vector<Tree> field_candidates(const EmbeddedField& F, const SizeSpec& size,
                                   const Interval& band, const OuterSpec& spec) {
  FieldModes modes = field_modes(*F.source);
  std::vector<Tree> out;
  if (modes.xi.empty()) return out;
  double rmax = 0.0;
  for (const auto& phi : F.packet_family) rmax = std::max(rmax, phi.r);
  double al = 1.0, be = 1.0, ga = 0.0;
  if (F.pullback) {
    al = F.pullback->alpha;
    be = F.pullback->beta;
    ga = F.pullback->gamma;
  }
  double mlo = inf, mhi = -inf;
  for (double m : modes.xi) {
    mlo = std::min(mlo, m / al);
    mhi = std::max(mhi, m / al);
  }
  if (mlo > mhi) std::swap(mlo, mhi);
  const double thabs = std::max(std::abs(band.lo), std::abs(band.hi));
  const double S = spec.window;
  for (double s = pow2_ceil(1.0 / S); s <= S * (1.0 + 1e-9); s *= 2.0) {
    // packet support: |xi_T - mode| <= (|theta| + |gamma| + r/(|a| b)) / t
    const double w = (thabs + std::abs(ga) + rmax / (std::abs(al) * be)) /
                     (s * size.quad.sigma_min);
    const long klo = static_cast<long>(std::floor((mlo - w) * s));
    const long khi = static_cast<long>(std::ceil((mhi + w) * s));
    const long jmax = static_cast<long>(std::floor(S / s));
    if ((khi - klo + 1) * (2 * jmax + 1) > 4000000L)
      throw precondition_error("field_candidates: lattice too large for the window");
    for (long j = -jmax; j <= jmax; ++j)
      for (long k = klo; k <= khi; ++k)
        out.push_back(Tree{static_cast<double>(k) / s, static_cast<double>(j) * s, s,
                           size.Theta});
  }
  return out;
}

struct Cand {
  Tree T;
  double cache = 0.0;  // upper bound for the current residual size
  bool dirty = false;  // a removal may have shrunk the residual under it
};

// Greedy selection engine shared by greedy_cover, superlevel_measure,
// outer_lp and atomic_decompose. Maintains the removed region, selected
// trees, and cached per-candidate residual sizes (the cache only shrinks, so
// stale entries stay valid upper bounds).
struct SweepEngine {
  const EmbeddedField* F = nullptr;
  SizeSpec sel;       // exponents + quadrature of the selection size
  Interval band;      // model-theta selection band
  OuterSpec ospec;
  bool singular = false;
  bool mass_guard = false;  // asserts the (1,1) mass bound per selection

  FieldModes modes;
  std::vector<Cand> cands;
  std::vector<std::size_t> order;  // xi desc, s desc, x asc
  // removed set = union of full-band trees; kept flat for fast membership,
  // mirrored as a Region only for the distinguished-subset certificates
  std::vector<Tree> removed_trees;
  std::optional<Region> removed_region;
  Forest selected;
  std::vector<Region> distinguished;
  std::vector<double> masses;
  std::size_t iterations = 0;

  void init(const EmbeddedField& field, const SizeSpec& size, const Interval& b,
            const OuterSpec& os, bool sing) {
    F = &field;
    sel = size;
    band = b;
    ospec = os;
    singular = sing;
    if (!F->source) throw precondition_error("outer covering: field needs a source");
    if (singular && !F->singular_part)
      throw precondition_error("outer covering: singular variant needs a boundary layer");
    modes = field_modes(*F->source);
    for (const Tree& T : field_candidates(field, size, band, os))
      cands.push_back({T, 0.0});
    for (auto& c : cands) c.cache = eval_size(c.T);
    order.resize(cands.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(), [&](std::size_t a2, std::size_t b2) {
      const Tree &ta = cands[a2].T, &tb = cands[b2].T;
      if (ta.xi != tb.xi) return ta.xi > tb.xi;
      if (ta.s != tb.s) return ta.s > tb.s;
      return ta.x < tb.x;
    });
  }

  bool point_removed(const Point3& p) const {
    for (const Tree& T : removed_trees)
      if (tree_contains(T, p)) return true;
    return false;
  }

  cx eval_point(std::size_t layer, const Point3& p) const {
    if (point_removed(p)) return cx{};
    if (F->restriction && !F->restriction->contains(p)) return cx{};
    double eta_eff = p.eta, t_eff = p.t;
    if (F->pullback) {
      const Point3 q = gamma_apply(*F->pullback, p);
      eta_eff = q.eta;
      t_eff = q.t;
    }
    return eval_modes(modes, F->packet_family[layer], eta_eff, t_eff, p.y);
  }

  double eval_size(const Tree& T) const { return eval_size_at(T, sel.u, sel.v); }

  double eval_size_at(const Tree& T, double u, double v) const {
    if (singular) return boundary_size(T);
    SizeSpec s2 = sel;
    s2.u = u;
    s2.v = v;
    if (band.lo > sel.Theta.lo || band.hi < sel.Theta.hi) s2.theta_restrict = band;
    const Tree tree = T;
    double best = 0.0;
    for (std::size_t layer = 0; layer < F->packet_family.size(); ++layer) {
      auto ev = [&, layer](double th, double ze, double si) -> cx {
        return eval_point(layer, from_model(tree, {th, ze, si}));
      };
      best = std::max(best, mixed_norm_model(ev, s2));
    }
    return best;
  }

  // boundary-trace mass of the tree divided by s |Theta|: the graph carries
  // the measure t delta(t - b), so the integrand is |trace| b d eta d y
  double boundary_size(const Tree& T) const {
    const Grid3& gr = F->grid;
    const SingularPart& sp = *F->singular_part;
    const Tree Tb{T.xi, T.x, T.s, band};
    double best = 0.0;
    const double de = gr.deta(), dy = gr.dy();
    for (std::size_t layer = 0; layer < sp.trace.size(); ++layer) {
      double acc = 0.0;
      for (std::size_t ie = 0; ie < gr.n_eta(); ++ie)
        for (std::size_t iy = 0; iy < gr.n_y(); ++iy) {
          const double eta = gr.eta_nodes[ie], y = gr.y_nodes[iy];
          const double b = sp.b.b(eta, y);
          if (!(b > 0.0) || std::isinf(b)) continue;
          const Point3 p{eta, y, b};
          if (!tree_contains(Tb, p)) continue;
          if (point_removed(p)) continue;
          acc += std::abs(sp.trace[layer][ie * gr.n_y() + iy]) * b * de * dy;
        }
      best = std::max(best, acc / (T.s * sel.Theta.length()));
    }
    return best;
  }

  double residual_max() const {
    double m = 0.0;
    for (const auto& c : cands) m = std::max(m, c.cache);
    return m;
  }

  // re-evaluate only when a removal could have touched the candidate
  void ensure(Cand& c) {
    if (!c.dirty) return;
    c.cache = eval_size(c.T);
    c.dirty = false;
  }

  bool may_overlap(const Tree& c, const Tree& rem) const {
    if (std::abs(c.x - rem.x) >= c.s + rem.s) return false;
    const double thmax = std::max(std::abs(sel.Theta.lo), std::abs(sel.Theta.hi));
    const double thband = std::max(std::abs(band.lo), std::abs(band.hi));
    return c.s * sel.quad.sigma_min * std::abs(c.xi - rem.xi) <= thmax + thband + 1e-9;
  }

  // one full pass of quasi-maximal selection at threshold lambda
  void run_level(double lambda) {
    const double eps = singular ? std::ldexp(ospec.window, -100)
                                : lambda * band.length() / (2.0 * ospec.window);
    while (true) {
      if (iterations >= ospec.iteration_cap)
        throw precondition_error("greedy cover: iteration cap hit after " +
                                 std::to_string(iterations) + " selections");
      // highest-frequency candidate whose true residual size reaches lambda
      std::size_t first = cands.size();
      for (std::size_t oi = 0; oi < order.size(); ++oi) {
        Cand& c = cands[order[oi]];
        if (c.cache < lambda) continue;
        ensure(c);
        if (c.cache >= lambda) {
          first = order[oi];
          break;
        }
      }
      if (first == cands.size()) return;
      const double xi_max = cands[first].T.xi;
      // quasi-maximal group, tie-break by largest s then smallest x
      std::size_t pick = first;
      for (std::size_t oi = 0; oi < order.size(); ++oi) {
        Cand& c = cands[order[oi]];
        if (c.T.xi > xi_max || c.T.xi < xi_max - eps) continue;
        if (c.cache < lambda) continue;
        ensure(c);
        if (c.cache < lambda) continue;
        const Tree &tc = c.T, &tp = cands[pick].T;
        if (tc.s > tp.s || (tc.s == tp.s && tc.x < tp.x)) pick = order[oi];
      }
      Cand& chosen = cands[pick];
      const double ssel = chosen.cache;
      Region x_region = region_of(Tree{chosen.T.xi, chosen.T.x, chosen.T.s, band});
      if (removed_region) x_region = region_subtract(x_region, *removed_region);
      const double mass =
          chosen.T.s * sel.Theta.length() *
          (mass_guard ? ssel : eval_size_at(chosen.T, 1.0, 1.0));
      if (mass_guard && mass + 1e-12 * (1.0 + mass) < lambda * 2.0 * chosen.T.s)
        throw precondition_error("greedy cover: mass lower bound violated");
      selected.trees.push_back(chosen.T);
      distinguished.push_back(std::move(x_region));
      masses.push_back(mass);
      const Tree rem{chosen.T.xi, chosen.T.x, chosen.T.s, sel.Theta};
      removed_trees.push_back(rem);
      const Region rr = region_of(rem);
      removed_region =
          removed_region ? region_union(std::move(*removed_region), rr) : rr;
      for (Cand& c : cands)
        if (c.cache > 0.0 && may_overlap(c.T, rem)) c.dirty = true;
      chosen.cache = 0.0;
      chosen.dirty = false;
      ++iterations;
    }
  }

  CoverResult result() const {
    CoverResult r;
    r.selected = selected;
    r.distinguished = distinguished;
    r.masses = masses;
    r.measure_estimate = cover_norm(selected, ospec);
    r.residual_size = residual_max();
    r.iterations = iterations;
    return r;
  }
};

Interval selection_band(const SizeSpec& size) {
  return size.theta_restrict ? *size.theta_restrict : size.Theta;
}

}  // namespace

CoverResult greedy_cover(const EmbeddedField& F, const SizeSpec& size, double lambda,
                         const Interval& sel_band, const OuterSpec& spec, bool singular) {
  validate(spec);
  if (!(lambda > 0.0)) throw parameter_error("greedy_cover: lambda must be positive");
  if (!(size.u == 1.0 && size.v == 1.0))
    throw parameter_error("greedy_cover: selection uses the (1,1) size");
  if (!(size.Theta.length() >= 2.0))
    throw parameter_error(
        "greedy_cover: the mass bound needs a Theta band of length >= 2");
  if (!(sel_band.lo >= size.Theta.lo && sel_band.hi <= size.Theta.hi &&
        sel_band.length() > 0.0))
    throw parameter_error("greedy_cover: selection band must sit inside Theta");
  SweepEngine e;
  e.mass_guard = true;
  e.init(F, size, sel_band, spec, singular);
  e.run_level(lambda);
  CoverResult r = e.result();
  if (r.residual_size > lambda * (1.0 + 1e-9))
    throw precondition_error("greedy cover: residual above threshold");
  return r;
}

double superlevel_measure(const EmbeddedField& F, const SizeSpec& size, double lambda,
                          const OuterSpec& spec, CoverResult* witness) {
  validate(spec);
  if (!(lambda > 0.0)) throw parameter_error("superlevel_measure: lambda must be positive");
  SweepEngine e;
  e.init(F, size, selection_band(size), spec, false);
  const double top = e.residual_max();
  if (top > lambda) {
    // descend a fixed dyadic chain anchored at the top size and overshoot to
    // the first level <= lambda, so estimates are monotone in lambda
    double level = top;
    while (level > lambda) level *= 0.5;
    for (double l = top * 0.5; l >= level * (1.0 - 1e-12); l *= 0.5) e.run_level(l);
  }
  CoverResult r = e.result();
  const double m = r.measure_estimate;
  if (witness) *witness = std::move(r);
  return m;
}

double total_size(const EmbeddedField& F, const SizeSpec& size, const OuterSpec& spec) {
  validate(spec);
  SweepEngine e;
  e.init(F, size, selection_band(size), spec, false);
  return e.residual_max();
}

double outer_lp(const EmbeddedField& F, const SizeSpec& size, const OuterSpec& spec,
                double p, bool weak) {
  validate(spec);
  if (!(p > 0.0)) throw parameter_error("outer_lp: p must be positive");
  SweepEngine e;
  e.init(F, size, selection_band(size), spec, false);
  const double top = e.residual_max();
  if (top == 0.0) return 0.0;
  if (std::isinf(p)) return top;
  // dyadic lambda grid, 64 levels spanning [top * 2^-32, top]
  std::vector<double> lam, mu;
  std::size_t levels = 64;
  for (std::size_t j = 0; j < levels; ++j) {
    const double l = top * std::exp2(-0.5 * static_cast<double>(j));
    e.run_level(l);
    lam.push_back(l);
    mu.push_back(cover_norm(e.selected, spec));
    if (j + 1 == levels && levels == 64 && mu.back() > 2.0 * mu[mu.size() - 16]) {
      std::cerr << "outer_lp: lambda grid widened below top*2^-32\n";
      levels += 16;
    }
  }
  if (weak) {
    double sup = 0.0;
    for (std::size_t j = 0; j < lam.size(); ++j)
      sup = std::max(sup, std::pow(lam[j], p) * mu[j]);
    return std::pow(sup, 1.0 / p);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < lam.size(); ++j) {
    const double hi = std::pow(lam[j], p);
    const double lo = j + 1 < lam.size() ? std::pow(lam[j + 1], p) : 0.0;
    acc += mu[j] * (hi - lo);
  }
  return std::pow(acc, 1.0 / p);
}

AtomicDecomposition atomic_decompose(const EmbeddedField& F, const SizeSpec& size,
                                     const OuterSpec& spec, double p) {
  validate(spec);
  if (!(p > 0.0) || std::isinf(p))
    throw parameter_error("atomic_decompose: p must be finite and positive");
  AtomicDecomposition out;
  SweepEngine e;
  e.init(F, size, selection_band(size), spec, false);
  const double top = e.residual_max();
  if (top == 0.0) return out;
  const int ktop = static_cast<int>(std::floor(p * std::log2(top)));
  const int nlev = std::min(64, static_cast<int>(std::ceil(32.0 * p)));
  double lp_acc = 0.0;
  std::size_t seen = 0;
  double mu_prev = 0.0;
  std::vector<std::pair<int, double>> level_mu;  // (k, cumulative measure)
  for (int k = ktop; k > ktop - nlev; --k) {
    const double lambda = std::exp2(static_cast<double>(k) / p);
    e.run_level(lambda);
    Forest batch;
    for (std::size_t i = seen; i < e.selected.trees.size(); ++i)
      batch.trees.push_back(e.selected.trees[i]);
    seen = e.selected.trees.size();
    const double w = cover_norm(batch, spec);
    if (!batch.trees.empty()) {
      // the slice A_k \ A_{k+1} is covered by this batch and its field
      // restriction obeys the (k+1)-level size bound
      out.slices.push_back({k + 1, std::move(batch), w});
      out.level_sum += std::ldexp(w, k + 1);
    }
    const double mu_k = cover_norm(e.selected, spec);
    level_mu.emplace_back(k, mu_k);
    out.tail_norms.push_back(e.residual_max());
    mu_prev = mu_k;
  }
  // layer-cake estimate on the same integer-k grid
  for (const auto& [k, mu_k] : level_mu) lp_acc += mu_k * std::ldexp(1.0, k - 1);
  lp_acc += mu_prev * std::ldexp(1.0, ktop - nlev);
  out.lp = std::pow(lp_acc, 1.0 / p);
  // scale the residual tails by the total-support measure so they read as
  // outer-Lp reconstruction errors
  const double supp = std::pow(std::max(mu_prev, 1e-300), 1.0 / p);
  for (double& t : out.tail_norms) t *= supp;
  return out;
}

double localized_norm(const EmbeddedField& F, const SizeSpec& size, const OuterSpec& spec,
                      LocalizedKind kind, double q, double r) {
  validate(spec);
  if (!(q >= 1.0)) throw parameter_error("localized_norm: q must be >= 1");
  const Grid3& gr = F.grid;
  const double ylo = gr.y_nodes.front(), yhi = gr.y_nodes.back();
  const double xV = 0.5 * (ylo + yhi);
  const double sV = spec.beta * gr.t_nodes.back() * 1.05 + 0.5 * (yhi - ylo) + 0.05;
  const Strip V{xV, sV, spec.beta};
  const double nu = 2.0 * sV;
  EmbeddedField FV = F;
  FV.restriction = F.restriction
                       ? region_intersect(*F.restriction, region_of(V))
                       : region_of(V);
  const double invq = std::isinf(q) ? 0.0 : 1.0 / q;
  if (kind == LocalizedKind::fLq_mu1) {
    OuterSpec o1 = spec;
    o1.aggregation = 1.0;
    return std::pow(nu, -invq) * outer_lp(FV, size, o1, q);
  }
  if (kind == LocalizedKind::fLq_muinf) {
    OuterSpec oi = spec;
    oi.aggregation = inf;
    return outer_lp(FV, size, oi, q);
  }
  if (!(r >= 1.0)) throw parameter_error("localized_norm: r must be >= 1");
  if (r > q)
    throw parameter_error("localized_norm: the X size needs r <= q to be defined");
  // tree-union layer: the whole window plus the strongest single-tree windows
  OuterSpec o1 = spec;
  o1.aggregation = 1.0;
  std::vector<Region> wins;
  {
    const double sbig = 64.0 * (sV + std::abs(xV) + 1.0);
    wins.push_back(region_of(Tree{0.0, xV, sbig, Interval{-1e6, 1e6}}));
    SweepEngine e;
    e.init(FV, size, selection_band(size), o1, false);
    std::vector<std::pair<double, Tree>> ranked;
    for (const auto& c : e.cands) ranked.emplace_back(c.cache, c.T);
    std::sort(ranked.begin(), ranked.end(),
              [](const auto& a, const auto& b) { return a.first > b.first; });
    for (std::size_t i = 0; i < ranked.size() && i < 3; ++i)
      if (ranked[i].first > 0.0) wins.push_back(region_of(ranked[i].second));
  }
  double best = 0.0;
  for (double rb : {r, q}) {
    if (std::isinf(rb)) continue;
    const double invr = 1.0 / rb;
    for (const Region& W : wins) {
      EmbeddedField FW = FV;
      FW.restriction = region_intersect(*FV.restriction, W);
      // each window is a single tree: its mu^inf estimate is 1, so the
      // (1/q - 1/r) factor drops out
      best = std::max(best, std::pow(nu, -invr) * outer_lp(FW, size, o1, rb));
    }
  }
  return best;
}

// ------------------------------------------------------------- refinement --

RefineResult refine_to_linfty(const Forest& cover, double q0, double qbar, int k,
                              double nu_budget) {
  if (!(q0 > 0.0) || !(qbar > 0.0))
    throw parameter_error("refine_to_linfty: exponents must be positive");
  if (!(nu_budget > 0.0)) throw parameter_error("refine_to_linfty: empty budget");
  RefineResult out;
  if (cover.trees.empty()) {
    out.thinned = cover;
    out.chosen_C = 1.0;
    return out;
  }
  const CountingFunction N = counting_function(cover);
  const std::size_t n = N.counts.size();
  // piecewise-constant maximal function with breakpoint-aligned intervals
  std::vector<double> pref(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    pref[i + 1] = pref[i] + N.counts[i] * (N.breakpoints[i + 1] - N.breakpoints[i]);
  std::vector<double> maxfn(n, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t a = 0; a <= i; ++a)
      for (std::size_t b = i + 1; b <= n; ++b) {
        const double len = N.breakpoints[b] - N.breakpoints[a];
        if (len <= 0.0) continue;
        maxfn[i] = std::max(maxfn[i], (pref[b] - pref[a]) / len);
      }
  for (double C = 1.0; C <= std::exp2(60); C *= 2.0) {
    const double tau = C * std::exp2(qbar / q0 * static_cast<double>(k));
    // connected components of {maximal function > tau}
    std::vector<std::pair<double, double>> comps;
    std::size_t i = 0;
    while (i < n) {
      if (maxfn[i] > tau) {
        std::size_t j = i;
        while (j + 1 < n && maxfn[j + 1] > tau) ++j;
        comps.emplace_back(N.breakpoints[i], N.breakpoints[j + 1]);
        i = j + 1;
      } else {
        ++i;
      }
    }
    StripUnion V;
    double nu_ecc = 0.0;
    for (const auto& [a, b] : comps) {
      const double sc = 0.5 * (b - a);
      if (!(sc > 0.0)) continue;
      V.strips.push_back(Strip{0.5 * (a + b), 100.0 * sc, 1.0});
      nu_ecc += 200.0 * sc;
    }
    Forest keep;
    for (const Tree& T : cover.trees) {
      bool excluded = false;
      for (const auto& [a, b] : comps) {
        const double sc = 0.5 * (b - a), xc = 0.5 * (a + b);
        if (T.s <= 10.0 * sc && T.x - T.s >= xc - 100.0 * sc &&
            T.x + T.s <= xc + 100.0 * sc) {
          excluded = true;
          break;
        }
      }
      if (!excluded) keep.trees.push_back(T);
    }
    const int cap = keep.trees.empty() ? 0 : counting_function(keep).linf;
    if (nu_ecc <= 0.5 * nu_budget + 1e-12 && cap <= 4.0 * std::max(1.0, tau)) {
      out.eccentric = std::move(V);
      out.thinned = std::move(keep);
      out.nu_eccentric = nu_ecc;
      out.counting_cap = cap;
      out.chosen_C = C;
      return out;
    }
  }
  throw precondition_error("refine_to_linfty: no admissible threshold found");
}

MeasureCompareReport measure_compare(const Forest& W, const StripUnion& V, double beta) {
  if (!(beta > 0.0 && beta <= 1.0))
    throw parameter_error("measure_compare: beta must lie in (0, 1]");
  MeasureCompareReport rep;
  if (!V.strips.empty()) rep.nu = counting_function(V).l1;
  Forest paired, meeting;
  for (const Tree& T : W.trees) {
    bool meets = false;
    for (const Strip& D : V.strips) {
      const double lo = std::max(T.x - T.s, D.x - D.s);
      const double hi = std::min(T.x + T.s, D.x + D.s);
      if (hi <= lo) continue;
      meets = true;
      // tree over the shadow intersection, inflated to absorb the strip slope
      paired.trees.push_back(
          Tree{T.xi, 0.5 * (lo + hi), (hi - lo) / beta, T.theta});
    }
    if (meets) meeting.trees.push_back(T);
  }
  if (!paired.trees.empty()) rep.mu1_intersection = counting_function(paired).l1;
  if (!meeting.trees.empty())
    rep.muinf_intersection = counting_function(meeting).linf;
  rep.bound = 4.0 / beta * rep.nu * rep.muinf_intersection;
  rep.holds = rep.mu1_intersection <= rep.bound * (1.0 + 1e-9) + 1e-12;
  return rep;
}

// ------------------------------------------------------------ gamma images --

Strip gamma_image(const GammaMap& g, const Strip& D) {
  validate(g);
  const double nb = D.beta / g.beta;
  if (!(nb > 0.0 && nb <= 1.0 + 1e-12))
    throw parameter_error("gamma_image: image strip parameter leaves (0, 1]");
  return Strip{D.x, D.s, std::min(nb, 1.0)};
}

Tree gamma_image(const GammaMap& g, const Tree& T) {
  validate(g);
  double lo = theta_gamma(g, T.theta.lo), hi = theta_gamma(g, T.theta.hi);
  if (lo > hi) std::swap(lo, hi);
  return Tree{g.alpha * T.xi, T.x, g.beta * T.s, Interval{lo, hi}};
}

// --------------------------------------------------------------- samplers --

namespace {

double median_of(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  return v[v.size() / 2];
}

// Signed integral of the modulated field over the tree; the same boosted
// evaluation the truncation size uses, so the full sigma-sum per (theta,
// zeta) column is dominated pointwise by the sup over truncations.
double tree_integral_abs(const EmbeddedField& F, const Tree& T, const SizeSpec& spec) {
  const double dth = spec.Theta.length() / spec.quad.n_theta;
  const double dze = 2.0 / spec.quad.n_zeta;
  const double dlog = -std::log(spec.quad.sigma_min) / spec.quad.n_sigma;
  cx acc{};
  for (std::size_t i = 0; i < spec.quad.n_theta; ++i) {
    const double th = spec.Theta.lo + (i + 0.5) * dth;
    for (std::size_t j = 0; j < spec.quad.n_zeta; ++j) {
      const double ze = -1.0 + (j + 0.5) * dze;
      for (std::size_t l = 0; l < spec.quad.n_sigma; ++l) {
        const double si = spec.quad.sigma_min * std::exp((l + 0.5) * dlog);
        if (si >= 1.0 - std::abs(ze)) break;
        const Point3 p = from_model(T, {th, ze, si});
        const double tt = spec.gamma ? theta_gamma(*spec.gamma, th) : th;
        // d eta d y d t = (s / sigma) d theta d zeta d sigma
        acc += eval_source(F, 0, p, EvalBoost::zeta, tt) * T.s * dth * dze * dlog;
      }
    }
  }
  return std::abs(acc);
}

}  // namespace

RatioReport inequality_sampler(SamplerKind kind, const SamplerInputs& in) {
  RatioReport rep;
  std::vector<double> ratios;
  auto record = [&](double param, double lhs, double rhs) {
    ++rep.trials;
    if (lhs < 1e-14 && rhs < 1e-14) {
      ++rep.skipped;
      return;
    }
    const double r = rhs > 0.0 ? lhs / rhs : inf;
    ratios.push_back(r);
    rep.profile.emplace_back(param, r);
  };
  switch (kind) {
    case SamplerKind::rn_domination: {
      rep.kind = "rn_domination";
      for (std::size_t i = 0; i < in.fields.size(); ++i) {
        const double lhs = tree_integral_abs(in.fields[i], in.T, in.spec);
        const double rhs = 2.0 * in.T.s * sio_size(in.fields[i], in.T, in.spec);
        record(static_cast<double>(i), lhs, rhs);
      }
      break;
    }
    case SamplerKind::outer_holder: {
      rep.kind = "outer_holder";
      for (std::size_t i = 0; i + 1 < in.fields.size(); i += 2) {
        const ProductField H = product_field(in.fields[i], in.fields[i + 1]);
        SizeSpec s1 = in.spec;
        s1.u = 1.0;
        s1.v = 1.0;
        SizeSpec s2 = in.spec;
        s2.u = 2.0;
        s2.v = 2.0;
        const double lhs = product_size(H, in.T, ProductVariant::phi_phi, s1);
        const double rhs = lebesgue_size(in.fields[i], in.T, s2) *
                           lebesgue_size(in.fields[i + 1], in.T, s2);
        record(static_cast<double>(i / 2), lhs, rhs);
      }
      break;
    }
    case SamplerKind::single_tree: {
      rep.kind = "single_tree";
      if (!(in.u >= 3.0))
        throw parameter_error(
            "single_tree sampler: need sum of 1/u_j <= 1, so u >= 3 per factor");
      if (in.fields.size() < 3 * in.triples.size())
        throw parameter_error("single_tree sampler: three embedded factors per triple");
      for (std::size_t i = 0; i < in.triples.size(); ++i) {
        const TripleField& H = in.triples[i];
        double lhs = 0.0;
        for (const auto& pat :
             {std::array<char, 3>{'l', 'l', 'l'}, std::array<char, 3>{'o', 'l', 'l'},
              std::array<char, 3>{'l', 'o', 'l'}, std::array<char, 3>{'l', 'l', 'o'}})
          lhs += integral_size(H, in.T, pat, in.spec).value;
        const EmbeddedField& F1 = in.fields[3 * i];
        const EmbeddedField& F2 = in.fields[3 * i + 1];
        const EmbeddedField& F3 = in.fields[3 * i + 2];
        double rhs = composite_nonuniform(F1, in.T, in.u, in.spec).total;
        for (const EmbeddedField* Ff : {&F2, &F3}) {
          const GammaMap g = *Ff->pullback;
          const Interval ti{-g.gamma - 0.05, -g.gamma + 0.05};
          SizeSpec sg = in.spec;
          sg.gamma = g;
          rhs *= composite_uniform_linear(*Ff, in.T, in.u, g.beta, g, ti, sg).total;
        }
        record(static_cast<double>(i), lhs, rhs);
      }
      break;
    }
    case SamplerKind::uniform_embedding: {
      rep.kind = "uniform_embedding";
      if (in.fields.empty() || !in.fields.front().source)
        throw parameter_error("uniform_embedding sampler: needs a source-backed field");
      const EmbeddedField& base = in.fields.front();
      double ref = 0.0;
      for (std::size_t i = 0; i < in.betas.size(); ++i) {
        const double beta = in.betas[i];
        const GammaMap g = gamma_two(beta);
        const EmbeddedField Fb =
            embed_gamma(*base.source, base.grid, base.packet_family[0], g);
        const Interval ti{-g.gamma - 0.05, -g.gamma + 0.05};
        SizeSpec sg = in.spec;
        sg.gamma = g;
        const double total =
            composite_uniform_linear(Fb, in.T, in.u, beta, g, ti, sg).total;
        if (i == 0) {
          ref = total;
          record(beta, total, total);
        } else {
          record(beta, total, ref);
        }
      }
      break;
    }
  }
  rep.max_ratio = ratios.empty() ? 0.0 : *std::max_element(ratios.begin(), ratios.end());
  rep.median_ratio = median_of(ratios);
  rep.bounded = std::isfinite(rep.max_ratio) &&
                (kind != SamplerKind::uniform_embedding || rep.max_ratio <= 3.0);
  return rep;
}

// ------------------------------------------------------------------ report --

std::string cover_result_json(const CoverResult& c) {
  nlohmann::json j;
  j["trees"] = nlohmann::json::array();
  for (const Tree& T : c.selected.trees)
    j["trees"].push_back({{"xi", T.xi},
                          {"x", T.x},
                          {"s", T.s},
                          {"theta_lo", T.theta.lo},
                          {"theta_hi", T.theta.hi}});
  j["masses"] = c.masses;
  j["measure_estimate"] = c.measure_estimate;
  j["residual_size"] = c.residual_size;
  j["iterations"] = c.iterations;
  return j.dump(2);
}

std::string ratio_report_json(const RatioReport& r) {
  nlohmann::json j;
  j["kind"] = r.kind;
  j["trials"] = r.trials;
  j["skipped"] = r.skipped;
  j["max_ratio"] = r.max_ratio;
  j["median_ratio"] = r.median_ratio;
  j["bounded"] = r.bounded;
  j["profile"] = nlohmann::json::array();
  for (const auto& [param, ratio] : r.profile)
    j["profile"].push_back({{"param", param}, {"ratio", ratio}});
  return j.dump(2);
}

void write_lambda_profile_csv(const std::string& path, const EmbeddedField& F,
                              const SizeSpec& size, const OuterSpec& spec,
                              const std::vector<double>& lambdas) {
  std::ofstream os(path);
  if (!os) throw parameter_error("write_lambda_profile_csv: cannot open " + path);
  os << "lambda,measure,residual\n";
  char buf[128];
  for (double l : lambdas) {
    CoverResult w;
    const double m = superlevel_measure(F, size, l, spec, &w);
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", l, m, w.residual_size);
    os << buf;
  }
}

}  // namespace tfa
