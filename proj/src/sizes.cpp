#include "tfa/sizes.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <vector>

#include "json.hpp"

namespace tfa {

namespace {

void validate_spec(const SizeSpec& spec) {
  if (!(spec.u >= 1.0) || !(spec.v >= 1.0))
    throw parameter_error("SizeSpec: exponents must be >= 1");
  if (!(spec.Theta.length() > 0.0)) throw parameter_error("SizeSpec: empty Theta band");
  if (spec.theta_restrict &&
      (spec.theta_restrict->lo < spec.Theta.lo || spec.theta_restrict->hi > spec.Theta.hi ||
       !(spec.theta_restrict->length() > 0.0)))
    throw parameter_error("SizeSpec: theta_restrict must be a sub-interval of Theta");
  if (spec.gamma) validate(*spec.gamma);
  if (spec.quad.n_theta == 0 || spec.quad.n_zeta == 0 || spec.quad.n_sigma == 0)
    throw parameter_error("SizeSpec: empty quadrature axis");
  if (!(spec.quad.sigma_min > 0.0 && spec.quad.sigma_min < 1.0))
    throw parameter_error("SizeSpec: sigma_min must lie in (0, 1)");
}

// midpoint nodes: uniform in theta and zeta, geometric in sigma
struct QuadGrid {
  std::vector<double> theta, zeta, sigma;
  double dtheta = 0.0, dzeta = 0.0, dlog = 0.0;
};

QuadGrid build_quad(const SizeSpec& spec) {
  QuadGrid q;
  q.dtheta = spec.Theta.length() / static_cast<double>(spec.quad.n_theta);
  for (std::size_t i = 0; i < spec.quad.n_theta; ++i)
    q.theta.push_back(spec.Theta.lo + (static_cast<double>(i) + 0.5) * q.dtheta);
  q.dzeta = 2.0 / static_cast<double>(spec.quad.n_zeta);
  for (std::size_t i = 0; i < spec.quad.n_zeta; ++i)
    q.zeta.push_back(-1.0 + (static_cast<double>(i) + 0.5) * q.dzeta);
  q.dlog = -std::log(spec.quad.sigma_min) / static_cast<double>(spec.quad.n_sigma);
  for (std::size_t k = 0; k < spec.quad.n_sigma; ++k)
    q.sigma.push_back(spec.quad.sigma_min * std::exp((static_cast<double>(k) + 0.5) * q.dlog));
  return q;
}

bool theta_allowed(const SizeSpec& spec, double theta) {
  return !spec.theta_restrict || spec.theta_restrict->contains(theta);
}

}  // namespace

double mixed_norm_model(
    const std::function<cx(double theta, double zeta, double sigma)>& integrand,
    const SizeSpec& spec,
    const std::function<double(double theta, double zeta)>* singular_sigma,
    const std::function<cx(double theta, double zeta)>* singular_trace) {
  validate_spec(spec);
  const QuadGrid q = build_quad(spec);
  const bool v_inf = std::isinf(spec.v), u_inf = std::isinf(spec.u);
  const double outer_w = q.dtheta * q.dzeta / spec.Theta.length();
  double outer_acc = 0.0, outer_sup = 0.0;
  for (double th : q.theta) {
    if (!theta_allowed(spec, th)) continue;
    for (double ze : q.zeta) {
      const double cap = 1.0 - std::abs(ze);
      double inner = 0.0;
      if (v_inf) {
        for (double si : q.sigma) {
          if (si >= cap) break;
          inner = std::max(inner, std::abs(integrand(th, ze, si)));
        }
      } else {
        // per-octave node averages feed the sigma -> 0 divergence detector: an
        // integrand tending to a nonzero constant (divergent d sigma / sigma
        // integral) makes the bottom two octaves agree, so divergence is
        // declared only when their means match within 10% both ways. A bottom
        // octave merely heavier than the next is normal decay-in-sigma hidden
        // behind profile-tail variation and must not fire. Averages (not sums)
        // so that octaves truncated by the cap or with uneven node counts do
        // not distort the comparison; at least four octaves are required.
        double acc = 0.0;
        std::vector<double> oct, cnt;
        int last_key = 0;
        bool have_key = false;
        for (double si : q.sigma) {
          if (si >= cap) break;
          const double c = std::pow(std::abs(integrand(th, ze, si)), spec.v) * q.dlog;
          const int key = static_cast<int>(std::floor(std::log2(si)));
          if (!have_key || key != last_key) {
            oct.push_back(0.0);
            cnt.push_back(0.0);
            last_key = key;
            have_key = true;
          }
          oct.back() += c;
          cnt.back() += 1.0;
          acc += c;
        }
        bool divergent = false;
        if (oct.size() >= 4) {
          const double m0 = oct[0] / cnt[0], m1 = oct[1] / cnt[1];
          double peak = 0.0;
          for (std::size_t k = 0; k < oct.size(); ++k)
            peak = std::max(peak, oct[k] / cnt[k]);
          if (m0 >= 0.9 * m1 && m1 >= 0.9 * m0 && m0 >= 1e-10 * peak && m0 > 0.0)
            divergent = true;
        }
        if (divergent) {
          inner = inf;
        } else {
          inner = std::pow(acc, 1.0 / spec.v);
        }
      }
      if (singular_sigma && singular_trace && !std::isinf(inner)) {
        const double ss = (*singular_sigma)(th, ze);
        if (ss > 0.0 && ss < cap && ss < 1.0) {
          const double tr = std::abs((*singular_trace)(th, ze));
          if (v_inf) {
            inner = std::max(inner, tr);
          } else {
            // atom of unit Haar mass at sigma = ss
            inner = std::pow(std::pow(inner, spec.v) + std::pow(tr, spec.v), 1.0 / spec.v);
          }
        }
      }
      if (u_inf)
        outer_sup = std::max(outer_sup, inner);
      else
        outer_acc += std::pow(inner, spec.u) * outer_w;
    }
  }
  return u_inf ? outer_sup : std::pow(outer_acc, 1.0 / spec.u);
}

namespace {

using Eval3 = std::function<cx(double, double, double)>;

// exact mode-sum evaluation of a source-backed field layer at a model point
Eval3 source_eval(const EmbeddedField& F, const Tree& T, std::size_t layer,
                  const FieldModes& modes, EvalBoost boost,
                  const std::optional<GammaMap>& theta_ref) {
  const WavePacket phi = F.packet_family[layer];
  const auto pull = F.pullback;
  const auto restr = F.restriction;
  const Tree tree = T;
  return [=, &modes](double th, double ze, double si) -> cx {
    const Point3 p = from_model(tree, {th, ze, si});
    if (restr && !restr->contains(p)) return cx{};
    double eta_eff = p.eta, t_eff = p.t;
    if (pull) {
      const Point3 qq = gamma_apply(*pull, p);
      eta_eff = qq.eta;
      t_eff = qq.t;
    }
    const double tt = boost == EvalBoost::none ? 0.0
                      : theta_ref              ? theta_gamma(*theta_ref, th)
                                               : th;
    return eval_modes(modes, phi, eta_eff, t_eff, p.y, boost, tt);
  };
}

// trilinear interpolation of grid values; points outside the grid hull (or
// inside the optional boundary collar) evaluate to zero
Eval3 grid_eval(const EmbeddedField& F, const Tree& T, std::size_t layer,
                const std::function<bool(const Point3&)>* collar) {
  const Tree tree = T;
  return [&F, tree, layer, collar](double th, double ze, double si) -> cx {
    const Point3 p = from_model(tree, {th, ze, si});
    if (collar && (*collar)(p)) return cx{};
    bool edge = false;
    const cx val = field_at(F, layer, p.eta, p.y, p.t, &edge);
    return edge ? cx{} : val;
  };
}

// bilinear interpolation of a singular trace sheet over the (eta, y) grid
cx trace_at(const EmbeddedField& F, std::size_t layer, double eta, double y) {
  const Grid3& gr = F.grid;
  const auto& tr = F.singular_part->trace[layer];
  double pe = 0.0, py = 0.0;
  if (gr.n_eta() > 1) pe = (eta - gr.eta_nodes.front()) / gr.deta();
  if (gr.n_y() > 1) py = (y - gr.y_nodes.front()) / gr.dy();
  if (pe < -1e-9 || pe > static_cast<double>(gr.n_eta() - 1) + 1e-9) return cx{};
  if (py < -1e-9 || py > static_cast<double>(gr.n_y() - 1) + 1e-9) return cx{};
  pe = std::clamp(pe, 0.0, static_cast<double>(gr.n_eta() - 1));
  py = std::clamp(py, 0.0, static_cast<double>(gr.n_y() - 1));
  const auto ie = static_cast<std::size_t>(pe);
  const auto iy = static_cast<std::size_t>(py);
  const double fe = pe - static_cast<double>(ie);
  const double fy = py - static_cast<double>(iy);
  cx acc{};
  for (int de = 0; de < 2; ++de)
    for (int dy2 = 0; dy2 < 2; ++dy2) {
      const std::size_t je = std::min(ie + static_cast<std::size_t>(de), gr.n_eta() - 1);
      const std::size_t jy = std::min(iy + static_cast<std::size_t>(dy2), gr.n_y() - 1);
      const double w = (de ? fe : 1.0 - fe) * (dy2 ? fy : 1.0 - fy);
      if (w != 0.0) acc += w * tr[je * gr.n_y() + jy];
    }
  return acc;
}

void check_singular_exponent(double v) {
  if (!(v == 1.0 || v == 2.0 || std::isinf(v)))
    throw parameter_error(
        "size with a graph-supported singular layer: v must be 1, 2, or inf");
}

std::size_t layer_count(const EmbeddedField& F) {
  return F.source ? F.packet_family.size() : F.values.size();
}

// exact replacement for the interpolated singular trace (layer, model point)
using TraceFn = std::function<cx(std::size_t, double, double, double)>;

double field_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec,
                  EvalBoost boost, const std::function<bool(const Point3&)>* collar,
                  const TraceFn* exact_trace = nullptr) {
  const bool has_singular = F.singular_part && F.singular_part->is_measure;
  if (has_singular) check_singular_exponent(spec.v);
  std::optional<ModelBoundary> mb;
  if (has_singular) mb = pullback_boundary(T, F.singular_part->b);
  FieldModes modes;
  if (F.source) modes = field_modes(*F.source);
  double best = 0.0;
  for (std::size_t layer = 0; layer < layer_count(F); ++layer) {
    Eval3 ev = F.source ? source_eval(F, T, layer, modes, boost, spec.gamma)
                        : grid_eval(F, T, layer, collar);
    if (has_singular) {
      const Tree tree = T;
      std::function<double(double, double)> fs = [&mb](double th, double ze) {
        return mb->bstar(th, ze);
      };
      std::function<cx(double, double)> ft = [&](double th, double ze) -> cx {
        const double ss = mb->bstar(th, ze);
        if (!(ss > 0.0 && ss < 1.0)) return cx{};
        if (exact_trace) return (*exact_trace)(layer, th, ze, ss);
        const Point3 p = from_model(tree, {th, ze, ss});
        return trace_at(F, layer, p.eta, p.y);
      };
      best = std::max(best, mixed_norm_model(ev, spec, &fs, &ft));
    } else {
      best = std::max(best, mixed_norm_model(ev, spec));
    }
  }
  return best;
}

}  // namespace

double lebesgue_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec) {
  validate_spec(spec);
  return field_size(F, T, spec, EvalBoost::none, nullptr);
}

double lacunary_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec) {
  validate_spec(spec);
  if (!F.source)
    throw precondition_error("lacunary_size: needs a source-backed field for the boost");
  return field_size(F, T, spec, EvalBoost::zeta, nullptr);
}

double defect_size(const EmbeddedField& F, const Tree& T, BoostKindField kind,
                   const SizeSpec& spec) {
  validate_spec(spec);
  const std::optional<GammaMap> g = spec.gamma ? spec.gamma : F.pullback;
  EmbeddedField D = defect_field(F, T, kind, g);
  std::optional<std::function<bool(const Point3&)>> collar;
  std::optional<TraceFn> exact_trace;
  if (D.singular_part && F.source) {
    // re-derive the graph trace from the source at the exact quadrature
    // points; the per-grid-node sheet cannot cover model points whose eta
    // leaves the grid hull
    const BoundaryFn bf = D.singular_part->b;
    const double c_y = g ? g->beta : 1.0;
    const auto pull = F.pullback;
    const Tree tree = T;
    const auto modes = std::make_shared<FieldModes>(field_modes(*F.source));
    const auto family = F.packet_family;
    exact_trace = [bf, c_y, pull, tree, modes, family, kind](
                      std::size_t layer, double th, double ze, double ss) -> cx {
      const Point3 p = from_model(tree, {th, ze, ss});
      double eta_eff = p.eta, t_eff = p.t;
      if (pull) {
        const Point3 qq = gamma_apply(*pull, p);
        eta_eff = qq.eta;
        t_eff = qq.t;
      }
      const cx val = eval_modes(*modes, family[layer], eta_eff, t_eff, p.y);
      if (kind == BoostKindField::sigma) return val;
      const double h = 1e-6;
      const double bp = (bf.b(p.eta, p.y + h) - bf.b(p.eta, p.y - h)) / (2.0 * h);
      return -c_y * bp * val;
    };
  }
  if (D.singular_part) {
    // the finite-difference stencils spread the boundary jump over a few
    // cells; the absolutely continuous part is the values away from that
    // collar, the jump itself lives in the singular layer
    const BoundaryFn b = D.singular_part->b;
    const double my = 2.5 * F.grid.dy();
    const double me = 2.5 * F.grid.deta();
    const double mt = std::exp(2.5 * std::max(F.grid.log_ratio(), 1e-12));
    collar = [b, my, me, mt](const Point3& p) {
      auto below = [&b](double eta, double y, double t) { return t < b.b(eta, y); };
      const bool c0 = below(p.eta, p.y, p.t);
      if (below(p.eta, p.y, p.t * mt) != c0 || below(p.eta, p.y, p.t / mt) != c0)
        return true;
      if (below(p.eta, p.y + my, p.t) != c0 || below(p.eta, p.y - my, p.t) != c0)
        return true;
      if (below(p.eta + me, p.y, p.t) != c0 || below(p.eta - me, p.y, p.t) != c0)
        return true;
      return false;
    };
  }
  return field_size(D, T, spec, EvalBoost::none, collar ? &*collar : nullptr,
                    exact_trace ? &*exact_trace : nullptr);
}

double sio_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec) {
  validate_spec(spec);
  if (!F.source)
    throw precondition_error("sio_size: needs a source-backed field for the boost");
  const QuadGrid q = build_quad(spec);
  const bool u_inf = std::isinf(spec.u);
  const double outer_w = q.dtheta * q.dzeta / spec.Theta.length();
  FieldModes modes = field_modes(*F.source);
  double best = 0.0;
  for (std::size_t layer = 0; layer < layer_count(F); ++layer) {
    Eval3 ev = source_eval(F, T, layer, modes, EvalBoost::zeta, spec.gamma);
    double outer_acc = 0.0, outer_sup = 0.0;
    for (double th : q.theta) {
      if (!theta_allowed(spec, th)) continue;
      for (double ze : q.zeta) {
        const double cap = 1.0 - std::abs(ze);
        // suffix partial sums over ascending sigma = truncations from below
        std::vector<cx> terms;
        for (double si : q.sigma) {
          if (si >= cap) break;
          terms.push_back(ev(th, ze, si) * q.dlog);
        }
        cx run{};
        double sup_trunc = 0.0;
        for (auto it = terms.rbegin(); it != terms.rend(); ++it) {
          run += *it;
          sup_trunc = std::max(sup_trunc, std::abs(run));
        }
        if (u_inf)
          outer_sup = std::max(outer_sup, sup_trunc);
        else
          outer_acc += std::pow(sup_trunc, spec.u) * outer_w;
      }
    }
    best = std::max(best, u_inf ? outer_sup : std::pow(outer_acc, 1.0 / spec.u));
  }
  return best;
}

GammaMap gamma_one(double beta) { return {1.0 / beta, beta, 0.0}; }

IntegralSizeResult integral_size(const TripleField& H, const Tree& T,
                                 const std::array<char, 3>& pattern, const SizeSpec& spec) {
  validate_spec(spec);
  for (char c : pattern)
    if (c != 'o' && c != 'l')
      throw parameter_error("integral_size: pattern entries must be 'o' or 'l'");
  const std::array<const TripleFactor*, 3> fac{&H.f1, &H.f2, &H.f3};
  for (const auto* f : fac) validate(f->g);
  const WavePacket omega = make_reference_bump(1.0);
  std::array<FieldModes, 3> modes;
  for (int j = 0; j < 3; ++j) modes[j] = field_modes(fac[j]->f);
  const QuadGrid q = build_quad(spec);
  IntegralSizeResult res;
  res.flagged_vanishing = (pattern == std::array<char, 3>{'o', 'o', 'l'} ||
                           pattern == std::array<char, 3>{'o', 'l', 'o'});
  double acc = 0.0, acc_coarse = 0.0;
  for (double th : q.theta) {
    if (!theta_allowed(spec, th)) continue;
    std::array<cx, 3> c{};
    for (int j = 0; j < 3; ++j) c[j] = H.phi.at(theta_gamma(fac[j]->g, th));
    cx inner{}, inner_coarse{};
    for (double ze : q.zeta) {
      const double cap = 1.0 - std::abs(ze);
      for (double si : q.sigma) {
        if (si >= cap) break;
        const Point3 p = from_model(T, {th, ze, si});
        cx prod{1.0, 0.0};
        for (int j = 0; j < 3; ++j) {
          const Point3 qq = gamma_apply(fac[j]->g, p);
          const cx ov = c[j] * eval_modes(modes[j], omega, qq.eta, qq.t, p.y);
          cx val;
          if (pattern[static_cast<std::size_t>(j)] == 'o')
            val = ov;
          else
            val = eval_modes(modes[j], H.phi, qq.eta, qq.t, p.y) - ov;
          prod *= val;
          if (prod == cx{}) break;
        }
        const cx w = prod * q.dzeta * q.dlog;
        inner += w;
        if (si >= 2.0 * spec.quad.sigma_min) inner_coarse += w;
      }
    }
    acc += std::abs(inner) * q.dtheta / spec.Theta.length();
    acc_coarse += std::abs(inner_coarse) * q.dtheta / spec.Theta.length();
  }
  res.value = acc;
  res.value_coarse = acc_coarse;
  return res;
}

namespace {

SizeSpec with_exp(const SizeSpec& base, double u, double v) {
  SizeSpec s = base;
  s.u = u;
  s.v = v;
  return s;
}

}  // namespace

CompositeBreakdown composite_nonuniform(const EmbeddedField& F, const Tree& T, double u,
                                        const SizeSpec& spec) {
  validate_spec(spec);
  CompositeBreakdown out;
  out.parts.emplace_back("lebesgue(inf,inf)", lebesgue_size(F, T, with_exp(spec, inf, inf)));
  out.parts.emplace_back("lacunary(u,2)", lacunary_size(F, T, with_exp(spec, u, 2.0)));
  out.parts.emplace_back("defect_zeta(u,1)",
                         defect_size(F, T, BoostKindField::zeta, with_exp(spec, u, 1.0)));
  out.parts.emplace_back("defect_sigma(u,1)",
                         defect_size(F, T, BoostKindField::sigma, with_exp(spec, u, 1.0)));
  out.parts.emplace_back("truncation(u)", sio_size(F, T, with_exp(spec, u, 1.0)));
  for (const auto& [name, val] : out.parts) out.total += val;
  return out;
}

CompositeBreakdown composite_uniform_linear(const EmbeddedField& F, const Tree& T, double u,
                                            double beta, const GammaMap& g,
                                            const Interval& theta_in, const SizeSpec& spec) {
  validate_spec(spec);
  validate(g);
  if (!(beta > 0.0)) throw parameter_error("composite_uniform_linear: beta must be positive");
  const double c = -g.gamma;
  if (!(theta_in.lo > c - 0x1p-3 && theta_in.lo < c - 0x1p-5 && theta_in.hi > c + 0x1p-5 &&
        theta_in.hi < c + 0x1p-3))
    throw parameter_error(
        "composite_uniform_linear: theta_in must strictly separate the balls of radius "
        "2^-5 and 2^-3 about -gamma");
  SizeSpec base = spec;
  base.gamma = g;
  CompositeBreakdown out;
  out.parts.emplace_back("beta^(1/u) lebesgue(u,inf)",
                         std::pow(beta, 1.0 / u) * lebesgue_size(F, T, with_exp(base, u, inf)));
  out.parts.emplace_back("lacunary(u,2)", lacunary_size(F, T, with_exp(base, u, 2.0)));
  out.parts.emplace_back("defect_zeta(u,1)",
                         defect_size(F, T, BoostKindField::zeta, with_exp(base, u, 1.0)));
  SizeSpec inner = with_exp(base, u, 1.0);
  inner.theta_restrict = theta_in;
  out.parts.emplace_back("defect_sigma(u,1;theta_in)",
                         defect_size(F, T, BoostKindField::sigma, inner));
  for (const auto& [name, val] : out.parts) out.total += val;
  return out;
}

CompositeBreakdown composite_uniform_bilinear(const ProductField& H, const Tree& T,
                                              double u, const SizeSpec& spec) {
  validate_spec(spec);
  const double beta = H.pullback2 ? H.pullback2->beta : 1.0;
  CompositeBreakdown out;
  out.parts.emplace_back(
      "beta^(1/u) product(u,inf)",
      std::pow(beta, 1.0 / u) *
          product_size(H, T, ProductVariant::phi_phi, with_exp(spec, u, inf)));
  out.parts.emplace_back("product_phi_d(u,2)",
                         product_size(H, T, ProductVariant::phi_d, with_exp(spec, u, 2.0)));
  out.parts.emplace_back("product_d_phi(u,2)",
                         product_size(H, T, ProductVariant::d_phi, with_exp(spec, u, 2.0)));
  out.parts.emplace_back(
      "defect_zeta(u,1)",
      product_size(H, T, ProductVariant::defect_zeta, with_exp(spec, u, 1.0)));
  out.parts.emplace_back(
      "defect_sigma(u,1)",
      product_size(H, T, ProductVariant::defect_sigma, with_exp(spec, u, 1.0)));
  for (const auto& [name, val] : out.parts) out.total += val;
  return out;
}

double product_size(const ProductField& H, const Tree& T, ProductVariant variant,
                    const SizeSpec& spec) {
  validate_spec(spec);
  const bool have_src = H.source2 && H.source3;
  if (!have_src && variant != ProductVariant::phi_phi)
    throw precondition_error("product_size: boosted variants need source-backed factors");
  const bool is_defect =
      variant == ProductVariant::defect_zeta || variant == ProductVariant::defect_sigma;
  if (is_defect && (!H.pullback2 || !H.pullback3))
    throw precondition_error("product_size: defect variants need Gamma-pulled factors");
  FieldModes modes2, modes3;
  if (have_src) {
    modes2 = field_modes(*H.source2);
    modes3 = field_modes(*H.source3);
  }
  const std::size_t n3 = H.family3.size();
  double best = 0.0;
  for (std::size_t l2 = 0; l2 < H.family2.size(); ++l2)
    for (std::size_t l3 = 0; l3 < n3; ++l3) {
      Eval3 ev;
      EmbeddedField view;  // shallow wrapper so the field interpolator applies
      if (!have_src) {
        view.grid = H.grid;
        view.packet_family = {H.family2[l2]};
        view.values = {H.values[l2 * n3 + l3]};
        const Tree tree = T;
        ev = [&view, tree](double th, double ze, double si) -> cx {
          const Point3 p = from_model(tree, {th, ze, si});
          bool edge = false;
          const cx val = field_at(view, 0, p.eta, p.y, p.t, &edge);
          return edge ? cx{} : val;
        };
      } else {
        const WavePacket phi2 = H.family2[l2], phi3 = H.family3[l3];
        const auto pull2 = H.pullback2, pull3 = H.pullback3;
        const Tree tree = T;
        auto f2 = [&modes2, phi2, pull2](const Point3& p, EvalBoost b, double tt) -> cx {
          const Point3 qq = pull2 ? gamma_apply(*pull2, p) : p;
          return eval_modes(modes2, phi2, qq.eta, qq.t, p.y, b, tt);
        };
        auto f3 = [&modes3, phi3, pull3](const Point3& p, EvalBoost b, double tt) -> cx {
          const Point3 qq = pull3 ? gamma_apply(*pull3, p) : p;
          return eval_modes(modes3, phi3, qq.eta, qq.t, p.y, b, tt);
        };
        ev = [=](double th, double ze, double si) -> cx {
          const Point3 p = from_model(tree, {th, ze, si});
          const double tt2 = pull2 ? theta_gamma(*pull2, th) : th;
          const double tt3 = pull3 ? theta_gamma(*pull3, th) : th;
          switch (variant) {
            case ProductVariant::phi_phi:
              return f2(p, EvalBoost::none, 0.0) * f3(p, EvalBoost::none, 0.0);
            case ProductVariant::phi_d:
              return f2(p, EvalBoost::none, 0.0) * f3(p, EvalBoost::zeta, tt3);
            case ProductVariant::d_phi:
              return f2(p, EvalBoost::zeta, tt2) * f3(p, EvalBoost::none, 0.0);
            case ProductVariant::d_d:
              return f2(p, EvalBoost::zeta, tt2) * f3(p, EvalBoost::zeta, tt3);
            case ProductVariant::defect_zeta: {
              const double beta = pull2->beta;
              auto prod = [&](const Point3& pp) {
                return f2(pp, EvalBoost::none, 0.0) * f3(pp, EvalBoost::none, 0.0);
              };
              const cx a2 = f2(p, EvalBoost::zeta, tt2) * f3(p, EvalBoost::none, 0.0);
              const cx a3 = f2(p, EvalBoost::none, 0.0) * f3(p, EvalBoost::zeta, tt3);
              const double hy = 1e-4;
              const cx dyH =
                  (prod({p.eta, p.y + hy, p.t}) - prod({p.eta, p.y - hy, p.t})) / (2.0 * hy);
              const cx hv = prod(p);
              return a2 + a3 - beta * p.t * dyH +
                     2.0 * pi * iu * (pull2->alpha + pull3->alpha) * beta * p.t * tree.xi * hv;
            }
            case ProductVariant::defect_sigma: {
              auto prod = [&](const Point3& pp) {
                return f2(pp, EvalBoost::none, 0.0) * f3(pp, EvalBoost::none, 0.0);
              };
              const cx s2 = f2(p, EvalBoost::sigma, tt2) * f3(p, EvalBoost::none, 0.0);
              const cx s3 = f2(p, EvalBoost::none, 0.0) * f3(p, EvalBoost::sigma, tt3);
              const double hl = 1e-5;
              const cx dtH = (prod({p.eta, p.y, p.t * std::exp(hl)}) -
                              prod({p.eta, p.y, p.t * std::exp(-hl)})) /
                             (2.0 * hl);
              const double he =
                  1e-4 * std::min(phi2.r, phi3.r) / (2.0 * p.t);
              const cx deH =
                  (prod({p.eta + he, p.y, p.t}) - prod({p.eta - he, p.y, p.t})) / (2.0 * he);
              return s2 + s3 - dtH + (p.eta - tree.xi) * deH;
            }
          }
          return cx{};
        };
      }
      best = std::max(best, mixed_norm_model(ev, spec));
    }
  return best;
}

namespace {

nlohmann::json exp_json(double e) {
  if (std::isinf(e)) return nlohmann::json("inf");
  return nlohmann::json(e);
}

}  // namespace

std::string size_report_json(const Tree& T, const std::string& kind, double u, double v,
                             double value, const CompositeBreakdown* breakdown) {
  nlohmann::json j;
  j["tree"] = {{"xi", T.xi}, {"x", T.x}, {"s", T.s}, {"theta", {T.theta.lo, T.theta.hi}}};
  j["size_kind"] = kind;
  j["exponents"] = {{"u", exp_json(u)}, {"v", exp_json(v)}};
  j["value"] = exp_json(value);
  if (breakdown) {
    nlohmann::json parts = nlohmann::json::object();
    for (const auto& [name, val] : breakdown->parts) parts[name] = exp_json(val);
    j["constituent_breakdown"] = parts;
    j["total"] = exp_json(breakdown->total);
  }
  return j.dump(2);
}

}  // namespace tfa
