#include "tfa/embedding.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace tfa {

double Grid3::deta() const {
  if (eta_nodes.size() < 2) return 0.0;
  return eta_nodes[1] - eta_nodes[0];
}

double Grid3::dy() const {
  if (y_nodes.size() < 2) return 0.0;
  return y_nodes[1] - y_nodes[0];
}

double Grid3::log_ratio() const {
  if (t_nodes.size() < 2) return 0.0;
  return std::log(t_nodes[1] / t_nodes[0]);
}

void Grid3::validate() const {
  if (eta_nodes.empty() || y_nodes.empty() || t_nodes.empty())
    throw parameter_error("Grid3: empty axis");
  for (std::size_t i = 1; i < eta_nodes.size(); ++i)
    if (std::abs((eta_nodes[i] - eta_nodes[i - 1]) - deta()) > 1e-9 * (1.0 + std::abs(deta())))
      throw parameter_error("Grid3: eta axis not uniform");
  for (std::size_t i = 1; i < y_nodes.size(); ++i)
    if (std::abs((y_nodes[i] - y_nodes[i - 1]) - dy()) > 1e-9 * (1.0 + std::abs(dy())))
      throw parameter_error("Grid3: y axis not uniform");
  if (t_nodes.front() <= 0.0) throw parameter_error("Grid3: t axis must be positive");
  if (t_nodes.size() >= 2) {
    const double rho = t_nodes[1] / t_nodes[0];
    if (!(rho > 1.0 && rho <= 2.0)) throw parameter_error("Grid3: t ratio must lie in (1, 2]");
    for (std::size_t i = 1; i < t_nodes.size(); ++i)
      if (std::abs(t_nodes[i] / t_nodes[i - 1] - rho) > 1e-9)
        throw parameter_error("Grid3: t axis not geometric");
  }
}

Grid3 make_grid3(double eta_lo, double eta_hi, std::size_t n_eta, double y_lo,
                 double y_hi, std::size_t n_y, double t_lo, std::size_t n_t,
                 double ratio) {
  if (n_eta == 0 || n_y == 0 || n_t == 0) throw parameter_error("make_grid3: empty axis");
  if (!(ratio > 1.0 && ratio <= 2.0)) throw parameter_error("make_grid3: ratio must lie in (1, 2]");
  if (t_lo <= 0.0) throw parameter_error("make_grid3: t_lo must be positive");
  Grid3 g;
  g.eta_nodes.resize(n_eta);
  for (std::size_t i = 0; i < n_eta; ++i)
    g.eta_nodes[i] = n_eta == 1 ? eta_lo
                                : eta_lo + (eta_hi - eta_lo) * static_cast<double>(i) /
                                      static_cast<double>(n_eta - 1);
  g.y_nodes.resize(n_y);
  for (std::size_t i = 0; i < n_y; ++i)
    g.y_nodes[i] = n_y == 1 ? y_lo
                            : y_lo + (y_hi - y_lo) * static_cast<double>(i) /
                                  static_cast<double>(n_y - 1);
  g.t_nodes.resize(n_t);
  double t = t_lo;
  for (std::size_t i = 0; i < n_t; ++i, t *= ratio) g.t_nodes[i] = t;
  g.validate();
  return g;
}

void validate(const GammaMap& g) {
  if (!(g.beta > 0.0 && g.beta <= 1.0))
    throw parameter_error("GammaMap: beta must lie in (0, 1]");
  const double ab = std::abs(g.alpha * g.beta);
  if (!(ab > 0.5 && ab < 2.0))
    throw parameter_error("GammaMap: |alpha beta| must lie in (1/2, 2)");
  // |gamma| = 1 is admitted: the first canonical parameter change uses gamma = -1
  if (!(std::abs(g.gamma) <= 1.0)) throw parameter_error("GammaMap: |gamma| must be <= 1");
}

Point3 gamma_apply(const GammaMap& g, const Point3& p) {
  if (p.t <= 0.0) throw precondition_error("gamma_apply: t must be positive");
  return {g.alpha * (p.eta + g.gamma / p.t), p.y, g.beta * p.t};
}

Point3 gamma_invert(const GammaMap& g, const Point3& p) {
  if (p.t <= 0.0) throw precondition_error("gamma_invert: t must be positive");
  const double t = p.t / g.beta;
  return {p.eta / g.alpha - g.gamma / t, p.y, t};
}

double theta_gamma(const GammaMap& g, double theta) {
  return g.alpha * g.beta * (theta + g.gamma);
}

GammaMap gamma_two(double beta) { return {1.0 / beta, beta, -1.0}; }
GammaMap gamma_three(double beta) { return {-(1.0 + beta) / beta, beta, -1.0 / (1.0 + beta)}; }

namespace {

FieldModes occupied_modes(const SampledSignal& f) {
  auto fh = spectrum(f);
  double peak = 0.0;
  for (const auto& c : fh) peak = std::max(peak, std::abs(c));
  FieldModes modes;
  const double thresh = peak * 1e-14;
  SampledSignal probe = f;
  for (std::size_t j = 0; j < fh.size(); ++j)
    if (std::abs(fh[j]) > thresh) {
      modes.xi.push_back(probe.xi(j));
      modes.coeff.push_back(fh[j] * probe.dxi());
    }
  return modes;
}

enum class BoostApply { none, zeta, sigma };

// packet profile derivative by the same centered step boost_packet uses
cx profile_deriv(const WavePacket& phi, double u) {
  const double h = std::max(phi.r * 1e-6, 1e-12);
  return (phi.at(u + h) - phi.at(u - h)) / (2.0 * h);
}

// sum over modes of coeff * factor(p at t_eff (eta_eff - xi)) * e^{2 pi i xi y}
cx eval_point(const FieldModes& modes, const WavePacket& phi, double eta_eff,
              double t_eff, double y, BoostApply boost, double theta_tilde) {
  cx acc{};
  for (std::size_t mi = 0; mi < modes.xi.size(); ++mi) {
    const double w = t_eff * (eta_eff - modes.xi[mi]);
    // outside the support both the profile and its derivative stencil vanish
    const double pad =
        boost == BoostApply::sigma ? 2.0 * std::max(phi.r * 1e-6, 1e-12) : 0.0;
    if (std::abs(w) >= phi.r + pad) continue;
    cx factor;
    switch (boost) {
      case BoostApply::none:
        factor = phi.at(w);
        break;
      case BoostApply::zeta:
        factor = 2.0 * pi * iu * (theta_tilde - w) * phi.at(w);
        break;
      case BoostApply::sigma:
        factor = (w - theta_tilde) * profile_deriv(phi, w);
        break;
    }
    if (factor == cx{}) continue;
    acc += modes.coeff[mi] * factor * std::exp(2.0 * pi * iu * modes.xi[mi] * y);
  }
  return acc;
}

void check_resolution(const SampledSignal&, const Grid3& grid, const WavePacket& phi) {
  grid.validate();
  double max_eta = 0.0;
  for (double e : grid.eta_nodes) max_eta = std::max(max_eta, std::abs(e));
  const double osc = max_eta + phi.r / grid.t_nodes.front();
  if (grid.y_nodes.size() >= 2 && grid.dy() > 1.0 / (2.0 * osc))
    throw precondition_error(
        "embed: y spacing cannot resolve the oscillation at the smallest scale");
}

EmbeddedField embed_impl(const SampledSignal& f, const Grid3& grid, const WavePacket& phi,
                         const std::optional<GammaMap>& g) {
  check_resolution(f, grid, phi);
  if (g) validate(*g);
  EmbeddedField F;
  F.grid = grid;
  F.packet_family = {phi};
  F.values.assign(1, std::vector<cx>(grid.n_points(), cx{}));
  F.source = f;
  F.pullback = g;
  auto modes = occupied_modes(f);
  auto& out = F.values[0];
  for (std::size_t it = 0; it < grid.n_t(); ++it) {
    const double t = grid.t_nodes[it];
    for (std::size_t ie = 0; ie < grid.n_eta(); ++ie) {
      double eta_eff = grid.eta_nodes[ie], t_eff = t;
      if (g) {
        const Point3 q = gamma_apply(*g, {eta_eff, 0.0, t});
        eta_eff = q.eta;
        t_eff = q.t;
      }
      for (std::size_t iy = 0; iy < grid.n_y(); ++iy)
        out[grid.index(ie, iy, it)] =
            eval_point(modes, phi, eta_eff, t_eff, grid.y_nodes[iy], BoostApply::none, 0.0);
    }
  }
  return F;
}

}  // namespace

EmbeddedField embed(const SampledSignal& f, const Grid3& grid, const WavePacket& phi) {
  return embed_impl(f, grid, phi, std::nullopt);
}

EmbeddedField embed_gamma(const SampledSignal& f, const Grid3& grid, const WavePacket& phi,
                          const GammaMap& g) {
  return embed_impl(f, grid, phi, g);
}

FieldModes field_modes(const SampledSignal& f) { return occupied_modes(f); }

cx eval_modes(const FieldModes& modes, const WavePacket& phi, double eta_eff, double t_eff,
              double y, EvalBoost boost, double theta_tilde) {
  const BoostApply ba = boost == EvalBoost::none   ? BoostApply::none
                        : boost == EvalBoost::zeta ? BoostApply::zeta
                                                   : BoostApply::sigma;
  return eval_point(modes, phi, eta_eff, t_eff, y, ba, theta_tilde);
}

cx eval_source(const EmbeddedField& F, std::size_t layer, const Point3& p, EvalBoost boost,
               double theta_tilde) {
  if (!F.source) throw precondition_error("eval_source: field has no source signal");
  if (layer >= F.packet_family.size()) throw parameter_error("eval_source: layer out of range");
  if (p.t <= 0.0) throw precondition_error("eval_source: t must be positive");
  if (F.restriction && !F.restriction->contains(p)) return cx{};
  double eta_eff = p.eta, t_eff = p.t;
  if (F.pullback) {
    const Point3 q = gamma_apply(*F.pullback, p);
    eta_eff = q.eta;
    t_eff = q.t;
  }
  const BoostApply ba = boost == EvalBoost::none   ? BoostApply::none
                        : boost == EvalBoost::zeta ? BoostApply::zeta
                                                   : BoostApply::sigma;
  auto modes = occupied_modes(*F.source);
  return eval_point(modes, F.packet_family[layer], eta_eff, t_eff, p.y, ba, theta_tilde);
}

cx field_at(const EmbeddedField& F, std::size_t layer, double eta, double y, double t,
            bool* edge) {
  const Grid3& gr = F.grid;
  if (layer >= F.values.size()) throw parameter_error("field_at: layer out of range");
  auto locate = [&](const std::vector<double>& ax, double v, bool geometric) {
    double pos;
    if (ax.size() == 1) {
      pos = 0.0;
    } else if (geometric) {
      pos = std::log(v / ax.front()) / std::log(ax[1] / ax[0]);
    } else {
      pos = (v - ax.front()) / (ax[1] - ax[0]);
    }
    bool clamped = false;
    if (pos < 0.0) {
      pos = 0.0;
      clamped = true;
    }
    if (pos > static_cast<double>(ax.size() - 1)) {
      pos = static_cast<double>(ax.size() - 1);
      clamped = true;
    }
    return std::pair<double, bool>(pos, clamped);
  };
  if (t <= 0.0) throw precondition_error("field_at: t must be positive");
  auto [pe, ce] = locate(gr.eta_nodes, eta, false);
  auto [py, cy] = locate(gr.y_nodes, y, false);
  auto [pt, ct] = locate(gr.t_nodes, t, true);
  if (edge) *edge = ce || cy || ct;
  const auto ie = static_cast<std::size_t>(pe);
  const auto iy = static_cast<std::size_t>(py);
  const auto it = static_cast<std::size_t>(pt);
  const double fe = pe - static_cast<double>(ie);
  const double fy = py - static_cast<double>(iy);
  const double ft = pt - static_cast<double>(it);
  const auto& v = F.values[layer];
  cx acc{};
  for (int de = 0; de < 2; ++de)
    for (int dy2 = 0; dy2 < 2; ++dy2)
      for (int dt = 0; dt < 2; ++dt) {
        const std::size_t je = std::min(ie + static_cast<std::size_t>(de), gr.n_eta() - 1);
        const std::size_t jy = std::min(iy + static_cast<std::size_t>(dy2), gr.n_y() - 1);
        const std::size_t jt = std::min(it + static_cast<std::size_t>(dt), gr.n_t() - 1);
        const double w = (de ? fe : 1.0 - fe) * (dy2 ? fy : 1.0 - fy) * (dt ? ft : 1.0 - ft);
        if (w != 0.0) acc += w * v[gr.index(je, jy, jt)];
      }
  return acc;
}

EmbeddedField field_boost(const EmbeddedField& F, const Tree& T, BoostKindField kind,
                          const std::optional<GammaMap>& g) {
  if (g) validate(*g);
  EmbeddedField out;
  out.grid = F.grid;
  out.packet_family.reserve(F.packet_family.size());
  for (const auto& p : F.packet_family)
    out.packet_family.push_back(boost_packet(
        p, 0.0, kind == BoostKindField::zeta ? BoostKind::zeta : BoostKind::sigma));
  if (!F.source) {
    out.values = F.values;  // layer substitution only
    out.singular_part = F.singular_part;
    return out;
  }
  auto modes = occupied_modes(*F.source);
  const Grid3& gr = F.grid;
  out.values.assign(F.values.size(), std::vector<cx>(gr.n_points(), cx{}));
  const BoostApply ba = kind == BoostKindField::zeta ? BoostApply::zeta : BoostApply::sigma;
  for (std::size_t layer = 0; layer < F.packet_family.size(); ++layer) {
    const WavePacket& phi = F.packet_family[layer];
    auto& v = out.values[layer];
    for (std::size_t it = 0; it < gr.n_t(); ++it) {
      const double t = gr.t_nodes[it];
      for (std::size_t ie = 0; ie < gr.n_eta(); ++ie) {
        const double eta = gr.eta_nodes[ie];
        const double theta = t * (eta - T.xi);
        const double theta_tilde = g ? theta_gamma(*g, theta) : theta;
        double eta_eff = eta, t_eff = t;
        if (F.pullback) {
          const Point3 q = gamma_apply(*F.pullback, {eta, 0.0, t});
          eta_eff = q.eta;
          t_eff = q.t;
        }
        for (std::size_t iy = 0; iy < gr.n_y(); ++iy) {
          // a restriction indicator commutes with the boost (a multiplication
          // operator), so it is applied to the re-embedded values as well
          if (F.restriction &&
              !F.restriction->contains({eta, gr.y_nodes[iy], t})) continue;
          v[gr.index(ie, iy, it)] =
              eval_point(modes, phi, eta_eff, t_eff, gr.y_nodes[iy], ba, theta_tilde);
        }
      }
    }
  }
  out.restriction = F.restriction;
  return out;
}

namespace {

// centered differences, one-sided at the edges
cx diff_y(const std::vector<cx>& v, const Grid3& g, std::size_t ie, std::size_t iy,
          std::size_t it) {
  const double h = g.dy();
  if (g.n_y() == 1) return cx{};
  if (iy == 0) return (v[g.index(ie, 1, it)] - v[g.index(ie, 0, it)]) / h;
  if (iy == g.n_y() - 1)
    return (v[g.index(ie, iy, it)] - v[g.index(ie, iy - 1, it)]) / h;
  return (v[g.index(ie, iy + 1, it)] - v[g.index(ie, iy - 1, it)]) / (2.0 * h);
}

cx diff_eta(const std::vector<cx>& v, const Grid3& g, std::size_t ie, std::size_t iy,
            std::size_t it) {
  const double h = g.deta();
  if (g.n_eta() == 1) return cx{};
  if (ie == 0) return (v[g.index(1, iy, it)] - v[g.index(0, iy, it)]) / h;
  if (ie == g.n_eta() - 1)
    return (v[g.index(ie, iy, it)] - v[g.index(ie - 1, iy, it)]) / h;
  return (v[g.index(ie + 1, iy, it)] - v[g.index(ie - 1, iy, it)]) / (2.0 * h);
}

// t d_t as a plain difference in log t on the geometric grid
cx t_diff_t(const std::vector<cx>& v, const Grid3& g, std::size_t ie, std::size_t iy,
            std::size_t it) {
  const double h = g.log_ratio();
  if (g.n_t() == 1) return cx{};
  if (it == 0) return (v[g.index(ie, iy, 1)] - v[g.index(ie, iy, 0)]) / h;
  if (it == g.n_t() - 1)
    return (v[g.index(ie, iy, it)] - v[g.index(ie, iy, it - 1)]) / h;
  return (v[g.index(ie, iy, it + 1)] - v[g.index(ie, iy, it - 1)]) / (2.0 * h);
}

}  // namespace

EmbeddedField defect_field(const EmbeddedField& F, const Tree& T, BoostKindField kind,
                           const std::optional<GammaMap>& g) {
  if (!F.source)
    throw precondition_error("defect_field: needs a source-backed field for the boost term");
  if (g) {
    validate(*g);
    if (!F.pullback)
      throw precondition_error("defect_field: Gamma variant requires a Gamma-pulled field");
  }
  EmbeddedField boosted = field_boost(F, T, kind, g);
  const Grid3& gr = F.grid;
  EmbeddedField out;
  out.grid = gr;
  out.packet_family = F.packet_family;
  out.values.assign(F.values.size(), std::vector<cx>(gr.n_points(), cx{}));
  const double c_y = g ? g->beta : 1.0;
  const double c_m = g ? g->alpha * g->beta : 1.0;
  for (std::size_t layer = 0; layer < F.values.size(); ++layer) {
    const auto& v = F.values[layer];
    const auto& bv = boosted.values[layer];
    auto& o = out.values[layer];
    for (std::size_t it = 0; it < gr.n_t(); ++it) {
      const double t = gr.t_nodes[it];
      for (std::size_t ie = 0; ie < gr.n_eta(); ++ie) {
        const double eta = gr.eta_nodes[ie];
        for (std::size_t iy = 0; iy < gr.n_y(); ++iy) {
          const std::size_t k = gr.index(ie, iy, it);
          if (kind == BoostKindField::zeta) {
            o[k] = bv[k] - c_y * t * diff_y(v, gr, ie, iy, it) +
                   2.0 * pi * iu * c_m * t * T.xi * v[k];
          } else {
            o[k] = bv[k] - t_diff_t(v, gr, ie, iy, it) +
                   (eta - T.xi) * diff_eta(v, gr, ie, iy, it);
          }
        }
      }
    }
  }
  // restriction indicators differentiate to graph-supported boundary measures:
  // sigma kind t d_t 1_{t<b} -> -t delta(t-b); zeta kind c_y t d_y 1_E ->
  // c_y t b'(y) delta(t-b). Stored as the coefficient of t delta(t - b).
  if (F.restriction) {
    try {
      SingularPart sp;
      sp.b = boundary_of(*F.restriction);
      sp.is_measure = true;
      sp.trace.assign(F.values.size(), std::vector<cx>(gr.n_eta() * gr.n_y(), cx{}));
      EmbeddedField probe = F;
      probe.restriction.reset();  // trace of the unrestricted values on the graph
      for (std::size_t layer = 0; layer < F.values.size(); ++layer)
        for (std::size_t ie = 0; ie < gr.n_eta(); ++ie) {
          const double eta = gr.eta_nodes[ie];
          for (std::size_t iy = 0; iy < gr.n_y(); ++iy) {
            const double y = gr.y_nodes[iy];
            const double tb = sp.b.b(eta, y);
            if (!(tb > 0.0) || !std::isfinite(tb)) continue;
            const cx val = eval_source(probe, layer, {eta, y, tb});
            if (kind == BoostKindField::sigma) {
              sp.trace[layer][ie * gr.n_y() + iy] = val;
            } else {
              const double h = 1e-6;
              const double bp = (sp.b.b(eta, y + h) - sp.b.b(eta, y - h)) / (2.0 * h);
              sp.trace[layer][ie * gr.n_y() + iy] = -c_y * bp * val;
            }
          }
        }
      out.singular_part = std::move(sp);
    } catch (const parameter_error&) {
      // no closed-form boundary for this region: no singular layer attached
    } catch (const precondition_error&) {
    }
  }
  return out;
}

EmbeddedField restrict_field(const EmbeddedField& F, const Region& E) {
  EmbeddedField out = F;
  out.restriction = E;
  const Grid3& gr = F.grid;
  for (std::size_t layer = 0; layer < out.values.size(); ++layer) {
    auto& v = out.values[layer];
    for (std::size_t it = 0; it < gr.n_t(); ++it)
      for (std::size_t ie = 0; ie < gr.n_eta(); ++ie)
        for (std::size_t iy = 0; iy < gr.n_y(); ++iy)
          if (!E.contains({gr.eta_nodes[ie], gr.y_nodes[iy], gr.t_nodes[it]}))
            v[gr.index(ie, iy, it)] = cx{};
  }
  SingularPart sp;
  try {
    sp.b = boundary_of(E);
  } catch (const parameter_error&) {
    return out;  // no closed-form boundary (e.g. subtraction): indicator only
  } catch (const precondition_error&) {
    return out;
  }
  sp.trace.assign(F.values.size(), std::vector<cx>(gr.n_eta() * gr.n_y(), cx{}));
  FieldModes modes;
  if (F.source) modes = occupied_modes(*F.source);
  for (std::size_t layer = 0; layer < F.values.size(); ++layer) {
    const WavePacket& phi = F.packet_family[layer];
    for (std::size_t ie = 0; ie < gr.n_eta(); ++ie) {
      const double eta = gr.eta_nodes[ie];
      for (std::size_t iy = 0; iy < gr.n_y(); ++iy) {
        const double y = gr.y_nodes[iy];
        const double tb = sp.b.b(eta, y);
        cx val{};
        if (tb > 0.0 && std::isfinite(tb)) {
          if (F.source) {
            double eta_eff = eta, t_eff = tb;
            if (F.pullback) {
              const Point3 q = gamma_apply(*F.pullback, {eta, 0.0, tb});
              eta_eff = q.eta;
              t_eff = q.t;
            }
            val = eval_point(modes, phi, eta_eff, t_eff, y, BoostApply::none, 0.0);
          } else {
            val = field_at(F, layer, eta, y, tb);
          }
        }
        sp.trace[layer][ie * gr.n_y() + iy] = val;
      }
    }
  }
  out.singular_part = std::move(sp);
  return out;
}

ProductField product_field(const EmbeddedField& F2, const EmbeddedField& F3) {
  if (F2.grid.eta_nodes != F3.grid.eta_nodes || F2.grid.y_nodes != F3.grid.y_nodes ||
      F2.grid.t_nodes != F3.grid.t_nodes)
    throw parameter_error("product_field: fields live on different grids");
  ProductField H;
  H.grid = F2.grid;
  H.family2 = F2.packet_family;
  H.family3 = F3.packet_family;
  H.source2 = F2.source;
  H.source3 = F3.source;
  H.pullback2 = F2.pullback;
  H.pullback3 = F3.pullback;
  const std::size_t n3 = F3.values.size();
  H.values.assign(F2.values.size() * n3, std::vector<cx>(H.grid.n_points()));
  for (std::size_t l2 = 0; l2 < F2.values.size(); ++l2)
    for (std::size_t l3 = 0; l3 < n3; ++l3) {
      auto& v = H.values[l2 * n3 + l3];
      for (std::size_t k = 0; k < v.size(); ++k) v[k] = F2.values[l2][k] * F3.values[l3][k];
    }
  return H;
}

ProductField bilinear_defect_field(const ProductField& H, const Tree& T) {
  if (!H.pullback2 || !H.pullback3 || !H.source2 || !H.source3)
    throw precondition_error(
        "bilinear_defect_field: needs Gamma-pulled source-backed factors");
  const GammaMap g2 = *H.pullback2, g3 = *H.pullback3;
  if (std::abs(g2.beta - g3.beta) > 1e-14)
    throw parameter_error("bilinear_defect_field: mismatched beta between the factors");
  const double beta = g2.beta;
  const Grid3& gr = H.grid;
  auto modes2 = occupied_modes(*H.source2);
  auto modes3 = occupied_modes(*H.source3);
  ProductField out = H;
  for (auto& v : out.values) std::fill(v.begin(), v.end(), cx{});
  const std::size_t n3 = H.family3.size();
  for (std::size_t l2 = 0; l2 < H.family2.size(); ++l2)
    for (std::size_t l3 = 0; l3 < n3; ++l3) {
      const auto& v = H.values[l2 * n3 + l3];
      auto& o = out.values[l2 * n3 + l3];
      for (std::size_t it = 0; it < gr.n_t(); ++it) {
        const double t = gr.t_nodes[it];
        for (std::size_t ie = 0; ie < gr.n_eta(); ++ie) {
          const double eta = gr.eta_nodes[ie];
          const double theta = t * (eta - T.xi);
          const Point3 q2 = gamma_apply(g2, {eta, 0.0, t});
          const Point3 q3 = gamma_apply(g3, {eta, 0.0, t});
          for (std::size_t iy = 0; iy < gr.n_y(); ++iy) {
            const double y = gr.y_nodes[iy];
            const std::size_t k = gr.index(ie, iy, it);
            const cx f2 = eval_point(modes2, H.family2[l2], q2.eta, q2.t, y,
                                     BoostApply::none, 0.0);
            const cx f3 = eval_point(modes3, H.family3[l3], q3.eta, q3.t, y,
                                     BoostApply::none, 0.0);
            const cx b2 = eval_point(modes2, H.family2[l2], q2.eta, q2.t, y,
                                     BoostApply::zeta, theta_gamma(g2, theta));
            const cx b3 = eval_point(modes3, H.family3[l3], q3.eta, q3.t, y,
                                     BoostApply::zeta, theta_gamma(g3, theta));
            o[k] = b2 * f3 + f2 * b3 - beta * t * diff_y(v, gr, ie, iy, it) +
                   2.0 * pi * iu * (g2.alpha + g3.alpha) * beta * t * T.xi * v[k];
          }
        }
      }
    }
  return out;
}

void write_field(const std::string& path_prefix, const EmbeddedField& F) {
  nlohmann::json j;
  j["n_eta"] = F.grid.n_eta();
  j["n_y"] = F.grid.n_y();
  j["n_t"] = F.grid.n_t();
  j["eta0"] = F.grid.eta_nodes.front();
  j["deta"] = F.grid.deta();
  j["y0"] = F.grid.y_nodes.front();
  j["dy"] = F.grid.dy();
  j["t0"] = F.grid.t_nodes.front();
  j["ratio"] = F.grid.n_t() >= 2 ? F.grid.t_nodes[1] / F.grid.t_nodes[0] : 2.0;
  j["layers"] = F.values.size();
  std::vector<double> radii;
  for (const auto& p : F.packet_family) radii.push_back(p.r);
  j["packet_r"] = radii;
  j["has_singular"] = F.singular_part.has_value();
  {
    std::ofstream out(path_prefix + ".json");
    if (!out) throw parameter_error("write_field: cannot open " + path_prefix + ".json");
    out << j.dump(2) << '\n';
  }
  std::ofstream csv(path_prefix + ".csv");
  if (!csv) throw parameter_error("write_field: cannot open " + path_prefix + ".csv");
  csv.precision(17);
  csv << "i_eta,i_y,i_t,layer,re,im\n";
  for (std::size_t layer = 0; layer < F.values.size(); ++layer)
    for (std::size_t it = 0; it < F.grid.n_t(); ++it)
      for (std::size_t ie = 0; ie < F.grid.n_eta(); ++ie)
        for (std::size_t iy = 0; iy < F.grid.n_y(); ++iy) {
          const cx v = F.values[layer][F.grid.index(ie, iy, it)];
          csv << ie << ',' << iy << ',' << it << ',' << layer << ',' << std::real(v) << ','
              << std::imag(v) << '\n';
        }
}

EmbeddedField read_field(const std::string& path_prefix) {
  std::ifstream in(path_prefix + ".json");
  if (!in) throw parameter_error("read_field: cannot open " + path_prefix + ".json");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw parameter_error(std::string("read_field: ") + e.what());
  }
  EmbeddedField F;
  const auto ne = j.at("n_eta").get<std::size_t>();
  const auto ny = j.at("n_y").get<std::size_t>();
  const auto nt = j.at("n_t").get<std::size_t>();
  const double eta0 = j.at("eta0").get<double>();
  const double deta = j.at("deta").get<double>();
  const double y0 = j.at("y0").get<double>();
  const double dy = j.at("dy").get<double>();
  F.grid = make_grid3(eta0, eta0 + deta * static_cast<double>(ne - 1), ne, y0,
                      y0 + dy * static_cast<double>(ny - 1), ny,
                      j.at("t0").get<double>(), nt, j.at("ratio").get<double>());
  for (double r : j.at("packet_r").get<std::vector<double>>())
    F.packet_family.push_back(make_reference_bump(r));
  const auto layers = j.at("layers").get<std::size_t>();
  F.values.assign(layers, std::vector<cx>(F.grid.n_points(), cx{}));
  std::ifstream csv(path_prefix + ".csv");
  if (!csv) throw parameter_error("read_field: cannot open " + path_prefix + ".csv");
  std::string line;
  std::getline(csv, line);  // header
  while (std::getline(csv, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::size_t ie, iy, it, layer;
    double re, im;
    char c;
    if (!(row >> ie >> c >> iy >> c >> it >> c >> layer >> c >> re >> c >> im))
      throw parameter_error("read_field: malformed CSV row");
    if (layer >= layers || ie >= ne || iy >= ny || it >= nt)
      throw parameter_error("read_field: CSV index out of range");
    F.values[layer][F.grid.index(ie, iy, it)] = cx{re, im};
  }
  return F;
}

}  // namespace tfa
