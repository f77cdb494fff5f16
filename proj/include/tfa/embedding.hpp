#pragma once
// Embedding of a sampled signal into the (eta, y, t) upper half-space against
// a wave-packet family, parameter changes Gamma_{(alpha,beta,gamma)}, boosts,
// defect fields, restriction to regions (with graph-supported singular part),
// and pointwise products of embedded fields.

#include <optional>
#include <string>
#include <vector>

#include "tfa/geometry.hpp"
#include "tfa/signal.hpp"
#include "tfa/wavepacket.hpp"

namespace tfa {

struct Grid3 {
  std::vector<double> eta_nodes;  // uniform
  std::vector<double> y_nodes;    // uniform
  std::vector<double> t_nodes;    // geometric, ratio in (1, 2]

  std::size_t n_eta() const { return eta_nodes.size(); }
  std::size_t n_y() const { return y_nodes.size(); }
  std::size_t n_t() const { return t_nodes.size(); }
  std::size_t n_points() const { return n_eta() * n_y() * n_t(); }
  std::size_t index(std::size_t ie, std::size_t iy, std::size_t it) const {
    return (it * n_eta() + ie) * n_y() + iy;
  }
  double deta() const;
  double dy() const;
  double log_ratio() const;  // log of the geometric ratio
  void validate() const;     // throws parameter_error on malformed grids
};

// Convenience builder; ratio defaults to 2^{1/16} so dyadic scale maps land
// on grid nodes.
Grid3 make_grid3(double eta_lo, double eta_hi, std::size_t n_eta, double y_lo,
                 double y_hi, std::size_t n_y, double t_lo, std::size_t n_t,
                 double ratio = 0x1.0b5586cf9890fp+0 /* 2^(1/16) */);

struct GammaMap {
  double alpha = 1.0, beta = 1.0, gamma = 0.0;
};
// Throws parameter_error unless beta in (0,1], |alpha*beta| in (1/2,2), |gamma| <= 1.
void validate(const GammaMap& g);
Point3 gamma_apply(const GammaMap& g, const Point3& p);   // (a(eta+g/t), y, b t)
Point3 gamma_invert(const GammaMap& g, const Point3& p);  // exact inverse
double theta_gamma(const GammaMap& g, double theta);      // alpha beta (theta + gamma)
GammaMap gamma_two(double beta);    // (1/beta, beta, -1)
GammaMap gamma_three(double beta);  // (-(1+beta)/beta, beta, -1/(1+beta))

struct SingularPart {
  BoundaryFn b;  // graph t = b(eta, y) carrying the measure t delta(t - b)
  // trace[layer][ie * n_y + iy] = F(eta, y, b(eta, y))
  std::vector<std::vector<cx>> trace;
  // true when trace is the coefficient of t delta(t - b) (defect fields);
  // false when it is a plain boundary-trace record (restrictions)
  bool is_measure = false;
};

struct EmbeddedField {
  Grid3 grid;
  std::vector<WavePacket> packet_family;
  std::vector<std::vector<cx>> values;  // [layer][grid.index(...)]
  std::optional<SingularPart> singular_part;
  // provenance for exact re-evaluation (boosts, defects, traces)
  std::optional<SampledSignal> source;
  std::optional<GammaMap> pullback;  // set when values are source embedded after Gamma
  std::optional<Region> restriction;  // set when values carry an indicator 1_E
};

// E[f](eta, y, t) = int f^(xi) p(t (eta - xi)) e^{2 pi i xi y} dxi, evaluated
// by exact summation over the occupied modes of f (lossless for band-limited
// f). Throws precondition_error when the y spacing cannot resolve the
// oscillation |eta| + r/t_min at the smallest scale.
EmbeddedField embed(const SampledSignal& f, const Grid3& grid, const WavePacket& phi);
// Same, with values sampled at Gamma(eta, y, t); records the pullback.
EmbeddedField embed_gamma(const SampledSignal& f, const Grid3& grid,
                          const WavePacket& phi, const GammaMap& g);

// Trilinear-interpolated evaluation; out-of-grid coordinates clamp to the
// nearest node and set *edge (diagnostic, never silent extrapolation).
cx field_at(const EmbeddedField& F, std::size_t layer, double eta, double y, double t,
            bool* edge = nullptr);

enum class BoostKindField { zeta, sigma };

enum class EvalBoost { none, zeta, sigma };

// Exact evaluation of a source-backed field layer at an arbitrary point of the
// upper half-space (mode summation; honours pullback and restriction), with an
// optional boost factor at reference theta_tilde. Throws precondition_error
// when the field has no source.
cx eval_source(const EmbeddedField& F, std::size_t layer, const Point3& p,
               EvalBoost boost = EvalBoost::none, double theta_tilde = 0.0);

// Cached occupied-mode representation of a band-limited signal, for repeated
// pointwise evaluations without re-running the transform.
struct FieldModes {
  std::vector<double> xi;
  std::vector<cx> coeff;  // f^(xi) dxi
};
FieldModes field_modes(const SampledSignal& f);
cx eval_modes(const FieldModes& modes, const WavePacket& phi, double eta_eff, double t_eff,
              double y, EvalBoost boost = EvalBoost::none, double theta_tilde = 0.0);

// Boost with point-dependent theta = t (eta - xi_T) (or theta_Gamma when g is
// present). Source-backed fields are re-embedded exactly with the boosted
// packet; fields without a source get their packet layers substituted.
EmbeddedField field_boost(const EmbeddedField& F, const Tree& T, BoostKindField kind,
                          const std::optional<GammaMap>& g = std::nullopt);

// zeta: D_zeta(theta~) F - c_y t d_y F + 2 pi i c_m t xi_T F with
//       (theta~, c_y, c_m) = (t(eta - xi_T), 1, 1) plain and
//       (theta_Gamma, beta, alpha beta) under g;
// sigma: D_sigma(theta~) F - t d_t F + (eta - xi_T) d_eta F.
// Derivatives are centered finite differences (one-sided at edges; t
// derivative taken in log t). Vanishes identically on embedded fields up to
// the difference-stencil error.
EmbeddedField defect_field(const EmbeddedField& F, const Tree& T, BoostKindField kind,
                           const std::optional<GammaMap>& g = std::nullopt);

// Indicator restriction 1_E F with the boundary-trace singular part attached
// (trace from the exact source evaluation at t = b(eta, y)).
EmbeddedField restrict_field(const EmbeddedField& F, const Region& E);

struct ProductField {
  Grid3 grid;
  std::vector<WavePacket> family2, family3;
  std::vector<std::vector<cx>> values;  // [l2 * family3.size() + l3][point]
  std::optional<SampledSignal> source2, source3;
  std::optional<GammaMap> pullback2, pullback3;
};

// Tensor product of the packet layers; throws parameter_error on grid mismatch.
ProductField product_field(const EmbeddedField& F2, const EmbeddedField& F3);

// Bilinear defect Gamma2* D_zeta (x) Id + Id (x) Gamma3* D_zeta
//   - beta t d_y + 2 pi i (alpha2 + alpha3) beta t xi_T
// on a product of Gamma-pulled embedded fields; vanishes up to stencil error.
ProductField bilinear_defect_field(const ProductField& H, const Tree& T);

// JSON header (grid, packet radii, provenance flags) + CSV value dump with
// columns i_eta, i_y, i_t, layer, re, im.
void write_field(const std::string& path_prefix, const EmbeddedField& F);
EmbeddedField read_field(const std::string& path_prefix);

}  // namespace tfa
