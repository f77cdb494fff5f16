#pragma once
// Local size functionals of embedded fields restricted to a tree: mixed-norm
// Lebesgue sizes, lacunary and defect sizes, maximal-truncation sizes,
// trilinear integral sizes, product sizes, and the composite sizes used by
// the uniform bounds.

#include <array>
#include <functional>
#include <optional>
#include <string>

#include "tfa/embedding.hpp"
#include "tfa/geometry.hpp"

namespace tfa {

// model-coordinate quadrature resolution
struct SizeQuad {
  std::size_t n_theta = 21;
  std::size_t n_zeta = 21;
  std::size_t n_sigma = 48;      // geometric nodes on (sigma_min, 1)
  double sigma_min = 0x1p-6;
};

struct SizeSpec {
  double u = 2.0, v = 2.0;  // exponents in [1, inf]; tfa::inf selects the sup
  Interval Theta{-4.0, 4.0};
  std::optional<Interval> theta_restrict;  // indicator on the model theta axis
  std::optional<GammaMap> gamma;           // pullback reference for boosts
  SizeQuad quad;
};

// Core mixed-norm evaluator in model coordinates: inner L^v against d sigma /
// sigma over sigma < 1 - |zeta| (with an optional graph-supported singular
// layer contributing through its trace), outer L^u against d theta d zeta /
// |Theta|. A non-decaying integrand at the bottom sigma octave makes the
// inner norm +inf (Haar divergence), which propagates as a first-class value.
double mixed_norm_model(
    const std::function<cx(double theta, double zeta, double sigma)>& integrand,
    const SizeSpec& spec,
    const std::function<double(double theta, double zeta)>* singular_sigma = nullptr,
    const std::function<cx(double theta, double zeta)>* singular_trace = nullptr);

// || 1_{mT} F . pi_T ||_{L^u L^v}; the packet-family sup is the max over the
// field's layers. v outside {1,2,inf} with a singular part present is
// rejected (no consistent grid meaning).
double lebesgue_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec);

// Lebesgue size of D_zeta(t(eta - xi_T)) F (theta_Gamma when spec.gamma set).
// Needs a source-backed field.
double lacunary_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec);

// Lebesgue size of the defect field for the given kind (exponents
// (u, 1)); restricted fields contribute their boundary-trace singular layer.
double defect_size(const EmbeddedField& F, const Tree& T, BoostKindField kind,
                   const SizeSpec& spec);

// For each (theta, zeta): running partial sums of D_zeta F . pi_T over the
// geometric sigma grid, max over truncation points, then outer L^u.
double sio_size(const EmbeddedField& F, const Tree& T, const SizeSpec& spec);

// --- trilinear integral sizes -------------------------------------------

struct TripleFactor {
  SampledSignal f;
  GammaMap g;
};
struct TripleField {
  TripleFactor f1, f2, f3;
  WavePacket phi;  // packet split into overlapping/lacunary parts per slot
};
GammaMap gamma_one(double beta);  // (1/beta, beta, 0): theta_Gamma = theta

struct IntegralSizeResult {
  double value = 0.0;         // at the smallest grid scale epsilon
  double value_coarse = 0.0;  // at 2 epsilon, stability diagnostic
  bool flagged_vanishing = false;  // pattern that vanishes in the trilinear use
};

// pattern entries 'o' (overlapping part phi^(theta_Gamma) Dil ref-bump) or 'l'
// (remainder); patterns (o,o,l) and (o,l,o) vanish exactly (disjoint
// coefficient supports) and are flagged.
IntegralSizeResult integral_size(const TripleField& H, const Tree& T,
                                 const std::array<char, 3>& pattern, const SizeSpec& spec);

// --- composite sizes -----------------------------------------------------

struct CompositeBreakdown {
  double total = 0.0;
  std::vector<std::pair<std::string, double>> parts;
};

// S L^{(inf,inf)} + S L^{(u,2)} lacunary + S L^{(u,1)} defect + maximal
// truncation at exponent u.
CompositeBreakdown composite_nonuniform(const EmbeddedField& F, const Tree& T, double u,
                                        const SizeSpec& spec);

// beta^{1/u} SL^{(u,inf)} + SL^{(u,2)} lacunary + SL^{(u,1)} defect with the
// theta_in restriction, all through the Gamma pullback. theta_in must satisfy
// B_{2^-5}(-gamma) within B_{2^-3}(-gamma) strictly.
CompositeBreakdown composite_uniform_linear(const EmbeddedField& F, const Tree& T, double u,
                                            double beta, const GammaMap& g,
                                            const Interval& theta_in, const SizeSpec& spec);

// bilinear analogue on a product field.
CompositeBreakdown composite_uniform_bilinear(const ProductField& H, const Tree& T,
                                              double u, const SizeSpec& spec);

// --- product sizes -------------------------------------------------------

enum class ProductVariant { phi_phi, phi_d, d_phi, d_d, defect_zeta, defect_sigma };

// Tensor boosts per variant (D = zeta boost at the pulled-back theta), then
// the mixed norm of the two-argument field; sup over layer pairs. Defect
// variants use the exact bilinear defect combination with high-accuracy
// derivative evaluation from the sources.
double product_size(const ProductField& H, const Tree& T, ProductVariant variant,
                    const SizeSpec& spec);

// JSON record {tree, size_kind, exponents, value, constituent_breakdown}.
std::string size_report_json(const Tree& T, const std::string& kind, double u, double v,
                             double value, const CompositeBreakdown* breakdown = nullptr);

}  // namespace tfa
