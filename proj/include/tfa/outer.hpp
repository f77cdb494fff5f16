#pragma once
// Outer-measure machinery on the upper half-space: tree/strip covering
// measures, superlevel measures via greedy covering, outer L^p quasi-norms,
// atomic decomposition, localized and iterated norms, counting-function
// refinement, measure comparison, and inequality samplers.

#include <optional>
#include <string>
#include <vector>

#include "tfa/sizes.hpp"

namespace tfa {

enum class GeneratorKind { trees, strips };

struct OuterSpec {
  GeneratorKind generator = GeneratorKind::trees;
  // counting-function aggregation exponent: 1 (L^1 of N) or tfa::inf (sup N);
  // strip covers always aggregate in L^1
  double aggregation = 1.0;
  Interval Theta{-4.0, 4.0};  // model band of the generating trees
  double beta = 1.0;          // strip parameter in (0, 1]
  // support window: covers live in |x| <= S, |xi| <= S, t in [1/S, S]
  double window = 64.0;
  std::size_t iteration_cap = 10000;
};
void validate(const OuterSpec& spec);

// Greedy cover certificate. `selected` lists trees in selection order;
// `distinguished[i]` is the region X_T of the i-th tree (pairwise disjoint by
// construction), `masses[i]` the integral of |F| over it.
// exponent bookkeeping for the sampled multilinear inequalities
struct ExponentTuple {
  double p = 2.0, q = 4.0, r = 3.0, u = 2.0;
};
// q > max(p', 2) and 1 <= u < r < q; throws parameter_error citing the
// violated constraint.
void validate(const ExponentTuple& e);

struct CoverResult {
  Forest selected;
  StripUnion selected_strips;
  std::vector<Region> distinguished;
  std::vector<double> masses;
  double measure_estimate = 0.0;
  double residual_size = 0.0;
  std::size_t iterations = 0;
};

// Counting-function norm of a cover under the spec's aggregation.
double cover_norm(const Forest& W, const OuterSpec& spec);
double cover_norm(const StripUnion& V, const OuterSpec& spec);

// Greedy cover of a region by lattice-snapped generators (largest-first with
// overlap pruning); upper bound for the covering infimum. Throws
// precondition_error when E extends above the window in t (tree covers of
// such sets do not exist).
double outer_measure(const Region& E, const OuterSpec& spec);
// Exhaustive minimum over subsets of the supplied finite candidate
// collection; oracle for small instances.
double outer_measure_brute(const Region& E, const OuterSpec& spec,
                           const std::vector<Tree>& candidates);

// Greedy tree selection at threshold `lambda`: repeatedly pick a
// quasi-maximal tree (xi_T within eps_max of the running maximum, ties by
// largest s_T then smallest x_T) among lattice candidates whose residual
// (u, v) = (1, 1) size with theta restricted to `sel_band` is >= lambda,
// record X_T and its mass, and remove the selected tree's lattice
// neighborhood from the residual. eps_max = lambda |sel_band| / (2 S);
// the `singular` variant measures the boundary-trace layer of a restricted
// field instead and uses eps_max = 2^-100 S. Residual size <= lambda and the
// per-tree mass bound are asserted on exit; hitting the iteration cap throws.
CoverResult greedy_cover(const EmbeddedField& F, const SizeSpec& size,
                         double lambda, const Interval& sel_band,
                         const OuterSpec& spec, bool singular = false);

// mu(size > lambda) via greedy_cover; the witness certifies
// size(1_{complement} F) <= lambda.
double superlevel_measure(const EmbeddedField& F, const SizeSpec& size, double lambda,
                          const OuterSpec& spec, CoverResult* witness = nullptr);

// Layer-cake outer L^p quasi-norm over a dyadic lambda grid spanning
// [max_size * 2^-32, max_size]; p = inf returns the size itself; weak = true
// takes the sup of 2^k mu(size > 2^{k/p}) instead of the sum.
double outer_lp(const EmbeddedField& F, const SizeSpec& size, const OuterSpec& spec,
                double p, bool weak = false);

// Total size of F: max over the candidate tree lattice (the L^inf endpoint
// of outer_lp and the top of its lambda grid).
double total_size(const EmbeddedField& F, const SizeSpec& size, const OuterSpec& spec);

struct AtomicSlice {
  int level = 0;          // k: the slice obeys size(1_{slice} F) <= 2^{k/p}
  Forest removed;         // witness forest at this level
  double measure = 0.0;   // greedy measure estimate of A_{k-1}
};
struct AtomicDecomposition {
  std::vector<AtomicSlice> slices;  // decreasing levels
  double lp = 0.0;                  // outer_lp(F, p) on the same lambda grid
  double level_sum = 0.0;           // sum_k 2^k measure_k
  std::vector<double> tail_norms;   // reconstruction residual vs slice count
};
AtomicDecomposition atomic_decompose(const EmbeddedField& F, const SizeSpec& size,
                                     const OuterSpec& spec, double p);

enum class LocalizedKind { fLq_mu1, fLq_muinf, X_qr };

// Localized norms on the canonical strip union covering the field window:
// fLq_mu1 = nu_beta(V)^{-1/q} ||1_V F||_{L^q mu^1}, fLq_muinf the
// mu^inf-aggregated variant without normalization, X_qr the tree-union
// localized variant with the (1/q - 1/r) exponent bookkeeping; the trailing
// exponent sups are realized at the finite sets {q, inf} and {r, q}.
// Throws parameter_error when r > q for X_qr.
double localized_norm(const EmbeddedField& F, const SizeSpec& size, const OuterSpec& spec,
                      LocalizedKind kind, double q, double r = 0.0);

struct RefineResult {
  StripUnion eccentric;   // V^ecc
  Forest thinned;         // W^inf
  double nu_eccentric = 0.0;
  int counting_cap = 0;   // max pointwise count of the thinned forest
  double chosen_C = 0.0;  // maximal-function threshold multiplier used
};
// Counting-function improvement: carve out eccentric strips where the
// maximal function of the cover's counting function exceeds
// C * 2^{(qbar/q0) k}, keep trees that are large or disjoint from them.
// Postconditions nu(V^ecc) <= budget / 2 and the pointwise counting cap are
// asserted (C grows geometrically until they hold).
RefineResult refine_to_linfty(const Forest& cover, double q0, double qbar, int k,
                              double nu_budget);

struct MeasureCompareReport {
  double mu1_intersection = 0.0;   // mu^1(W cap V) via the paired-tree cover
  double nu = 0.0;                 // nu_beta(V)
  double muinf_intersection = 0.0; // mu^inf(W cap V)
  double bound = 0.0;              // 4 beta^-1 nu muinf
  bool holds = false;
};
MeasureCompareReport measure_compare(const Forest& W, const StripUnion& V, double beta);

// Gamma images of generators: a beta-strip maps to a 1-strip with the same
// top, a tree maps to the tree (alpha xi_T, x_T, beta s_T) over Theta_Gamma.
Strip gamma_image(const GammaMap& g, const Strip& D);
Tree gamma_image(const GammaMap& g, const Tree& T);

enum class SamplerKind { rn_domination, outer_holder, single_tree, uniform_embedding };

struct SamplerInputs {
  std::vector<EmbeddedField> fields;  // rn_domination / outer_holder factors
  std::vector<TripleField> triples;   // single_tree instances
  std::vector<double> betas;          // uniform_embedding sweep values
  Tree T;
  SizeSpec spec;
  double u = 2.0;
  Interval theta_in{0.95, 1.05};      // inner band for the uniform composites
};

struct RatioReport {
  std::string kind;
  std::size_t trials = 0, skipped = 0;
  double max_ratio = 0.0, median_ratio = 0.0;
  std::vector<std::pair<double, double>> profile;  // (parameter, ratio)
  bool bounded = true;
};
RatioReport inequality_sampler(SamplerKind kind, const SamplerInputs& in);

std::string cover_result_json(const CoverResult& c);
std::string ratio_report_json(const RatioReport& r);
// CSV rows "lambda,measure,residual" over a lambda grid.
void write_lambda_profile_csv(const std::string& path, const EmbeddedField& F,
                              const SizeSpec& size, const OuterSpec& spec,
                              const std::vector<double>& lambdas);

}  // namespace tfa
