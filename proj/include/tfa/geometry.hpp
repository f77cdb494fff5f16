#pragma once
// Trees, strips, forests, boolean regions of the upper half-space
// (eta, y, t), their boundary functions with Lipschitz certificates, counting
// functions, and tree-local model coordinates.

#include <functional>
#include <memory>
#include <vector>

#include "tfa/common.hpp"

namespace tfa {

struct Interval {
  double lo = 0.0, hi = 0.0;  // open interval (lo, hi)
  double length() const { return hi - lo; }
  bool contains(double v) const { return v > lo && v < hi; }
};

struct Point3 {
  double eta = 0.0, y = 0.0, t = 0.0;
};

struct ModelPoint {
  double theta = 0.0, zeta = 0.0, sigma = 0.0;
};

struct Tree {
  double xi = 0.0;   // top frequency
  double x = 0.0;    // top position
  double s = 1.0;    // top scale, > 0
  Interval theta{-4.0, 4.0};  // frequency band
};

struct Strip {
  double x = 0.0;
  double s = 1.0;
  double beta = 1.0;  // in (0, 1]
};

struct Forest {
  std::vector<Tree> trees;
};

struct StripUnion {
  std::vector<Strip> strips;
};

// membership: sigma = t/s in (0,1), zeta = (y-x)/s, sigma < 1 - |zeta|,
// theta = t (eta - xi) inside the band
bool tree_contains(const Tree& T, const Point3& p);
// membership: t < (s - |y - x|) / beta
bool strip_contains(const Strip& D, const Point3& p);

ModelPoint model_coords(const Tree& T, const Point3& p);
Point3 from_model(const Tree& T, const ModelPoint& m);  // sigma <= 0 -> error
bool in_model_tree(const Tree& T, const ModelPoint& m);  // membership in mT

// Boolean combinations, evaluated lazily by membership tests.
struct Region {
  enum class Kind { tree, strip, unite, intersect, subtract };
  Kind kind = Kind::tree;
  Tree tree;
  Strip strip;
  std::shared_ptr<const Region> a, b;

  bool contains(const Point3& p) const;
};
Region region_of(const Tree& T);
Region region_of(const Strip& D);
Region region_of(const Forest& W);       // union of trees
Region region_of(const StripUnion& V);   // union of strips
Region region_union(Region a, Region b);
Region region_intersect(Region a, Region b);
Region region_subtract(Region a, Region b);

// Exact piecewise-constant counting function N(z) = sum of spatial-interval
// indicators, with its L1 and Linf norms.
struct CountingFunction {
  std::vector<double> breakpoints;  // sorted; counts[i] holds on
                                    // [breakpoints[i], breakpoints[i+1])
  std::vector<int> counts;          // size = breakpoints.size() - 1
  double l1 = 0.0;
  int linf = 0;
  int at(double z) const;
};
CountingFunction counting_function(const Forest& W);
CountingFunction counting_function(const StripUnion& V);

// Boundary function of a downward-closed region: the region is
// {(eta, y, t) : 0 < t < b(eta, y)}. Built from the closed forms for tree
// and strip leaves combined by sup (union) / inf (intersection).
struct BoundaryFn {
  std::function<double(double eta, double y)> b;  // values in [0, +inf]
  double beta = 1.0;
  double theta_minus = -4.0, theta_plus = 4.0;  // band endpoints, minus < 0 < plus
};

// Throws parameter_error for subtraction nodes (not downward-closed) or
// mixed strip betas.
BoundaryFn boundary_of(const Region& E);

struct CertificateReport {
  bool y_ok = true;        // |b(y2)-b(y1)| <= beta^-1 |y2-y1|
  bool eta_ok = true;      // -M^2/theta_plus <= diff quotient <= M^2/(-theta_minus)
  double worst_y = 0.0;    // max violation margin (<= 0 when passing)
  double worst_eta = 0.0;
};
// Discrete difference-quotient certificates on the given sample grids.
CertificateReport check_certificates(const BoundaryFn& b,
                                     const std::vector<double>& eta_nodes,
                                     const std::vector<double>& y_nodes);

// b in tree-local coordinates: b*(theta, zeta) solves
// s_T sigma = b(xi_T + theta / (s_T sigma), x_T + s_T zeta) by monotone
// bracketing; returns sigma (capped into [0, 1]); throws precondition_error
// if the scan finds more than one sign change (certificate violated).
struct ModelBoundary {
  std::function<double(double theta, double zeta)> bstar;
};
ModelBoundary pullback_boundary(const Tree& T, const BoundaryFn& b);

// JSON expression-tree serialization of regions.
std::string region_to_json(const Region& E);
Region region_from_json(const std::string& text);

// CSV dump "eta,y,b" of boundary samples (+inf written as "inf").
void write_boundary_csv(const std::string& path, const BoundaryFn& b,
                        const std::vector<double>& eta_nodes,
                        const std::vector<double>& y_nodes);

}  // namespace tfa
