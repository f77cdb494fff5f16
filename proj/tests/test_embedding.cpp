#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>

#include "tfa/embedding.hpp"

using namespace tfa;

namespace {

const double kR = 0x1p-5;

// single-point embedding value (exact mode summation on a 1x1x1 grid)
cx embed_at(const SampledSignal& f, const WavePacket& phi, double eta, double y, double t) {
  Grid3 g;
  g.eta_nodes = {eta};
  g.y_nodes = {y};
  g.t_nodes = {t};
  return embed(f, g, phi).values[0][0];
}

// spatial quadrature of the packet phi(z) = int p(xi) e^{2 pi i xi z} dxi
cx packet_space(const WavePacket& p, double z, std::size_t nodes = 1500) {
  const double h = 2.0 * p.r / static_cast<double>(nodes);
  cx acc{};
  for (std::size_t i = 0; i <= nodes; ++i) {
    const double xi = -p.r + static_cast<double>(i) * h;
    const double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
    acc += w * p.at(xi) * std::exp(2.0 * pi * iu * xi * z);
  }
  return acc * h;
}

SampledSignal test_signal(std::uint64_t seed, std::size_t n = 256) {
  // a few low modes so packet supports at moderate scales see them
  return random_band_limited(n, 1.0, -static_cast<double>(n) / 2.0, -12.0 / 256.0,
                             12.0 / 256.0, 3, seed);
}

}  // namespace

TEST_CASE("grid construction and validation") {
  auto g = make_grid3(-1.0, 1.0, 9, -4.0, 4.0, 17, 0.5, 33);
  CHECK(g.n_points() == 9 * 17 * 33);
  CHECK(g.t_nodes[16] == doctest::Approx(0.5 * 2.0).epsilon(1e-12));  // 16 steps of 2^(1/16)
  CHECK_THROWS_AS(make_grid3(0, 1, 4, 0, 1, 4, 0.5, 4, 2.5), parameter_error);
  CHECK_THROWS_AS(make_grid3(0, 1, 4, 0, 1, 4, -1.0, 4), parameter_error);
  Grid3 bad = g;
  bad.eta_nodes[3] += 0.05;
  CHECK_THROWS_AS(bad.validate(), parameter_error);
}

TEST_CASE("gamma maps") {
  GammaMap id{1.0, 1.0, 0.0};
  Point3 p{0.7, -1.3, 2.5};
  auto q = gamma_apply(id, p);
  CHECK(q.eta == p.eta);
  CHECK(q.y == p.y);
  CHECK(q.t == p.t);
  // the first parameter change at beta = 1/2: (eta, y, t) -> (2(eta - 1/t), y, t/2)
  auto g2 = gamma_two(0.5);
  auto w = gamma_apply(g2, p);
  CHECK(w.eta == doctest::Approx(2.0 * (p.eta - 1.0 / p.t)).epsilon(1e-15));
  CHECK(w.t == doctest::Approx(p.t / 2.0).epsilon(1e-15));
  // alpha2 + alpha3 = -1 identity behind the bilinear defect
  auto g3 = gamma_three(0.5);
  CHECK(g2.alpha + g3.alpha == doctest::Approx(-1.0).epsilon(1e-15));
  rng rg(3);
  for (int i = 0; i < 100; ++i) {
    Point3 a{rg.uniform(-4, 4), rg.uniform(-4, 4), rg.uniform(0.1, 8.0)};
    auto b = gamma_invert(g3, gamma_apply(g3, a));
    CHECK(std::abs(b.eta - a.eta) < 1e-12);
    CHECK(std::abs(b.t - a.t) < 1e-14);
  }
  CHECK_THROWS_AS(validate(GammaMap{8.0, 0.5, 0.0}), parameter_error);
  CHECK_THROWS_AS(validate(GammaMap{1.0, 2.0, 0.0}), parameter_error);
  CHECK_THROWS_AS(validate(GammaMap{1.0, 1.0, 1.5}), parameter_error);
}

TEST_CASE("embed zero field and quadrature oracle") {
  auto phi = make_mother_packet(kR);
  auto f = test_signal(101);
  SampledSignal z = f;
  for (auto& c : z.v) c = cx{};
  auto grid = make_grid3(-0.05, 0.05, 5, -20.0, 20.0, 11, 4.0, 9);
  auto Fz = embed(z, grid, phi);
  for (const auto& c : Fz.values[0]) CHECK(c == cx{});

  // spatial trapezoid oracle: E(eta,y,t) = int f(z) (1/t) e^{2 pi i eta (y - z)}
  //   phi((z - y)/t) dz (the kernel with multiplier p(t(eta - xi))).
  // A wide packet at small scale keeps the kernel well inside the period; the
  // oracle still folds in the two neighbouring periods of the periodic f.
  auto wide = make_mother_packet(0.25);
  auto ogrid = make_grid3(-0.05, 0.05, 5, -12.0, 12.0, 25, 1.0, 5);
  auto F = embed(f, ogrid, wide);
  const double L = static_cast<double>(f.n()) * f.dx;
  rng rg(5);
  for (int trial = 0; trial < 8; ++trial) {
    const auto ie = static_cast<std::size_t>(rg.integer(0, 4));
    const auto iy = static_cast<std::size_t>(rg.integer(0, 24));
    const auto it = static_cast<std::size_t>(rg.integer(0, 4));
    const double eta = ogrid.eta_nodes[ie], y = ogrid.y_nodes[iy], t = ogrid.t_nodes[it];
    cx want{};
    for (std::size_t i = 0; i < f.n(); ++i)
      for (int img = -1; img <= 1; ++img) {
        const double zz = f.x(i) + static_cast<double>(img) * L;
        want += f.v[i] * std::exp(2.0 * pi * iu * eta * (y - zz)) *
                packet_space(wide, (zz - y) / t) / t;
      }
    want *= f.dx;
    CHECK(std::abs(F.values[0][ogrid.index(ie, iy, it)] - want) < 1e-6);
  }
  // resolution predicate: y spacing too wide for the smallest scale
  auto coarse = make_grid3(-0.05, 0.05, 5, -200.0, 200.0, 5, 0.05, 5);
  CHECK_THROWS_AS(embed(f, coarse, phi), precondition_error);
}

TEST_CASE("embed linearity and conjugation symmetry") {
  auto phi = make_mother_packet(kR);
  auto f = test_signal(7);
  auto h = test_signal(8);
  auto grid = make_grid3(-0.04, 0.04, 5, -10.0, 10.0, 9, 4.0, 5);
  auto Ff = embed(f, grid, phi);
  auto Fh = embed(h, grid, phi);
  SampledSignal comb = f;
  const cx a{0.3, -1.1}, b{2.0, 0.25};
  for (std::size_t i = 0; i < f.n(); ++i) comb.v[i] = a * f.v[i] + b * h.v[i];
  auto Fc = embed(comb, grid, phi);
  for (std::size_t k = 0; k < grid.n_points(); ++k)
    CHECK(std::abs(Fc.values[0][k] - (a * Ff.values[0][k] + b * Fh.values[0][k])) < 1e-12);
  // conjugation: E[conj f](eta, y, t) = conj(E[f](-eta, y, t)) for even packets
  SampledSignal fc = f;
  for (auto& c : fc.v) c = std::conj(c);
  auto Fcj = embed(fc, grid, phi);
  for (std::size_t ie = 0; ie < grid.n_eta(); ++ie) {
    const std::size_t ir = grid.n_eta() - 1 - ie;  // -eta node (symmetric axis)
    for (std::size_t iy = 0; iy < grid.n_y(); ++iy)
      for (std::size_t it = 0; it < grid.n_t(); ++it)
        CHECK(std::abs(Fcj.values[0][grid.index(ie, iy, it)] -
                       std::conj(Ff.values[0][grid.index(ir, iy, it)])) < 1e-12);
  }
}

TEST_CASE("tree symmetry identity") {
  auto phi = make_mother_packet(kR);
  const std::size_t n = 256;
  auto f = test_signal(23, n);
  // grid-aligned tree data: s a power of two, x on the grid, xi on the mode comb
  const double s = 4.0, xT = 16.0, xiT = 5.0 / static_cast<double>(n);
  // transported signal g = Dil_{1/s} Mod_{-xi_T} Tr_{-x_T} f on the matching grid
  SampledSignal g;
  g.dx = f.dx / s;
  g.x0 = (f.x0 - xT) / s;
  g.v.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = g.x0 + static_cast<double>(i) * g.dx;
    // s z + x_T lands exactly on sample i of f
    g.v[i] = s * std::exp(-2.0 * pi * iu * xiT * (s * z)) * f.v[i];
  }
  for (double th : {-0.02, 0.0, 0.015})
    for (double ze : {-0.4, 0.3})
      for (double sg : {0.35, 0.8}) {
        Point3 p{xiT + th / (s * sg), xT + s * ze, s * sg};
        const cx lhs = embed_at(f, phi, p.eta, p.y, p.t);
        const cx rhs = (1.0 / s) * std::exp(2.0 * pi * iu * xiT * s * ze) *
                       embed_at(g, phi, th / sg, ze, sg);
        CHECK(std::abs(lhs - rhs) < 1e-10);
      }
}

TEST_CASE("field boost") {
  auto phi = make_mother_packet(kR);
  auto f = test_signal(31);
  Tree T{0.01, 0.0, 8.0, {-4.0, 4.0}};
  auto grid = make_grid3(-0.04, 0.05, 7, -12.0, 12.0, 9, 2.0, 9);
  // zero field boosts to zero
  SampledSignal z = f;
  for (auto& c : z.v) c = cx{};
  auto Bz = field_boost(embed(z, grid, phi), T, BoostKindField::zeta);
  for (const auto& c : Bz.values[0]) CHECK(c == cx{});
  // identity Gamma equals the plain boost
  auto F = embed(f, grid, phi);
  auto B = field_boost(F, T, BoostKindField::zeta);
  auto Bg = field_boost(F, T, BoostKindField::zeta, GammaMap{1.0, 1.0, 0.0});
  for (std::size_t k = 0; k < grid.n_points(); ++k)
    CHECK(std::abs(B.values[0][k] - Bg.values[0][k]) < 1e-13);
  // the zeta boost realizes sigma d_zeta of the phase-corrected tree-local field
  const double h = 1e-4;
  for (double th : {-0.01, 0.02})
    for (double ze : {-0.3, 0.25})
      for (double sg : {0.3, 0.6}) {
        Point3 p{T.xi + th / (T.s * sg), T.x + T.s * ze, T.s * sg};
        Grid3 pt;
        pt.eta_nodes = {p.eta};
        pt.y_nodes = {p.y};
        pt.t_nodes = {p.t};
        const cx boosted = field_boost(embed(f, pt, phi), T, BoostKindField::zeta).values[0][0];
        auto corrected = [&](double zz) {
          return std::exp(-2.0 * pi * iu * T.xi * T.s * zz) *
                 embed_at(f, phi, p.eta, T.x + T.s * zz, p.t);
        };
        const cx deriv = sg * (corrected(ze + h) - corrected(ze - h)) / (2.0 * h);
        const cx want = std::exp(2.0 * pi * iu * T.xi * T.s * ze) * deriv;
        CHECK(std::abs(boosted - want) < 1e-4 * (1.0 + std::abs(want)));
      }
}

TEST_CASE("defect fields vanish at first order on embedded data") {
  // a wide packet keeps the eta feature width r/t resolvable at every scale
  auto phi = make_mother_packet(0.25);
  auto f = test_signal(53);
  Tree T{0.01, 0.0, 8.0, {-4.0, 4.0}};
  auto sup_defect = [&](std::size_t ne, std::size_t ny, std::size_t nt, double ratio,
                        BoostKindField kind) {
    auto grid = make_grid3(-0.05, 0.07, ne, -12.0, 12.0, ny, 2.0, nt, ratio);
    auto F = embed(f, grid, phi);
    auto D = defect_field(F, T, kind);
    // sup over interior nodes: the boundary ring uses one-sided stencils
    double m = 0.0;
    for (std::size_t it = 1; it + 1 < grid.n_t(); ++it)
      for (std::size_t ie = 1; ie + 1 < grid.n_eta(); ++ie)
        for (std::size_t iy = 1; iy + 1 < grid.n_y(); ++iy)
          m = std::max(m, std::abs(D.values[0][grid.index(ie, iy, it)]));
    return m;
  };
  for (auto kind : {BoostKindField::zeta, BoostKindField::sigma}) {
    const double coarse = sup_defect(25, 33, 5, 0x1.306fe0a31b715p+0 /* 2^(1/4) */, kind);
    const double fine = sup_defect(49, 65, 9, 0x1.172b83c7d517bp+0 /* 2^(1/8) */, kind);
    CHECK(coarse > 0.0);
    // first-order rate: halved spacings at least halve the sup within 25% slack
    CHECK(fine <= 0.625 * coarse);
  }
  // zero field: zero defect
  SampledSignal z = f;
  for (auto& c : z.v) c = cx{};
  auto grid = make_grid3(-0.05, 0.07, 9, -12.0, 12.0, 17, 2.0, 5);
  auto Dz = defect_field(embed(z, grid, phi), T, BoostKindField::zeta);
  for (const auto& c : Dz.values[0]) CHECK(std::abs(c) == 0.0);
}

TEST_CASE("restriction concentrates the defect on the boundary collar") {
  auto phi = make_mother_packet(kR);
  auto f = test_signal(67);
  Tree T{0.0, 0.0, 8.0, {-4.0, 4.0}};
  Strip D{0.0, 24.0, 1.0};
  auto grid = make_grid3(-0.05, 0.07, 13, -30.0, 30.0, 31, 2.0, 13,
                         0x1.306fe0a31b715p+0 /* 2^(1/4) */);
  auto F = embed(f, grid, phi);
  auto R = restrict_field(F, region_of(D));
  CHECK(R.singular_part.has_value());
  auto bd = boundary_of(region_of(D));
  auto Dd = defect_field(R, T, BoostKindField::sigma);
  // the comparison envelope from the unrestricted field
  auto Du = defect_field(F, T, BoostKindField::sigma);
  double env = 0.0;
  for (const auto& c : Du.values[0]) env = std::max(env, std::abs(c));
  const double rho = grid.t_nodes[1] / grid.t_nodes[0];
  for (std::size_t it = 0; it < grid.n_t(); ++it)
    for (std::size_t ie = 0; ie < grid.n_eta(); ++ie)
      for (std::size_t iy = 0; iy < grid.n_y(); ++iy) {
        const double t = grid.t_nodes[it];
        const double b = bd.b(grid.eta_nodes[ie], grid.y_nodes[iy]);
        // skip a two-cell collar of {t = b} in scale and space
        if (t > b / (rho * rho) && t < b * rho * rho) continue;
        if (std::abs(std::abs(grid.y_nodes[iy] - D.x) - (D.s - t)) <= 2.0 * grid.dy())
          continue;
        CHECK(std::abs(Dd.values[0][grid.index(ie, iy, it)]) <= env + 1e-12);
      }
  // trace agrees with the exact evaluation on the graph
  for (std::size_t ie = 0; ie < grid.n_eta(); ie += 4)
    for (std::size_t iy = 0; iy < grid.n_y(); iy += 7) {
      const double b = bd.b(grid.eta_nodes[ie], grid.y_nodes[iy]);
      if (!(b > 0.0) || !std::isfinite(b)) continue;
      const cx want = embed_at(f, phi, grid.eta_nodes[ie], grid.y_nodes[iy], b);
      CHECK(std::abs(R.singular_part->trace[0][ie * grid.n_y() + iy] - want) < 1e-12);
    }
}

TEST_CASE("gamma transported sets") {
  rng rg(77);
  const double beta = 0.5;
  auto g = gamma_two(beta);
  // strips transport to the beta = 1 strip over the same interval
  Strip Db{0.5, 2.0, beta};
  Strip D1{0.5, 2.0, 1.0};
  for (int i = 0; i < 500; ++i) {
    Point3 p{rg.uniform(-4, 4), rg.uniform(-3, 3), rg.uniform(0.05, 6.0)};
    CHECK(strip_contains(Db, p) == strip_contains(D1, gamma_apply(g, p)));
  }
  // trees transport inside the tree with mapped band and scaled frequency
  auto g3 = gamma_three(beta);
  Tree T{1.2, -0.5, 2.0, {-4.0, 4.0}};
  const double lo = theta_gamma(g3, T.theta.lo), hi = theta_gamma(g3, T.theta.hi);
  Tree Timg{g3.alpha * T.xi, T.x, T.s, {std::min(lo, hi), std::max(lo, hi)}};
  int tested = 0;
  for (int i = 0; i < 4000 && tested < 1000; ++i) {
    Point3 p{rg.uniform(T.xi - 3.0, T.xi + 3.0), rg.uniform(T.x - 2.0, T.x + 2.0),
             rg.uniform(0.05, 2.0)};
    if (!tree_contains(T, p)) continue;
    ++tested;
    CHECK(tree_contains(Timg, gamma_apply(g3, p)));
  }
  CHECK(tested == 1000);
}

TEST_CASE("product field and bilinear defect") {
  // wide packet, and an eta window where both Gamma-mapped packet arguments
  // cross the support (t eta near 1 resp. near 2/3)
  auto phi = make_mother_packet(0.25);
  auto f2 = test_signal(91);
  auto f3 = test_signal(92);
  const double beta = 0.5;
  Tree T{0.01, 0.0, 8.0, {-4.0, 4.0}};
  auto run = [&](std::size_t ne, std::size_t ny, std::size_t nt, double ratio) {
    auto grid = make_grid3(0.15, 0.40, ne, -12.0, 12.0, ny, 2.0, nt, ratio);
    auto G2 = embed_gamma(f2, grid, phi, gamma_two(beta));
    auto G3 = embed_gamma(f3, grid, phi, gamma_three(beta));
    auto H = product_field(G2, G3);
    // |product| = |F2| |F3| pointwise
    for (std::size_t k = 0; k < grid.n_points(); k += 13)
      CHECK(std::abs(H.values[0][k]) ==
            doctest::Approx(std::abs(G2.values[0][k]) * std::abs(G3.values[0][k]))
                .epsilon(1e-12));
    auto Dh = bilinear_defect_field(H, T);
    // interior sup: the boundary ring uses one-sided stencils
    double m = 0.0;
    for (std::size_t it = 1; it + 1 < grid.n_t(); ++it)
      for (std::size_t ie = 1; ie + 1 < grid.n_eta(); ++ie)
        for (std::size_t iy = 1; iy + 1 < grid.n_y(); ++iy)
          m = std::max(m, std::abs(Dh.values[0][grid.index(ie, iy, it)]));
    return m;
  };
  const double coarse = run(25, 33, 5, 0x1.306fe0a31b715p+0);
  const double fine = run(49, 65, 9, 0x1.172b83c7d517bp+0);
  CHECK(coarse > 0.0);
  CHECK(fine <= 0.625 * coarse);
  // zero factor gives zero product
  auto grid = make_grid3(0.15, 0.40, 5, -12.0, 12.0, 33, 2.0, 5);
  SampledSignal z = f3;
  for (auto& c : z.v) c = cx{};
  auto Hz = product_field(embed(f2, grid, phi), embed(z, grid, phi));
  for (const auto& c : Hz.values[0]) CHECK(c == cx{});
  // grid mismatch
  auto other = make_grid3(0.15, 0.40, 7, -12.0, 12.0, 33, 2.0, 5);
  CHECK_THROWS_AS(product_field(embed(f2, grid, phi), embed(f3, other, phi)),
                  parameter_error);
}

TEST_CASE("field serialization round trip and edge flag") {
  auto phi = make_mother_packet(kR);
  auto f = test_signal(111);
  auto grid = make_grid3(-0.04, 0.04, 5, -8.0, 8.0, 7, 4.0, 5);
  auto F = embed(f, grid, phi);
  write_field("field_rt", F);
  auto G = read_field("field_rt");
  REQUIRE(G.values.size() == F.values.size());
  for (std::size_t k = 0; k < grid.n_points(); ++k)
    CHECK(std::abs(G.values[0][k] - F.values[0][k]) < 1e-15);
  std::remove("field_rt.json");
  std::remove("field_rt.csv");
  bool edge = false;
  field_at(F, 0, 0.0, 0.0, grid.t_nodes[2], &edge);
  CHECK_FALSE(edge);
  field_at(F, 0, 0.0, 100.0, grid.t_nodes[2], &edge);
  CHECK(edge);
}
