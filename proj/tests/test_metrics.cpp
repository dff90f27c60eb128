#include <doctest.h>

#include <cmath>

#include "harmrec/metrics.hpp"
#include "oracles.hpp"

using namespace harmrec;

TEST_CASE("h1 error") {
  const MeshPtr fine = generate(DomainSpec::unit_square(), 5);
  const MeshPtr coarse = hierarchy_level(fine, 2);
  const auto nc = static_cast<Eigen::Index>(coarse->num_vertices());
  const CoeffVec b{coarse, Eigen::VectorXd::Random(nc)};
  CHECK(h1_error(fine, b, b) == 0.0);
  CHECK(h1_error(fine, prolong(b, fine), b) == 0.0);

  const CoeffVec x{coarse, oracle::sample(*coarse, [](Point p) { return p.x; })};
  const CoeffVec z{coarse, Eigen::VectorXd::Zero(nc)};
  CHECK(h1_error(fine, x, z) == doctest::Approx(std::sqrt(1.0 / 3.0 + 1.0)).epsilon(1e-12));
}

TEST_CASE("max norms") {
  const MeshPtr fine = generate(DomainSpec::unit_square(), 4);
  const MeshPtr coarse = hierarchy_level(fine, 1);
  const auto nc = static_cast<Eigen::Index>(coarse->num_vertices());
  const CoeffVec a{coarse, Eigen::VectorXd::Random(nc)};
  const CoeffVec zero{coarse, Eigen::VectorXd::Zero(nc)};
  const ErrorNorms norms(fine);
  CHECK(norms.linf(a, a) == 0.0);
  CHECK(norms.linf(a, zero) == doctest::Approx(a.values.lpNorm<Eigen::Infinity>()));
  CHECK(norms.linf_d(a, zero, 0.0) == norms.linf(a, zero));
  CHECK(linf_d_error(fine, a, zero, 0.0) == linf_error(fine, a, zero));
  CHECK(norms.linf_d(a, zero, 0.2) <= norms.linf(a, zero));
  CHECK_THROWS_AS(norms.linf_d(a, zero, 10.0), GeometryError);

  // A field supported on the boundary is invisible away from it.
  const MeshPtr m = generate(DomainSpec::unit_square(), 3);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(m->num_vertices()));
  for (int b : m->boundary_loop()) v[b] = 1.0;
  const ErrorNorms on_m(m);
  const CoeffVec bnd{m, v};
  const CoeffVec z{m, Eigen::VectorXd::Zero(v.size())};
  CHECK(on_m.linf(bnd, z) == 1.0);
  CHECK(on_m.linf_d(bnd, z, 0.125) == 0.0);

  // Closure: a sample point at distance exactly d is included.
  Eigen::VectorXd spike = Eigen::VectorXd::Zero(v.size());
  for (std::size_t i = 0; i < m->num_vertices(); ++i) {
    const Point p = m->vertices()[i];
    if (p.x == 0.25 && p.y == 0.5) spike[static_cast<Eigen::Index>(i)] = 1.0;
  }
  REQUIRE(spike.sum() == 1.0);
  CHECK(on_m.linf_d({m, spike}, z, 0.25) == 1.0);
  CHECK(on_m.linf_d({m, spike}, z, 0.25 + 1e-9) < 1.0);
}

TEST_CASE("error against an analytic field") {
  const MeshPtr m = generate(DomainSpec::unit_square(), 3);
  const FieldExpr f = FieldExpr::parse("2*x - y");
  const CoeffVec u{m, oracle::sample(*m, [](Point p) { return 2 * p.x - p.y; })};
  CHECK(linf_error_to_field(u, f) <= 1e-15);
  const FieldExpr q = FieldExpr::parse("x^2");
  const CoeffVec uq{m, oracle::sample(*m, [](Point p) { return p.x * p.x; })};
  // Linear interpolation error of x² at a centroid: h²-scaled and positive.
  CHECK(linf_error_to_field(uq, q) > 0.0);
  CHECK(linf_error_to_field(uq, q) <= 0.125 * 0.125);
}

TEST_CASE("rates") {
  ErrorReport rep;
  for (int k = 2; k <= 5; ++k) {
    ErrorRow r;
    r.level = k;
    r.err_h1 = std::ldexp(1.0, -k);
    r.err_linf = std::ldexp(1.0, -2 * k);
    r.err_linf_d = 0.0;
    rep.rows.push_back(r);
  }
  fill_rates(rep);
  CHECK_FALSE(rep.rows[0].rate_h1.has_value());
  for (std::size_t i = 1; i < rep.rows.size(); ++i) {
    CHECK(*rep.rows[i].rate_h1 == doctest::Approx(1.0));
    CHECK(*rep.rows[i].rate_linf == doctest::Approx(2.0));
    CHECK_FALSE(rep.rows[i].rate_linf_d.has_value());
  }
  const std::vector<int> levels{2, 3, 4, 5};
  const std::vector<double> errs{0.3 * std::pow(2.0, -3.0), 0.3 * std::pow(2.0, -4.5), 0.3 * std::pow(2.0, -6.0),
                                 0.3 * std::pow(2.0, -7.5)};
  CHECK(fit_rate(levels, errs) == doctest::Approx(1.5));
  CHECK_THROWS_AS(fit_rate(std::vector<int>{1}, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("convergence study") {
  StudyOptions opts;
  opts.k_min = 2;
  opts.k_max = 4;
  opts.surrogate_level = 6;
  opts.d = 0.25;
  opts.threads = 3;
  const ErrorReport rep = convergence_study(DomainSpec::unit_square(), RepresenterTarget{{0.5, 0.5}}, opts);
  REQUIRE(rep.rows.size() == 3);
  CHECK(rep.surrogate_level == 6);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const ErrorRow& r = rep.rows[i];
    CHECK(r.level == 2 + static_cast<int>(i));
    CHECK(std::isfinite(r.err_h1));
    CHECK(r.err_linf >= r.err_linf_d);
    if (i > 0) {
      CHECK(r.err_h1 < rep.rows[i - 1].err_h1);
      CHECK(*r.rate_h1 > 0.5);
    }
  }

  opts.threads = 1;
  const ErrorReport seq = convergence_study(DomainSpec::unit_square(), RepresenterTarget{{0.5, 0.5}}, opts);
  for (std::size_t i = 0; i < rep.rows.size(); ++i) CHECK(seq.rows[i].err_h1 == rep.rows[i].err_h1);

  opts.surrogate_level = 5;
  CHECK_THROWS_AS(convergence_study(DomainSpec::unit_square(), RepresenterTarget{{0.5, 0.5}}, opts),
                  std::invalid_argument);
  opts.min_gap = 1;
  CHECK_NOTHROW(convergence_study(DomainSpec::unit_square(), RepresenterTarget{{0.5, 0.5}}, opts));
}

TEST_CASE("recovery target in a convergence study") {
  StudyOptions opts;
  opts.k_min = 3;
  opts.k_max = 4;
  opts.surrogate_level = 6;
  const FieldExpr exact = FieldExpr::parse("exp(x)*cos(y)");
  RecoveryTarget target{FieldExpr::parse("0"), synthesize_measurements(exact, box_formation(4))};
  const ErrorReport rep = convergence_study(DomainSpec::unit_square(), target, opts);
  REQUIRE(rep.rows.size() == 2);
  CHECK(rep.rows[1].err_h1 < rep.rows[0].err_h1);
}

TEST_CASE("boundary proximity study") {
  const std::vector<Point> pts{{0.8, 0.5}, {0.8, 0.5}, {0.9, 0.5}, {0.95, 0.5}};
  StudyOptions opts;
  opts.threads = 2;
  const auto rows = boundary_proximity_study(DomainSpec::unit_square(), pts, 3, 5, opts);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0].err_h1 == rows[1].err_h1);
  CHECK(rows[0].err_linf == rows[1].err_linf);
  CHECK(rows[2].d == doctest::Approx(0.1));
  for (std::size_t i = 2; i < rows.size(); ++i) {
    CHECK(rows[i].err_h1 > rows[i - 1].err_h1);
    CHECK(rows[i].err_linf > rows[i - 1].err_linf);
  }
  CHECK_THROWS_AS(boundary_proximity_study(DomainSpec::unit_square(), pts, 5, 5), std::invalid_argument);
}

TEST_CASE("recovery study") {
  StudyOptions opts;
  opts.k_min = 3;
  opts.k_max = 5;
  opts.d = 0.45;
  const FieldExpr exact = FieldExpr::parse("exp(x)*cos(y)");
  const MeasurementSet meas = synthesize_measurements(exact, box_formation(4));
  const auto rows = recovery_study(DomainSpec::unit_square(), FieldExpr::parse("0"), meas, &exact, 1e-14, opts);
  REQUIRE(rows.size() == 3);
  for (const auto& r : rows) {
    REQUIRE(r.err_linf);
    CHECK(*r.err_linf_d <= *r.err_linf);
    CHECK(r.max_residual <= 1e-8);
    CHECK(r.condition >= 1.0);
  }
  const auto blind = recovery_study(DomainSpec::unit_square(), FieldExpr::parse("0"), meas, nullptr, 1e-14, opts);
  CHECK_FALSE(blind[0].err_linf.has_value());
}
