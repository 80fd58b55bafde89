#include <doctest.h>

#include <cmath>
#include <numbers>

#include "curve.hpp"
#include "error.hpp"

using namespace knotmorse;

namespace {

ErrorCode curve_error(std::string_view text) {
  try {
    parse_curve(text);
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error for " << text);
  return ErrorCode::Syntax;
}

}  // namespace

TEST_CASE("trefoil builtin matches its formula") {
  const KnotCurve k = builtin_curve("paper_trefoil");
  for (int i = 0; i < 16; ++i) {
    const double t = kTwoPi * (i + 0.37) / 16.0;
    const Vec3 expected(std::sin(t) + 2 * std::sin(2 * t), std::cos(t) - 2 * std::cos(2 * t),
                        -std::sin(3 * t));
    CHECK((k.point(t) - expected).norm() <= 1e-12);
  }
  CHECK((k.point(0.0) - Vec3(0, -1, 0)).norm() <= 1e-15);
  CHECK((k.point(kTwoPi) - k.point(0.0)).norm() <= 1e-9);
}

TEST_CASE("parsing the trefoil text gives the builtin") {
  const KnotCurve a = parse_curve("(sin(t) + 2*sin(2*t), cos(t) - 2*cos(2*t), -sin(3*t))");
  const KnotCurve b = builtin_curve("paper_trefoil");
  for (int axis = 0; axis < 3; ++axis) CHECK(a.component(axis) == b.component(axis));
  const KnotCurve c = parse_curve(a.to_string());
  for (int axis = 0; axis < 3; ++axis) CHECK(c.component(axis) == a.component(axis));
}

TEST_CASE("circle evaluation") {
  const KnotCurve c = parse_curve("(cos(t), sin(t), 0)");
  const CurveSample s = c.sample(std::numbers::pi / 2);
  CHECK((s.point - Vec3(0, 1, 0)).norm() <= 1e-15);
  CHECK(s.speed == doctest::Approx(1.0));
  // Parameters wrap modulo 2pi.
  CHECK((c.sample(std::numbers::pi / 2 + 3 * kTwoPi).point - s.point).norm() <= 1e-12);

  const KnotCurve c2 = builtin_curve("circle", std::vector<double>{2.5});
  CHECK(c2.sample(0.3).speed == doctest::Approx(2.5));
}

TEST_CASE("torus knot builtin") {
  const KnotCurve k = builtin_curve("torus_knot", std::vector<double>{2, 3, 2, 1});
  for (double t : {0.0, 0.4, 2.0, 5.5}) {
    const Vec3 expected((2 + std::cos(3 * t)) * std::cos(2 * t),
                        (2 + std::cos(3 * t)) * std::sin(2 * t), std::sin(3 * t));
    CHECK((k.point(t) - expected).norm() <= 1e-13);
  }
}

TEST_CASE("curve derivatives match central differences") {
  for (const char* name : {"paper_trefoil", "circle"}) {
    const KnotCurve k = builtin_curve(name);
    for (double t = 0.05; t < kTwoPi; t += 0.31) {
      const double h = 1e-5;
      const Vec3 fd = (k.point(t + h) - k.point(t - h)) / (2 * h);
      const Vec3 fd2 = (k.velocity(t + h) - k.velocity(t - h)) / (2 * h);
      CHECK((fd - k.velocity(t)).norm() <= 1e-6 * (1 + k.velocity(t).norm()));
      CHECK((fd2 - k.acceleration(t)).norm() <= 1e-6 * (1 + k.acceleration(t).norm()));
    }
  }
}

TEST_CASE("curve validation errors") {
  CHECK(curve_error("(t, 0, 0)") == ErrorCode::OpenCurve);
  CHECK(curve_error("(0, 0, 0)") == ErrorCode::SingularCurve);
  CHECK(curve_error("(cos(t)^3, sin(t)^3, 0)") == ErrorCode::SingularCurve);
  CHECK(curve_error("(cos(t), sin(t))") == ErrorCode::Syntax);
  CHECK(curve_error("(cos(t), sin(t), 0, 1)") == ErrorCode::Syntax);
  CHECK(curve_error("(cos(s), sin(t), 0)") == ErrorCode::UnknownIdentifier);
  CHECK_THROWS_AS(builtin_curve("figure_eight"), Error);
  CHECK_THROWS_AS(builtin_curve("circle", std::vector<double>{-1.0}), Error);
  CHECK_THROWS_AS(builtin_curve("torus_knot", std::vector<double>{2, 3, 1, 2}), Error);
}

TEST_CASE("syntax errors inside a curve report the offset in the whole text") {
  try {
    parse_curve("(cos(t), sin(t) +, 0)");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Syntax);
    CHECK(std::string(e.what()).find("offset 17") != std::string::npos);
  }
}

TEST_CASE("perturbation") {
  const KnotCurve k = builtin_curve("paper_trefoil");

  SUBCASE("zero amplitude leaves evaluations unchanged") {
    const KnotCurve p = perturb(k, 0.0, 99);
    for (double t = 0; t < kTwoPi; t += 0.1) CHECK(p.point(t) == k.point(t));
  }
  SUBCASE("displacement is bounded by the amplitude") {
    const KnotCurve p = perturb(k, 0.05, 42);
    double worst = 0.0;
    for (int i = 0; i < 20000; ++i) {
      const double t = kTwoPi * i / 20000.0;
      worst = std::max(worst, (p.point(t) - k.point(t)).norm());
    }
    CHECK(worst <= 0.05);
    CHECK(worst > 0.005);
    CHECK((p.point(kTwoPi) - p.point(0.0)).norm() < 1e-9);
  }
  SUBCASE("deterministic in the seed") {
    const KnotCurve a = perturb(k, 0.05, 42), b = perturb(k, 0.05, 42), c = perturb(k, 0.05, 43);
    CHECK(a.point(1.0) == b.point(1.0));
    CHECK(a.point(1.0) != c.point(1.0));
  }
  SUBCASE("circle stays closed") {
    const KnotCurve p = perturb(builtin_curve("circle"), 0.01, 7);
    CHECK((p.point(kTwoPi) - p.point(0.0)).norm() < 1e-9);
    // The perturbed curve survives printing and reparsing.
    const KnotCurve q = parse_curve(p.to_string());
    for (double t = 0; t < kTwoPi; t += 0.7) CHECK((q.point(t) - p.point(t)).norm() < 1e-14);
  }
  SUBCASE("invalid amplitude") {
    CHECK_THROWS_AS(perturb(k, -1.0, 1), Error);
    CHECK_THROWS_AS(perturb(k, std::nan(""), 1), Error);
  }
  SUBCASE("a perturbation that lands on a cusp is rejected") {
    // Subtract the seed-7 displacement from an astroid. The base curve is
    // regular, and perturbing it with the same seed restores the cusps.
    const KnotCurve circle = builtin_curve("circle");
    const KnotCurve shifted = perturb(circle, 0.05, 7);
    const Expr t = Expr::variable();
    const Expr astroid[3] = {pow(cos(t), 3), pow(sin(t), 3), Expr::constant(0.0)};
    Expr base[3];
    for (int a = 0; a < 3; ++a) base[a] = astroid[a] - (shifted.component(a) - circle.component(a));
    const KnotCurve regular(base[0], base[1], base[2]);
    try {
      perturb(regular, 0.05, 7);
      FAIL("expected SingularCurve");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::SingularCurve);
      CHECK(std::string(e.what()).find("smaller perturbation amplitude") != std::string::npos);
    }
  }
}
