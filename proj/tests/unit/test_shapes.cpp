#include <doctest.h>

#include <cmath>
#include <numbers>

#include "lddmm/error.hpp"
#include "lddmm/shapes.hpp"
#include "oracles.hpp"

using namespace lddmm;

namespace {

LandmarkState square() { return LandmarkState::from_points(2, {{0, 0}, {1, 0}, {1, 1}, {0, 1}}); }

LandmarkState reversed(const LandmarkState& q) {
  const int n = q.size();
  Vector c(q.coords().size());
  for (int i = 0; i < n; ++i) c.segment(2 * i, 2) = q.point(n - 1 - i);
  return LandmarkState(2, c);
}

}  // namespace

TEST_CASE("landmark states validate their partition") {
  CHECK_THROWS_AS(LandmarkState(2, Vector::Zero(3)), InvalidInput);
  CHECK_THROWS_AS(LandmarkState(2, Vector(0)), InvalidInput);
  Vector bad = Vector::Zero(4);
  bad[1] = std::nan("");
  CHECK_THROWS_AS(LandmarkState(2, bad), InvalidInput);
  CHECK_THROWS_AS(LandmarkState(2, Vector::Zero(6), {{"a", {0, 1}}}), InvalidInput);
  CHECK_THROWS_AS(LandmarkState(2, Vector::Zero(6), {{"a", {0, 1}}, {"b", {1, 2}}}), InvalidInput);
  CHECK_THROWS_AS(LandmarkState(2, Vector::Zero(6), {{"a", {0, 1, 2}}, {"b", {}}}), InvalidInput);
  CHECK_THROWS_AS(LandmarkState(2, Vector::Zero(6), {{"a", {0, 1}}, {"a", {2}}}), InvalidInput);
  CHECK_THROWS_AS(LandmarkState(2, Vector::Zero(6), {{"a", {0, 1, 3}}}), InvalidInput);
  const LandmarkState q(2, Vector::Zero(6));
  CHECK(q.groups().size() == 1);
  CHECK(q.group("shape").indices.size() == 3);
}

TEST_CASE("polygon volume") {
  CHECK(polygon_volume(square(), "shape") == 1.0);
  CHECK(polygon_volume(LandmarkState::from_points(2, {{0, 0}, {1, 0}, {0, 1}}), "shape") == 0.5);
  CHECK(polygon_volume(reversed(square()), "shape") == -1.0);
  CHECK_THROWS_AS(polygon_volume(LandmarkState(3, Vector::Zero(9)), "shape"), UnsupportedDimension);
  CHECK_THROWS_AS(polygon_volume(LandmarkState(2, Vector::Zero(4)), "shape"), InvalidInput);
  CHECK_THROWS_AS(polygon_volume(square(), "nope"), InvalidInput);
}

TEST_CASE("polygon volume invariances") {
  oracle::Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + trial;
    const LandmarkState q = circle_shape(n, {rng.normal(), rng.normal()}, 1.0 + rng.uniform(0, 1));
    Vector noisy = q.coords() + rng.normal_vector(2 * n, 0.05);
    const LandmarkState p(2, noisy);
    const double v = polygon_volume(p, "shape");
    CHECK(v == doctest::Approx(oracle::shoelace(noisy)).epsilon(1e-13));

    Vector rotated(2 * n);
    for (int i = 0; i < n; ++i) rotated.segment(2 * i, 2) = noisy.segment(2 * ((i + 3) % n), 2);
    CHECK(polygon_volume(LandmarkState(2, rotated), "shape") == doctest::Approx(v).epsilon(1e-13));

    Vector shifted = noisy;
    for (int i = 0; i < n; ++i) shifted.segment(2 * i, 2) += Eigen::Vector2d(3.0, -1.5);
    CHECK(polygon_volume(LandmarkState(2, shifted), "shape") == doctest::Approx(v).epsilon(1e-12));
    CHECK(polygon_volume(LandmarkState(2, 1.7 * noisy), "shape") == doctest::Approx(1.7 * 1.7 * v).epsilon(1e-13));
  }
}

TEST_CASE("volume gradient") {
  const LandmarkState sq = square();
  const Vector g = volume_gradient(sq, "shape");
  const Vector fd =
      oracle::fd_gradient([](const Vector& x) { return oracle::shoelace(x); }, sq.coords(), 1e-6);
  CHECK((g - fd).cwiseAbs().maxCoeff() < 1e-10);

  oracle::Rng rng(9);
  const int n = 11;
  const Vector x = circle_shape(n, {0, 0}, 1.0).coords() + rng.normal_vector(2 * n, 0.1);
  const LandmarkState q(2, x);
  const Vector gq = volume_gradient(q, "shape");
  for (int i = 0; i < n; ++i) {
    const auto next = q.point((i + 1) % n);
    const auto prev = q.point((i + n - 1) % n);
    CHECK(gq[2 * i] == 0.5 * (next[1] - prev[1]));
    CHECK(gq[2 * i + 1] == 0.5 * (prev[0] - next[0]));
  }
  Vector shifted = x;
  for (int i = 0; i < n; ++i) shifted.segment(2 * i, 2) += Eigen::Vector2d(0.25, -0.5);
  CHECK((volume_gradient(LandmarkState(2, shifted), "shape") - gq).cwiseAbs().maxCoeff() < 1e-14);

  // zero outside the group
  const LandmarkState two = concatenate({circle_shape(5, {0, 0}, 1, "a"), circle_shape(4, {3, 0}, 1, "b")});
  const Vector gb = volume_gradient(two, "b");
  CHECK(gb.head(10).isZero(0.0));
  CHECK_FALSE(gb.tail(8).isZero(0.0));
}

TEST_CASE("attachment and its gradient") {
  const LandmarkState q(1, Vector::Zero(1));
  const LandmarkState t(1, Vector::Constant(1, 2.0));
  CHECK(attachment(q, t, 1.0) == 4.0);
  CHECK(attachment_gradient(q, t, 1.0)[0] == -4.0);
  CHECK(attachment(t, t, 3.0) == 0.0);
  CHECK(attachment_gradient(t, t, 3.0).isZero(0.0));
  CHECK_THROWS_AS(attachment(q, LandmarkState(1, Vector::Zero(2)), 1.0), InvalidInput);

  oracle::Rng rng(4);
  const Vector a = rng.normal_vector(10), b = rng.normal_vector(10);
  const LandmarkState qa(2, a), qb(2, b);
  const Vector fd = oracle::fd_gradient(
      [&](const Vector& x) { return attachment(LandmarkState(2, x), qb, 0.7); }, a, 1e-5);
  CHECK((attachment_gradient(qa, qb, 0.7) - fd).cwiseAbs().maxCoeff() < 1e-8);

  Vector a2 = a, b2 = b;
  for (int i = 0; i < 5; ++i) {
    a2.segment(2 * i, 2) += Eigen::Vector2d(1, 2);
    b2.segment(2 * i, 2) += Eigen::Vector2d(1, 2);
  }
  CHECK(attachment(LandmarkState(2, a2), LandmarkState(2, b2), 0.7) ==
        doctest::Approx(attachment(qa, qb, 0.7)).epsilon(1e-12));
}

TEST_CASE("multishape attachment is additive over groups") {
  oracle::Rng rng(6);
  const LandmarkState s1 = ellipse_shape(6, {-1, 0}, 0.5, 0.3, "s1");
  const LandmarkState s2 = flower_shape(8, {1, 0}, 0.4, 0.1, 3, "s2");
  LandmarkState b1(2, s1.coords(), {{"b1", {0, 1, 2, 3, 4, 5}}});
  LandmarkState b2(2, s2.coords(), {{"b2", {0, 1, 2, 3, 4, 5, 6, 7}}});
  const LandmarkState q = concatenate({s1, s2, b1, b2});
  const std::vector<ShapeTarget> targets{{"s1", "b1", s1.coords()}, {"s2", "b2", s2.coords()}};
  const AttachmentValue zero = multishape_attachment(q, targets, 2.0);
  CHECK(zero.value == 0.0);
  CHECK(zero.gradient.isZero(0.0));

  // only the first background copy displaced
  Vector moved = q.coords();
  moved.segment(2 * 14, 12) += rng.normal_vector(12, 0.2);
  const LandmarkState qm = q.with_coords(moved);
  const double single = attachment(LandmarkState(2, moved.segment(2 * 14, 12)), s1, 2.0);
  CHECK(multishape_attachment(qm, targets, 2.0).value == doctest::Approx(single).epsilon(1e-14));

  const Vector x = q.coords() + rng.normal_vector(q.coords().size(), 0.3);
  const Vector fd = oracle::fd_gradient(
      [&](const Vector& y) { return multishape_attachment(q.with_coords(y), targets, 2.0).value; }, x, 1e-5);
  const AttachmentValue at = multishape_attachment(q.with_coords(x), targets, 2.0);
  CHECK((at.gradient - fd).cwiseAbs().maxCoeff() < 1e-7);

  // grouped attachment with the same targets agrees
  const LandmarkState tq = q;
  CHECK(grouped_attachment(q.with_coords(x), tq, 2.0).value == doctest::Approx(at.value).epsilon(1e-13));
  CHECK_THROWS_AS(multishape_attachment(q, {{"s1", "missing", s1.coords()}}, 1.0), InvalidInput);
}

TEST_CASE("curve generators") {
  const LandmarkState c = circle_shape(4, {0, 0}, 1.0);
  const double expect[8] = {1, 0, 0, 1, -1, 0, 0, -1};
  for (int i = 0; i < 8; ++i) CHECK(c.coords()[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  CHECK(std::abs(polygon_volume(circle_shape(256, {0.3, 0.1}, 2.0), "shape") / (std::numbers::pi * 4) - 1) < 1e-3);
  CHECK(flower_shape(12, {1, 2}, 0.7, 0.0, 5) == circle_shape(12, {1, 2}, 0.7));
  CHECK(polygon_volume(ellipse_shape(64, {0, 0}, 2.0, 1.0), "shape") > 0.0);
  CHECK_THROWS_AS(circle_shape(2, {0, 0}, 1.0), InvalidInput);
}

TEST_CASE("diameter and point-in-polygon") {
  CHECK(diameter(square()) == doctest::Approx(std::sqrt(2.0)));
  CHECK(diameter(LandmarkState(2, Vector::Zero(2))) == 0.0);
  CHECK(inside_polygon(square(), "shape", {0.5, 0.5}));
  CHECK_FALSE(inside_polygon(square(), "shape", {1.5, 0.5}));
}
