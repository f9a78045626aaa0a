#include <gtest/gtest.h>

#include <random>

#include "glse/aug.hpp"

using namespace glse;

TEST(AugPair, RoundTripsComplex) {
  const cplx c(1.5, -2.25);
  const AugPair p(c);
  EXPECT_EQ(p.v1, 1.5);
  EXPECT_EQ(p.v2, -2.25);
  EXPECT_EQ(p.to_complex(), c);
  EXPECT_DOUBLE_EQ(p.norm2(), std::norm(c));
  EXPECT_DOUBLE_EQ(p.norm(), std::abs(c));
}

TEST(AugMat, MatchesComplexMultiplication) {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> nd;
  for (int i = 0; i < 100; ++i) {
    const cplx h(nd(rng), nd(rng)), x(nd(rng), nd(rng));
    const AugPair hx = augment_complex(h) * AugPair(x);
    EXPECT_NEAR(hx.v1, (h * x).real(), 1e-14);
    EXPECT_NEAR(hx.v2, (h * x).imag(), 1e-14);
    const AugPair fwd = aug_mul(h, AugPair(x));
    EXPECT_NEAR(fwd.v1, hx.v1, 1e-14);
    const AugPair back = aug_mul_transpose(h, AugPair(x));
    EXPECT_NEAR(back.v1, (std::conj(h) * x).real(), 1e-14);
    EXPECT_NEAR(back.v2, (std::conj(h) * x).imag(), 1e-14);
  }
}

TEST(Mat2, InverseAndProducts) {
  const Mat2 m{2.0, 1.0, -1.0, 3.0};
  const Mat2 p = m * inverse(m);
  EXPECT_NEAR(p.a, 1.0, 1e-15);
  EXPECT_NEAR(p.b, 0.0, 1e-15);
  EXPECT_NEAR(p.c, 0.0, 1e-15);
  EXPECT_NEAR(p.d, 1.0, 1e-15);
  EXPECT_DOUBLE_EQ(m.det(), 7.0);
  EXPECT_DOUBLE_EQ(m.trace(), 5.0);
  EXPECT_THROW(inverse(Mat2{1.0, 2.0, 2.0, 4.0}), NonInvertible);
  EXPECT_THROW(inverse(Mat2{NAN, 0.0, 0.0, 1.0}), NonInvertible);
}

TEST(SpdMat2, PassesWellConditionedInputThrough) {
  bool clamped = true;
  const SpdMat2 r = SpdMat2::regularized(Mat2{2.0, 0.5, 0.5, 1.0}, &clamped);
  EXPECT_FALSE(clamped);
  EXPECT_EQ(r.mat().a, 2.0);
  EXPECT_EQ(r.mat().b, 0.5);
  EXPECT_EQ(r.mat().d, 1.0);
}

TEST(SpdMat2, SymmetrizesAndClamps) {
  bool clamped = false;
  const SpdMat2 r = SpdMat2::regularized(Mat2{1.0, 0.0, 0.0, 0.0}, &clamped);
  EXPECT_TRUE(clamped);
  const auto [hi, lo] = r.eigenvalues();
  EXPECT_NEAR(hi, 1.0, 1e-15);
  EXPECT_NEAR(lo, kSpdFloor, 1e-16);
  EXPECT_NEAR(r.mat().d, kSpdFloor, 1e-20);

  const SpdMat2 s = SpdMat2::regularized(Mat2{1.0, 0.2, 0.4, 1.0});
  EXPECT_DOUBLE_EQ(s.mat().b, s.mat().c);
  EXPECT_DOUBLE_EQ(s.mat().b, 0.3);

  const SpdMat2 neg = SpdMat2::regularized(Mat2{-1.0, 0.0, 0.0, 2.0});
  EXPECT_GE(neg.eigenvalues().second, kSpdFloor);
  EXPECT_THROW(SpdMat2::regularized(Mat2{INFINITY, 0.0, 0.0, 1.0}), NonInvertible);
}

TEST(SpdMat2, ClampPreservesEigenvectors) {
  // Rotated diag(5, -1): the negative direction is floored, the other kept.
  const double c = std::cos(0.3), s = std::sin(0.3);
  const AugPair v{c, s}, w{-s, c};
  const Mat2 m = 5.0 * Mat2::outer(v, v) - 1.0 * Mat2::outer(w, w);
  const SpdMat2 r = SpdMat2::regularized(m);
  const AugPair rv = r.mat() * v;
  EXPECT_NEAR(rv.v1, 5.0 * v.v1, 1e-12);
  EXPECT_NEAR(rv.v2, 5.0 * v.v2, 1e-12);
}

TEST(SpdMat2, TraceInverse) {
  const SpdMat2 r = SpdMat2::regularized(Mat2{2.0, 0.0, 0.0, 4.0});
  EXPECT_DOUBLE_EQ(trace_inverse(r), 0.75);
  const SpdMat2 ri = spd_inverse(r);
  EXPECT_DOUBLE_EQ(ri.mat().a, 0.5);
  EXPECT_DOUBLE_EQ(ri.mat().d, 0.25);
}
