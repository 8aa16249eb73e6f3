#include <gtest/gtest.h>

#include <numbers>

#include <unsupported/Eigen/MatrixFunctions>

#include "support.hpp"

namespace quamo {
namespace {

using test::random_unit;
using test::random_vec;
constexpr double kPi = std::numbers::pi;

void expect_quat(const Quaterniond& actual, const Quaterniond& expected, double tol) {
  EXPECT_NEAR(actual.w, expected.w, tol);
  EXPECT_NEAR(actual.x, expected.x, tol);
  EXPECT_NEAR(actual.y, expected.y, tol);
  EXPECT_NEAR(actual.z, expected.z, tol);
}

TEST(Hamilton, UnitRelations) {
  const Quaterniond i{0, 1, 0, 0}, j{0, 0, 1, 0}, k{0, 0, 0, 1};
  EXPECT_EQ(hamilton(i, j), k);
  EXPECT_EQ(hamilton(j, i), -k);
  EXPECT_EQ(hamilton(i, i), Quaterniond(-1, 0, 0, 0));
  EXPECT_EQ(hamilton(hamilton(i, j), k), Quaterniond(-1, 0, 0, 0));
  const Quaterniond q{0.5, 0.5, 0.5, 0.5};
  EXPECT_EQ(hamilton(Quaterniond::identity(), q), q);
}

TEST(Hamilton, MatchesEigenProduct) {
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond p = random_unit() * test::uniform(0.1, 3.0);
    const Quaterniond q = random_unit() * test::uniform(0.1, 3.0);
    const Quaterniond expected = test::from_eigen(test::to_eigen(p) * test::to_eigen(q));
    EXPECT_LT(test::max_abs_diff(hamilton(p, q), expected), 1e-12);
  }
}

TEST(Hamilton, AssociativeAndNormMultiplicative) {
  double worst_assoc = 0.0, worst_norm = 0.0;
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond p = random_unit(), q = random_unit(), r = random_unit();
    worst_assoc = std::max(worst_assoc, (hamilton(hamilton(p, q), r) - hamilton(p, hamilton(q, r))).norm());
    const Quaterniond a = p * 2.5, b = q * 0.3;
    worst_norm = std::max(worst_norm, std::abs(hamilton(a, b).norm() - a.norm() * b.norm()) / (a.norm() * b.norm()));
  }
  EXPECT_LE(worst_assoc, 1e-12);
  EXPECT_LE(worst_norm, 1e-12);
}

TEST(Conjugate, Examples) {
  EXPECT_EQ(conjugate(Quaterniond::identity()), Quaterniond::identity());
  EXPECT_EQ(conjugate(Quaterniond(0.5, 0.5, 0.5, 0.5)), Quaterniond(0.5, -0.5, -0.5, -0.5));
  for (int n = 0; n < 100; ++n) {
    const Quaterniond q = random_unit() * 1.7;
    EXPECT_EQ(conjugate(conjugate(q)), q);
  }
}

TEST(Conjugate, ProductWithSelfIsIdentity) {
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond q = random_unit();
    EXPECT_LE(test::max_abs_diff(hamilton(q, conjugate(q)), Quaterniond::identity()), 1e-12);
  }
}

TEST(Vec, Projection) {
  EXPECT_EQ(vec(Quaterniond::identity()), Vec3::Zero());
  EXPECT_EQ(vec(Quaterniond(0.9239, 0.3827, 0, 0)), Vec3(0.3827, 0, 0));
  const Quaterniond q = random_unit();
  EXPECT_LE(vec(hamilton(q, conjugate(q))).norm(), 1e-15);
}

TEST(Normalize, UnitAfterNormalizeAndCounted) {
  const auto before = normalize_call_count();
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond q = (random_unit() * test::uniform(1e-3, 1e3)).normalized();
    EXPECT_LE(std::abs(q.norm() - 1.0), 1e-12);
  }
  EXPECT_EQ(normalize_call_count() - before, 1000u);
  EXPECT_THROW((Quaterniond{0, 0, 0, 0}.normalized()), DomainError);
}

TEST(AxisAngle, Examples) {
  expect_quat(from_axis_angle(Vec3(0, 0, 1), kPi), {0, 0, 0, 1}, 1e-16);
  EXPECT_EQ(from_axis_angle(Vec3(1, 0, 0), 0.0), Quaterniond::identity());
  const double c = std::cos(kPi / 4), s = std::sin(kPi / 4);
  expect_quat(from_axis_angle(Vec3(0, 1, 0), kPi / 2), {c, 0, s, 0}, 1e-15);
  EXPECT_NEAR(c, 0.7071, 1e-4);
}

TEST(AxisAngle, NearIdentityConvention) {
  const AxisAngle<double> a = to_axis_angle(from_axis_angle(Vec3(0, 1, 0), 1e-9));
  EXPECT_EQ(a.angle, 0.0);
  EXPECT_EQ(a.axis, Vec3(1, 0, 0));
  EXPECT_EQ(to_axis_angle(Quaterniond::identity()).axis, Vec3(1, 0, 0));
}

TEST(AxisAngle, RoundTripAndCanonicalForm) {
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond q = random_unit();
    const AxisAngle<double> a = to_axis_angle(q);
    EXPECT_GE(a.angle, 0.0);
    EXPECT_LE(a.angle, kPi);
    EXPECT_NEAR(a.axis.norm(), 1.0, 1e-12);
    EXPECT_LE(geodesic_angle(from_axis_angle(a), q), 1e-9);
    const Quaterniond made = from_axis_angle(random_vec().normalized(), test::uniform(-10, 10));
    EXPECT_LE(std::abs(made.norm() - 1.0), 1e-14);
  }
}

TEST(AxisAngle, MatchesEigenAngleAxis) {
  for (int n = 0; n < 200; ++n) {
    const Vec3 axis = random_vec().normalized();
    const double angle = test::uniform(0.0, kPi);
    EXPECT_LE(test::max_abs_diff(from_axis_angle(axis, angle), test::rodrigues(axis, angle)), 1e-15);
  }
}

TEST(LogExp, InverseMaps) {
  for (int n = 0; n < 500; ++n) {
    const Vec3 v = random_vec(1.5);
    EXPECT_LE((log_map(exp_map(v)) - v).norm(), 1e-12);
  }
  EXPECT_EQ(log_map(Quaterniond::identity()), Vec3::Zero());
  EXPECT_EQ(exp_map(Vec3::Zero().eval()), Quaterniond::identity());
}

TEST(Euler, Examples) {
  EXPECT_EQ(from_euler(EulerAnglesd{EulerSequence::XYZ, Vec3::Zero(), false}), Quaterniond::identity());
  expect_quat(from_euler(EulerAnglesd{EulerSequence::XYZ, Vec3(kPi / 2, 0, 0), false}),
              {std::cos(kPi / 4), std::sin(kPi / 4), 0, 0}, 1e-15);
  const Vec3 a(0.1, 0.2, 0.3);
  const Quaterniond brute = hamilton(hamilton(from_axis_angle(Vec3(0, 0, 1), 0.1), from_axis_angle(Vec3(1, 0, 0), 0.2)),
                                     from_axis_angle(Vec3(0, 1, 0), 0.3));
  expect_quat(from_euler(EulerAnglesd{EulerSequence::ZXY, a, false}), brute, 1e-15);
}

TEST(Euler, IntrinsicXYZMatchesEigen) {
  for (int n = 0; n < 200; ++n) {
    const Vec3 a = random_vec(3.0);
    const Eigen::Quaterniond e = Eigen::AngleAxisd(a(0), Eigen::Vector3d::UnitX()) *
                                 Eigen::AngleAxisd(a(1), Eigen::Vector3d::UnitY()) *
                                 Eigen::AngleAxisd(a(2), Eigen::Vector3d::UnitZ());
    EXPECT_LE(geodesic_angle(from_euler(EulerAnglesd{EulerSequence::XYZ, a, false}), test::from_eigen(e)), 1e-12);
  }
}

TEST(Euler, RoundTripAwayFromGimbalLock) {
  for (const auto seq : {EulerSequence::XYZ, EulerSequence::ZXY}) {
    for (int n = 0; n < 1000; ++n) {
      Vec3 a = random_vec(kPi);
      if (std::abs(std::abs(std::remainder(a(1), 2 * kPi)) - kPi / 2) < 1e-3) continue;
      const Quaterniond q = from_euler(EulerAnglesd{seq, a, false});
      const EulerAnglesd back = to_euler(q, seq);
      EXPECT_FALSE(back.gimbal_locked);
      for (int i = 0; i < 3; ++i) {
        EXPECT_GE(back.angles(i), 0.0);
        EXPECT_LT(back.angles(i), 2 * kPi);
      }
      EXPECT_LE(geodesic_angle(from_euler(back), q), 1e-9) << to_string(seq);
    }
  }
}

TEST(Euler, GimbalLockFlagsAndZeroesFreeAngle) {
  for (const auto seq : {EulerSequence::XYZ, EulerSequence::ZXY}) {
    const Quaterniond q = from_euler(EulerAnglesd{seq, Vec3(0.4, kPi / 2, 0.9), false});
    const EulerAnglesd e = to_euler(q, seq);
    EXPECT_TRUE(e.gimbal_locked);
    EXPECT_EQ(e.angles(2), 0.0);
    EXPECT_LE(geodesic_angle(from_euler(e), q), 1e-7);
  }
}

TEST(Euler, WrapToTwoPi) {
  EXPECT_NEAR(wrap_two_pi(6.32), 6.32 - 2 * kPi, 1e-15);
  EXPECT_NEAR(wrap_two_pi(-0.1), 2 * kPi - 0.1, 1e-15);
  EXPECT_EQ(wrap_two_pi(0.0), 0.0);
  EXPECT_LT(wrap_two_pi(-1e-18), 2 * kPi);
}

TEST(OmegaMatrix, PrintedPattern) {
  EXPECT_EQ(omega_matrix(Vec3::Zero().eval()), Mat4::Zero());
  Mat4 expected;
  expected << 0, 1, 0, 0,
             -1, 0, 0, 0,
              0, 0, 0, 1,
              0, 0, -1, 0;
  EXPECT_EQ(omega_matrix(Vec3(0, 0, 1)), expected);
}

TEST(OmegaMatrix, Antisymmetric) {
  for (int n = 0; n < 1000; ++n) {
    const Mat4 m = omega_matrix(random_vec(20.0));
    EXPECT_LE((m + m.transpose()).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(OmegaMatrix, ExponentialIsRightProduct) {
  // exp(dt/2 Omega(w)) acting on the vector-first coordinates of q gives
  // q (x) (cos(|w|dt/2), w/|w| sin(|w|dt/2)).
  for (int n = 0; n < 100; ++n) {
    const Vec3 w = random_vec(5.0);
    const double dt = 0.04;
    const Quaterniond q = random_unit();
    const Mat4 m = (0.5 * dt * omega_matrix(w)).exp();
    const Quaterniond via_matrix = from_vector_first<double>(m * to_vector_first(q));
    const Quaterniond qw{std::cos(w.norm() * dt / 2), w.x() / w.norm() * std::sin(w.norm() * dt / 2),
                         w.y() / w.norm() * std::sin(w.norm() * dt / 2), w.z() / w.norm() * std::sin(w.norm() * dt / 2)};
    EXPECT_LE(test::max_abs_diff(via_matrix, hamilton(q, qw)), 1e-13);
  }
}

TEST(OmegaMatrix, DerivativeIsHalfOmegaTimesQ) {
  for (int n = 0; n < 100; ++n) {
    const Vec3 w = random_vec(5.0);
    const Quaterniond q = random_unit();
    const Quaterniond expected = from_vector_first<double>(0.5 * omega_matrix(w) * to_vector_first(q));
    EXPECT_LE(test::max_abs_diff(qde_derivative(q, w), expected), 1e-14);
  }
}

TEST(RotationMatrix, MatchesSandwichProduct) {
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond q = random_unit();
    const Vec3 v = random_vec(10.0);
    const Vec3 sandwich = vec(hamilton(hamilton(q, Quaterniond(0, v)), conjugate(q)));
    EXPECT_LE((to_rotation_matrix(q) * v - sandwich).norm(), 1e-10);
    EXPECT_LE((rotate(q, v) - sandwich).norm(), 1e-10);
  }
}

TEST(Geodesic, Examples) {
  const Quaterniond q = random_unit();
  EXPECT_EQ(geodesic_angle(q, q), 0.0);
  EXPECT_EQ(geodesic_angle(q, -q), 0.0);
  EXPECT_NEAR(geodesic_angle(Quaterniond::identity(), from_axis_angle(Vec3(0, 0, 1), kPi / 2)), kPi / 2, 1e-15);
}

TEST(Geodesic, AgreesWithArccosForm) {
  for (int n = 0; n < 1000; ++n) {
    const Quaterniond p = random_unit(), q = random_unit();
    const double arccos = 2.0 * std::acos(std::min(1.0, std::abs(dot(p, q))));
    EXPECT_NEAR(geodesic_angle(p, q), arccos, 1e-7);
    EXPECT_GE(geodesic_angle(p, q), 0.0);
    EXPECT_LE(geodesic_angle(p, q), kPi);
  }
}

TEST(Geodesic, SmallAnglesResolved) {
  const Quaterniond a = from_axis_angle(Vec3(0, 0, 1), 1e-10);
  EXPECT_NEAR(geodesic_angle(Quaterniond::identity(), a), 1e-10, 1e-22);
}

TEST(Geodesic, RejectsOffSphere) {
  EXPECT_THROW(geodesic_angle(Quaterniond(1.01, 0, 0, 0), Quaterniond::identity()), DomainError);
  EXPECT_NO_THROW(geodesic_angle(Quaterniond(1 + 5e-7, 0, 0, 0), Quaterniond::identity()));
}

TEST(Canonicalize, PicksHemisphere) {
  const Quaterniond q = random_unit();
  EXPECT_EQ(canonicalize(-q, q), q);
  EXPECT_EQ(canonicalize(q, q), q);
}

}  // namespace
}  // namespace quamo
