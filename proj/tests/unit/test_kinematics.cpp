// Copyright 2026 The splatrig Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "kinematics.hpp"
#include "test_support.hpp"

namespace splatrig {
namespace {

using testing::Rng;
using testing::thrown_code;

constexpr double kPi = std::numbers::pi;

// Raw joint parameters kept alongside the generated text so the oracle never
// reads the parsed model.
struct RawJoint {
  std::string type;
  Vec3 xyz;
  Vec3 rpy;
  Vec3 axis;
  double lo;
  double hi;
};

Mat4 oracle_origin(const RawJoint& j) {
  const Mat3 r = (Eigen::AngleAxisd(j.rpy.z(), Vec3::UnitZ()) * Eigen::AngleAxisd(j.rpy.y(), Vec3::UnitY()) *
                  Eigen::AngleAxisd(j.rpy.x(), Vec3::UnitX()))
                     .toRotationMatrix();
  return testing::homogeneous(r, j.xyz);
}

Mat4 oracle_motion(const RawJoint& j, double q) {
  if (j.type == "revolute") return testing::homogeneous(Eigen::AngleAxisd(q, j.axis).toRotationMatrix(), Vec3::Zero());
  if (j.type == "prismatic") return testing::homogeneous(Mat3::Identity(), j.axis * q);
  return Mat4::Identity();
}

std::string chain_text(const std::vector<RawJoint>& joints) {
  std::ostringstream out;
  out.precision(17);
  for (std::size_t i = 0; i <= joints.size(); ++i) out << "link l" << i << "\n";
  for (std::size_t i = 0; i < joints.size(); ++i) {
    const auto& j = joints[i];
    out << "joint j" << i << " " << j.type << " l" << i << " l" << i + 1 << " xyz=" << j.xyz.x() << ","
        << j.xyz.y() << "," << j.xyz.z() << " rpy=" << j.rpy.x() << "," << j.rpy.y() << "," << j.rpy.z()
        << " axis=" << j.axis.x() << "," << j.axis.y() << "," << j.axis.z() << " limits=" << j.lo << "," << j.hi
        << "\n";
  }
  return out.str();
}

std::vector<RawJoint> random_chain(Rng& rng, int n, bool with_prismatic) {
  std::vector<RawJoint> joints;
  for (int i = 0; i < n; ++i) {
    RawJoint j;
    j.type = (with_prismatic && i % 3 == 2) ? "prismatic" : "revolute";
    j.xyz = testing::random_vec3(rng, -0.3, 0.3);
    j.rpy = testing::random_vec3(rng, -kPi, kPi);
    j.axis = testing::random_unit(rng);
    j.lo = -kPi;
    j.hi = kPi;
    joints.push_back(j);
  }
  return joints;
}

std::vector<Mat4> oracle_fk(const std::vector<RawJoint>& joints, const std::vector<double>& q) {
  std::vector<Mat4> poses{Mat4::Identity()};
  for (std::size_t i = 0; i < joints.size(); ++i) {
    poses.push_back(poses.back() * oracle_origin(joints[i]) * oracle_motion(joints[i], q[i]));
  }
  return poses;
}

constexpr const char* kGripper = R"(
link base
link palm
link left
link right
joint mount fixed base palm xyz=0,0,0.1
joint finger_l prismatic palm left axis=0,1,0 limits=0,0.04
joint finger_r prismatic palm right axis=0,-1,0 limits=-0.02,0.06
mimic gripper finger_l
mimic gripper finger_r multiplier=-1 offset=1
)";

TEST(ParseKinematicModel, SingleFixedJointGivesTwoLinks) {
  const auto model = parse_kinematic_model("link base\nlink tool\njoint mount fixed base tool xyz=0,0,0.1\n");
  ASSERT_EQ(model.links.size(), 2u);
  EXPECT_EQ(model.dof(), 0u);
  const auto fk = forward_kinematics(model, {});
  EXPECT_EQ(fk.link_poses[0].matrix(), Mat4::Identity());
  EXPECT_TRUE(fk.link_poses[1].translation().isApprox(Vec3(0, 0, 0.1)));
  EXPECT_TRUE(fk.link_poses[1].rotation().isIdentity(0.0));
}

TEST(ParseKinematicModel, CommentsAndBlankLinesIgnored) {
  const auto model = parse_kinematic_model("# arm\n\nlink a   # root\nlink b\njoint j revolute a b axis=0,0,1\n");
  EXPECT_EQ(model.links.size(), 2u);
  EXPECT_EQ(model.dof(), 1u);
  EXPECT_EQ(model.joint_index("j"), 0);
  EXPECT_EQ(model.link_index("b"), 1);
  EXPECT_EQ(model.link_index("c"), -1);
}

TEST(ParseKinematicModel, CycleIsRejected) {
  std::string message;
  const auto code = thrown_code(
      [] {
        parse_kinematic_model(
            "link root\nlink a\nlink b\njoint r fixed root a\njoint ab fixed a b\njoint ba fixed b a\n");
      },
      &message);
  EXPECT_EQ(code, ErrorCode::kFormat);
  EXPECT_NE(message.find("parent"), std::string::npos) << message;

  EXPECT_EQ(thrown_code([] { parse_kinematic_model("link a\nlink b\njoint ab fixed a b\njoint ba fixed b a\n"); },
                        &message),
            ErrorCode::kFormat);
  EXPECT_EQ(thrown_code([] { parse_kinematic_model("link a\njoint aa fixed a a\n"); }, &message),
            ErrorCode::kFormat);
  EXPECT_NE(message.find("cycle"), std::string::npos) << message;
}

TEST(ParseKinematicModel, MultipleRootsRejected) {
  std::string message;
  EXPECT_EQ(thrown_code([] { parse_kinematic_model("link a\nlink b\nlink c\njoint ab fixed a b\n"); }, &message),
            ErrorCode::kFormat);
  EXPECT_NE(message.find("multiple roots"), std::string::npos) << message;
}

TEST(ParseKinematicModel, UnknownJointTypeRejected) {
  std::string message;
  EXPECT_EQ(thrown_code([] { parse_kinematic_model("link a\nlink b\njoint ab spherical a b\n"); }, &message),
            ErrorCode::kFormat);
  EXPECT_NE(message.find("spherical"), std::string::npos) << message;
  EXPECT_NE(message.find("line 3"), std::string::npos) << message;
}

TEST(ParseKinematicModel, NonUnitAxisRejected) {
  std::string message;
  EXPECT_EQ(thrown_code([] { parse_kinematic_model("link a\nlink b\njoint ab revolute a b axis=0,0,2\n"); },
                        &message),
            ErrorCode::kFormat);
  EXPECT_NE(message.find("axis"), std::string::npos) << message;
}

TEST(ParseKinematicModel, MalformedInputRejected) {
  const char* bad[] = {
      "",
      "link a\nlink a\n",
      "link a\nlink b\njoint ab revolute a b limits=1,-1\n",
      "link a\nlink b\njoint ab revolute a c\n",
      "link a\nlink b\njoint ab revolute a b xyz=1,2\n",
      "link a\nlink b\njoint ab revolute a b xyz=1,2,zz\n",
      "link a\nlink b\njoint ab revolute a b color=red\n",
      "link a\nlink b\njoint ab revolute a b\njoint ab2 revolute a b\n",
      "link a\nlink b\njoint ab revolute a b\nmimic g nope\n",
      "link a\nlink b\njoint ab fixed a b\nmimic g ab\n",
      "link a\nlink b\njoint ab revolute a b\nmimic g ab\n",
      "link a\nlink b\njoint ab prismatic a b limits=0,1\nmimic g ab multiplier=2\n",
      "widget a\n",
  };
  for (const char* text : bad) {
    EXPECT_EQ(thrown_code([&] { parse_kinematic_model(text); }), ErrorCode::kFormat) << text;
  }
}

TEST(ForwardKinematics, RevoluteQuarterTurnMovesChildOffset) {
  const auto model = parse_kinematic_model(
      "link base\nlink arm\nlink tip\njoint j revolute base arm axis=0,0,1\njoint t fixed arm tip xyz=1,0,0\n");
  const auto fk = forward_kinematics(model, {{kPi / 2}});
  const Vec3 tip = fk.link_poses[2].translation();
  EXPECT_NEAR(tip.x(), 0.0, 1e-15);
  EXPECT_NEAR(tip.y(), 1.0, 1e-15);
  EXPECT_NEAR(tip.z(), 0.0, 1e-15);
}

TEST(ForwardKinematics, AllFixedChainEqualsCumulativeOrigins) {
  Rng rng(3);
  std::vector<RawJoint> joints = random_chain(rng, 5, false);
  for (auto& j : joints) j.type = "fixed";
  const auto model = parse_kinematic_model(chain_text(joints));
  ASSERT_EQ(model.dof(), 0u);
  const auto fk = forward_kinematics(model, {});
  const auto oracle = oracle_fk(joints, std::vector<double>(joints.size(), 0.0));
  for (std::size_t l = 0; l < oracle.size(); ++l) {
    EXPECT_LT((fk.link_poses[l].matrix() - oracle[l]).cwiseAbs().maxCoeff(), 1e-12) << l;
  }
}

TEST(ForwardKinematics, SixJointChainMatchesMatrixOracle) {
  Rng rng(11);
  const auto joints = random_chain(rng, 6, true);
  const auto model = parse_kinematic_model(chain_text(joints));
  ASSERT_EQ(model.dof(), 6u);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> q;
    for (const auto& j : joints) q.push_back(testing::uniform(rng, j.lo, j.hi));
    const auto fk = forward_kinematics(model, {q});
    const auto oracle = oracle_fk(joints, q);
    ASSERT_EQ(fk.link_poses.size(), oracle.size());
    for (std::size_t l = 0; l < oracle.size(); ++l) {
      EXPECT_LT((fk.link_poses[l].translation() - oracle[l].block<3, 1>(0, 3)).norm(), 1e-9);
      EXPECT_LT((fk.link_poses[l].rotation() - oracle[l].block<3, 3>(0, 0)).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(ForwardKinematics, BaseLinkIsIdentity) {
  Rng rng(12);
  const auto joints = random_chain(rng, 4, true);
  const auto fk = forward_kinematics(parse_kinematic_model(chain_text(joints)), {{0.3, -0.2, 0.1, 1.0}});
  EXPECT_EQ(fk.link_poses[0].matrix(), Mat4::Identity());
}

TEST(ForwardKinematics, ZeroJointEqualsFixedJoint) {
  Rng rng(13);
  auto joints = random_chain(rng, 6, true);
  std::vector<double> q;
  for (int i = 0; i < 6; ++i) q.push_back(testing::uniform(rng, -1, 1));
  q[3] = 0.0;
  const auto moving = forward_kinematics(parse_kinematic_model(chain_text(joints)), {q});
  joints[3].type = "fixed";
  q.erase(q.begin() + 3);
  const auto fixed = forward_kinematics(parse_kinematic_model(chain_text(joints)), {q});
  for (std::size_t l = 0; l < moving.link_poses.size(); ++l) {
    EXPECT_LT((moving.link_poses[l].matrix() - fixed.link_poses[l].matrix()).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(ForwardKinematics, LongChainsStayOrthonormal) {
  Rng rng(14);
  for (int trial = 0; trial < 20; ++trial) {
    const auto joints = random_chain(rng, 20, true);
    const auto model = parse_kinematic_model(chain_text(joints));
    std::vector<double> q;
    for (const auto& j : joints) q.push_back(testing::uniform(rng, j.lo, j.hi));
    for (const auto& pose : forward_kinematics(model, {q}).link_poses) {
      const Mat3 r = pose.rotation();
      EXPECT_LT((r.transpose() * r - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
    }
  }
}

TEST(ForwardKinematics, StrictModeNamesViolatedJoint) {
  const auto model = parse_kinematic_model(
      "link a\nlink b\nlink c\njoint shoulder revolute a b axis=0,0,1 limits=-1,1\n"
      "joint elbow revolute b c axis=0,1,0 limits=-0.5,0.5\n");
  std::string message;
  EXPECT_EQ(thrown_code([&] { forward_kinematics(model, {{0.0, 0.7}}); }, &message), ErrorCode::kLimit);
  EXPECT_NE(message.find("elbow"), std::string::npos) << message;
  EXPECT_FALSE(thrown_code([&] { forward_kinematics(model, {{1.0, -0.5}}); }));
}

TEST(ForwardKinematics, ClampModeSaturatesAtLimits) {
  const auto model = parse_kinematic_model(
      "link a\nlink b\nlink c\njoint j revolute a b axis=0,0,1 limits=-1,1\njoint t fixed b c xyz=1,0,0\n");
  const auto clamped = forward_kinematics(model, {{2.5}}, LimitMode::kClamp);
  const auto at_limit = forward_kinematics(model, {{1.0}});
  EXPECT_LT((clamped.link_poses[2].matrix() - at_limit.link_poses[2].matrix()).cwiseAbs().maxCoeff(), 1e-15);
}

TEST(ForwardKinematics, WrongLengthAndNonFiniteRejected) {
  const auto model = parse_kinematic_model("link a\nlink b\njoint j revolute a b axis=0,0,1\n");
  EXPECT_EQ(thrown_code([&] { forward_kinematics(model, {{0.0, 1.0}}); }), ErrorCode::kLengthMismatch);
  EXPECT_EQ(thrown_code([&] { forward_kinematics(model, {{std::nan("")}}); }), ErrorCode::kInvalidArgument);
}

TEST(GripperFk, ApertureEndpointsHitMappedBounds) {
  const auto model = parse_kinematic_model(kGripper);
  ASSERT_EQ(model.dof(), 0u);
  ASSERT_EQ(model.mimics.size(), 2u);

  const auto closed = mimic_joint_values(model, 0.0);
  EXPECT_EQ(closed[0], 0.0);
  EXPECT_EQ(closed[1], 0.06);
  const auto open = mimic_joint_values(model, 1.0);
  EXPECT_EQ(open[0], 0.04);
  EXPECT_EQ(open[1], -0.02);

  const auto fk = gripper_fk(model, 1.0);
  const int left = model.link_index("left");
  const int right = model.link_index("right");
  EXPECT_TRUE(fk.link_poses[left].translation().isApprox(Vec3(0, 0.04, 0.1), 1e-15));
  EXPECT_TRUE(fk.link_poses[right].translation().isApprox(Vec3(0, 0.02, 0.1), 1e-15));
}

TEST(GripperFk, MirroredJointFollowsLinearMap) {
  const auto model = parse_kinematic_model(kGripper);
  for (double a : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    const auto v = mimic_joint_values(model, a);
    EXPECT_NEAR(v[0], a * 0.04, 1e-15);
    EXPECT_NEAR(v[1], a * -0.02 + (1.0 - a) * 0.06, 1e-15);
  }
  const auto half = mimic_joint_values(model, 0.5);
  EXPECT_NEAR(half[0], 0.02, 1e-15);
  EXPECT_NEAR(half[1], 0.02, 1e-15);
}

TEST(GripperFk, ApertureOutsideUnitIntervalRejected) {
  const auto model = parse_kinematic_model(kGripper);
  for (double a : {-0.01, 1.01, std::nan("")}) {
    EXPECT_EQ(thrown_code([&] { gripper_fk(model, a); }), ErrorCode::kInvalidArgument) << a;
  }
}

TEST(GripperFk, ArmJointsAreZero) {
  const auto model = parse_kinematic_model(
      "link a\nlink b\nlink f\njoint j revolute a b axis=0,0,1 xyz=0,0,1\n"
      "joint fj prismatic b f axis=1,0,0 limits=0,0.1\nmimic g fj\n");
  ASSERT_EQ(model.dof(), 1u);
  const auto fk = gripper_fk(model, 0.5);
  EXPECT_TRUE(fk.link_poses[2].translation().isApprox(Vec3(0.05, 0, 1), 1e-15));
}

TEST(RpyToRotation, ExtrinsicXyzOrder) {
  const Mat3 r = rpy_to_rotation(0.1, 0.2, 0.3);
  const Mat3 oracle = Eigen::AngleAxisd(0.3, Vec3::UnitZ()).toRotationMatrix() *
                      Eigen::AngleAxisd(0.2, Vec3::UnitY()).toRotationMatrix() *
                      Eigen::AngleAxisd(0.1, Vec3::UnitX()).toRotationMatrix();
  EXPECT_LT((r - oracle).cwiseAbs().maxCoeff(), 1e-15);
}

}  // namespace
}  // namespace splatrig
