#include "doctest.h"

#include <cmath>

#include "gestrec/geometry.hpp"
#include "helpers.hpp"

using namespace gestrec;
using testutil::random_unit_quat;
using testutil::random_unit_vec;
using testutil::rotate_by_matrix;

namespace {
const double kSqrtHalf = std::sqrt(0.5);

void check_vec(const Vec3& got, const Vec3& want, double tol) {
    CHECK(std::abs(got.x - want.x) < tol);
    CHECK(std::abs(got.y - want.y) < tol);
    CHECK(std::abs(got.z - want.z) < tol);
}
}  // namespace

TEST_CASE("quaternion construction normalizes and rejects bad input") {
    const Quat q(1.0 + 5e-4, 0.0, 0.0, 0.0);
    CHECK(std::abs(q.norm() - 1.0) < 1e-6);
    CHECK_THROWS_AS(Quat(0.0, 0.0, 0.0, 0.0), DataError);
    CHECK_THROWS_AS(Quat(2.0, 0.0, 0.0, 0.0), DataError);
}

TEST_CASE("quat_rotate basic rotations") {
    check_vec(quat_rotate(Quat::identity(), {1, 0, 0}), {1, 0, 0}, 1e-15);

    const Quat z90(kSqrtHalf, 0, 0, kSqrtHalf);
    check_vec(quat_rotate(z90, {1, 0, 0}), rotate_by_matrix(z90, {1, 0, 0}), 1e-12);
    check_vec(quat_rotate(z90, {1, 0, 0}), {0, 1, 0}, 1e-12);

    const Quat z180 = Quat::from_axis_angle({0, 0, 1}, 3.14159265358979323846);
    check_vec(quat_rotate(z180, {1, 0, 0}), {-1, 0, 0}, 1e-12);
}

TEST_CASE("quat_rotate preserves norm to 1e-12") {
    Rng rng(42);
    for (int i = 0; i < 200; ++i) {
        const Quat q = random_unit_quat(rng);
        const Vec3 v = random_unit_vec(rng);
        CHECK(std::abs(quat_rotate(q, v).norm() - 1.0) < 1e-12);
    }
}

TEST_CASE("rotation composition matches quaternion product") {
    Rng rng(7);
    for (int i = 0; i < 100; ++i) {
        const Quat q1 = random_unit_quat(rng);
        const Quat q2 = random_unit_quat(rng);
        const Vec3 v = random_unit_vec(rng);
        const Vec3 a = quat_rotate(q1, quat_rotate(q2, v));
        const Vec3 b = quat_rotate(q1 * q2, v);
        CHECK(distance(a, b) < 1e-10);
    }
}

TEST_CASE("quat_rotate agrees with rotation-matrix oracle on 1000 random cases") {
    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const Quat q = random_unit_quat(rng);
        const Vec3 v = random_unit_vec(rng);
        CHECK(distance(quat_rotate(q, v), rotate_by_matrix(q, v)) < 1e-10);
    }
}

TEST_CASE("compensate identities") {
    Rng rng(5);
    const Quat q = random_unit_quat(rng);
    const Quat self = compensate(q, q);
    CHECK(std::abs(std::abs(self.w()) - 1.0) < 1e-12);

    const Quat raw = random_unit_quat(rng);
    const Quat same = compensate(raw, Quat::identity());
    check_vec(quat_rotate(same, {1, 0, 0}), quat_rotate(raw, {1, 0, 0}), 1e-12);
}

TEST_CASE("compensate undoes the reference rotation") {
    // Rotating d_sync by the compensated quaternion equals rotating by the
    // raw orientation and then un-rotating by the reference, checked via the
    // matrix oracle.
    Rng rng(11);
    const Vec3 d_sync{1, 0, 0};
    for (int i = 0; i < 100; ++i) {
        const Quat q = random_unit_quat(rng);
        const Quat q_ref = random_unit_quat(rng);
        const Vec3 got = quat_rotate(compensate(q, q_ref), d_sync);
        const Vec3 want = rotate_by_matrix(q, rotate_by_matrix(q_ref.inverse(), d_sync));
        CHECK(distance(got, want) < 1e-10);
    }
}

TEST_CASE("arm_direction") {
    check_vec(arm_direction(Quat::identity()), {1, 0, 0}, 1e-15);
    check_vec(arm_direction(Quat(kSqrtHalf, 0, 0, kSqrtHalf)), {0, 1, 0}, 1e-12);
    check_vec(arm_direction(Quat(kSqrtHalf, 0, kSqrtHalf, 0)), {0, 0, -1}, 1e-12);
}

TEST_CASE("palm_vector") {
    const Vec3 e_palm{0, 1, 0};
    check_vec(palm_vector(Quat::identity(), e_palm), {0, 1, 0}, 1e-15);

    const Quat roll_x = Quat::from_axis_angle({1, 0, 0}, 3.14159265358979323846 / 2.0);
    check_vec(palm_vector(roll_x, e_palm), {0, 0, 1}, 1e-12);

    Rng rng(31);
    for (int i = 0; i < 100; ++i)
        CHECK(std::abs(palm_vector(random_unit_quat(rng), e_palm).norm() - 1.0) < 1e-12);
}

TEST_CASE("rotation_between maps from onto to") {
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const Vec3 a = random_unit_vec(rng);
        const Vec3 b = random_unit_vec(rng);
        CHECK(distance(quat_rotate(rotation_between(a, b), a), b) < 1e-10);
    }
    // Antipodal special case.
    CHECK(distance(quat_rotate(rotation_between({1, 0, 0}, {-1, 0, 0}), {1, 0, 0}), {-1, 0, 0}) <
          1e-10);
}
