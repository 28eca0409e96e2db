#pragma once

#include <cmath>

#include "gestrec/errors.hpp"

namespace gestrec {

// 3-D direction vector. Not normalized on construction; callers that need a
// unit vector use normalized().
struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    double norm() const { return std::sqrt(x * x + y * y + z * z); }

    Vec3 normalized() const {
        const double n = norm();
        if (n <= 0.0) throw DataError("cannot normalize zero vector");
        return {x / n, y / n, z / n};
    }

    bool operator==(const Vec3&) const = default;
};

inline double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }

inline double distance(const Vec3& a, const Vec3& b) { return (a - b).norm(); }

// Unit quaternion (w, x, y, z) encoding an orientation as
// q = (cos(phi/2), v sin(phi/2)) for a rotation of angle phi about axis v.
// The constructor normalizes inputs whose norm is within 1e-3 of 1 and
// rejects anything further off, so every live Quat is unit to 1e-6.
class Quat {
public:
    Quat() = default;  // identity

    Quat(double w, double x, double y, double z) {
        const double n = std::sqrt(w * w + x * x + y * y + z * z);
        if (n <= 0.0) throw DataError("zero quaternion is not a rotation");
        if (std::abs(n - 1.0) > 1e-3)
            throw DataError("quaternion norm too far from 1 to be an orientation sample");
        w_ = w / n;
        x_ = x / n;
        y_ = y / n;
        z_ = z / n;
    }

    static Quat identity() { return Quat(); }

    static Quat from_axis_angle(const Vec3& axis, double angle_rad) {
        const Vec3 u = axis.normalized();
        const double h = 0.5 * angle_rad;
        const double s = std::sin(h);
        return Quat(std::cos(h), u.x * s, u.y * s, u.z * s);
    }

    double w() const { return w_; }
    double x() const { return x_; }
    double y() const { return y_; }
    double z() const { return z_; }

    Quat conjugate() const {
        Quat q;
        q.w_ = w_;
        q.x_ = -x_;
        q.y_ = -y_;
        q.z_ = -z_;
        return q;
    }

    // For unit quaternions the inverse is the conjugate.
    Quat inverse() const { return conjugate(); }

    double norm() const { return std::sqrt(w_ * w_ + x_ * x_ + y_ * y_ + z_ * z_); }

    // Hamilton product, renormalized to absorb rounding drift.
    friend Quat operator*(const Quat& a, const Quat& b) {
        return Quat(a.w_ * b.w_ - a.x_ * b.x_ - a.y_ * b.y_ - a.z_ * b.z_,
                    a.w_ * b.x_ + a.x_ * b.w_ + a.y_ * b.z_ - a.z_ * b.y_,
                    a.w_ * b.y_ - a.x_ * b.z_ + a.y_ * b.w_ + a.z_ * b.x_,
                    a.w_ * b.z_ + a.x_ * b.y_ - a.y_ * b.x_ + a.z_ * b.w_);
    }

private:
    double w_ = 1.0;
    double x_ = 0.0;
    double y_ = 0.0;
    double z_ = 0.0;
};

// Rotate v by q: the vector part of q (0, v) q^-1.
inline Vec3 quat_rotate(const Quat& q, const Vec3& v) {
    const double w = q.w(), x = q.x(), y = q.y(), z = q.z();
    // t = 2 (im(q) x v); v' = v + w t + im(q) x t
    const Vec3 im{x, y, z};
    const Vec3 t = cross(im, v);
    const Vec3 t2{2.0 * t.x, 2.0 * t.y, 2.0 * t.z};
    const Vec3 u = cross(im, t2);
    return {v.x + w * t2.x + u.x, v.y + w * t2.y + u.y, v.z + w * t2.z + u.z};
}

// Express a raw orientation sample relative to the reference captured at the
// synchronization pose: q_raw * q_ref^-1. compensate(q, q) is the identity.
inline Quat compensate(const Quat& q_raw, const Quat& q_ref) {
    return q_raw * q_ref.inverse();
}

// Arm direction: the synchronization direction (1,0,0) rotated by the
// compensated orientation.
inline Vec3 arm_direction(const Quat& q_comp) {
    return quat_rotate(q_comp, Vec3{1.0, 0.0, 0.0});
}

// Palm direction: the sensor-frame palm axis rotated into the global frame.
inline Vec3 palm_vector(const Quat& q_comp, const Vec3& e_palm) {
    return quat_rotate(q_comp, e_palm);
}

// Shortest-arc rotation taking unit vector `from` onto unit vector `to`.
// Antipodal inputs rotate 180 degrees about an arbitrary perpendicular axis.
inline Quat rotation_between(const Vec3& from, const Vec3& to) {
    const Vec3 f = from.normalized();
    const Vec3 t = to.normalized();
    const double d = dot(f, t);
    if (d < -1.0 + 1e-12) {
        Vec3 axis = cross(f, Vec3{1.0, 0.0, 0.0});
        if (axis.norm() < 1e-6) axis = cross(f, Vec3{0.0, 1.0, 0.0});
        return Quat::from_axis_angle(axis, 3.14159265358979323846);
    }
    const Vec3 c = cross(f, t);
    const double w = 1.0 + d;
    const double n = std::sqrt(w * w + c.x * c.x + c.y * c.y + c.z * c.z);
    return Quat(w / n, c.x / n, c.y / n, c.z / n);
}

}  // namespace gestrec
