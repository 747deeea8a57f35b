#pragma once

#include <array>
#include <cmath>

// Small fixed-size vector/matrix kernels used in element-level computations.
// Mat3 is row-major: m[3*i + j] is the (i,j) entry.

namespace elastodyn {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<double, 9>;

inline constexpr Mat3 kIdentity3 = {1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0};

inline double dot(const Vec3& a, const Vec3& b)
{
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}

inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }

inline Vec3 sub(const Vec3& a, const Vec3& b)
{
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2]};
}

inline Vec3 add(const Vec3& a, const Vec3& b)
{
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2]};
}

inline Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

inline Vec3 cross(const Vec3& a, const Vec3& b)
{
    return {a[1] * b[2] - a[2] * b[1],
            a[2] * b[0] - a[0] * b[2],
            a[0] * b[1] - a[1] * b[0]};
}

inline double det3(const Mat3& m)
{
    return m[0] * (m[4] * m[8] - m[5] * m[7])
         - m[1] * (m[3] * m[8] - m[5] * m[6])
         + m[2] * (m[3] * m[7] - m[4] * m[6]);
}

inline Mat3 transpose3(const Mat3& m)
{
    return {m[0], m[3], m[6], m[1], m[4], m[7], m[2], m[5], m[8]};
}

inline double trace3(const Mat3& m) { return m[0] + m[4] + m[8]; }

// Full contraction sum_ij a_ij b_ij.
inline double ddot3(const Mat3& a, const Mat3& b)
{
    double s = 0.0;
    for (int k = 0; k < 9; ++k) s += a[k] * b[k];
    return s;
}

inline Mat3 matmul3(const Mat3& a, const Mat3& b)
{
    Mat3 c{};
    for (int i = 0; i < 3; ++i)
        for (int k = 0; k < 3; ++k) {
            const double aik = a[3 * i + k];
            for (int j = 0; j < 3; ++j) c[3 * i + j] += aik * b[3 * k + j];
        }
    return c;
}

// a^T * b
inline Mat3 matTmul3(const Mat3& a, const Mat3& b)
{
    Mat3 c{};
    for (int k = 0; k < 3; ++k)
        for (int i = 0; i < 3; ++i) {
            const double aki = a[3 * k + i];
            for (int j = 0; j < 3; ++j) c[3 * i + j] += aki * b[3 * k + j];
        }
    return c;
}

inline Vec3 mulvec3(const Mat3& m, const Vec3& x)
{
    return {m[0] * x[0] + m[1] * x[1] + m[2] * x[2],
            m[3] * x[0] + m[4] * x[1] + m[5] * x[2],
            m[6] * x[0] + m[7] * x[1] + m[8] * x[2]};
}

// m^T * x
inline Vec3 tmulvec3(const Mat3& m, const Vec3& x)
{
    return {m[0] * x[0] + m[3] * x[1] + m[6] * x[2],
            m[1] * x[0] + m[4] * x[1] + m[7] * x[2],
            m[2] * x[0] + m[5] * x[1] + m[8] * x[2]};
}

inline Mat3 inv3(const Mat3& m)
{
    const double d = det3(m);
    const double id = 1.0 / d;
    Mat3 r;
    r[0] = (m[4] * m[8] - m[5] * m[7]) * id;
    r[1] = (m[2] * m[7] - m[1] * m[8]) * id;
    r[2] = (m[1] * m[5] - m[2] * m[4]) * id;
    r[3] = (m[5] * m[6] - m[3] * m[8]) * id;
    r[4] = (m[0] * m[8] - m[2] * m[6]) * id;
    r[5] = (m[2] * m[3] - m[0] * m[5]) * id;
    r[6] = (m[3] * m[7] - m[4] * m[6]) * id;
    r[7] = (m[1] * m[6] - m[0] * m[7]) * id;
    r[8] = (m[0] * m[4] - m[1] * m[3]) * id;
    return r;
}

inline Mat3 madd3(const Mat3& a, const Mat3& b, double sb = 1.0)
{
    Mat3 c;
    for (int k = 0; k < 9; ++k) c[k] = a[k] + sb * b[k];
    return c;
}

inline Mat3 mscale3(const Mat3& a, double s)
{
    Mat3 c;
    for (int k = 0; k < 9; ++k) c[k] = a[k] * s;
    return c;
}

inline Mat3 outer3(const Vec3& a, const Vec3& b)
{
    Mat3 c;
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) c[3 * i + j] = a[i] * b[j];
    return c;
}

inline double frob3(const Mat3& m) { return std::sqrt(ddot3(m, m)); }

} // namespace elastodyn
