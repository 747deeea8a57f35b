#pragma once

#include <array>

// Quadrature rules on the reference simplices, expressed in barycentric
// coordinates. Weights sum to one; the caller multiplies by the element
// reference measure.

namespace elastodyn {

// Degree-2 four-point rule on the tetrahedron.
struct TetRule {
    static constexpr int n = 4;
    std::array<std::array<double, 4>, 4> bary;
    std::array<double, 4> w;
};

inline const TetRule& tet_rule()
{
    constexpr double a = 0.5854101966249685; // (5 + 3*sqrt(5)) / 20
    constexpr double b = 0.1381966011250105; // (5 - sqrt(5)) / 20
    static const TetRule rule = {
        {{{a, b, b, b}, {b, a, b, b}, {b, b, a, b}, {b, b, b, a}}},
        {0.25, 0.25, 0.25, 0.25}};
    return rule;
}

// Degree-2 three-point (edge midpoint) rule on the triangle.
struct TriRule {
    static constexpr int n = 3;
    std::array<std::array<double, 3>, 3> bary;
    std::array<double, 3> w;
};

inline const TriRule& tri_rule()
{
    constexpr double h = 0.5;
    static const TriRule rule = {
        {{{h, h, 0.0}, {0.0, h, h}, {h, 0.0, h}}},
        {1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}};
    return rule;
}

} // namespace elastodyn
