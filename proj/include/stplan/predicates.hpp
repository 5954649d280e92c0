#pragma once

#include "stplan/core_types.hpp"

namespace stplan::predicates {

/// Sign of the signed area of (a, b, c): +1 counterclockwise, -1 clockwise, 0 collinear.
int orient2d(const Vec2& a, const Vec2& b, const Vec2& c);

/// +1 if d lies strictly inside the circumcircle of counterclockwise (a, b, c),
/// -1 if strictly outside, 0 if cocircular.
int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

/// Floating-point determinant values, for diagnostics and tolerance audits.
double orient2d_value(const Vec2& a, const Vec2& b, const Vec2& c);
double incircle_value(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

}  // namespace stplan::predicates
