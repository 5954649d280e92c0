#pragma once

#include "stplan/core_types.hpp"

namespace stplan {

// Closed-form relative-motion queries. A robot and an obstacle both moving at
// constant velocity reduce to a point r + w * tau, with r the relative offset
// and w the relative velocity.

struct ClosestApproach {
    double tau = 0.0;       // minimizing offset in [0, tau_max]
    double distance = 0.0;  // |r + w * tau|
};

/// Minimum of |r + w * tau| over tau in [0, tau_max]. A stationary relative
/// motion resolves to tau = 0.
ClosestApproach closest_approach(const Vec2& r, const Vec2& w, double tau_max);

/// Earliest tau in [0, tau_max] with |r + w * tau| <= radius, or +inf.
double first_contact(const Vec2& r, const Vec2& w, double radius, double tau_max);

}  // namespace stplan
