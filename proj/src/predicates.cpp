#include "stplan/predicates.hpp"

#include <cmath>

#include <boost/multiprecision/cpp_int.hpp>

namespace stplan::predicates {

namespace {

using Rational = boost::multiprecision::cpp_rational;

// Results whose magnitude is within this fraction of the sum of absolute
// term magnitudes are recomputed exactly.
constexpr double kRelativeTolerance = 1e-12;

template <typename T>
int sign(const T& x) {
    return x > 0 ? 1 : (x < 0 ? -1 : 0);
}

int orient2d_exact(const Vec2& a, const Vec2& b, const Vec2& c) {
    const Rational acx = Rational(a.x()) - Rational(c.x());
    const Rational bcx = Rational(b.x()) - Rational(c.x());
    const Rational acy = Rational(a.y()) - Rational(c.y());
    const Rational bcy = Rational(b.y()) - Rational(c.y());
    return sign(Rational(acx * bcy - acy * bcx));
}

int incircle_exact(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const Rational adx = Rational(a.x()) - Rational(d.x());
    const Rational ady = Rational(a.y()) - Rational(d.y());
    const Rational bdx = Rational(b.x()) - Rational(d.x());
    const Rational bdy = Rational(b.y()) - Rational(d.y());
    const Rational cdx = Rational(c.x()) - Rational(d.x());
    const Rational cdy = Rational(c.y()) - Rational(d.y());
    const Rational alift = adx * adx + ady * ady;
    const Rational blift = bdx * bdx + bdy * bdy;
    const Rational clift = cdx * cdx + cdy * cdy;
    const Rational det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                         clift * (adx * bdy - bdx * ady);
    return sign(det);
}

}  // namespace

double orient2d_value(const Vec2& a, const Vec2& b, const Vec2& c) {
    return (a.x() - c.x()) * (b.y() - c.y()) - (a.y() - c.y()) * (b.x() - c.x());
}

int orient2d(const Vec2& a, const Vec2& b, const Vec2& c) {
    const double left = (a.x() - c.x()) * (b.y() - c.y());
    const double right = (a.y() - c.y()) * (b.x() - c.x());
    const double det = left - right;
    const double bound = kRelativeTolerance * (std::abs(left) + std::abs(right));
    if (std::abs(det) > bound) {
        return sign(det);
    }
    return orient2d_exact(a, b, c);
}

double incircle_value(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    return alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) + clift * (adx * bdy - bdx * ady);
}

int incircle(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d) {
    const double adx = a.x() - d.x(), ady = a.y() - d.y();
    const double bdx = b.x() - d.x(), bdy = b.y() - d.y();
    const double cdx = c.x() - d.x(), cdy = c.y() - d.y();
    const double alift = adx * adx + ady * ady;
    const double blift = bdx * bdx + bdy * bdy;
    const double clift = cdx * cdx + cdy * cdy;
    const double det = alift * (bdx * cdy - cdx * bdy) + blift * (cdx * ady - adx * cdy) +
                       clift * (adx * bdy - bdx * ady);
    const double permanent = alift * (std::abs(bdx * cdy) + std::abs(cdx * bdy)) +
                             blift * (std::abs(cdx * ady) + std::abs(adx * cdy)) +
                             clift * (std::abs(adx * bdy) + std::abs(bdx * ady));
    if (std::abs(det) > kRelativeTolerance * permanent) {
        return sign(det);
    }
    return incircle_exact(a, b, c, d);
}

}  // namespace stplan::predicates
