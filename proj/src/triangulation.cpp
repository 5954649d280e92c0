#include "stplan/triangulation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "stplan/predicates.hpp"

namespace stplan {

namespace {

constexpr double kMergeDistance = 1e-9;

// Working triangle during construction.
struct Work {
    std::array<int, 3> v;
    std::array<int, 3> nbr;
    bool alive = true;
};

class Builder {
public:
    explicit Builder(std::vector<Vec2> pts) : pts_(std::move(pts)) {}

    // Seeds with a super triangle occupying vertex slots 0..2.
    void seed(const Vec2& lo, const Vec2& hi) {
        const Vec2 center = 0.5 * (lo + hi);
        const double span = std::max({hi.x() - lo.x(), hi.y() - lo.y(), 1.0});
        const double r = 1e5 * span;
        pts_[0] = center + Vec2(-r, -r);
        pts_[1] = center + Vec2(r, -r);
        pts_[2] = center + Vec2(0.0, r);
        tris_.push_back({{0, 1, 2}, {-1, -1, -1}, true});
    }

    void insert(int pi) {
        const Vec2& p = pts_[pi];
        const int start = containing(p);
        if (start < 0) {
            throw std::logic_error("point outside super triangle");
        }

        // Cavity: connected set of triangles whose circumcircle strictly contains p.
        std::vector<int> cavity{start};
        in_cavity_.assign(tris_.size(), false);
        in_cavity_[start] = true;
        for (std::size_t k = 0; k < cavity.size(); ++k) {
            const auto& t = tris_[cavity[k]];
            for (int nb : t.nbr) {
                if (nb < 0 || in_cavity_[nb]) continue;
                const auto& u = tris_[nb];
                if (predicates::incircle(pts_[u.v[0]], pts_[u.v[1]], pts_[u.v[2]], p) > 0) {
                    in_cavity_[nb] = true;
                    cavity.push_back(nb);
                }
            }
        }

        struct Edge {
            int a, b, outer;
        };
        std::vector<Edge> boundary;
        for (int id : cavity) {
            const auto& t = tris_[id];
            for (int i = 0; i < 3; ++i) {
                const int nb = t.nbr[i];
                if (nb < 0 || !in_cavity_[nb]) {
                    boundary.push_back({t.v[(i + 1) % 3], t.v[(i + 2) % 3], nb});
                }
            }
        }
        for (int id : cavity) tris_[id].alive = false;

        std::unordered_map<int, int> starts_at;
        std::unordered_map<int, int> ends_at;
        std::vector<int> created;
        for (const auto& e : boundary) {
            const int id = static_cast<int>(tris_.size());
            tris_.push_back({{e.a, e.b, pi}, {-1, -1, e.outer}, true});
            if (e.outer >= 0) {
                auto& o = tris_[e.outer];
                for (int i = 0; i < 3; ++i) {
                    const int oa = o.v[(i + 1) % 3];
                    const int ob = o.v[(i + 2) % 3];
                    if (oa == e.b && ob == e.a) o.nbr[i] = id;
                }
            }
            starts_at[e.a] = id;
            ends_at[e.b] = id;
            created.push_back(id);
        }
        for (int id : created) {
            auto& t = tris_[id];
            t.nbr[0] = starts_at.at(t.v[1]);
            t.nbr[1] = ends_at.at(t.v[0]);
        }
    }

    const std::vector<Vec2>& points() const { return pts_; }
    const std::vector<Work>& tris() const { return tris_; }

private:
    int containing(const Vec2& p) const {
        for (int id = static_cast<int>(tris_.size()) - 1; id >= 0; --id) {
            const auto& t = tris_[id];
            if (!t.alive) continue;
            const Vec2& a = pts_[t.v[0]];
            const Vec2& b = pts_[t.v[1]];
            const Vec2& c = pts_[t.v[2]];
            if (predicates::orient2d(a, b, p) >= 0 && predicates::orient2d(b, c, p) >= 0 &&
                predicates::orient2d(c, a, p) >= 0) {
                return id;
            }
        }
        return -1;
    }

    std::vector<Vec2> pts_;
    std::vector<Work> tris_;
    std::vector<bool> in_cavity_;
};


std::uint64_t edge_key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
}

std::unordered_map<std::uint64_t, std::pair<int, int>> half_edges(const std::vector<std::array<int, 3>>& tris) {
    std::unordered_map<std::uint64_t, std::pair<int, int>> map;  // directed edge -> (triangle, slot)
    map.reserve(3 * tris.size());
    for (int t = 0; t < static_cast<int>(tris.size()); ++t) {
        for (int i = 0; i < 3; ++i) {
            map[edge_key(tris[t][(i + 1) % 3], tris[t][(i + 2) % 3])] = {t, i};
        }
    }
    return map;
}

// Removing the super triangle can leave reflex vertices on the hull when
// input points are nearly collinear with a hull edge: the sliver triangle's
// circumcircle swallowed a super vertex. Fill those pockets, then flip back
// to Delaunay.
void repair_hull(const std::vector<Vec2>& pts, std::vector<std::array<int, 3>>& tris) {
    bool filled = false;
    for (;;) {
        const auto edges = half_edges(tris);
        std::unordered_map<int, int> next;
        for (const auto& [key, slot] : edges) {
            const int a = static_cast<int>(key >> 32);
            const int b = static_cast<int>(key & 0xffffffffu);
            if (!edges.count(edge_key(b, a))) next[a] = b;
        }
        bool added = false;
        for (const auto& [a, b] : next) {
            const auto it = next.find(b);
            if (it == next.end()) continue;
            const int c = it->second;
            if (c != a && predicates::orient2d(pts[a], pts[b], pts[c]) < 0) {
                tris.push_back({a, c, b});
                added = true;
                break;
            }
        }
        if (!added) break;
        filled = true;
    }
    if (!filled) return;
    for (bool flipped = true; flipped;) {
        flipped = false;
        const auto edges = half_edges(tris);
        for (int t = 0; t < static_cast<int>(tris.size()) && !flipped; ++t) {
            for (int i = 0; i < 3; ++i) {
                const int c = tris[t][i];
                const int a = tris[t][(i + 1) % 3];
                const int b = tris[t][(i + 2) % 3];
                const auto twin = edges.find(edge_key(b, a));
                if (twin == edges.end()) continue;
                const auto [u, j] = twin->second;
                const int d = tris[u][j];
                if (predicates::incircle(pts[c], pts[a], pts[b], pts[d]) > 0) {
                    tris[t] = {c, a, d};
                    tris[u] = {c, d, b};
                    flipped = true;
                    break;
                }
            }
        }
    }
}

}  // namespace

Triangulation Triangulation::build(const std::vector<TriVertex>& input) {
    std::vector<TriVertex> kept;
    for (const auto& v : input) {
        if (!is_finite(v.p)) {
            throw std::invalid_argument("triangulation vertex is not finite");
        }
        const bool duplicate = std::any_of(kept.begin(), kept.end(), [&](const TriVertex& k) {
            return (k.p - v.p).norm() <= kMergeDistance;
        });
        if (!duplicate) kept.push_back(v);
    }
    if (kept.size() < 3) {
        throw std::invalid_argument("triangulation needs at least three distinct points");
    }
    bool collinear = true;
    for (std::size_t i = 2; i < kept.size() && collinear; ++i) {
        collinear = predicates::orient2d(kept[0].p, kept[1].p, kept[i].p) == 0;
    }
    if (collinear) {
        throw std::invalid_argument("triangulation input is degenerate (all points collinear)");
    }

    Vec2 lo = kept.front().p;
    Vec2 hi = kept.front().p;
    std::vector<Vec2> pts(3 + kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) {
        pts[3 + i] = kept[i].p;
        lo = lo.cwiseMin(kept[i].p);
        hi = hi.cwiseMax(kept[i].p);
    }
    Builder builder(std::move(pts));
    builder.seed(lo, hi);
    for (std::size_t i = 0; i < kept.size(); ++i) {
        builder.insert(static_cast<int>(3 + i));
    }

    // Drop triangles touching the super triangle.
    std::vector<std::array<int, 3>> tris;
    for (const auto& t : builder.tris()) {
        if (!t.alive || t.v[0] < 3 || t.v[1] < 3 || t.v[2] < 3) continue;
        tris.push_back({t.v[0] - 3, t.v[1] - 3, t.v[2] - 3});
    }
    std::vector<Vec2> positions(kept.size());
    for (std::size_t i = 0; i < kept.size(); ++i) positions[i] = kept[i].p;
    repair_hull(positions, tris);

    Triangulation out;
    out.vertices_ = std::move(kept);
    const auto edges = half_edges(tris);
    for (const auto& v : tris) {
        Triangle t{v, {-1, -1, -1}};
        for (int i = 0; i < 3; ++i) {
            const auto twin = edges.find(edge_key(v[(i + 2) % 3], v[(i + 1) % 3]));
            if (twin != edges.end()) t.nbr[i] = twin->second.first;
        }
        out.triangles_.push_back(t);
    }
    return out;
}

std::optional<int> Triangulation::find(const Vec2& p) const {
    for (int id = 0; id < static_cast<int>(triangles_.size()); ++id) {
        if (contains(id, p)) return id;
    }
    return std::nullopt;
}

int Triangulation::locate(const Vec2& p) const {
    if (auto id = find(p)) return *id;
    throw std::out_of_range("point outside triangulation");
}

std::vector<int> Triangulation::neighbors(int id) const {
    if (id < 0 || id >= static_cast<int>(triangles_.size())) {
        throw std::out_of_range("invalid triangle id");
    }
    std::vector<int> out;
    for (int nb : triangles_[id].nbr) {
        if (nb >= 0) out.push_back(nb);
    }
    std::sort(out.begin(), out.end());
    return out;
}

bool Triangulation::contains(int id, const Vec2& p) const {
    const auto& t = triangles_[id];
    const Vec2& a = vertices_[t.v[0]].p;
    const Vec2& b = vertices_[t.v[1]].p;
    const Vec2& c = vertices_[t.v[2]].p;
    return predicates::orient2d(a, b, p) >= 0 && predicates::orient2d(b, c, p) >= 0 &&
           predicates::orient2d(c, a, p) >= 0;
}

double Triangulation::area(int id) const {
    const auto& t = triangles_[id];
    return 0.5 * predicates::orient2d_value(vertices_[t.v[0]].p, vertices_[t.v[1]].p, vertices_[t.v[2]].p);
}

std::size_t Triangulation::edge_count() const {
    // Each interior edge is seen twice, each hull edge once.
    std::size_t half_edges = 0;
    std::size_t hull = 0;
    for (const auto& t : triangles_) {
        for (int nb : t.nbr) {
            ++half_edges;
            if (nb < 0) ++hull;
        }
    }
    return (half_edges - hull) / 2 + hull;
}

Triangulation delaunay(const std::vector<Vec2>& points, const std::vector<int>& ids, const Vec2& extent) {
    if (ids.size() != points.size()) {
        throw std::invalid_argument("one id per point required");
    }
    std::vector<TriVertex> verts;
    verts.reserve(points.size() + 4);
    for (const Vec2& corner : {Vec2(0.0, 0.0), Vec2(extent.x(), 0.0), Vec2(extent.x(), extent.y()),
                               Vec2(0.0, extent.y())}) {
        verts.push_back({corner, VertexKind::boundary, -1});
    }
    for (std::size_t i = 0; i < points.size(); ++i) {
        verts.push_back({points[i], VertexKind::obstacle, ids[i]});
    }
    return Triangulation::build(verts);
}

Triangulation delaunay(const std::vector<Vec2>& points, const Vec2& extent) {
    std::vector<int> ids(points.size());
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i] = static_cast<int>(i);
    return delaunay(points, ids, extent);
}

}  // namespace stplan
