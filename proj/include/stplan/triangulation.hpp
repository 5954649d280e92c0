#pragma once

#include <array>
#include <optional>
#include <vector>

#include "stplan/core_types.hpp"

namespace stplan {

enum class VertexKind { boundary, obstacle };

struct TriVertex {
    Vec2 p = Vec2::Zero();
    VertexKind kind = VertexKind::boundary;
    int obstacle_id = -1;  // meaningful only for obstacle vertices
};

/// Counterclockwise vertex triple. nbr[i] is the triangle across the edge
/// opposite v[i], or -1 on the hull.
struct Triangle {
    std::array<int, 3> v{};
    std::array<int, 3> nbr{-1, -1, -1};
};

/// Delaunay triangulation built with the Bowyer-Watson algorithm on exact
/// orientation and in-circle predicates. Immutable after construction.
class Triangulation {
public:
    /// Triangulates the given vertices as-is. Vertices closer than 1e-9 m to an
    /// earlier one are merged into it. Throws std::invalid_argument when
    /// fewer than three distinct, non-collinear points remain.
    static Triangulation build(const std::vector<TriVertex>& vertices);

    const std::vector<TriVertex>& vertices() const { return vertices_; }
    const std::vector<Triangle>& triangles() const { return triangles_; }
    std::size_t size() const { return triangles_.size(); }

    /// Lowest-id triangle whose closed region contains p, if any.
    std::optional<int> find(const Vec2& p) const;

    /// Like find, but throws std::out_of_range when p is outside the hull.
    int locate(const Vec2& p) const;

    /// Edge-adjacent triangles in ascending id order. Throws std::out_of_range
    /// for an invalid id.
    std::vector<int> neighbors(int id) const;

    bool contains(int id, const Vec2& p) const;
    double area(int id) const;
    Vec2 vertex_position(int id, int corner) const { return vertices_[triangles_[id].v[corner]].p; }

    /// Number of distinct undirected edges.
    std::size_t edge_count() const;

private:
    std::vector<TriVertex> vertices_;
    std::vector<Triangle> triangles_;
};

/// Triangulates `points` together with the four corners of [0, extent],
/// which are inserted first so the whole workspace box is always tiled.
/// Points are tagged as obstacle vertices with ids 0..n-1.
Triangulation delaunay(const std::vector<Vec2>& points, const Vec2& extent);

/// Same, tagging each point with the given obstacle ids.
Triangulation delaunay(const std::vector<Vec2>& points, const std::vector<int>& ids, const Vec2& extent);

}  // namespace stplan
