#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "dtnlab/errors.hpp"

namespace dtnlab {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
};

struct BoundaryEdge {
    int a = -1;
    int b = -1;
    int component = 0;
};

// Circular boundary components remember their circle so midpoint
// refinement can project new boundary nodes back onto it.
struct CircleGeometry {
    Vec2 center;
    double radius = 0.0;
};

// Lumped (d-1)-Hausdorff measure on the boundary: each boundary node
// carries half the summed lengths of its incident boundary edges.
struct BoundaryMeasure {
    std::vector<int> nodes;       // mesh vertex ids, ascending
    std::vector<double> weights;  // strictly positive, same order
    double total() const;
    double component_total(const class Mesh& mesh, int component) const;
};

// Conforming triangulation of a polygonal domain with labeled boundary
// components. Immutable after construction; all invariants are checked
// in from_parts().
class Mesh {
public:
    static Mesh from_parts(std::vector<Vec2> vertices,
                           std::vector<std::array<int, 3>> triangles,
                           std::vector<BoundaryEdge> boundary_edges);

    // Presets: "square" (unit square), "disk" (unit disk), "annulus"
    // (radii 1/2 and 1), "lshape" ([0,2]^2 minus the upper-right
    // quadrant). Circle boundaries use 4*resolution segments.
    static Mesh preset(const std::string& name, int resolution);

    static Mesh load_json(const std::string& path);
    static Mesh from_json_text(const std::string& text);
    std::string to_json_text() const;

    // Uniform midpoint refinement; triangle count x4. New boundary nodes
    // on circular components are projected onto the circle.
    Mesh refined() const;

    BoundaryMeasure boundary_measure() const;

    const std::vector<Vec2>& vertices() const { return vertices_; }
    const std::vector<std::array<int, 3>>& triangles() const { return triangles_; }
    const std::vector<BoundaryEdge>& boundary_edges() const { return boundary_edges_; }

    int vertex_count() const { return static_cast<int>(vertices_.size()); }
    int triangle_count() const { return static_cast<int>(triangles_.size()); }

    bool is_boundary_node(int v) const { return boundary_node_[v]; }
    const std::vector<int>& boundary_nodes() const { return boundary_nodes_; }
    // -1 for interior nodes.
    int node_component(int v) const { return node_component_[v]; }

    int component_count() const { return component_count_; }
    bool omega_connected() const { return omega_connected_; }

    double triangle_area(int t) const;
    double total_area() const;
    double edge_length(int a, int b) const;

    // The unique triangle owning a boundary edge (index into triangles()).
    int boundary_edge_triangle(int e) const { return edge_triangle_[e]; }
    // Outward unit normal of boundary edge e.
    Vec2 boundary_edge_normal(int e) const;

    const std::optional<CircleGeometry>& component_geometry(int component) const;
    void set_component_geometry(int component, CircleGeometry geom);

    const std::string& provenance() const { return provenance_; }
    void set_provenance(std::string p) { provenance_ = std::move(p); }

private:
    Mesh() = default;
    void validate_and_index();

    std::vector<Vec2> vertices_;
    std::vector<std::array<int, 3>> triangles_;
    std::vector<BoundaryEdge> boundary_edges_;

    std::vector<bool> boundary_node_;
    std::vector<int> boundary_nodes_;
    std::vector<int> node_component_;
    std::vector<int> edge_triangle_;
    int component_count_ = 0;
    bool omega_connected_ = false;
    std::vector<std::optional<CircleGeometry>> geometry_;
    std::string provenance_;
};

// Shift-and-merge of two meshes into one disconnected mesh. Used by the
// hypothesis-necessity fixtures (Omega disconnected).
Mesh disjoint_union(const Mesh& first, const Mesh& second, Vec2 offset);

}  // namespace dtnlab
