#include "dtnlab/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

namespace dtnlab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double signed_area(const Vec2& p0, const Vec2& p1, const Vec2& p2) {
    return 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
}

std::pair<int, int> undirected(int a, int b) {
    return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
}

struct UnionFind {
    std::vector<int> parent;
    explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) { parent[find(a)] = find(b); }
};

}  // namespace

double BoundaryMeasure::total() const {
    return std::accumulate(weights.begin(), weights.end(), 0.0);
}

double BoundaryMeasure::component_total(const Mesh& mesh, int component) const {
    double s = 0.0;
    for (std::size_t i = 0; i < nodes.size(); ++i)
        if (mesh.node_component(nodes[i]) == component) s += weights[i];
    return s;
}

Mesh Mesh::from_parts(std::vector<Vec2> vertices,
                      std::vector<std::array<int, 3>> triangles,
                      std::vector<BoundaryEdge> boundary_edges) {
    Mesh m;
    m.vertices_ = std::move(vertices);
    m.triangles_ = std::move(triangles);
    m.boundary_edges_ = std::move(boundary_edges);
    m.validate_and_index();
    return m;
}

void Mesh::validate_and_index() {
    const int nv = vertex_count();
    const int nt = triangle_count();
    if (nv < 3) throw MeshError("mesh needs at least 3 vertices");
    if (nt < 1) throw MeshError("mesh needs at least 1 triangle");

    for (int t = 0; t < nt; ++t) {
        for (int k = 0; k < 3; ++k) {
            const int v = triangles_[t][k];
            if (v < 0 || v >= nv)
                throw MeshError("triangle " + std::to_string(t) + " references invalid vertex " +
                                std::to_string(v));
        }
        const auto& tri = triangles_[t];
        if (tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2])
            throw MeshError("triangle " + std::to_string(t) + " is degenerate (repeated vertex)");
        if (signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]) <= 0.0)
            throw MeshError("triangle " + std::to_string(t) +
                            " has non-positive signed area (orientation or degeneracy)");
    }

    // Edge incidence counts over the triangulation.
    std::map<std::pair<int, int>, std::vector<int>> edge_tris;
    for (int t = 0; t < nt; ++t)
        for (int k = 0; k < 3; ++k)
            edge_tris[undirected(triangles_[t][k], triangles_[t][(k + 1) % 3])].push_back(t);

    for (const auto& [e, tris] : edge_tris) {
        if (tris.size() > 2)
            throw MeshError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                            ") is shared by more than two triangles");
    }

    // Declared boundary edges must be exactly the single-incidence edges.
    std::map<std::pair<int, int>, int> declared;  // edge -> index in boundary_edges_
    for (int i = 0; i < static_cast<int>(boundary_edges_.size()); ++i) {
        const auto& be = boundary_edges_[i];
        if (be.a < 0 || be.a >= nv || be.b < 0 || be.b >= nv || be.a == be.b)
            throw MeshError("boundary edge " + std::to_string(i) + " references invalid vertices");
        auto key = undirected(be.a, be.b);
        if (declared.count(key))
            throw MeshError("boundary edge " + std::to_string(i) + " duplicates edge " +
                            std::to_string(declared[key]));
        declared[key] = i;
    }
    edge_triangle_.assign(boundary_edges_.size(), -1);
    for (const auto& [e, tris] : edge_tris) {
        auto it = declared.find(e);
        if (tris.size() == 1) {
            if (it == declared.end())
                throw MeshError("edge (" + std::to_string(e.first) + "," + std::to_string(e.second) +
                                ") lies on the boundary but is not declared as a boundary edge");
            edge_triangle_[it->second] = tris[0];
        } else if (it != declared.end()) {
            throw MeshError("boundary edge " + std::to_string(it->second) +
                            " is an interior edge (two incident triangles)");
        }
    }
    for (int i = 0; i < static_cast<int>(boundary_edges_.size()); ++i)
        if (edge_triangle_[i] < 0)
            throw MeshError("boundary edge " + std::to_string(i) +
                            " does not match any triangle edge");

    // Boundary edges must form disjoint simple closed cycles: every
    // boundary node has exactly two incident boundary edges.
    boundary_node_.assign(nv, false);
    std::vector<std::vector<int>> node_edges(nv);
    for (int i = 0; i < static_cast<int>(boundary_edges_.size()); ++i) {
        node_edges[boundary_edges_[i].a].push_back(i);
        node_edges[boundary_edges_[i].b].push_back(i);
        boundary_node_[boundary_edges_[i].a] = true;
        boundary_node_[boundary_edges_[i].b] = true;
    }
    for (int v = 0; v < nv; ++v) {
        if (boundary_node_[v] && node_edges[v].size() != 2)
            throw MeshError("boundary node " + std::to_string(v) + " has " +
                            std::to_string(node_edges[v].size()) +
                            " incident boundary edges (expected 2)");
    }

    boundary_nodes_.clear();
    for (int v = 0; v < nv; ++v)
        if (boundary_node_[v]) boundary_nodes_.push_back(v);

    // Walk the cycles; component id must be constant per cycle and
    // distinct across cycles.
    node_component_.assign(nv, -1);
    std::vector<bool> edge_seen(boundary_edges_.size(), false);
    std::set<int> seen_components;
    int cycles = 0;
    for (int start = 0; start < static_cast<int>(boundary_edges_.size()); ++start) {
        if (edge_seen[start]) continue;
        const int comp = boundary_edges_[start].component;
        if (seen_components.count(comp))
            throw MeshError("boundary component id " + std::to_string(comp) +
                            " is used by more than one boundary cycle (edge " +
                            std::to_string(start) + ")");
        seen_components.insert(comp);
        ++cycles;
        int edge = start;
        int node = boundary_edges_[start].a;
        while (true) {
            if (boundary_edges_[edge].component != comp)
                throw MeshError("boundary edge " + std::to_string(edge) +
                                " changes component id along a cycle");
            edge_seen[edge] = true;
            node_component_[boundary_edges_[edge].a] = comp;
            node_component_[boundary_edges_[edge].b] = comp;
            const int next_node = boundary_edges_[edge].a == node ? boundary_edges_[edge].b
                                                                  : boundary_edges_[edge].a;
            const auto& inc = node_edges[next_node];
            const int next_edge = inc[0] == edge ? inc[1] : inc[0];
            if (next_edge == start) break;
            edge = next_edge;
            node = next_node;
        }
    }
    component_count_ = cycles;

    // Connectivity of Omega through triangle adjacency.
    UnionFind uf(nt);
    for (const auto& [e, tris] : edge_tris)
        if (tris.size() == 2) uf.unite(tris[0], tris[1]);
    omega_connected_ = true;
    for (int t = 1; t < nt; ++t)
        if (uf.find(t) != uf.find(0)) {
            omega_connected_ = false;
            break;
        }

    // Every vertex must be used by some triangle.
    std::vector<bool> used(nv, false);
    for (const auto& tri : triangles_)
        for (int v : tri) used[v] = true;
    for (int v = 0; v < nv; ++v)
        if (!used[v]) throw MeshError("vertex " + std::to_string(v) + " is not used by any triangle");

    int max_comp = -1;
    for (const auto& be : boundary_edges_) max_comp = std::max(max_comp, be.component);
    geometry_.assign(max_comp + 1, std::nullopt);
}

double Mesh::triangle_area(int t) const {
    const auto& tri = triangles_[t];
    return signed_area(vertices_[tri[0]], vertices_[tri[1]], vertices_[tri[2]]);
}

double Mesh::total_area() const {
    double s = 0.0;
    for (int t = 0; t < triangle_count(); ++t) s += triangle_area(t);
    return s;
}

double Mesh::edge_length(int a, int b) const {
    const double dx = vertices_[a].x - vertices_[b].x;
    const double dy = vertices_[a].y - vertices_[b].y;
    return std::hypot(dx, dy);
}

Vec2 Mesh::boundary_edge_normal(int e) const {
    const auto& be = boundary_edges_[e];
    const int t = edge_triangle_[e];
    const auto& tri = triangles_[t];
    int third = -1;
    for (int v : tri)
        if (v != be.a && v != be.b) third = v;
    const Vec2& pa = vertices_[be.a];
    const Vec2& pb = vertices_[be.b];
    const double len = edge_length(be.a, be.b);
    Vec2 n{(pb.y - pa.y) / len, -(pb.x - pa.x) / len};
    // Point away from the interior vertex.
    const Vec2& pc = vertices_[third];
    if (n.x * (pc.x - pa.x) + n.y * (pc.y - pa.y) > 0.0) {
        n.x = -n.x;
        n.y = -n.y;
    }
    return n;
}

const std::optional<CircleGeometry>& Mesh::component_geometry(int component) const {
    static const std::optional<CircleGeometry> none;
    if (component < 0 || component >= static_cast<int>(geometry_.size())) return none;
    return geometry_[component];
}

void Mesh::set_component_geometry(int component, CircleGeometry geom) {
    if (component < 0 || component >= static_cast<int>(geometry_.size()))
        throw MeshError("no boundary component " + std::to_string(component));
    geometry_[component] = geom;
}

BoundaryMeasure Mesh::boundary_measure() const {
    std::vector<double> w(vertex_count(), 0.0);
    for (const auto& be : boundary_edges_) {
        const double half = 0.5 * edge_length(be.a, be.b);
        w[be.a] += half;
        w[be.b] += half;
    }
    BoundaryMeasure bm;
    for (int v : boundary_nodes_) {
        bm.nodes.push_back(v);
        bm.weights.push_back(w[v]);
    }
    return bm;
}

// ---------------------------------------------------------------------------
// Presets

namespace {

Mesh make_square(int r, double size, Vec2 origin) {
    const int n = r + 1;
    auto id = [n](int i, int j) { return j * n + i; };
    std::vector<Vec2> verts(n * n);
    const double h = size / r;
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            verts[id(i, j)] = {origin.x + i * h, origin.y + j * h};

    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < r; ++j)
        for (int i = 0; i < r; ++i) {
            tris.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1)});
            tris.push_back({id(i, j), id(i + 1, j + 1), id(i, j + 1)});
        }

    std::vector<BoundaryEdge> edges;
    for (int i = 0; i < r; ++i) edges.push_back({id(i, 0), id(i + 1, 0), 0});
    for (int j = 0; j < r; ++j) edges.push_back({id(r, j), id(r, j + 1), 0});
    for (int i = r; i > 0; --i) edges.push_back({id(i, r), id(i - 1, r), 0});
    for (int j = r; j > 0; --j) edges.push_back({id(0, j), id(0, j - 1), 0});
    return Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
}

// Triangulate the annular strip between two concentric vertex rings
// given by global indices, ordered by ascending angle.
void connect_rings(const std::vector<Vec2>& verts, const std::vector<int>& inner,
                   const std::vector<int>& outer, std::vector<std::array<int, 3>>& tris) {
    auto angle = [&](int v) {
        double a = std::atan2(verts[v].y, verts[v].x);
        if (a < -1e-12) a += 2 * kPi;
        return a;
    };
    const int m = static_cast<int>(inner.size());
    const int n = static_cast<int>(outer.size());
    int i = 0, j = 0;
    while (i < m || j < n) {
        const bool inner_done = i >= m;
        const bool outer_done = j >= n;
        double ai = inner_done ? 1e9 : angle(inner[(i + 1) % m]) + (i + 1 >= m ? 2 * kPi : 0.0);
        double aj = outer_done ? 1e9 : angle(outer[(j + 1) % n]) + (j + 1 >= n ? 2 * kPi : 0.0);
        if (!outer_done && (aj <= ai || inner_done)) {
            tris.push_back({inner[i % m], outer[j % n], outer[(j + 1) % n]});
            ++j;
        } else {
            tris.push_back({inner[i % m], outer[j % n], inner[(i + 1) % m]});
            ++i;
        }
    }
}

Mesh make_disk(int r) {
    std::vector<Vec2> verts;
    verts.push_back({0.0, 0.0});
    std::vector<std::vector<int>> rings(r + 1);
    for (int ring = 1; ring <= r; ++ring) {
        const int count = 4 * ring;
        const double radius = static_cast<double>(ring) / r;
        for (int k = 0; k < count; ++k) {
            const double th = 2.0 * kPi * k / count;
            rings[ring].push_back(static_cast<int>(verts.size()));
            verts.push_back({radius * std::cos(th), radius * std::sin(th)});
        }
    }
    std::vector<std::array<int, 3>> tris;
    for (int k = 0; k < 4; ++k) tris.push_back({0, rings[1][k], rings[1][(k + 1) % 4]});
    for (int ring = 2; ring <= r; ++ring)
        connect_rings(verts, rings[ring - 1], rings[ring], tris);

    std::vector<BoundaryEdge> edges;
    const auto& rim = rings[r];
    for (int k = 0; k < static_cast<int>(rim.size()); ++k)
        edges.push_back({rim[k], rim[(k + 1) % rim.size()], 0});
    Mesh m = Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
    m.set_component_geometry(0, {{0.0, 0.0}, 1.0});
    return m;
}

Mesh make_annulus(int r) {
    const double r0 = 0.5, r1 = 1.0;
    const int count = 4 * r;
    std::vector<Vec2> verts;
    std::vector<std::vector<int>> rings(r + 1);
    for (int ring = 0; ring <= r; ++ring) {
        const double radius = r0 + (r1 - r0) * ring / r;
        for (int k = 0; k < count; ++k) {
            const double th = 2.0 * kPi * k / count;
            rings[ring].push_back(static_cast<int>(verts.size()));
            verts.push_back({radius * std::cos(th), radius * std::sin(th)});
        }
    }
    std::vector<std::array<int, 3>> tris;
    for (int ring = 1; ring <= r; ++ring) {
        const auto& in = rings[ring - 1];
        const auto& out = rings[ring];
        for (int k = 0; k < count; ++k) {
            const int kn = (k + 1) % count;
            tris.push_back({in[k], out[k], out[kn]});
            tris.push_back({in[k], out[kn], in[kn]});
        }
    }
    std::vector<BoundaryEdge> edges;
    for (int k = 0; k < count; ++k)
        edges.push_back({rings[0][k], rings[0][(k + 1) % count], 0});
    for (int k = 0; k < count; ++k)
        edges.push_back({rings[r][k], rings[r][(k + 1) % count], 1});
    Mesh m = Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
    m.set_component_geometry(0, {{0.0, 0.0}, r0});
    m.set_component_geometry(1, {{0.0, 0.0}, r1});
    return m;
}

Mesh make_lshape(int r) {
    // [0,2]^2 minus the open quadrant (1,2)x(1,2), grid step 1/r.
    const int n = 2 * r + 1;
    std::vector<int> id(n * n, -1);
    std::vector<Vec2> verts;
    const double h = 1.0 / r;
    auto keep_vertex = [&](int i, int j) {
        const double x = i * h, y = j * h;
        return !(x > 1.0 + 1e-12 && y > 1.0 + 1e-12);
    };
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i)
            if (keep_vertex(i, j)) {
                id[j * n + i] = static_cast<int>(verts.size());
                verts.push_back({i * h, j * h});
            }
    std::vector<std::array<int, 3>> tris;
    for (int j = 0; j < 2 * r; ++j)
        for (int i = 0; i < 2 * r; ++i) {
            if (i >= r && j >= r) continue;
            const int v00 = id[j * n + i], v10 = id[j * n + i + 1];
            const int v01 = id[(j + 1) * n + i], v11 = id[(j + 1) * n + i + 1];
            tris.push_back({v00, v10, v11});
            tris.push_back({v00, v11, v01});
        }
    // Boundary edges derived from single-incidence edges, one cycle.
    std::map<std::pair<int, int>, int> counts;
    for (const auto& tri : tris)
        for (int k = 0; k < 3; ++k) counts[undirected(tri[k], tri[(k + 1) % 3])]++;
    std::vector<BoundaryEdge> edges;
    for (const auto& [e, c] : counts)
        if (c == 1) edges.push_back({e.first, e.second, 0});
    return Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
}

}  // namespace

Mesh Mesh::preset(const std::string& name, int resolution) {
    if (resolution < 1) throw MeshError("preset resolution must be >= 1");
    Mesh m = [&] {
        if (name == "square") return make_square(resolution, 1.0, {0.0, 0.0});
        if (name == "disk") return make_disk(resolution);
        if (name == "annulus") return make_annulus(resolution);
        if (name == "lshape") return make_lshape(resolution);
        throw MeshError("unknown preset domain '" + name + "'");
    }();
    m.set_provenance(name + ":" + std::to_string(resolution));
    return m;
}

Mesh Mesh::refined() const {
    std::vector<Vec2> verts = vertices_;
    std::map<std::pair<int, int>, int> midpoint;
    auto mid = [&](int a, int b) {
        auto key = undirected(a, b);
        auto it = midpoint.find(key);
        if (it != midpoint.end()) return it->second;
        const int idx = static_cast<int>(verts.size());
        verts.push_back({0.5 * (vertices_[a].x + vertices_[b].x),
                         0.5 * (vertices_[a].y + vertices_[b].y)});
        midpoint[key] = idx;
        return idx;
    };

    std::vector<std::array<int, 3>> tris;
    tris.reserve(4 * triangles_.size());
    for (const auto& tri : triangles_) {
        const int m01 = mid(tri[0], tri[1]);
        const int m12 = mid(tri[1], tri[2]);
        const int m20 = mid(tri[2], tri[0]);
        tris.push_back({tri[0], m01, m20});
        tris.push_back({tri[1], m12, m01});
        tris.push_back({tri[2], m20, m12});
        tris.push_back({m01, m12, m20});
    }

    std::vector<BoundaryEdge> edges;
    edges.reserve(2 * boundary_edges_.size());
    for (const auto& be : boundary_edges_) {
        const int m = mid(be.a, be.b);
        const auto& geom = component_geometry(be.component);
        if (geom) {
            Vec2& p = verts[m];
            const double dx = p.x - geom->center.x, dy = p.y - geom->center.y;
            const double d = std::hypot(dx, dy);
            p.x = geom->center.x + geom->radius * dx / d;
            p.y = geom->center.y + geom->radius * dy / d;
        }
        edges.push_back({be.a, m, be.component});
        edges.push_back({m, be.b, be.component});
    }

    Mesh m = Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
    for (int c = 0; c < static_cast<int>(geometry_.size()); ++c)
        if (geometry_[c]) m.set_component_geometry(c, *geometry_[c]);
    m.set_provenance(provenance_.empty() ? "refined" : provenance_ + "+");
    return m;
}

// ---------------------------------------------------------------------------
// JSON I/O

Mesh Mesh::from_json_text(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("mesh JSON parse failure: ") + e.what());
    }
    try {
        std::vector<Vec2> verts;
        for (const auto& v : j.at("vertices"))
            verts.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        std::vector<std::array<int, 3>> tris;
        for (const auto& t : j.at("triangles"))
            tris.push_back({t.at(0).get<int>(), t.at(1).get<int>(), t.at(2).get<int>()});
        std::vector<BoundaryEdge> edges;
        for (const auto& e : j.at("boundary_edges"))
            edges.push_back({e.at(0).get<int>(), e.at(1).get<int>(), e.at(2).get<int>()});
        return Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("mesh JSON schema violation: ") + e.what());
    }
}

Mesh Mesh::load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open mesh file '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    Mesh m = from_json_text(ss.str());
    m.set_provenance("file:" + path);
    return m;
}

std::string Mesh::to_json_text() const {
    nlohmann::json j;
    j["vertices"] = nlohmann::json::array();
    for (const auto& v : vertices_) j["vertices"].push_back({v.x, v.y});
    j["triangles"] = nlohmann::json::array();
    for (const auto& t : triangles_) j["triangles"].push_back({t[0], t[1], t[2]});
    j["boundary_edges"] = nlohmann::json::array();
    for (const auto& e : boundary_edges_) j["boundary_edges"].push_back({e.a, e.b, e.component});
    return j.dump();
}

Mesh disjoint_union(const Mesh& first, const Mesh& second, Vec2 offset) {
    std::vector<Vec2> verts = first.vertices();
    const int shift = first.vertex_count();
    for (const auto& v : second.vertices()) verts.push_back({v.x + offset.x, v.y + offset.y});

    std::vector<std::array<int, 3>> tris = first.triangles();
    for (const auto& t : second.triangles())
        tris.push_back({t[0] + shift, t[1] + shift, t[2] + shift});

    int comp_shift = 0;
    for (const auto& e : first.boundary_edges()) comp_shift = std::max(comp_shift, e.component + 1);
    std::vector<BoundaryEdge> edges = first.boundary_edges();
    for (const auto& e : second.boundary_edges())
        edges.push_back({e.a + shift, e.b + shift, e.component + comp_shift});

    Mesh m = Mesh::from_parts(std::move(verts), std::move(tris), std::move(edges));
    m.set_provenance("disjoint_union");
    return m;
}

}  // namespace dtnlab
