#pragma once

#include <algorithm>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "uiq/errors.hpp"

namespace uiq {

using HalfEdge = std::int32_t;
inline constexpr HalfEdge no_half_edge = -1;

// Half-edge map. next[h] is the successor of h in the rotation around
// origin[h]; the face to the left of the walk h → next[twin[h]] is traced by
// repeatedly applying that step.
struct PlanarMap {
    std::vector<HalfEdge> twin;
    std::vector<HalfEdge> next;
    std::vector<std::int32_t> origin;
    std::vector<int> vertex_label;
    HalfEdge root = no_half_edge;
    std::int32_t v0 = 0;

    std::size_t half_edge_count() const noexcept { return twin.size(); }
    std::size_t edge_count() const noexcept { return twin.size() / 2; }
    std::size_t vertex_count() const noexcept { return vertex_label.size(); }

    HalfEdge face_next(HalfEdge h) const { return next[static_cast<std::size_t>(twin[static_cast<std::size_t>(h)])]; }
    std::int32_t target(HalfEdge h) const { return origin[static_cast<std::size_t>(twin[static_cast<std::size_t>(h)])]; }

    // Faces as half-edge cycles, each starting at its smallest half-edge id.
    std::vector<std::vector<HalfEdge>> faces() const {
        std::vector<char> seen(twin.size(), 0);
        std::vector<std::vector<HalfEdge>> out;
        for (HalfEdge h = 0; h < static_cast<HalfEdge>(twin.size()); ++h) {
            if (seen[static_cast<std::size_t>(h)]) continue;
            std::vector<HalfEdge> f;
            for (HalfEdge g = h; !seen[static_cast<std::size_t>(g)]; g = face_next(g)) {
                seen[static_cast<std::size_t>(g)] = 1;
                f.push_back(g);
            }
            out.push_back(std::move(f));
        }
        return out;
    }

    std::size_t face_count() const { return faces().size(); }

    // Empty when the rotation system is consistent: twin is a fixed-point-free
    // involution, next is a permutation preserving origins, every vertex has
    // exactly one rotation cycle, and the root leaves v0.
    std::string consistency() const {
        const std::size_t H = twin.size();
        if (next.size() != H || origin.size() != H) return "array sizes differ";
        if (H % 2) return "odd half-edge count";
        std::vector<int> in_degree(H, 0);
        for (std::size_t h = 0; h < H; ++h) {
            const HalfEdge t = twin[h];
            if (t < 0 || static_cast<std::size_t>(t) >= H || t == static_cast<HalfEdge>(h) ||
                twin[static_cast<std::size_t>(t)] != static_cast<HalfEdge>(h))
                return "twin is not an involution at " + std::to_string(h);
            const HalfEdge n = next[h];
            if (n < 0 || static_cast<std::size_t>(n) >= H) return "next out of range at " + std::to_string(h);
            if (origin[static_cast<std::size_t>(n)] != origin[h]) return "rotation leaves its vertex at " + std::to_string(h);
            if (origin[h] < 0 || static_cast<std::size_t>(origin[h]) >= vertex_label.size())
                return "origin out of range at " + std::to_string(h);
            if (++in_degree[static_cast<std::size_t>(n)] > 1) return "next is not a permutation";
        }
        std::vector<int> cycles(vertex_label.size(), 0);
        std::vector<char> seen(H, 0);
        for (std::size_t h = 0; h < H; ++h) {
            if (seen[h]) continue;
            ++cycles[static_cast<std::size_t>(origin[h])];
            for (HalfEdge g = static_cast<HalfEdge>(h); !seen[static_cast<std::size_t>(g)]; g = next[static_cast<std::size_t>(g)])
                seen[static_cast<std::size_t>(g)] = 1;
        }
        for (std::size_t v = 0; v < cycles.size(); ++v)
            if (cycles[v] != 1) return "vertex " + std::to_string(v) + " has " + std::to_string(cycles[v]) + " rotation cycles";
        if (H > 0 && (root < 0 || static_cast<std::size_t>(root) >= H || origin[static_cast<std::size_t>(root)] != v0))
            return "root half-edge does not leave v0";
        return {};
    }

    // Canonical code of the rooted map: half-edges renumbered in the order a
    // breadth-first search from the root reaches them through next and twin.
    // Equal codes ⇔ isomorphic as rooted, labeled maps (for connected maps).
    std::vector<std::int64_t> canonical_code() const {
        const std::size_t H = twin.size();
        std::vector<std::int64_t> code{static_cast<std::int64_t>(H)};
        if (H == 0) return code;
        std::vector<HalfEdge> id(H, -1);
        std::vector<HalfEdge> order{root};
        id[static_cast<std::size_t>(root)] = 0;
        for (std::size_t i = 0; i < order.size(); ++i) {
            const HalfEdge h = order[i];
            for (HalfEdge g : {next[static_cast<std::size_t>(h)], twin[static_cast<std::size_t>(h)]})
                if (id[static_cast<std::size_t>(g)] < 0) {
                    id[static_cast<std::size_t>(g)] = static_cast<HalfEdge>(order.size());
                    order.push_back(g);
                }
        }
        for (HalfEdge h : order) {
            code.push_back(id[static_cast<std::size_t>(next[static_cast<std::size_t>(h)])]);
            code.push_back(id[static_cast<std::size_t>(twin[static_cast<std::size_t>(h)])]);
            code.push_back(vertex_label[static_cast<std::size_t>(origin[static_cast<std::size_t>(h)])]);
        }
        return code;
    }

    // Text form: a header "root <h> v0 <v> vertices <n>", then one line per
    // half-edge "id twin next origin label".
    void write(std::ostream& os) const {
        os << "# planar map: id twin next origin label\n";
        os << "root " << root << " v0 " << v0 << " vertices " << vertex_label.size() << '\n';
        for (std::size_t h = 0; h < twin.size(); ++h)
            os << h << ' ' << twin[h] << ' ' << next[h] << ' ' << origin[h] << ' '
               << vertex_label[static_cast<std::size_t>(origin[h])] << '\n';
    }

    std::string to_text() const {
        std::ostringstream os;
        write(os);
        return os.str();
    }

    static PlanarMap read(std::istream& is) {
        PlanarMap m;
        std::string line;
        bool header = false;
        std::size_t vertices = 0;
        std::vector<std::int64_t> labels;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            if (!header) {
                std::string a, b, c;
                if (!(ls >> a >> m.root >> b >> m.v0 >> c >> vertices) || a != "root" || b != "v0" || c != "vertices")
                    throw FormatError("planar map: bad header line '" + line + "'");
                header = true;
                m.vertex_label.assign(vertices, -1);
                continue;
            }
            std::int64_t id, t, n, o, l;
            if (!(ls >> id >> t >> n >> o >> l)) throw FormatError("planar map: bad half-edge line '" + line + "'");
            if (id != static_cast<std::int64_t>(m.twin.size())) throw FormatError("planar map: half-edge ids out of order");
            if (o < 0 || static_cast<std::size_t>(o) >= vertices) throw FormatError("planar map: origin out of range");
            m.twin.push_back(static_cast<HalfEdge>(t));
            m.next.push_back(static_cast<HalfEdge>(n));
            m.origin.push_back(static_cast<std::int32_t>(o));
            int& slot = m.vertex_label[static_cast<std::size_t>(o)];
            if (slot != -1 && slot != l) throw FormatError("planar map: conflicting labels at a vertex");
            slot = static_cast<int>(l);
        }
        if (!header) throw FormatError("planar map: missing header");
        if (vertices == 1 && m.twin.empty()) m.vertex_label[0] = 0;
        if (std::find(m.vertex_label.begin(), m.vertex_label.end(), -1) != m.vertex_label.end())
            throw FormatError("planar map: vertex without half-edges");
        if (const std::string why = m.consistency(); !why.empty()) throw FormatError("planar map: " + why);
        return m;
    }

    static PlanarMap from_text(const std::string& text) {
        std::istringstream is(text);
        return read(is);
    }
};

// Graph distance from v0 (−1 when unreachable).
inline std::vector<int> bfs_distances(const PlanarMap& m) {
    std::vector<std::vector<std::int32_t>> adj(m.vertex_count());
    for (std::size_t h = 0; h < m.half_edge_count(); ++h)
        adj[static_cast<std::size_t>(m.origin[h])].push_back(m.target(static_cast<HalfEdge>(h)));
    std::vector<int> dist(m.vertex_count(), -1);
    if (m.vertex_count() == 0) return dist;
    std::vector<std::int32_t> queue{m.v0};
    dist[static_cast<std::size_t>(m.v0)] = 0;
    for (std::size_t i = 0; i < queue.size(); ++i) {
        const std::int32_t v = queue[i];
        for (std::int32_t w : adj[static_cast<std::size_t>(v)])
            if (dist[static_cast<std::size_t>(w)] < 0) {
                dist[static_cast<std::size_t>(w)] = dist[static_cast<std::size_t>(v)] + 1;
                queue.push_back(w);
            }
    }
    return dist;
}

struct MapBall {
    std::vector<std::int32_t> vertices;  // distance ≤ r
    std::size_t edges = 0;               // edges with both ends inside
    std::size_t volume = 0;              // = vertices.size()
};

inline MapBall ball_of_map(const PlanarMap& m, const std::vector<int>& dist, int r) {
    if (r < 0) throw RangeError("ball_of_map: r must be >= 0");
    MapBall b;
    for (std::size_t v = 0; v < dist.size(); ++v)
        if (dist[v] >= 0 && dist[v] <= r) b.vertices.push_back(static_cast<std::int32_t>(v));
    for (std::size_t h = 0; h < m.half_edge_count(); ++h) {
        const int a = dist[static_cast<std::size_t>(m.origin[h])];
        const int c = dist[static_cast<std::size_t>(m.target(static_cast<HalfEdge>(h)))];
        if (static_cast<HalfEdge>(h) < m.twin[h] && a >= 0 && a <= r && c >= 0 && c <= r) ++b.edges;
    }
    b.volume = b.vertices.size();
    return b;
}

namespace detail {

// Accumulates per-vertex rotation lists and materializes a PlanarMap from the
// half-edges that survive a filter; ids are compacted in increasing order.
struct MapBuilder {
    std::vector<HalfEdge> twin;
    std::vector<std::int32_t> origin;
    std::vector<std::vector<HalfEdge>> rotation;  // per vertex, in rotation order
    std::vector<int> label;

    HalfEdge add_edge(std::int32_t a, std::int32_t b) {
        const auto h = static_cast<HalfEdge>(twin.size());
        twin.push_back(h + 1);
        twin.push_back(h);
        origin.push_back(a);
        origin.push_back(b);
        return h;
    }

    template <class KeepEdge, class KeepVertex>
    PlanarMap build(HalfEdge root, std::int32_t v0, KeepEdge&& keep_edge, KeepVertex&& keep_vertex) const {
        std::vector<HalfEdge> new_he(twin.size(), no_half_edge);
        std::vector<std::int32_t> new_v(label.size(), -1);
        PlanarMap m;
        for (std::size_t v = 0; v < label.size(); ++v)
            if (keep_vertex(static_cast<std::int32_t>(v))) {
                new_v[v] = static_cast<std::int32_t>(m.vertex_label.size());
                m.vertex_label.push_back(label[v]);
            }
        HalfEdge count = 0;
        for (std::size_t h = 0; h < twin.size(); h += 2) {
            const bool keep = keep_edge(static_cast<HalfEdge>(h)) && new_v[static_cast<std::size_t>(origin[h])] >= 0 &&
                              new_v[static_cast<std::size_t>(origin[h + 1])] >= 0;
            if (!keep) continue;
            new_he[h] = count++;
            new_he[h + 1] = count++;
        }
        m.twin.assign(static_cast<std::size_t>(count), no_half_edge);
        m.next.assign(static_cast<std::size_t>(count), no_half_edge);
        m.origin.assign(static_cast<std::size_t>(count), -1);
        for (std::size_t h = 0; h < twin.size(); ++h) {
            const HalfEdge n = new_he[h];
            if (n == no_half_edge) continue;
            m.twin[static_cast<std::size_t>(n)] = new_he[static_cast<std::size_t>(twin[h])];
            m.origin[static_cast<std::size_t>(n)] = new_v[static_cast<std::size_t>(origin[h])];
        }
        for (const auto& rot : rotation) {
            HalfEdge first = no_half_edge, prev = no_half_edge;
            for (HalfEdge h : rot) {
                const HalfEdge n = new_he[static_cast<std::size_t>(h)];
                if (n == no_half_edge) continue;
                if (prev == no_half_edge) first = n;
                else m.next[static_cast<std::size_t>(prev)] = n;
                prev = n;
            }
            if (prev != no_half_edge) m.next[static_cast<std::size_t>(prev)] = first;
        }
        m.root = root == no_half_edge ? no_half_edge : new_he[static_cast<std::size_t>(root)];
        m.v0 = new_v[static_cast<std::size_t>(v0)];
        return m;
    }
};

} // namespace detail

} // namespace uiq
