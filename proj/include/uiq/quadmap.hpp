#pragma once

#include <algorithm>
#include <climits>
#include <cstdint>
#include <string>
#include <vector>

#include "uiq/assembler.hpp"
#include "uiq/errors.hpp"
#include "uiq/labeled_tree.hpp"
#include "uiq/planar_map.hpp"

namespace uiq {

// Tree half-edges: the edge into vertex v ≥ 1 has ids 2(v−1) (parent → v) and
// 2(v−1)+1 (v → parent). Around a vertex the rotation is the parent edge
// followed by the child edges in planar order, so the contour visits children
// in order. Corner i is the sector just before its outgoing half-edge.
struct Corner {
    VertexId vertex = 0;
    Label label = 1;
    HalfEdge half_edge = no_half_edge;
    long index = 0;  // signed in infinite mode
};

struct CornerSequence {
    std::vector<Corner> corners;
    bool infinite_mode = false;
    long positive = 0;  // corners with index ≥ 0 (all of them in finite mode)

    std::size_t size() const noexcept { return corners.size(); }
    long count_label(Label l) const {
        return static_cast<long>(std::count_if(corners.begin(), corners.end(), [l](const Corner& c) { return c.label == l; }));
    }
};

namespace detail {

inline HalfEdge down_edge(VertexId v) { return 2 * (v - 1); }
inline HalfEdge up_edge(VertexId v) { return 2 * (v - 1) + 1; }

} // namespace detail

// Contour of the tree face starting at the root corner (before the first child
// edge). With `spine` (spine vertex ids, root first), corners from the first
// visit of the top spine vertex onwards get negative indices i − size: the
// right side climbs with indices 0, 1, … and the left side descends towards
// −1.
inline CornerSequence contour_corners(const LabeledTree& tree, const std::vector<VertexId>* spine = nullptr) {
    CornerSequence cs;
    cs.infinite_mode = spine != nullptr;
    if (tree.edge_count() == 0) {
        cs.corners.push_back({tree.root(), tree.root_label(), no_half_edge, 0});
        cs.positive = 1;
        return cs;
    }
    const std::size_t P = 2 * tree.edge_count();
    cs.corners.reserve(P);
    // Walk: leaving u along (u → c) we next leave c towards its first child,
    // or back up when c is a leaf; leaving c upwards we next take c's next
    // sibling from the parent, or go further up.
    VertexId u = tree.root();
    VertexId towards = tree.first_child(u);
    bool down = true;
    for (std::size_t i = 0; i < P; ++i) {
        const HalfEdge h = down ? detail::down_edge(towards) : detail::up_edge(u);
        cs.corners.push_back({u, tree.label(u), h, static_cast<long>(i)});
        if (down) {
            const VertexId c = towards;
            u = c;
            towards = tree.first_child(c);
            down = towards != no_vertex;
        } else {
            const VertexId from = u;
            u = tree.parent(from);
            towards = tree.next_sibling(from);
            down = towards != no_vertex;
            if (!down && u == tree.root()) {
                towards = tree.first_child(u);
                down = true;
            }
        }
    }
    if (u != tree.root()) throw StructureError("contour_corners: walk did not close at the root");
    cs.positive = static_cast<long>(P);
    if (spine && !spine->empty()) {
        const VertexId top = spine->back();
        long first_top = static_cast<long>(P);
        for (std::size_t i = 0; i < P; ++i)
            if (cs.corners[i].vertex == top) {
                first_top = static_cast<long>(i);
                break;
            }
        for (std::size_t i = static_cast<std::size_t>(first_top); i < P; ++i)
            cs.corners[i].index = static_cast<long>(i) - static_cast<long>(P);
        cs.positive = first_top;
    }
    return cs;
}

// Successor of each corner: the next corner in cyclic contour order whose
// label is one less (−1 for label-1 corners, which attach to v0).
inline std::vector<long> corner_successors(const CornerSequence& cs) {
    const long P = static_cast<long>(cs.size());
    Label max_label = 0;
    for (const Corner& c : cs.corners) max_label = std::max(max_label, c.label);
    std::vector<long> nearest(static_cast<std::size_t>(max_label) + 2, -1);
    std::vector<long> s(static_cast<std::size_t>(P), -1);
    for (long i = 2 * P - 1; i >= 0; --i) {
        const Label l = cs.corners[static_cast<std::size_t>(i % P)].label;
        if (i < P && l >= 2) {
            const long n = nearest[static_cast<std::size_t>(l - 1)];
            if (n < 0) throw StructureError("corner_successors: no corner with label " + std::to_string(l - 1));
            s[static_cast<std::size_t>(i)] = n % P;
        }
        nearest[static_cast<std::size_t>(l)] = i;
    }
    return s;
}

struct FaceReport {
    std::size_t faces = 0;
    std::size_t triangles = 0;    // labels (e, e+1, e+1)
    std::size_t quadrangles = 0;  // labels (e, e+1, e+2, e+1) or, after deletion, (e, e+1, e, e+1)
    std::size_t provisional = 0;  // touching labels ≥ the frontier label
    std::size_t degenerate = 0;   // the lone face of a single-edge map
    std::size_t violations = 0;
    std::vector<std::string> diagnostics;  // first few violations
};

namespace detail {

inline std::string face_labels(const PlanarMap& m, const std::vector<HalfEdge>& f) {
    std::string s;
    for (HalfEdge h : f) {
        if (!s.empty()) s += ',';
        s += std::to_string(m.vertex_label[static_cast<std::size_t>(m.origin[static_cast<std::size_t>(h)])]);
    }
    return s;
}

// Labels of a face read cyclically from a minimum.
inline std::vector<int> face_shape(const PlanarMap& m, const std::vector<HalfEdge>& f) {
    std::vector<int> l;
    for (HalfEdge h : f) l.push_back(m.vertex_label[static_cast<std::size_t>(m.origin[static_cast<std::size_t>(h)])]);
    const auto it = std::min_element(l.begin(), l.end());
    std::rotate(l.begin(), it, l.end());
    return l;
}

} // namespace detail

// Classifies the faces of the chord map, before equal-label tree edges are
// deleted (or, with after_deletion, of the final map). Faces with a vertex labeled ≥ frontier are provisional.
inline FaceReport verify_faces(const PlanarMap& m, int frontier = INT_MAX, bool after_deletion = false) {
    FaceReport r;
    const auto faces = m.faces();
    r.faces = faces.size();
    for (const auto& f : faces) {
        const std::vector<int> l = detail::face_shape(m, f);
        if (*std::max_element(l.begin(), l.end()) >= frontier) {
            ++r.provisional;
            continue;
        }
        const int e = l[0];
        bool ok = false;
        if (l.size() == 2 && m.edge_count() == 1) {
            ++r.degenerate;
            ok = true;
        } else if (!after_deletion && l.size() == 3 && l[1] == e + 1 && l[2] == e + 1) {
            ++r.triangles;
            ok = true;
        } else if (l.size() == 4 && l[1] == e + 1 && l[3] == e + 1 && (l[2] == e + 2 || (after_deletion && l[2] == e))) {
            ++r.quadrangles;
            ok = true;
        }
        if (!ok) {
            ++r.violations;
            if (r.diagnostics.size() < 8) r.diagnostics.push_back("face with labels (" + detail::face_labels(m, f) + ")");
        }
    }
    return r;
}

struct QuadOptions {
    int label_limit = INT_MAX;                     // corners above this label get no edge
    const std::vector<VertexId>* spine = nullptr;  // infinite mode when set
    bool keep_premap = false;
};

struct Quadrangulation {
    PlanarMap map;                   // final map
    std::vector<int> distance;       // BFS distance from v0, per map vertex
    std::vector<VertexId> source;    // tree vertex of each map vertex (no_vertex for v0)
    FaceReport pre_deletion;         // chord map, before deletion
    FaceReport faces;                // final map
    std::size_t deleted_edges = 0;   // equal-label tree edges removed
    long corners = 0;
    long label_one_corners = 0;
    bool infinite_mode = false;
    int label_limit = INT_MAX;
    PlanarMap premap;                // filled when QuadOptions::keep_premap
};

// A vertex v0 (label 0) is joined to every label-1 corner. Each
// corner i of label ≥ 2 is joined to its successor s(i); when s(i) is the next
// corner the tree edge between them is that edge and no chord is drawn.
// Finally tree edges with equal labels are deleted.
//
// Chords live inside the tree face. Inside the sector of corner i the items
// are ordered by the forward contour distance to their far corner, largest
// first (nearest the incoming tree edge); the v0 edge has distance 0. Around
// v0 the edges follow decreasing contour index. The root half-edge is the v0
// edge at the root corner, oriented away from v0.
inline Quadrangulation build_q(const LabeledTree& tree, const QuadOptions& opt = {}) {
    if (tree.root_label() != 1) throw RangeError("build_q: the root label must be 1");
    if (const std::string why = tree.violation(); !why.empty()) throw RangeError("build_q: " + why);
    const CornerSequence cs = contour_corners(tree, opt.spine);
    const long P = static_cast<long>(cs.size());
    const std::vector<long> succ = corner_successors(cs);
    const auto n_tree = static_cast<VertexId>(tree.vertex_count());

    detail::MapBuilder b;
    b.label.push_back(0);
    for (VertexId v = 0; v < n_tree; ++v) b.label.push_back(tree.label(v));
    for (VertexId v = 1; v < n_tree; ++v) b.add_edge(tree.parent(v) + 1, v + 1);
    const HalfEdge tree_half_edges = static_cast<HalfEdge>(b.twin.size());

    struct Item {
        long corner;
        long key;
        HalfEdge h;
    };
    std::vector<Item> items;
    std::vector<std::pair<long, HalfEdge>> at_v0;
    HalfEdge root = no_half_edge;
    Quadrangulation q;
    q.corners = P;
    q.infinite_mode = cs.infinite_mode;
    q.label_limit = opt.label_limit;
    for (long i = 0; i < P; ++i) {
        const Corner& c = cs.corners[static_cast<std::size_t>(i)];
        if (c.label > opt.label_limit) continue;
        const std::int32_t at = c.vertex + 1;
        if (c.label == 1) {
            ++q.label_one_corners;
            const HalfEdge e = b.add_edge(0, at);
            items.push_back({i, 0, e + 1});
            at_v0.emplace_back(i, e);
            if (i == 0) root = e;
            continue;
        }
        const long s = succ[static_cast<std::size_t>(i)];
        if (s == (i + 1) % P) continue;
        const HalfEdge e = b.add_edge(at, cs.corners[static_cast<std::size_t>(s)].vertex + 1);
        items.push_back({i, (s - i + P) % P, e});
        items.push_back({s, (i - s + P) % P, e + 1});
    }
    std::sort(items.begin(), items.end(), [](const Item& x, const Item& y) {
        return x.corner != y.corner ? x.corner < y.corner : x.key > y.key;
    });
    std::vector<long> corner_of(static_cast<std::size_t>(tree_half_edges), -1);
    for (long i = 0; i < P; ++i) {
        const HalfEdge h = cs.corners[static_cast<std::size_t>(i)].half_edge;
        if (h != no_half_edge) corner_of[static_cast<std::size_t>(h)] = i;
    }
    std::vector<std::size_t> first_item(static_cast<std::size_t>(P) + 1, items.size());
    for (std::size_t k = items.size(); k-- > 0;) first_item[static_cast<std::size_t>(items[k].corner)] = k;
    for (long i = P - 1; i >= 0; --i)
        first_item[static_cast<std::size_t>(i)] = std::min(first_item[static_cast<std::size_t>(i)], first_item[static_cast<std::size_t>(i) + 1]);

    b.rotation.assign(b.label.size(), {});
    std::sort(at_v0.begin(), at_v0.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
    for (const auto& [corner, h] : at_v0) b.rotation[0].push_back(h);
    auto sector = [&](long corner, std::vector<HalfEdge>& rot) {
        for (std::size_t k = first_item[static_cast<std::size_t>(corner)]; k < first_item[static_cast<std::size_t>(corner) + 1]; ++k)
            rot.push_back(items[k].h);
    };
    for (VertexId v = 0; v < n_tree; ++v) {
        auto& rot = b.rotation[static_cast<std::size_t>(v) + 1];
        if (v != tree.root()) {
            const HalfEdge up = detail::up_edge(v);
            sector(corner_of[static_cast<std::size_t>(up)], rot);
            rot.push_back(up);
        }
        for (VertexId c = tree.first_child(v); c != no_vertex; c = tree.next_sibling(c)) {
            const HalfEdge dn = detail::down_edge(c);
            sector(corner_of[static_cast<std::size_t>(dn)], rot);
            rot.push_back(dn);
        }
        if (tree.edge_count() == 0) sector(0, rot);
    }

    auto keep_vertex = [&](std::int32_t v) { return v == 0 || b.label[static_cast<std::size_t>(v)] <= opt.label_limit; };
    auto equal_tree_edge = [&](HalfEdge h) {
        return h < tree_half_edges && b.label[static_cast<std::size_t>(b.origin[static_cast<std::size_t>(h)])] ==
                                          b.label[static_cast<std::size_t>(b.origin[static_cast<std::size_t>(h) + 1])];
    };
    const int frontier = opt.label_limit == INT_MAX ? INT_MAX : opt.label_limit;
    {
        PlanarMap pre = b.build(root, 0, [](HalfEdge) { return true; }, keep_vertex);
        if (const std::string why = pre.consistency(); !why.empty()) throw StructureError("build_q: chord map: " + why);
        q.pre_deletion = verify_faces(pre, frontier);
        if (q.pre_deletion.violations)
            throw StructureError("build_q: chord map has a " + q.pre_deletion.diagnostics.front());
        if (opt.keep_premap) q.premap = std::move(pre);
    }
    for (HalfEdge h = 0; h < tree_half_edges; h += 2)
        if (keep_vertex(b.origin[static_cast<std::size_t>(h)]) && keep_vertex(b.origin[static_cast<std::size_t>(h) + 1]) &&
            equal_tree_edge(h))
            ++q.deleted_edges;
    q.map = b.build(root, 0, [&](HalfEdge h) { return !equal_tree_edge(h); }, keep_vertex);
    if (const std::string why = q.map.consistency(); !why.empty()) throw StructureError("build_q: final map: " + why);
    q.faces = verify_faces(q.map, frontier, true);
    if (q.faces.violations) throw StructureError("build_q: final map has a " + q.faces.diagnostics.front());
    q.distance = bfs_distances(q.map);
    for (std::int32_t v = 0; v < static_cast<std::int32_t>(b.label.size()); ++v)
        if (keep_vertex(v)) q.source.push_back(v == 0 ? no_vertex : v - 1);
    return q;
}

// Q on a truncated infinite tree. Corners with label ≤ r_complete + 2 are
// processed; faces reaching that label are provisional, and the map restricted
// to labels ≤ r_complete is the exact image.
inline Quadrangulation build_q_infinite(const TruncatedUIT& t, int r_complete) {
    if (r_complete < 0 || r_complete > t.completeness_labels)
        throw RangeError("build_q_infinite: r_complete outside the completeness range");
    const int limit = r_complete + 2;
    if (t.k_cut <= limit || t.spine.states.back() <= limit)
        throw RangeError("build_q_infinite: labels up to r_complete + 2 are not finite within the truncation");
    std::vector<VertexId> spine;
    const LabeledTree tree = t.assemble(&spine);
    QuadOptions opt;
    opt.label_limit = limit;
    opt.spine = &spine;
    return build_q(tree, opt);
}

struct QuadBall {
    std::size_t volume = 0;
    std::size_t edges = 0;
};

inline QuadBall ball_of_quad(const Quadrangulation& q, int r) {
    const MapBall b = ball_of_map(q.map, q.distance, r);
    return {b.volume, b.edges};
}

} // namespace uiq
