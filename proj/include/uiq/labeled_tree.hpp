#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "uiq/errors.hpp"

namespace uiq {

using Label = int;
using VertexId = std::int32_t;
inline constexpr VertexId no_vertex = -1;

// Rooted planar tree with positive integer labels. Vertices live in an arena;
// children are kept as a sibling list in planar (left-to-right) order.
class LabeledTree {
public:
    LabeledTree() : LabeledTree(1) {}
    explicit LabeledTree(Label root_label) { push(root_label, no_vertex, 0); }

    VertexId root() const noexcept { return 0; }
    Label root_label() const noexcept { return label_[0]; }
    std::size_t vertex_count() const noexcept { return label_.size(); }
    std::size_t edge_count() const noexcept { return label_.size() - 1; }

    Label label(VertexId v) const { return label_[static_cast<std::size_t>(v)]; }
    VertexId parent(VertexId v) const { return parent_[static_cast<std::size_t>(v)]; }
    int depth(VertexId v) const { return depth_[static_cast<std::size_t>(v)]; }
    VertexId first_child(VertexId v) const { return first_child_[static_cast<std::size_t>(v)]; }
    VertexId next_sibling(VertexId v) const { return next_sibling_[static_cast<std::size_t>(v)]; }
    int child_count(VertexId v) const { return child_count_[static_cast<std::size_t>(v)]; }

    // Appends `label` as the rightmost child of `parent`.
    VertexId add_child(VertexId parent, Label label) {
        const auto p = static_cast<std::size_t>(parent);
        const VertexId v = push(label, parent, depth_[p] + 1);
        if (last_child_[p] == no_vertex) first_child_[p] = v;
        else next_sibling_[static_cast<std::size_t>(last_child_[p])] = v;
        last_child_[p] = v;
        ++child_count_[p];
        return v;
    }

    std::vector<VertexId> children(VertexId v) const {
        std::vector<VertexId> out;
        out.reserve(static_cast<std::size_t>(child_count(v)));
        for (VertexId c = first_child(v); c != no_vertex; c = next_sibling(c)) out.push_back(c);
        return out;
    }

    int height() const {
        return label_.empty() ? 0 : *std::max_element(depth_.begin(), depth_.end());
    }

    Label max_label() const { return *std::max_element(label_.begin(), label_.end()); }

    // Checks the labeled-tree invariants; returns an empty string when valid.
    std::string violation() const {
        for (std::size_t v = 0; v < label_.size(); ++v) {
            if (label_[v] < 1) return "label below 1 at vertex " + std::to_string(v);
            const VertexId p = parent_[v];
            if (p != no_vertex && std::abs(label_[v] - label_[static_cast<std::size_t>(p)]) > 1)
                return "adjacent labels differ by more than 1 at vertex " + std::to_string(v);
        }
        return {};
    }

    // Vertices in depth-first preorder, children left to right.
    std::vector<VertexId> preorder() const {
        std::vector<VertexId> out;
        out.reserve(label_.size());
        std::vector<VertexId> stack{root()};
        std::vector<VertexId> kids;
        while (!stack.empty()) {
            const VertexId v = stack.back();
            stack.pop_back();
            out.push_back(v);
            kids.clear();
            for (VertexId c = first_child(v); c != no_vertex; c = next_sibling(c)) kids.push_back(c);
            stack.insert(stack.end(), kids.rbegin(), kids.rend());
        }
        return out;
    }

    // Per-label vertex counts, index = label (index 0 unused).
    std::vector<std::uint64_t> label_counts() const {
        std::vector<std::uint64_t> counts(static_cast<std::size_t>(max_label()) + 1, 0);
        for (Label l : label_) ++counts[static_cast<std::size_t>(l)];
        return counts;
    }

    // Planar, label-aware equality (identity up to arena numbering).
    friend bool operator==(const LabeledTree& a, const LabeledTree& b) {
        return a.vertex_count() == b.vertex_count() && a.to_nested() == b.to_nested();
    }

    // Compact nested form, e.g. "1(2(1),1)".
    std::string to_nested() const {
        std::string out;
        out.reserve(label_.size() * 3);
        struct Frame { VertexId v; VertexId next_child; bool opened; };
        std::vector<Frame> stack{{root(), first_child(root()), false}};
        out += std::to_string(root_label());
        while (!stack.empty()) {
            Frame& f = stack.back();
            if (f.next_child == no_vertex) {
                if (f.opened) out += ')';
                stack.pop_back();
                continue;
            }
            out += f.opened ? ',' : '(';
            f.opened = true;
            const VertexId c = f.next_child;
            f.next_child = next_sibling(c);
            out += std::to_string(label(c));
            stack.push_back({c, first_child(c), false});
        }
        return out;
    }

    static LabeledTree from_nested(std::string_view text) {
        std::size_t pos = 0;
        auto read_label = [&]() -> Label {
            const std::size_t start = pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
            if (start == pos) throw FormatError("nested tree: expected label at offset " + std::to_string(start));
            return static_cast<Label>(std::stol(std::string(text.substr(start, pos - start))));
        };
        LabeledTree tree(read_label());
        std::vector<VertexId> stack{tree.root()};
        VertexId last = tree.root();
        while (pos < text.size()) {
            const char c = text[pos];
            if (c == '(') {
                ++pos;
                stack.push_back(last);
                last = tree.add_child(stack.back(), read_label());
            } else if (c == ',') {
                ++pos;
                if (stack.size() < 2) throw FormatError("nested tree: ',' outside a child list");
                last = tree.add_child(stack.back(), read_label());
            } else if (c == ')') {
                ++pos;
                if (stack.size() < 2) throw FormatError("nested tree: unbalanced ')'");
                last = stack.back();
                stack.pop_back();
            } else if (c == ' ' || c == '\n' || c == '\t' || c == '\r') {
                ++pos;
            } else {
                throw FormatError(std::string("nested tree: unexpected character '") + c + "'");
            }
        }
        if (stack.size() != 1) throw FormatError("nested tree: unbalanced '('");
        return tree;
    }

    // One vertex per line, "depth label", preorder.
    void write_depth_label(std::ostream& os) const {
        for (VertexId v : preorder()) os << depth(v) << ' ' << label(v) << '\n';
    }

    std::string to_depth_label() const {
        std::ostringstream os;
        write_depth_label(os);
        return os.str();
    }

    static LabeledTree read_depth_label(std::istream& is) {
        std::string line;
        std::vector<VertexId> path;  // path[d] = last vertex seen at depth d
        LabeledTree tree;
        bool have_root = false;
        while (std::getline(is, line)) {
            if (line.empty() || line[0] == '#') continue;
            std::istringstream ls(line);
            long depth = 0;
            long label = 0;
            if (!(ls >> depth >> label)) throw FormatError("depth-label: malformed line '" + line + "'");
            if (!have_root) {
                if (depth != 0) throw FormatError("depth-label: first line must have depth 0");
                tree = LabeledTree(static_cast<Label>(label));
                path.assign(1, tree.root());
                have_root = true;
                continue;
            }
            if (depth < 1 || static_cast<std::size_t>(depth) > path.size())
                throw FormatError("depth-label: depth jumps at line '" + line + "'");
            path.resize(static_cast<std::size_t>(depth));
            path.push_back(tree.add_child(path.back(), static_cast<Label>(label)));
        }
        if (!have_root) throw FormatError("depth-label: empty input");
        return tree;
    }

    static LabeledTree from_depth_label(const std::string& text) {
        std::istringstream is(text);
        return read_depth_label(is);
    }

private:
    VertexId push(Label label, VertexId parent, int depth) {
        const auto id = static_cast<VertexId>(label_.size());
        label_.push_back(label);
        parent_.push_back(parent);
        depth_.push_back(depth);
        first_child_.push_back(no_vertex);
        last_child_.push_back(no_vertex);
        next_sibling_.push_back(no_vertex);
        child_count_.push_back(0);
        return id;
    }

    std::vector<Label> label_;
    std::vector<VertexId> parent_;
    std::vector<int> depth_;
    std::vector<VertexId> first_child_;
    std::vector<VertexId> last_child_;
    std::vector<VertexId> next_sibling_;
    std::vector<int> child_count_;
};

// Labeled subtree spanned by the vertices within distance r of the root.
inline LabeledTree ball_of_tree(const LabeledTree& tree, int r) {
    LabeledTree out(tree.root_label());
    if (r <= 0) return out;
    // Breadth-first keeps each parent's children contiguous and in order.
    std::vector<std::pair<VertexId, VertexId>> frontier{{tree.root(), out.root()}};
    for (int d = 0; d < r && !frontier.empty(); ++d) {
        std::vector<std::pair<VertexId, VertexId>> next;
        for (auto [src, dst] : frontier)
            for (VertexId c = tree.first_child(src); c != no_vertex; c = tree.next_sibling(c))
                next.emplace_back(c, out.add_child(dst, tree.label(c)));
        frontier = std::move(next);
    }
    return out;
}

} // namespace uiq
