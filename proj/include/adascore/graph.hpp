#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "adascore/errors.hpp"

namespace adascore {

using NodeId = int;

/// Directed acyclic graph stored as per-node parent sets.
class Dag {
public:
    Dag() = default;
    explicit Dag(int num_nodes) : parents_(num_nodes) {}

    int num_nodes() const { return static_cast<int>(parents_.size()); }

    void add_edge(NodeId from, NodeId to) {
        check_node(from);
        check_node(to);
        if (from == to) throw std::invalid_argument("self loop");
        parents_[to].insert(from);
    }

    bool has_edge(NodeId from, NodeId to) const {
        return parents_[to].count(from) > 0;
    }

    const std::set<NodeId>& parents(NodeId i) const { return parents_[i]; }

    std::set<NodeId> children(NodeId i) const {
        std::set<NodeId> out;
        for (int j = 0; j < num_nodes(); ++j)
            if (parents_[j].count(i)) out.insert(j);
        return out;
    }

    int num_edges() const {
        int m = 0;
        for (const auto& p : parents_) m += static_cast<int>(p.size());
        return m;
    }

    bool adjacent(NodeId a, NodeId b) const {
        return has_edge(a, b) || has_edge(b, a);
    }

    std::vector<std::string> node_names;

    std::string name_of(NodeId i) const {
        if (i < static_cast<int>(node_names.size()) && !node_names[i].empty())
            return node_names[i];
        return "X" + std::to_string(i);
    }

private:
    void check_node(NodeId i) const {
        if (i < 0 || i >= num_nodes()) throw std::out_of_range("node index out of range");
    }

    std::vector<std::set<NodeId>> parents_;
};

/// Endpoint mark of a mixed-graph edge.
enum class Mark { Tail, Arrow, Circle };

inline const char* mark_name(Mark m) {
    switch (m) {
        case Mark::Tail: return "tail";
        case Mark::Arrow: return "arrow";
        default: return "circle";
    }
}

/// Graph with one edge per pair and a mark at each endpoint. Hosts MAGs,
/// PAGs and the mixed discovery output (directed + undirected edges).
class MixedGraph {
public:
    struct EdgeMarks {
        Mark at_a;
        Mark at_b;
    };

    MixedGraph() = default;
    explicit MixedGraph(int num_nodes) : num_nodes_(num_nodes) {}

    int num_nodes() const { return num_nodes_; }

    static std::pair<NodeId, NodeId> key(NodeId a, NodeId b) {
        return a < b ? std::make_pair(a, b) : std::make_pair(b, a);
    }

    /// Sets the edge a-b with `at_a` the mark at the a side.
    void set_edge(NodeId a, NodeId b, Mark at_a, Mark at_b) {
        check_pair(a, b);
        if (a < b)
            edges_[{a, b}] = {at_a, at_b};
        else
            edges_[{b, a}] = {at_b, at_a};
    }

    void add_directed(NodeId from, NodeId to) { set_edge(from, to, Mark::Tail, Mark::Arrow); }
    void add_undirected(NodeId a, NodeId b) { set_edge(a, b, Mark::Tail, Mark::Tail); }
    void add_bidirected(NodeId a, NodeId b) { set_edge(a, b, Mark::Arrow, Mark::Arrow); }

    void remove_edge(NodeId a, NodeId b) { edges_.erase(key(a, b)); }

    bool adjacent(NodeId a, NodeId b) const { return edges_.count(key(a, b)) > 0; }

    /// Mark at the `at` end of the edge a-b; throws if not adjacent.
    Mark mark_at(NodeId a, NodeId b, NodeId at) const {
        const EdgeMarks& em = edges_.at(key(a, b));
        return (at == key(a, b).first) ? em.at_a : em.at_b;
    }

    bool is_directed(NodeId from, NodeId to) const {
        if (!adjacent(from, to)) return false;
        return mark_at(from, to, from) == Mark::Tail && mark_at(from, to, to) == Mark::Arrow;
    }

    bool is_undirected(NodeId a, NodeId b) const {
        if (!adjacent(a, b)) return false;
        return mark_at(a, b, a) == Mark::Tail && mark_at(a, b, b) == Mark::Tail;
    }

    bool is_bidirected(NodeId a, NodeId b) const {
        if (!adjacent(a, b)) return false;
        return mark_at(a, b, a) == Mark::Arrow && mark_at(a, b, b) == Mark::Arrow;
    }

    const std::map<std::pair<NodeId, NodeId>, EdgeMarks>& edges() const { return edges_; }

    int num_edges() const { return static_cast<int>(edges_.size()); }

    std::set<NodeId> neighbors(NodeId i) const {
        std::set<NodeId> out;
        for (const auto& [k, em] : edges_) {
            if (k.first == i) out.insert(k.second);
            if (k.second == i) out.insert(k.first);
        }
        return out;
    }

    /// Direct-parent relation from the mark pattern tail->arrow.
    std::set<NodeId> mg_parents(NodeId i) const {
        std::set<NodeId> out;
        for (NodeId j : neighbors(i))
            if (is_directed(j, i)) out.insert(j);
        return out;
    }

    std::vector<std::string> node_names;

    std::string name_of(NodeId i) const {
        if (i < static_cast<int>(node_names.size()) && !node_names[i].empty())
            return node_names[i];
        return "X" + std::to_string(i);
    }

private:
    void check_pair(NodeId a, NodeId b) const {
        if (a == b) throw std::invalid_argument("self loop");
        if (a < 0 || b < 0 || a >= num_nodes_ || b >= num_nodes_)
            throw std::out_of_range("node index out of range");
    }

    int num_nodes_ = 0;
    std::map<std::pair<NodeId, NodeId>, EdgeMarks> edges_;
};

/// Split of a reference DAG's nodes into observed and latent parts.
struct LatentPartition {
    std::vector<NodeId> observed;  // ascending
    std::set<NodeId> latent;

    static LatentPartition from_latent(int num_nodes, const std::set<NodeId>& latent) {
        LatentPartition p;
        p.latent = latent;
        for (int i = 0; i < num_nodes; ++i)
            if (!latent.count(i)) p.observed.push_back(i);
        return p;
    }

    bool is_observed(NodeId i) const { return !latent.count(i); }

    /// Position of a global node id inside the observed ordering, -1 if latent.
    int observed_index(NodeId i) const {
        auto it = std::lower_bound(observed.begin(), observed.end(), i);
        if (it == observed.end() || *it != i) return -1;
        return static_cast<int>(it - observed.begin());
    }
};

inline std::vector<NodeId> topological_order(const Dag& g) {
    int n = g.num_nodes();
    std::vector<int> indeg(n, 0);
    for (int i = 0; i < n; ++i) indeg[i] = static_cast<int>(g.parents(i).size());
    std::vector<NodeId> stack, order;
    for (int i = n - 1; i >= 0; --i)
        if (indeg[i] == 0) stack.push_back(i);
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        order.push_back(v);
        for (NodeId c : g.children(v)) {
            if (--indeg[c] == 0) stack.push_back(c);
        }
    }
    if (static_cast<int>(order.size()) != n)
        throw CycleDetected("graph has a directed cycle");
    return order;
}

inline bool is_acyclic(const Dag& g) {
    try {
        topological_order(g);
        return true;
    } catch (const CycleDetected&) {
        return false;
    }
}

inline void ancestors_into(const Dag& g, NodeId i, std::set<NodeId>& out) {
    for (NodeId p : g.parents(i)) {
        if (out.insert(p).second) ancestors_into(g, p, out);
    }
}

/// Nodes with a directed path into i; i itself excluded.
inline std::set<NodeId> ancestors(const Dag& g, NodeId i) {
    if (i < 0 || i >= g.num_nodes()) throw std::out_of_range("node index out of range");
    std::set<NodeId> out;
    ancestors_into(g, i, out);
    return out;
}

inline std::set<NodeId> descendants(const Dag& g, NodeId i) {
    std::set<NodeId> out;
    std::vector<NodeId> stack{i};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId c : g.children(v))
            if (out.insert(c).second) stack.push_back(c);
    }
    return out;
}

/// Ancestors within a mixed graph, following tail->arrow edges only.
inline std::set<NodeId> mg_ancestors(const MixedGraph& mg, NodeId i) {
    std::set<NodeId> out;
    std::vector<NodeId> stack{i};
    while (!stack.empty()) {
        NodeId v = stack.back();
        stack.pop_back();
        for (NodeId u : mg.neighbors(v)) {
            if (mg.is_directed(u, v) && out.insert(u).second) stack.push_back(u);
        }
    }
    return out;
}

/// MAG structural invariants: only tail/arrow marks, no directed or
/// almost-directed cycles (maximality is checked separately in tests).
inline bool is_ancestral(const MixedGraph& mg) {
    for (const auto& [k, em] : mg.edges())
        if (em.at_a == Mark::Circle || em.at_b == Mark::Circle) return false;
    for (int i = 0; i < mg.num_nodes(); ++i) {
        std::set<NodeId> anc = mg_ancestors(mg, i);
        if (anc.count(i)) return false;  // directed cycle
        for (NodeId a : anc) {
            if (mg.adjacent(a, i) && mg.is_bidirected(a, i)) return false;  // almost directed
        }
    }
    return true;
}

}  // namespace adascore
