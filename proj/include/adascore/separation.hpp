#pragma once

#include <array>
#include <functional>
#include <set>
#include <vector>

#include "adascore/graph.hpp"

namespace adascore {

/// d-separation of i and j given z, by reachability over (node, direction)
/// states. Linear in the graph size per query.
inline bool d_separated(const Dag& g, NodeId i, NodeId j, const std::set<NodeId>& z) {
    if (i == j) throw std::invalid_argument("i == j");
    if (z.count(i) || z.count(j))
        throw InvalidConditioningSet("conditioning set contains an endpoint");

    int n = g.num_nodes();
    // z together with its ancestors: the set whose members open colliders
    std::vector<char> anc_z(n, 0);
    {
        std::vector<NodeId> stack(z.begin(), z.end());
        for (NodeId v : z) anc_z[v] = 1;
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId p : g.parents(v))
                if (!anc_z[p]) {
                    anc_z[p] = 1;
                    stack.push_back(p);
                }
        }
    }

    // direction 0: arrived from a child (moving up), 1: arrived from a parent
    std::vector<std::array<char, 2>> seen(n, {0, 0});
    std::vector<std::pair<NodeId, int>> stack;
    auto push = [&](NodeId v, int dir) {
        if (!seen[v][dir]) {
            seen[v][dir] = 1;
            stack.emplace_back(v, dir);
        }
    };
    push(i, 0);
    while (!stack.empty()) {
        auto [v, dir] = stack.back();
        stack.pop_back();
        if (v == j) return false;
        bool in_z = z.count(v) > 0;
        if (dir == 0) {  // trail moving up through v
            if (!in_z) {
                for (NodeId p : g.parents(v)) push(p, 0);
                for (NodeId c : g.children(v)) push(c, 1);
            }
        } else {  // arrived at v from a parent
            if (!in_z)
                for (NodeId c : g.children(v)) push(c, 1);
            if (anc_z[v])
                for (NodeId p : g.parents(v)) push(p, 0);
        }
    }
    return true;
}

/// Convenience overload for set-vs-set separation with an empty or shared
/// conditioning set.
inline bool d_separated_sets(const Dag& g, const std::set<NodeId>& a, const std::set<NodeId>& b,
                             const std::set<NodeId>& z) {
    for (NodeId x : a)
        for (NodeId y : b) {
            if (x == y) return false;
            if (!d_separated(g, x, y, z)) return false;
        }
    return true;
}

/// m-separation on a maximal ancestral graph. A collider on a path passes
/// only when it is in z or an ancestor of a node in z; a non-collider blocks
/// when it is in z.
inline bool m_separated(const MixedGraph& mg, NodeId i, NodeId j, const std::set<NodeId>& z) {
    if (i == j) throw std::invalid_argument("i == j");
    if (z.count(i) || z.count(j))
        throw InvalidConditioningSet("conditioning set contains an endpoint");
    if (!is_ancestral(mg)) throw NotAncestralGraph("graph is not ancestral");

    int n = mg.num_nodes();
    std::vector<char> anc_z(n, 0);
    for (NodeId v : z) {
        anc_z[v] = 1;
        for (NodeId a : mg_ancestors(mg, v)) anc_z[a] = 1;
    }

    // state: (node, mark of the edge at this node when we arrived)
    // mark index 0 = Tail, 1 = Arrow
    std::vector<std::array<char, 2>> seen(n, {0, 0});
    std::vector<std::pair<NodeId, int>> stack;
    auto arrive = [&](NodeId v, Mark at_v) {
        int idx = at_v == Mark::Arrow ? 1 : 0;
        if (!seen[v][idx]) {
            seen[v][idx] = 1;
            stack.emplace_back(v, idx);
        }
    };
    for (NodeId w : mg.neighbors(i)) arrive(w, mg.mark_at(i, w, w));
    while (!stack.empty()) {
        auto [v, in_arrow] = stack.back();
        stack.pop_back();
        if (v == j) return false;
        for (NodeId w : mg.neighbors(v)) {
            Mark at_v = mg.mark_at(v, w, v);
            bool collider = (in_arrow == 1) && (at_v == Mark::Arrow);
            bool open = collider ? (anc_z[v] != 0) : (z.count(v) == 0);
            if (open) arrive(w, mg.mark_at(v, w, w));
        }
    }
    return true;
}

/// Inducing path between observed i and j relative to `latent`: every
/// non-endpoint outside `latent` is a collider and an ancestor of an
/// endpoint, and every collider (latent ones included) is an ancestor of an
/// endpoint. DFS over simple paths.
inline bool inducing_path_exists(const Dag& g, NodeId i, NodeId j,
                                 const std::set<NodeId>& latent) {
    if (i == j) throw std::invalid_argument("i == j");
    int n = g.num_nodes();
    std::set<NodeId> anc_end = ancestors(g, i);
    {
        std::set<NodeId> aj = ancestors(g, j);
        anc_end.insert(aj.begin(), aj.end());
    }
    anc_end.insert(i);
    anc_end.insert(j);

    std::vector<char> on_path(n, 0);
    on_path[i] = 1;

    // prev: the node before `cur` on the path
    std::function<bool(NodeId, NodeId)> dfs = [&](NodeId prev, NodeId cur) -> bool {
        for (int next = 0; next < n; ++next) {
            if (on_path[next] || !g.adjacent(cur, next)) continue;
            // `cur` becomes a non-endpoint once we extend past it
            bool collider = g.has_edge(prev, cur) && g.has_edge(next, cur);
            bool cur_latent = latent.count(cur) > 0;
            if (!cur_latent && !collider) continue;
            if (collider && !anc_end.count(cur)) continue;
            if (next == j) return true;
            on_path[next] = 1;
            if (dfs(cur, next)) return true;
            on_path[next] = 0;
        }
        return false;
    };

    for (int first = 0; first < n; ++first) {
        if (!g.adjacent(i, first)) continue;
        if (first == j) return true;  // single edge
        on_path[first] = 1;
        if (dfs(i, first)) return true;
        on_path[first] = 0;
    }
    return false;
}

/// Latent projection of a DAG: observed nodes, edges where an inducing path
/// relative to the latents exists, tails on ancestors. Output indices follow
/// part.observed order.
inline MixedGraph marginalize(const Dag& g, const LatentPartition& part) {
    int m = static_cast<int>(part.observed.size());
    MixedGraph mg(m);
    for (NodeId gi : part.observed) mg.node_names.push_back(g.name_of(gi));
    std::vector<std::set<NodeId>> anc(m);
    for (int a = 0; a < m; ++a) anc[a] = ancestors(g, part.observed[a]);
    for (int a = 0; a < m; ++a) {
        for (int b = a + 1; b < m; ++b) {
            NodeId ga = part.observed[a], gb = part.observed[b];
            if (!inducing_path_exists(g, ga, gb, part.latent)) continue;
            bool a_anc_b = anc[b].count(ga) > 0;
            bool b_anc_a = anc[a].count(gb) > 0;
            if (a_anc_b)
                mg.add_directed(a, b);
            else if (b_anc_a)
                mg.add_directed(b, a);
            else
                mg.add_bidirected(a, b);
        }
    }
    return mg;
}

}  // namespace adascore
