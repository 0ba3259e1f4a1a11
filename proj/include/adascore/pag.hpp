#pragma once

#include <map>
#include <set>
#include <vector>

#include "adascore/graph.hpp"

namespace adascore {

using SepsetMap = std::map<std::pair<NodeId, NodeId>, std::set<NodeId>>;

namespace detail {

// Strengthen a mark; circles may become tails or arrows, anything else must
// already agree.
inline bool pag_set_mark(MixedGraph& g, NodeId a, NodeId b, NodeId at, Mark m) {
    Mark cur = g.mark_at(a, b, at);
    if (cur == m) return false;
    if (cur != Mark::Circle)
        throw InconsistentSepset("conflicting orientation at " + g.name_of(at) + " on edge " +
                                 g.name_of(a) + "-" + g.name_of(b));
    auto k = MixedGraph::key(a, b);
    Mark at_a = g.mark_at(a, b, k.first);
    Mark at_b = g.mark_at(a, b, k.second);
    if (at == k.first)
        at_a = m;
    else
        at_b = m;
    g.set_edge(k.first, k.second, at_a, at_b);
    return true;
}

inline bool has_arrow_at(const MixedGraph& g, NodeId a, NodeId b, NodeId at) {
    return g.adjacent(a, b) && g.mark_at(a, b, at) == Mark::Arrow;
}

// Discriminating path from some d to c for b: b is adjacent to c, d is not,
// and every vertex strictly between d and b is a collider on the path and a
// parent of c. Returns the origin d if one exists.
inline bool find_discriminating_origin(const MixedGraph& g, NodeId a, NodeId b, NodeId c,
                                       NodeId& d_out) {
    int n = g.num_nodes();
    // walk backwards from (a, b); interior nodes must be colliders and parents of c
    std::vector<char> used(n, 0);
    used[a] = used[b] = used[c] = 1;
    std::function<bool(NodeId, NodeId)> extend = [&](NodeId prev, NodeId cur) -> bool {
        // cur is an interior candidate already verified; look for the next hop
        for (NodeId nxt = 0; nxt < n; ++nxt) {
            if (used[nxt] || !g.adjacent(cur, nxt) || nxt == c) continue;
            // path so far: nxt - cur - prev ... b - c
            bool cur_collider = has_arrow_at(g, nxt, cur, cur) && has_arrow_at(g, prev, cur, cur);
            if (!cur_collider || !g.is_directed(cur, c)) continue;
            if (!g.adjacent(nxt, c)) {
                d_out = nxt;
                return true;  // nxt plays the role of d
            }
            // nxt adjacent to c: may extend further if it can serve as interior
            used[nxt] = 1;
            if (extend(cur, nxt)) return true;
            used[nxt] = 0;
        }
        return false;
    };
    // a itself must be a collider interior on the path and a parent of c;
    // its collider status depends on the next hop, handled inside extend.
    return extend(b, a);
}

}  // namespace detail

/// Collider orientation plus Zhang's rules R1-R4 applied to a fixpoint.
/// The input skeleton carries circles everywhere; marks are only ever
/// strengthened. Sepsets must cover the non-adjacent pairs that were
/// separated during skeleton discovery.
inline MixedGraph pag_orient(const MixedGraph& skeleton, const SepsetMap& sepsets) {
    MixedGraph g = skeleton;
    int n = g.num_nodes();

    auto sepset_of = [&](NodeId a, NodeId b) -> const std::set<NodeId>* {
        auto it = sepsets.find(MixedGraph::key(a, b));
        return it == sepsets.end() ? nullptr : &it->second;
    };

    // v-structures: a *-> k <-* b when k is outside sepset(a, b)
    for (NodeId k = 0; k < n; ++k) {
        for (NodeId a = 0; a < n; ++a) {
            if (a == k || !g.adjacent(a, k)) continue;
            for (NodeId b = a + 1; b < n; ++b) {
                if (b == k || !g.adjacent(b, k) || g.adjacent(a, b)) continue;
                const std::set<NodeId>* ss = sepset_of(a, b);
                if (ss && !ss->count(k)) {
                    detail::pag_set_mark(g, a, k, k, Mark::Arrow);
                    detail::pag_set_mark(g, b, k, k, Mark::Arrow);
                }
            }
        }
    }

    bool changed = true;
    while (changed) {
        changed = false;
        // R1: a *-> k o-* b, a and b non-adjacent  =>  k -> b
        for (NodeId k = 0; k < n; ++k)
            for (NodeId a = 0; a < n; ++a) {
                if (a == k || !detail::has_arrow_at(g, a, k, k)) continue;
                for (NodeId b = 0; b < n; ++b) {
                    if (b == k || b == a || !g.adjacent(k, b) || g.adjacent(a, b)) continue;
                    if (g.mark_at(k, b, k) != Mark::Circle) continue;
                    changed |= detail::pag_set_mark(g, k, b, k, Mark::Tail);
                    changed |= detail::pag_set_mark(g, k, b, b, Mark::Arrow);
                }
            }
        // R2: (a -> k *-> b) or (a *-> k -> b), and a *-o b  =>  a *-> b
        for (NodeId a = 0; a < n; ++a)
            for (NodeId b = 0; b < n; ++b) {
                if (a == b || !g.adjacent(a, b)) continue;
                if (g.mark_at(a, b, b) != Mark::Circle) continue;
                for (NodeId k = 0; k < n; ++k) {
                    if (k == a || k == b || !g.adjacent(a, k) || !g.adjacent(k, b)) continue;
                    bool first = g.is_directed(a, k) && detail::has_arrow_at(g, k, b, b);
                    bool second = detail::has_arrow_at(g, a, k, k) && g.is_directed(k, b);
                    if (first || second) {
                        changed |= detail::pag_set_mark(g, a, b, b, Mark::Arrow);
                        break;
                    }
                }
            }
        // R3: a *-> k <-* b, a *-o m o-* b, a and b non-adjacent, m *-o k  =>  m *-> k
        for (NodeId k = 0; k < n; ++k)
            for (NodeId m = 0; m < n; ++m) {
                if (m == k || !g.adjacent(m, k)) continue;
                if (g.mark_at(m, k, k) != Mark::Circle) continue;
                bool fired = false;
                for (NodeId a = 0; a < n && !fired; ++a) {
                    if (a == k || a == m || !detail::has_arrow_at(g, a, k, k)) continue;
                    if (!g.adjacent(a, m) || g.mark_at(a, m, m) != Mark::Circle) continue;
                    for (NodeId b = 0; b < n && !fired; ++b) {
                        if (b == k || b == m || b == a) continue;
                        if (!detail::has_arrow_at(g, b, k, k)) continue;
                        if (!g.adjacent(b, m) || g.mark_at(b, m, m) != Mark::Circle) continue;
                        if (g.adjacent(a, b)) continue;
                        changed |= detail::pag_set_mark(g, m, k, k, Mark::Arrow);
                        fired = true;
                    }
                }
            }
        // R4: discriminating path from d to c for b with b o-* c
        for (NodeId b = 0; b < n; ++b)
            for (NodeId c = 0; c < n; ++c) {
                if (b == c || !g.adjacent(b, c)) continue;
                if (g.mark_at(b, c, b) != Mark::Circle) continue;
                for (NodeId a = 0; a < n; ++a) {
                    if (a == b || a == c || !g.adjacent(a, b) || !g.adjacent(a, c)) continue;
                    // a must be a collider candidate next to b and a parent of c
                    if (!detail::has_arrow_at(g, a, b, b) || !g.is_directed(a, c)) continue;
                    NodeId d = -1;
                    if (!detail::find_discriminating_origin(g, a, b, c, d)) continue;
                    const std::set<NodeId>* ss = sepset_of(d, c);
                    if (ss && ss->count(b)) {
                        changed |= detail::pag_set_mark(g, b, c, b, Mark::Tail);
                        changed |= detail::pag_set_mark(g, b, c, c, Mark::Arrow);
                    } else if (ss) {
                        changed |= detail::pag_set_mark(g, a, b, a, Mark::Arrow);
                        changed |= detail::pag_set_mark(g, b, c, b, Mark::Arrow);
                        changed |= detail::pag_set_mark(g, b, c, c, Mark::Arrow);
                    }
                    if (g.mark_at(b, c, b) != Mark::Circle) break;
                }
            }
    }
    return g;
}

}  // namespace adascore
