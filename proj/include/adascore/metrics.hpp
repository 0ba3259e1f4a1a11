#pragma once

#include "adascore/graph.hpp"

namespace adascore {

/// Pairwise edge classification shared by SHD and the F1 variants. Any mark
/// pattern other than tail->arrow counts as the undirected class.
enum class EdgeClass { Absent, DirectedAB, DirectedBA, Undirected };

inline EdgeClass classify_pair(const MixedGraph& g, NodeId a, NodeId b) {
    if (!g.adjacent(a, b)) return EdgeClass::Absent;
    if (g.is_directed(a, b)) return EdgeClass::DirectedAB;
    if (g.is_directed(b, a)) return EdgeClass::DirectedBA;
    return EdgeClass::Undirected;
}

/// Count of pairwise class mismatches: missing, extra, reversed, and
/// directed-vs-undirected each cost one.
inline int shd(const MixedGraph& pred, const MixedGraph& truth) {
    if (pred.num_nodes() != truth.num_nodes())
        throw NodeCountMismatch("graphs have different node counts");
    int n = pred.num_nodes();
    int errors = 0;
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b)
            if (classify_pair(pred, a, b) != classify_pair(truth, a, b)) ++errors;
    return errors;
}

enum class F1Criterion { AnyEdge, DirectedEdge, UnidentifiableEdge };

/// F1 over the binary classification induced by the criterion. Both graphs
/// empty of positives scores 1, exactly one empty scores 0.
inline double f1_edges(const MixedGraph& pred, const MixedGraph& truth, F1Criterion criterion) {
    if (pred.num_nodes() != truth.num_nodes())
        throw NodeCountMismatch("graphs have different node counts");
    int n = pred.num_nodes();
    long tp = 0, fp = 0, fn = 0;
    auto tally = [&](bool in_pred, bool in_truth) {
        if (in_pred && in_truth)
            ++tp;
        else if (in_pred)
            ++fp;
        else if (in_truth)
            ++fn;
    };
    for (int a = 0; a < n; ++a) {
        for (int b = a + 1; b < n; ++b) {
            EdgeClass cp = classify_pair(pred, a, b);
            EdgeClass ct = classify_pair(truth, a, b);
            switch (criterion) {
                case F1Criterion::AnyEdge:
                    tally(cp != EdgeClass::Absent, ct != EdgeClass::Absent);
                    break;
                case F1Criterion::DirectedEdge:
                    tally(cp == EdgeClass::DirectedAB, ct == EdgeClass::DirectedAB);
                    tally(cp == EdgeClass::DirectedBA, ct == EdgeClass::DirectedBA);
                    break;
                case F1Criterion::UnidentifiableEdge:
                    tally(cp == EdgeClass::Undirected, ct == EdgeClass::Undirected);
                    break;
            }
        }
    }
    if (tp + fp == 0 && tp + fn == 0) return 1.0;
    if (tp + fp == 0 || tp + fn == 0) return 0.0;
    double precision = static_cast<double>(tp) / (tp + fp);
    double recall = static_cast<double>(tp) / (tp + fn);
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

}  // namespace adascore
