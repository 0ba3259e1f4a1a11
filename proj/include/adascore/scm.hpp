#pragma once

#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "adascore/dataset.hpp"
#include "adascore/graph.hpp"
#include "adascore/graph_io.hpp"
#include "adascore/rng.hpp"
#include "adascore/separation.hpp"

namespace adascore {

enum class MechanismKind { Linear, NonlinearMLP, NonAdditive };

inline const char* mechanism_name(MechanismKind m) {
    switch (m) {
        case MechanismKind::Linear: return "linear";
        case MechanismKind::NonlinearMLP: return "mlp";
        default: return "nonadditive";
    }
}

inline MechanismKind mechanism_from_string(const std::string& s) {
    if (s == "linear") return MechanismKind::Linear;
    if (s == "mlp") return MechanismKind::NonlinearMLP;
    if (s == "nonadditive") return MechanismKind::NonAdditive;
    throw ConfigError("unknown mechanism: " + s);
}

// One hidden layer, width 10, PReLU slope 0.25, batch-standardized hidden
// activations before the output layer. Weights and biases are standard
// Gaussian draws.
struct MlpParams {
    Matrix w1;  // inputs x 10
    Vector b1;  // 10
    Vector w2;  // 10
    double prelu_slope = 0.25;

    Vector forward(const Matrix& x) const {
        Matrix h = (x * w1).rowwise() + b1.transpose();
        h = h.unaryExpr([s = prelu_slope](double v) { return v > 0 ? v : s * v; });
        for (int c = 0; c < h.cols(); ++c) {
            double mean = h.col(c).mean();
            double sd = std::sqrt((h.col(c).array() - mean).square().mean());
            if (sd > 1e-12) h.col(c) = (h.col(c).array() - mean) / sd;
        }
        return h * w2;
    }
};

inline MlpParams draw_mlp(Rng& rng, int inputs, int hidden = 10) {
    MlpParams p;
    p.w1.resize(inputs, hidden);
    p.b1.resize(hidden);
    p.w2.resize(hidden);
    for (int i = 0; i < inputs; ++i)
        for (int k = 0; k < hidden; ++k) p.w1(i, k) = rng.normal();
    for (int k = 0; k < hidden; ++k) p.b1(k) = rng.normal();
    for (int k = 0; k < hidden; ++k) p.w2(k) = rng.normal();
    return p;
}

// Mechanisms are additive across parents for Linear and NonlinearMLP, so the
// model keeps its additive structure no matter which nodes get hidden later.
// NonAdditive feeds the noise into a joint network over (parents, noise).
struct NodeMechanism {
    std::vector<double> linear_coeffs;     // Linear: one per parent
    std::vector<MlpParams> parent_mlps;    // NonlinearMLP: one per parent
    MlpParams joint;                       // NonAdditive: parents + noise
};

struct ScmSpec {
    Dag graph;
    MechanismKind mechanism = MechanismKind::Linear;
    std::vector<NodeMechanism> mech;  // per node, parent order = ascending id
    double noise_low = -2.0;
    double noise_high = 2.0;
    uint64_t seed = 0;
};

/// Erdos-Renyi DAG: a random order over the nodes, then each pair in that
/// order gets a forward edge independently with probability edge_prob.
inline Dag gen_er_dag(int d, double edge_prob, uint64_t seed) {
    if (d < 1) throw ConfigError("need at least one node");
    if (edge_prob < 0.0 || edge_prob > 1.0) throw ConfigError("edge_prob outside [0,1]");
    Rng rng(derive_seed(seed, 0x6772617068ULL));
    std::vector<int> order(d);
    for (int i = 0; i < d; ++i) order[i] = i;
    rng.shuffle(order);
    Dag g(d);
    for (int a = 0; a < d; ++a)
        for (int b = a + 1; b < d; ++b)
            if (rng.next_double() < edge_prob) g.add_edge(order[a], order[b]);
    for (int i = 0; i < d; ++i) g.node_names.push_back("X" + std::to_string(i));
    return g;
}

inline ScmSpec make_scm_spec(const Dag& graph, MechanismKind mechanism, uint64_t seed,
                             double noise_low = -2.0, double noise_high = 2.0) {
    if (noise_low >= noise_high) throw ConfigError("noise_low must be below noise_high");
    ScmSpec spec;
    spec.graph = graph;
    spec.mechanism = mechanism;
    spec.seed = seed;
    spec.noise_low = noise_low;
    spec.noise_high = noise_high;
    spec.mech.resize(graph.num_nodes());
    for (int i = 0; i < graph.num_nodes(); ++i) {
        Rng rng(derive_seed(seed, 0x6d656368ULL + i));
        int np = static_cast<int>(graph.parents(i).size());
        NodeMechanism& m = spec.mech[i];
        switch (mechanism) {
            case MechanismKind::Linear:
                for (int p = 0; p < np; ++p) {
                    double mag = rng.uniform(0.5, 3.0);
                    m.linear_coeffs.push_back(rng.next_double() < 0.5 ? -mag : mag);
                }
                break;
            case MechanismKind::NonlinearMLP:
                for (int p = 0; p < np; ++p) m.parent_mlps.push_back(draw_mlp(rng, 1));
                break;
            case MechanismKind::NonAdditive:
                m.joint = draw_mlp(rng, np + 1);
                break;
        }
    }
    return spec;
}

/// Samples n rows of every node, in topological order. Noise is drawn per
/// node in index order so the draw does not depend on the graph traversal.
inline Dataset sample_scm(const ScmSpec& spec, int n) {
    if (n < 2) throw ConfigError("need n >= 2");
    int d = spec.graph.num_nodes();
    Matrix noise(n, d);
    for (int i = 0; i < d; ++i) {
        Rng rng(derive_seed(spec.seed, 0x6e6f697365ULL + i));
        for (int r = 0; r < n; ++r) noise(r, i) = rng.uniform(spec.noise_low, spec.noise_high);
    }
    Matrix values(n, d);
    for (NodeId i : topological_order(spec.graph)) {
        std::vector<NodeId> pa(spec.graph.parents(i).begin(), spec.graph.parents(i).end());
        Vector acc = noise.col(i);
        const NodeMechanism& m = spec.mech[i];
        switch (spec.mechanism) {
            case MechanismKind::Linear:
                for (size_t p = 0; p < pa.size(); ++p)
                    acc += m.linear_coeffs[p] * values.col(pa[p]);
                break;
            case MechanismKind::NonlinearMLP:
                for (size_t p = 0; p < pa.size(); ++p)
                    acc += m.parent_mlps[p].forward(values.col(pa[p]));
                break;
            case MechanismKind::NonAdditive:
                if (!pa.empty()) {
                    Matrix in(n, pa.size() + 1);
                    for (size_t p = 0; p < pa.size(); ++p) in.col(p) = values.col(pa[p]);
                    in.col(pa.size()) = noise.col(i);
                    acc = m.joint.forward(in);
                }
                break;
        }
        values.col(i) = acc;
    }
    Dataset data;
    data.values = values;
    for (int i = 0; i < d; ++i) data.column_names.push_back(spec.graph.name_of(i));
    return data;
}

/// A hidden node that reaches two distinct observed nodes through directed
/// paths whose interior is hidden.
inline bool has_latent_confounder(const Dag& g, const LatentPartition& part) {
    for (NodeId u : part.latent) {
        // observed frontier reachable through hidden-only interiors
        std::set<NodeId> frontier;
        std::set<NodeId> seen{u};
        std::vector<NodeId> stack{u};
        while (!stack.empty()) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId c : g.children(v)) {
                if (part.is_observed(c)) {
                    frontier.insert(c);
                } else if (seen.insert(c).second) {
                    stack.push_back(c);
                }
            }
        }
        if (frontier.size() >= 2) return true;
    }
    return false;
}

/// A hidden node on a directed path between two observed nodes, interior
/// hidden on both sides.
inline bool has_latent_mediator(const Dag& g, const LatentPartition& part) {
    for (NodeId u : part.latent) {
        bool up = false, down = false;
        {
            std::set<NodeId> seen{u};
            std::vector<NodeId> stack{u};
            while (!stack.empty() && !up) {
                NodeId v = stack.back();
                stack.pop_back();
                for (NodeId p : g.parents(v)) {
                    if (part.is_observed(p))
                        up = true;
                    else if (seen.insert(p).second)
                        stack.push_back(p);
                }
            }
        }
        if (!up) continue;
        std::set<NodeId> seen{u};
        std::vector<NodeId> stack{u};
        while (!stack.empty() && !down) {
            NodeId v = stack.back();
            stack.pop_back();
            for (NodeId c : g.children(v)) {
                if (part.is_observed(c))
                    down = true;
                else if (seen.insert(c).second)
                    stack.push_back(c);
            }
        }
        if (down) return true;
    }
    return false;
}

inline bool hiding_acceptable(const Dag& g, const LatentPartition& part, MechanismKind mech) {
    if (part.latent.empty()) return true;
    if (has_latent_confounder(g, part)) return true;
    if (mech != MechanismKind::Linear && has_latent_mediator(g, part)) return true;
    return false;
}

/// Infinite-data reference output: the marginal skeleton, with an edge
/// directed i->j exactly when the scores can identify it (direct parent for
/// nonlinear mechanisms, ancestor for linear ones, and the observed parents
/// of j d-separated from its latent parents). Everything else stays
/// undirected in the output class.
inline MixedGraph identifiable_target_graph(const Dag& g, const LatentPartition& part,
                                            MechanismKind mechanism) {
    MixedGraph mag = marginalize(g, part);
    int m = static_cast<int>(part.observed.size());
    MixedGraph out(m);
    out.node_names = mag.node_names;

    std::vector<char> unconfounded(m, 0);
    for (int b = 0; b < m; ++b) {
        NodeId gb = part.observed[b];
        std::set<NodeId> obs_parents, lat_parents;
        for (NodeId p : g.parents(gb))
            (part.is_observed(p) ? obs_parents : lat_parents).insert(p);
        unconfounded[b] = d_separated_sets(g, obs_parents, lat_parents, {}) ? 1 : 0;
    }

    for (const auto& [k, em] : mag.edges()) {
        int a = k.first, b = k.second;
        NodeId ga = part.observed[a], gb = part.observed[b];
        auto identifies = [&](NodeId cause, NodeId effect, int effect_local) {
            if (!unconfounded[effect_local]) return false;
            if (mechanism == MechanismKind::Linear)
                return ancestors(g, effect).count(cause) > 0;
            return g.has_edge(cause, effect);
        };
        if (identifies(ga, gb, b))
            out.add_directed(a, b);
        else if (identifies(gb, ga, a))
            out.add_directed(b, a);
        else
            out.add_undirected(a, b);
    }
    return out;
}

struct BenchmarkInstance {
    Dag full_dag;
    LatentPartition partition;
    Dataset data;       // observed columns only
    MixedGraph target;  // over observed nodes
};

/// Drops k columns, resampling the hidden set until it induces a latent
/// confounder (nonlinear runs also accept a latent mediator). Gives up after
/// max_attempts draws.
inline BenchmarkInstance hide_variables(const ScmSpec& spec, const Dataset& data, int k,
                                        uint64_t seed, int max_attempts = 10000) {
    int d = spec.graph.num_nodes();
    if (k < 0 || k >= d) throw ConfigError("k must be in [0, d)");
    Rng rng(derive_seed(seed, 0x68696465ULL));
    LatentPartition part;
    bool found = false;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<int> hidden = rng.sample_without_replacement(d, k);
        part = LatentPartition::from_latent(d, std::set<NodeId>(hidden.begin(), hidden.end()));
        if (hiding_acceptable(spec.graph, part, spec.mechanism)) {
            found = true;
            break;
        }
    }
    if (!found) throw NoValidHiding("no acceptable hidden set after max attempts");

    BenchmarkInstance inst;
    inst.full_dag = spec.graph;
    inst.partition = part;
    inst.data.values = data.columns(part.observed);
    for (NodeId i : part.observed) inst.data.column_names.push_back(data.column_names[i]);
    inst.data.standardized = data.standardized;
    inst.target = identifiable_target_graph(spec.graph, part, spec.mechanism);
    return inst;
}

/// Fresh ER graph with the requested size and density, random nodes hidden,
/// projected to its own identifiable target. The comparison baseline.
inline MixedGraph random_baseline(int d_total, double edge_prob, int part_size,
                                  MechanismKind mechanism, uint64_t seed) {
    if (part_size > d_total || part_size < 1) throw ConfigError("bad part_size");
    Dag g = gen_er_dag(d_total, edge_prob, derive_seed(seed, 0x62617365ULL));
    Rng rng(derive_seed(seed, 0x62617365ULL + 1));
    std::vector<int> hidden = rng.sample_without_replacement(d_total, d_total - part_size);
    LatentPartition part =
        LatentPartition::from_latent(d_total, std::set<NodeId>(hidden.begin(), hidden.end()));
    return identifiable_target_graph(g, part, mechanism);
}

// ---- bundle: data.csv + truth.json + meta.json in one directory ----

inline nlohmann::json partition_to_json(const LatentPartition& part) {
    return {{"observed", part.observed},
            {"latent", std::vector<NodeId>(part.latent.begin(), part.latent.end())}};
}

inline void write_bundle(const BenchmarkInstance& inst, const ScmSpec& spec, int samples,
                         int hidden, double edge_prob, uint64_t seed, const std::string& dir) {
    namespace fs = std::filesystem;
    fs::create_directories(dir);
    write_csv_file(inst.data, (fs::path(dir) / "data.csv").string());
    write_graph_json(inst.target, (fs::path(dir) / "truth.json").string());
    nlohmann::json meta{{"nodes", spec.graph.num_nodes()},
                        {"edge_prob", edge_prob},
                        {"mechanism", mechanism_name(spec.mechanism)},
                        {"samples", samples},
                        {"hidden", hidden},
                        {"seed", seed},
                        {"noise_low", spec.noise_low},
                        {"noise_high", spec.noise_high},
                        {"standardized", inst.data.standardized},
                        {"partition", partition_to_json(inst.partition)},
                        {"full_graph", graph_to_json(inst.full_dag)}};
    std::ofstream os(fs::path(dir) / "meta.json");
    os << meta.dump(2) << '\n';
}

}  // namespace adascore
