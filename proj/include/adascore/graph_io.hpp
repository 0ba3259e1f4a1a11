#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "adascore/graph.hpp"

namespace adascore {

// Text form, one edge per line: `a -> b`, `a <-> b`, `a -- b`, `a o-o b`,
// `a o-> b`, with node names when present.

inline std::string edge_token(Mark at_a, Mark at_b) {
    if (at_a == Mark::Tail && at_b == Mark::Arrow) return "->";
    if (at_a == Mark::Arrow && at_b == Mark::Arrow) return "<->";
    if (at_a == Mark::Tail && at_b == Mark::Tail) return "--";
    if (at_a == Mark::Circle && at_b == Mark::Circle) return "o-o";
    if (at_a == Mark::Circle && at_b == Mark::Arrow) return "o->";
    throw std::invalid_argument("no edge token for this mark pair");
}

inline std::string to_edge_list(const MixedGraph& g) {
    std::ostringstream os;
    for (const auto& [k, em] : g.edges()) {
        NodeId a = k.first, b = k.second;
        Mark at_a = em.at_a, at_b = em.at_b;
        // tokens exist only for the asymmetric pairs in one direction
        if ((at_a == Mark::Arrow && at_b == Mark::Tail) ||
            (at_a == Mark::Arrow && at_b == Mark::Circle)) {
            std::swap(a, b);
            std::swap(at_a, at_b);
        }
        os << g.name_of(a) << ' ' << edge_token(at_a, at_b) << ' ' << g.name_of(b) << '\n';
    }
    return os.str();
}

inline MixedGraph dag_to_mixed(const Dag& g) {
    MixedGraph mg(g.num_nodes());
    mg.node_names = g.node_names;
    if (mg.node_names.empty())
        for (int i = 0; i < g.num_nodes(); ++i) mg.node_names.push_back(g.name_of(i));
    for (int j = 0; j < g.num_nodes(); ++j)
        for (NodeId p : g.parents(j)) mg.add_directed(p, j);
    return mg;
}

inline Mark mark_from_string(const std::string& s) {
    if (s == "tail") return Mark::Tail;
    if (s == "arrow") return Mark::Arrow;
    if (s == "circle") return Mark::Circle;
    throw std::invalid_argument("unknown mark: " + s);
}

inline nlohmann::json graph_to_json(const MixedGraph& g) {
    nlohmann::json j;
    j["nodes"] = nlohmann::json::array();
    for (int i = 0; i < g.num_nodes(); ++i) j["nodes"].push_back(g.name_of(i));
    j["edges"] = nlohmann::json::array();
    for (const auto& [k, em] : g.edges()) {
        j["edges"].push_back({{"a", k.first},
                              {"b", k.second},
                              {"mark_a", mark_name(em.at_a)},
                              {"mark_b", mark_name(em.at_b)}});
    }
    return j;
}

inline nlohmann::json graph_to_json(const Dag& g) { return graph_to_json(dag_to_mixed(g)); }

inline MixedGraph graph_from_json(const nlohmann::json& j) {
    const auto& nodes = j.at("nodes");
    MixedGraph g(static_cast<int>(nodes.size()));
    for (const auto& n : nodes) g.node_names.push_back(n.get<std::string>());
    auto node_index = [&](const nlohmann::json& v) -> NodeId {
        if (v.is_number_integer()) return v.get<int>();
        std::string name = v.get<std::string>();
        for (int i = 0; i < g.num_nodes(); ++i)
            if (g.node_names[i] == name) return i;
        throw std::invalid_argument("unknown node name: " + name);
    };
    for (const auto& e : j.at("edges")) {
        g.set_edge(node_index(e.at("a")), node_index(e.at("b")),
                   mark_from_string(e.at("mark_a").get<std::string>()),
                   mark_from_string(e.at("mark_b").get<std::string>()));
    }
    return g;
}

inline MixedGraph read_graph_json(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open: " + path);
    nlohmann::json j;
    is >> j;
    return graph_from_json(j);
}

inline void write_graph_json(const MixedGraph& g, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    os << graph_to_json(g).dump(2) << '\n';
}

}  // namespace adascore
