#pragma once

#include <atomic>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "adascore/cam.hpp"
#include "adascore/dataset.hpp"
#include "adascore/graph.hpp"
#include "adascore/krr.hpp"
#include "adascore/pag.hpp"
#include "adascore/parallel.hpp"
#include "adascore/separation.hpp"
#include "adascore/stats.hpp"
#include "adascore/stein.hpp"

namespace adascore {

enum class DiscoveryMode { Dag, Mixed, Pag };

inline const char* mode_name(DiscoveryMode m) {
    switch (m) {
        case DiscoveryMode::Dag: return "dag";
        case DiscoveryMode::Mixed: return "mixed";
        default: return "pag";
    }
}

inline DiscoveryMode mode_from_string(const std::string& s) {
    if (s == "dag") return DiscoveryMode::Dag;
    if (s == "mixed") return DiscoveryMode::Mixed;
    if (s == "pag") return DiscoveryMode::Pag;
    throw ConfigError("unknown mode: " + s);
}

struct DiscoveryConfig {
    DiscoveryMode mode = DiscoveryMode::Mixed;
    double alpha = 0.05;
    double prune_alpha = 0.001;
    SteinConfig stein;
    KrrConfig krr;
    int max_subset_size = -1;  // unlimited
    int test_batches = 10;     // blocks behind the cross-partial t-test
    uint64_t seed = 0;

    void validate() const {
        if (alpha <= 0.0 || alpha >= 1.0) throw ConfigError("alpha outside (0,1)");
        if (prune_alpha <= 0.0 || prune_alpha >= 1.0) throw ConfigError("prune_alpha outside (0,1)");
        stein.validate();
        krr.validate();
        if (test_batches < 2) throw ConfigError("need at least two test batches");
    }
};

// ---- trace ----

struct TraceEvent {
    enum class Kind { SinkFound, NeighborhoodPruned, EdgeOriented, EdgeUndirected, FinalPruned, MarkSet };
    Kind kind;
    int a = -1, b = -1;
    std::vector<int> subset;
    double value = 0.0;  // delta mean / p-value, depending on kind
    double p_a = 0.0, p_b = 0.0;
    Mark mark_a = Mark::Circle, mark_b = Mark::Circle;
};

struct DiscoveryTrace {
    std::vector<TraceEvent> events;

    /// Rebuilds the output graph from the event log alone.
    MixedGraph replay(int num_nodes) const {
        MixedGraph g(num_nodes);
        for (const TraceEvent& e : events) {
            switch (e.kind) {
                case TraceEvent::Kind::EdgeOriented: g.add_directed(e.a, e.b); break;
                case TraceEvent::Kind::EdgeUndirected: g.add_undirected(e.a, e.b); break;
                case TraceEvent::Kind::FinalPruned: g.remove_edge(e.a, e.b); break;
                case TraceEvent::Kind::MarkSet: g.set_edge(e.a, e.b, e.mark_a, e.mark_b); break;
                default: break;
            }
        }
        return g;
    }

};

inline nlohmann::json trace_event_json(const TraceEvent& e) {
    using K = TraceEvent::Kind;
    nlohmann::json j;
    switch (e.kind) {
        case K::SinkFound: j["type"] = "sink_found"; j["node"] = e.a; j["delta_mean"] = e.value; break;
        case K::NeighborhoodPruned:
            j["type"] = "neighborhood_pruned"; j["a"] = e.a; j["b"] = e.b; j["subset"] = e.subset;
            j["p"] = e.value;
            break;
        case K::EdgeOriented:
            j["type"] = "edge_oriented"; j["from"] = e.a; j["to"] = e.b; j["p_from"] = e.p_a;
            j["p_to"] = e.p_b;
            break;
        case K::EdgeUndirected: j["type"] = "edge_undirected"; j["a"] = e.a; j["b"] = e.b; break;
        case K::FinalPruned: j["type"] = "final_pruned"; j["a"] = e.a; j["b"] = e.b; break;
        case K::MarkSet:
            j["type"] = "mark_set"; j["a"] = e.a; j["b"] = e.b; j["mark_a"] = mark_name(e.mark_a);
            j["mark_b"] = mark_name(e.mark_b);
            break;
    }
    return j;
}

// ---- criterion provider ----

/// The two statistical primitives the search consumes, behind one interface
/// so exact graphical oracles can stand in for the finite-sample tests.
class CriterionProvider {
public:
    virtual ~CriterionProvider() = default;

    /// mean delta_j(V_Z); Z contains j
    virtual double delta_mean(int j, const std::vector<int>& z) = 0;

    /// (zero-plausible, p-value) of delta_j(V_Z) = 0
    virtual std::pair<bool, double> delta_zero(int j, const std::vector<int>& z) = 0;

    /// mean |cross-partial| of (i, j) given conditioning support `cond`
    virtual double cross_abs_mean(int i, int j, const std::vector<int>& cond) = 0;

    /// (nonzero-rejected-null, p-value): true means dependence, keep the edge
    virtual std::pair<bool, double> cross_nonzero(int i, int j, const std::vector<int>& cond) = 0;

    /// precompute shared state for a subset (used before parallel sections)
    virtual void warm_subset(const std::vector<int>& z) {}

    long regression_fits() const { return regression_fits_.load(); }

protected:
    std::atomic<long> regression_fits_{0};
};

namespace detail {

inline uint64_t subset_mask(const std::vector<int>& z) {
    uint64_t m = 0;
    for (int v : z) m |= (uint64_t{1} << v);
    return m;
}

inline std::vector<int> sorted_union(const std::vector<int>& a, std::initializer_list<int> extra) {
    std::vector<int> out = a;
    for (int v : extra) out.push_back(v);
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// All subsets of `pool`, smallest first, lexicographic within a size,
/// capped at max_size (< 0 means no cap).
inline std::vector<std::vector<int>> enumerate_subsets(const std::vector<int>& pool,
                                                       int max_size) {
    int n = static_cast<int>(pool.size());
    int cap = max_size < 0 ? n : std::min(max_size, n);
    std::vector<std::vector<int>> out;
    std::vector<int> pick;
    std::function<void(int, int)> rec = [&](int start, int remaining) {
        if (remaining == 0) {
            out.push_back(pick);
            return;
        }
        for (int i = start; i <= n - remaining; ++i) {
            pick.push_back(pool[i]);
            rec(i + 1, remaining - 1);
            pick.pop_back();
        }
    };
    for (int size = 0; size <= cap; ++size) rec(0, size);
    return out;
}

}  // namespace detail

// ---- finite-sample provider ----

class FiniteSampleProvider : public CriterionProvider {
public:
    FiniteSampleProvider(const Dataset& data, const DiscoveryConfig& cfg)
        : data_(data), cfg_(cfg), plan_(data.n(), cfg.krr.folds, cfg.seed) {
        if (data.n() < 2 * cfg.krr.folds)
            throw ConfigError("too few samples for the fold count");
    }

    const FoldPlan& fold_plan() const { return plan_; }
    const Dataset& data() const { return data_; }

    void warm_subset(const std::vector<int>& z) override { score_table(z); }

    double delta_mean(int j, const std::vector<int>& z) override {
        return delta_estimate(j, z).mean;
    }

    std::pair<bool, double> delta_zero(int j, const std::vector<int>& z) override {
        auto key = std::make_pair(j, detail::subset_mask(z));
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = delta_tests_.find(key);
            if (it != delta_tests_.end()) return {!it->second.rejected, it->second.p_value};
        }
        const DeltaEstimate& est = delta_estimate(j, z);
        std::vector<int> others;
        for (int c : z)
            if (c != j) others.push_back(c);
        TestResult res =
            kernel_independence_test(est.residual.values, data_.columns(others), cfg_.alpha);
        std::lock_guard<std::mutex> lock(mu_);
        delta_tests_.emplace(key, res);
        return {!res.rejected, res.p_value};
    }

    double cross_abs_mean(int i, int j, const std::vector<int>& cond) override {
        std::vector<int> z = detail::sorted_union(cond, {i, j});
        const std::vector<Matrix>& means = batched(z);
        auto [pi, pj] = positions(z, i, j);
        double acc = 0.0;
        for (const Matrix& m : means) acc += std::abs(m(pi, pj));
        return acc / means.size();
    }

    std::pair<bool, double> cross_nonzero(int i, int j, const std::vector<int>& cond) override {
        std::vector<int> z = detail::sorted_union(cond, {i, j});
        auto key = std::make_tuple(std::min(i, j), std::max(i, j), detail::subset_mask(z));
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = cross_tests_.find(key);
            if (it != cross_tests_.end()) return {it->second.rejected, it->second.p_value};
        }
        const std::vector<Matrix>& means = batched(z);
        auto [pi, pj] = positions(z, i, j);
        Vector v(means.size());
        for (size_t b = 0; b < means.size(); ++b) v(b) = means[b](pi, pj);
        TestResult res = t_test_zero_mean(v, cfg_.alpha);
        std::lock_guard<std::mutex> lock(mu_);
        cross_tests_.emplace(key, res);
        return {res.rejected, res.p_value};
    }

    const DeltaEstimate& delta_estimate(int j, const std::vector<int>& z) {
        auto key = std::make_pair(j, detail::subset_mask(z));
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = deltas_.find(key);
            if (it != deltas_.end()) return it->second;
        }
        const ScoreTable& table = score_table(z);
        DeltaEstimate est = delta(data_, table, j, z, cfg_.krr, plan_);
        regression_fits_ += 2;  // residual fit + score-on-residual fit
        std::lock_guard<std::mutex> lock(mu_);
        return deltas_.emplace(key, std::move(est)).first->second;
    }

private:
    const ScoreTable& score_table(const std::vector<int>& z) {
        uint64_t mask = detail::subset_mask(z);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = tables_.find(mask);
            if (it != tables_.end()) return it->second;
        }
        ScoreTable t = stein_score_table(data_.values, z, cfg_.stein);
        std::lock_guard<std::mutex> lock(mu_);
        return tables_.emplace(mask, std::move(t)).first->second;
    }

    const std::vector<Matrix>& batched(const std::vector<int>& z) {
        uint64_t mask = detail::subset_mask(z);
        {
            std::lock_guard<std::mutex> lock(mu_);
            auto it = batched_.find(mask);
            if (it != batched_.end()) return it->second;
        }
        std::vector<Matrix> means =
            batched_cross_means(data_.values, z, cfg_.stein, plan_.order, cfg_.test_batches);
        std::lock_guard<std::mutex> lock(mu_);
        return batched_.emplace(mask, std::move(means)).first->second;
    }

    std::pair<int, int> positions(const std::vector<int>& z, int i, int j) const {
        int pi = -1, pj = -1;
        for (size_t k = 0; k < z.size(); ++k) {
            if (z[k] == i) pi = static_cast<int>(k);
            if (z[k] == j) pj = static_cast<int>(k);
        }
        return {pi, pj};
    }

    const Dataset& data_;
    DiscoveryConfig cfg_;
    FoldPlan plan_;
    std::mutex mu_;
    std::map<uint64_t, ScoreTable> tables_;
    std::map<uint64_t, std::vector<Matrix>> batched_;
    std::map<std::pair<int, uint64_t>, DeltaEstimate> deltas_;
    std::map<std::pair<int, uint64_t>, TestResult> delta_tests_;
    std::map<std::tuple<int, int, uint64_t>, TestResult> cross_tests_;
};

// ---- exact graphical oracle (population-level tests) ----

/// Replaces the statistical tests by graph queries against the generating
/// DAG: d-separation for the cross-partials and the score-identifiability
/// criterion for delta. Indices are positions in part.observed.
class GraphicalOracleProvider : public CriterionProvider {
public:
    GraphicalOracleProvider(const Dag& g, const LatentPartition& part) : g_(g), part_(part) {
        int n = g.num_nodes();
        unconditionally_connected_.assign(n, std::vector<char>(n, 0));
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b) {
                bool conn = !d_separated(g_, a, b, {});
                unconditionally_connected_[a][b] = conn;
                unconditionally_connected_[b][a] = conn;
            }
    }

    double delta_mean(int j, const std::vector<int>& z) override {
        return delta_zero(j, z).first ? 0.0 : 1.0;
    }

    std::pair<bool, double> delta_zero(int j, const std::vector<int>& z) override {
        auto key = std::make_pair(j, detail::subset_mask(z));
        auto it = delta_memo_.find(key);
        if (it == delta_memo_.end()) {
            regression_fits_ += 2;  // what the finite-sample version would fit
            it = delta_memo_.emplace(key, delta_zero_graphical(j, z)).first;
        }
        return {it->second, it->second ? 1.0 : 0.0};
    }

    double cross_abs_mean(int i, int j, const std::vector<int>& cond) override {
        return cross_nonzero(i, j, cond).first ? 1.0 : 0.0;
    }

    std::pair<bool, double> cross_nonzero(int i, int j, const std::vector<int>& cond) override {
        std::set<NodeId> z;
        for (int c : cond) z.insert(part_.observed[c]);
        bool dep = !d_separated(g_, part_.observed[i], part_.observed[j], z);
        return {dep, dep ? 0.0 : 1.0};
    }

private:
    // delta_j(V_Z) vanishes exactly when the observed parents of j are all
    // in Z, no descendant of j is in Z, and the latent parents of j are
    // jointly independent of Z \ {j}.
    bool delta_zero_graphical(int j, const std::vector<int>& z_local) {
        NodeId gj = part_.observed[j];
        std::set<NodeId> gz;
        for (int c : z_local) gz.insert(part_.observed[c]);

        std::set<NodeId> desc = descendants(g_, gj);
        for (NodeId w : gz)
            if (w != gj && desc.count(w)) return false;

        for (NodeId p : g_.parents(gj)) {
            if (part_.is_observed(p)) {
                if (!gz.count(p)) return false;  // missing observed parent
            } else {
                for (NodeId w : gz)
                    if (w != gj && unconditionally_connected_[p][w]) return false;
            }
        }
        return true;
    }

    Dag g_;
    LatentPartition part_;
    std::vector<std::vector<char>> unconditionally_connected_;
    std::map<std::pair<int, uint64_t>, bool> delta_memo_;
};

// ---- the search itself ----

struct DiscoveryResult {
    MixedGraph graph;
    DiscoveryTrace trace;
    long regression_fits = 0;

    Dag as_dag() const {
        Dag g(graph.num_nodes());
        g.node_names = graph.node_names;
        for (const auto& [k, em] : graph.edges()) {
            if (em.at_a == Mark::Tail && em.at_b == Mark::Arrow)
                g.add_edge(k.first, k.second);
            else if (em.at_a == Mark::Arrow && em.at_b == Mark::Tail)
                g.add_edge(k.second, k.first);
            else
                throw std::logic_error("non-directed edge in dag-mode output");
        }
        return g;
    }
};

namespace detail {

class Engine {
public:
    Engine(CriterionProvider& prov, int d, const DiscoveryConfig& cfg, const Dataset* cam_data)
        : prov_(prov), d_(d), cfg_(cfg), cam_data_(cam_data) {
        if (d > 62) throw ConfigError("at most 62 variables are supported");
    }

    DiscoveryResult run() {
        if (cfg_.mode == DiscoveryMode::Pag) return run_pag();
        return run_mixed_or_dag();
    }

private:
    using Subset = std::vector<int>;

    CriterionProvider& prov_;
    int d_;
    DiscoveryConfig cfg_;
    const Dataset* cam_data_;

    std::set<int> remaining_;
    std::vector<std::set<int>> nbhd_;  // B_i
    MixedGraph edges_{0};
    DiscoveryTrace trace_;
    SepsetMap sepsets_;

    Subset remaining_vec() const { return Subset(remaining_.begin(), remaining_.end()); }

    Subset pool_without(const std::set<int>& base, std::initializer_list<int> excl) const {
        Subset out;
        for (int v : base) {
            bool skip = false;
            for (int e : excl) skip |= (v == e);
            if (!skip) out.push_back(v);
        }
        return out;
    }

    void init() {
        remaining_.clear();
        nbhd_.assign(d_, {});
        for (int i = 0; i < d_; ++i) {
            remaining_.insert(i);
            for (int j = 0; j < d_; ++j)
                if (j != i) nbhd_[i].insert(j);
        }
        edges_ = MixedGraph(d_);
        trace_.events.clear();
        sepsets_.clear();
    }

    void record(TraceEvent e) { trace_.events.push_back(std::move(e)); }

    void drop_neighbor(int a, int b, const Subset& cond, double p) {
        nbhd_[a].erase(b);
        nbhd_[b].erase(a);
        TraceEvent e{TraceEvent::Kind::NeighborhoodPruned, a, b, cond, p};
        record(e);
    }

    // argmin mean delta over candidate subsets; enumeration order breaks ties
    Subset argmin_delta_subset(int target, int partner, const std::set<int>& pool_base) {
        Subset pool = pool_without(pool_base, {target, partner});
        std::vector<Subset> cands = enumerate_subsets(pool, cfg_.max_subset_size);
        std::vector<Subset> zs(cands.size());
        for (size_t c = 0; c < cands.size(); ++c)
            zs[c] = sorted_union(cands[c], {target, partner});
        std::vector<double> vals(cands.size());
        for (size_t c = 0; c < cands.size(); ++c) prov_.warm_subset(zs[c]);
        parallel_for(static_cast<int>(cands.size()),
                     [&](int c) { vals[c] = prov_.delta_mean(target, zs[c]); });
        size_t best = 0;
        for (size_t c = 1; c < cands.size(); ++c)
            if (vals[c] < vals[best]) best = c;
        return zs[best];
    }

    // argmin mean |cross| over conditioning subsets drawn from `pool_base`
    Subset argmin_cross_subset(int i, int j, const std::set<int>& pool_base) {
        Subset pool = pool_without(pool_base, {i, j});
        std::vector<Subset> cands = enumerate_subsets(pool, cfg_.max_subset_size);
        std::vector<double> vals(cands.size());
        for (size_t c = 0; c < cands.size(); ++c)
            prov_.warm_subset(sorted_union(cands[c], {i, j}));
        parallel_for(static_cast<int>(cands.size()),
                     [&](int c) { vals[c] = prov_.cross_abs_mean(i, j, cands[c]); });
        size_t best = 0;
        for (size_t c = 1; c < cands.size(); ++c)
            if (vals[c] < vals[best]) best = c;
        return cands[best];
    }

    DiscoveryResult run_mixed_or_dag() {
        init();
        while (!remaining_.empty()) {
            Subset s = remaining_vec();
            prov_.warm_subset(s);
            std::vector<double> dm(s.size());
            parallel_for(static_cast<int>(s.size()),
                         [&](int k) { dm[k] = prov_.delta_mean(s[k], s); });
            size_t best = 0;
            for (size_t k = 1; k < s.size(); ++k)
                if (dm[k] < dm[best]) best = k;
            int cand = s[best];

            bool accepted;
            double cand_p = 1.0;
            if (cfg_.mode == DiscoveryMode::Dag || s.size() == 1) {
                accepted = true;
            } else {
                auto [zero, p] = prov_.delta_zero(cand, s);
                accepted = zero;
                cand_p = p;
            }

            if (accepted) {
                record({TraceEvent::Kind::SinkFound, cand, -1, {}, dm[best]});
                accept_sink(cand, s);
                remaining_.erase(cand);
                continue;
            }
            explore_chain(cand, cand_p);
        }
        finalize_mixed();
        DiscoveryResult res{edges_, trace_, prov_.regression_fits()};
        return res;
    }

    void accept_sink(int cand, const Subset& s) {
        Subset cond_all;
        for (int v : s)
            if (v != cand) cond_all.push_back(v);
        for (int j : cond_all) {
            Subset cond;
            for (int v : cond_all)
                if (v != j) cond.push_back(v);
            auto [dep, p] = prov_.cross_nonzero(cand, j, cond);
            if (dep) {
                if (!edges_.adjacent(cand, j)) {
                    edges_.add_directed(j, cand);
                    record({TraceEvent::Kind::EdgeOriented, j, cand, {}, 0.0, p, p});
                }
            } else {
                drop_neighbor(cand, j, cond, p);
            }
        }
    }

    void explore_chain(int start, double start_p) {
        int i = start;
        std::set<int> visited;
        while (true) {
            visited.insert(i);
            prune_neighborhood(i);
            orient_neighborhood(i);
            int next = -1;
            for (int j : nbhd_[i]) {
                if (remaining_.count(j) && !visited.count(j) && edges_.is_directed(i, j)) {
                    next = j;
                    break;
                }
            }
            if (next < 0) {
                remaining_.erase(i);
                return;
            }
            i = next;
        }
    }

    void prune_neighborhood(int i) {
        std::vector<int> candidates(nbhd_[i].begin(), nbhd_[i].end());
        for (int k : candidates) {
            if (!nbhd_[i].count(k)) continue;
            Subset cond = argmin_cross_subset(i, k, nbhd_[i]);
            auto [dep, p] = prov_.cross_nonzero(i, k, cond);
            if (!dep) drop_neighbor(i, k, cond, p);
        }
    }

    void orient_neighborhood(int i) {
        std::vector<int> partners(nbhd_[i].begin(), nbhd_[i].end());
        for (int j : partners) {
            if (edges_.adjacent(i, j)) continue;
            Subset zi = argmin_delta_subset(i, j, nbhd_[i]);
            Subset zj = argmin_delta_subset(j, i, nbhd_[j]);
            auto [zero_i, pi] = prov_.delta_zero(i, zi);
            auto [zero_j, pj] = prov_.delta_zero(j, zj);
            if (zero_i && !zero_j) {
                edges_.add_directed(j, i);
                record({TraceEvent::Kind::EdgeOriented, j, i, {}, 0.0, pj, pi});
            } else if (!zero_i && zero_j) {
                edges_.add_directed(i, j);
                record({TraceEvent::Kind::EdgeOriented, i, j, {}, 0.0, pi, pj});
            } else {
                edges_.add_undirected(i, j);
                record({TraceEvent::Kind::EdgeUndirected, i, j, {}});
            }
        }
    }

    void finalize_mixed() {
        // undirected edges: drop when some subset of the two neighborhoods
        // removes the cross-partial signal
        std::vector<std::pair<int, int>> undirected;
        for (const auto& [k, em] : edges_.edges())
            if (em.at_a == Mark::Tail && em.at_b == Mark::Tail) undirected.push_back(k);
        for (auto [a, b] : undirected) {
            std::set<int> pool;
            pool.insert(nbhd_[a].begin(), nbhd_[a].end());
            pool.insert(nbhd_[b].begin(), nbhd_[b].end());
            Subset cond = argmin_cross_subset(a, b, pool);
            auto [dep, p] = prov_.cross_nonzero(a, b, cond);
            if (!dep) {
                edges_.remove_edge(a, b);
                record({TraceEvent::Kind::FinalPruned, a, b, cond, p});
            }
        }
        // significance pruning of directed parents on the data (skipped in
        // oracle mode, where no sample exists)
        if (cam_data_) {
            std::map<int, std::set<int>> parent_sets;
            for (const auto& [k, em] : edges_.edges()) {
                if (em.at_a == Mark::Tail && em.at_b == Mark::Arrow)
                    parent_sets[k.second].insert(k.first);
                else if (em.at_a == Mark::Arrow && em.at_b == Mark::Tail)
                    parent_sets[k.first].insert(k.second);
            }
            std::map<int, std::set<int>> kept = cam_prune(*cam_data_, parent_sets, cfg_.prune_alpha);
            for (const auto& [child, parents] : parent_sets) {
                for (int p : parents) {
                    if (!kept.at(child).count(p)) {
                        edges_.remove_edge(p, child);
                        record({TraceEvent::Kind::FinalPruned, std::min(p, child),
                                std::max(p, child), {}});
                    }
                }
            }
        }
    }

    DiscoveryResult run_pag() {
        init();
        for (int i = 0; i < d_; ++i) {
            std::vector<int> candidates(nbhd_[i].begin(), nbhd_[i].end());
            for (int k : candidates) {
                if (!nbhd_[i].count(k)) continue;
                if (try_separate(i, k, nbhd_[i])) continue;
            }
        }
        // second pass over both endpoints' neighborhoods
        for (int i = 0; i < d_; ++i) {
            std::vector<int> candidates(nbhd_[i].begin(), nbhd_[i].end());
            for (int k : candidates) {
                if (k < i || !nbhd_[i].count(k)) continue;
                std::set<int> pool;
                pool.insert(nbhd_[i].begin(), nbhd_[i].end());
                pool.insert(nbhd_[k].begin(), nbhd_[k].end());
                try_separate(i, k, pool);
            }
        }
        MixedGraph skeleton(d_);
        for (int i = 0; i < d_; ++i)
            for (int j : nbhd_[i])
                if (j > i) skeleton.set_edge(i, j, Mark::Circle, Mark::Circle);
        edges_ = pag_orient(skeleton, sepsets_);
        for (const auto& [k, em] : edges_.edges())
            record({TraceEvent::Kind::MarkSet, k.first, k.second, {}, 0.0, 0.0, 0.0, em.at_a,
                    em.at_b});
        DiscoveryResult res{edges_, trace_, prov_.regression_fits()};
        return res;
    }

    // first separating subset in increasing size, FCI style; records the sepset
    bool try_separate(int i, int k, const std::set<int>& pool_base) {
        Subset pool = pool_without(pool_base, {i, k});
        for (const Subset& cond : enumerate_subsets(pool, cfg_.max_subset_size)) {
            auto [dep, p] = prov_.cross_nonzero(i, k, cond);
            if (!dep) {
                sepsets_[MixedGraph::key(i, k)] = std::set<int>(cond.begin(), cond.end());
                drop_neighbor(i, k, cond, p);
                return true;
            }
        }
        return false;
    }
};

}  // namespace detail

inline DiscoveryResult adascore_with_provider(CriterionProvider& prov, int d,
                                              const DiscoveryConfig& cfg,
                                              const Dataset* cam_data = nullptr) {
    cfg.validate();
    detail::Engine engine(prov, d, cfg, cam_data);
    return engine.run();
}

/// AdaScore on a standardized sample. The input must already be scale
/// normalized; discovery itself centers nothing.
inline DiscoveryResult adascore(const Dataset& data, const DiscoveryConfig& cfg) {
    cfg.validate();
    if (data.d() < 2) throw ConfigError("need at least two variables");
    if (!data.standardized) throw ConfigError("data must be standardized before discovery");
    FiniteSampleProvider prov(data, cfg);
    DiscoveryResult res = adascore_with_provider(prov, data.d(), cfg, &data);
    res.graph.node_names = data.column_names;
    return res;
}

/// Oracle-mode run against a known graph; used by the correctness and
/// complexity checks.
inline DiscoveryResult adascore_oracle(const Dag& g, const LatentPartition& part,
                                       const DiscoveryConfig& cfg) {
    GraphicalOracleProvider prov(g, part);
    return adascore_with_provider(prov, static_cast<int>(part.observed.size()), cfg, nullptr);
}

/// find_unconfounded_sink as a standalone operation: the argmin-delta node
/// when its residual passes the independence test, nothing otherwise.
inline std::optional<std::pair<int, DeltaEstimate>> find_unconfounded_sink(
    const Dataset& data, const std::vector<int>& s, const DiscoveryConfig& cfg) {
    if (s.empty()) throw ConfigError("empty candidate set");
    FiniteSampleProvider prov(data, cfg);
    prov.warm_subset(s);
    std::vector<double> dm(s.size());
    parallel_for(static_cast<int>(s.size()), [&](int k) { dm[k] = prov.delta_mean(s[k], s); });
    size_t best = 0;
    for (size_t k = 1; k < s.size(); ++k)
        if (dm[k] < dm[best]) best = k;
    int cand = s[best];
    if (s.size() > 1) {
        auto [zero, p] = prov.delta_zero(cand, s);
        if (!zero) return std::nullopt;
    }
    return std::make_pair(cand, prov.delta_estimate(cand, s));
}

}  // namespace adascore
