#pragma once

// Finite weighted directed multigraphs. Parallel edges are first class: each
// edge carries its own label and weight, and an edge keeps its index under
// reversal so paths map onto their reverses without bookkeeping.

#include "rwde/rational.hpp"
#include "rwde/rng.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwde {

inline constexpr int kCollectorLabel = -1;  // the single R -> boundary edge

struct EdgeRec {
    int src = 0;
    int dst = 0;
    int label = 0;  // originating step index, or kCollectorLabel
    Rat weight;
};

struct Digraph {
    int num_vertices = 0;
    std::vector<EdgeRec> edges;
    std::vector<std::vector<int>> out_edges;  // edge indices by source
    std::vector<std::vector<int>> in_edges;   // edge indices by target

    void add_edge(int src, int dst, int label, Rat weight) {
        if (src < 0 || src >= num_vertices || dst < 0 || dst >= num_vertices)
            throw std::invalid_argument("add_edge: vertex out of range");
        if (weight <= 0) throw std::invalid_argument("add_edge: weight must be positive");
        const int id = static_cast<int>(edges.size());
        edges.push_back({src, dst, label, std::move(weight)});
        out_edges[src].push_back(id);
        in_edges[dst].push_back(id);
    }

    static Digraph with_vertices(int n) {
        Digraph g;
        g.num_vertices = n;
        g.out_edges.assign(n, {});
        g.in_edges.assign(n, {});
        return g;
    }

    Rat out_weight(int v) const {
        Rat s = 0;
        for (int id : out_edges[v]) s += edges[id].weight;
        return s;
    }

    Rat in_weight(int v) const {
        Rat s = 0;
        for (int id : in_edges[v]) s += edges[id].weight;
        return s;
    }

    // div(alpha) = 0: in-weight equals out-weight at every vertex, exactly.
    bool divergence_free() const {
        for (int v = 0; v < num_vertices; ++v)
            if (out_weight(v) != in_weight(v)) return false;
        return true;
    }
};

// Edge i of the result is edge i of g with endpoints swapped, same weight.
inline Digraph reverse(const Digraph& g) {
    Digraph r = Digraph::with_vertices(g.num_vertices);
    r.edges.reserve(g.edges.size());
    for (const auto& e : g.edges) {
        const int id = static_cast<int>(r.edges.size());
        r.edges.push_back({e.dst, e.src, e.label, e.weight});
        r.out_edges[e.dst].push_back(id);
        r.in_edges[e.src].push_back(id);
    }
    return r;
}

// Quenched environment on a graph: one transition probability per edge,
// normalized over each vertex's out-edges.
struct GraphEnv {
    std::vector<double> edge_prob;  // aligned with Digraph::edges

    void validate(const Digraph& g, double tol = 1e-12) const {
        if (edge_prob.size() != g.edges.size())
            throw std::invalid_argument("graph environment: edge count mismatch");
        for (int v = 0; v < g.num_vertices; ++v) {
            if (g.out_edges[v].empty()) continue;
            double s = 0.0;
            for (int id : g.out_edges[v]) {
                if (edge_prob[id] <= 0.0) throw std::logic_error("graph environment: nonpositive probability");
                s += edge_prob[id];
            }
            if (std::abs(s - 1.0) > tol)
                throw std::logic_error("graph environment: vertex simplex does not sum to 1");
        }
    }
};

// Independent Dirichlet simplex per vertex with the edge weights as
// parameters (the graph-level analogue of the i.i.d. lattice environment).
inline GraphEnv sample_graph_env(const Digraph& g, CounterRng& rng) {
    GraphEnv env;
    env.edge_prob.assign(g.edges.size(), 0.0);
    for (int v = 0; v < g.num_vertices; ++v) {
        if (g.out_edges[v].empty()) continue;
        std::vector<double> params;
        params.reserve(g.out_edges[v].size());
        for (int id : g.out_edges[v]) params.push_back(rat_to_double(g.edges[id].weight));
        const auto simplex = sample_dirichlet_params(rng, params);
        for (std::size_t i = 0; i < simplex.size(); ++i) env.edge_prob[g.out_edges[v][i]] = simplex[i];
    }
    return env;
}

// Oriented-edge reinforced walk on a finite graph: step probabilities are
// (alpha_e + N(e)) / sum over out-edges, with N(e) the traversal count.
class GraphUrnWalk {
  public:
    GraphUrnWalk(const Digraph& g, int start, CounterRng rng)
        : g_(&g), rng_(std::move(rng)), vertex_(start), counts_(g.edges.size(), 0) {
        base_.reserve(g.edges.size());
        for (const auto& e : g.edges) base_.push_back(rat_to_double(e.weight));
        base_out_.reserve(g.num_vertices);
        for (int v = 0; v < g.num_vertices; ++v) base_out_.push_back(rat_to_double(g.out_weight(v)));
        departures_.assign(g.num_vertices, 0);
    }

    int vertex() const { return vertex_; }

    // Returns the traversed edge id; the walk must not sit on a sink.
    int step() {
        const auto& out = g_->out_edges[vertex_];
        if (out.empty()) throw std::logic_error("graph urn walk: stuck at a sink vertex");
        const double total = base_out_[vertex_] + departures_[vertex_];
        double r = rng_.next_double() * total;
        int chosen = out.back();
        for (int id : out) {
            const double wgt = base_[id] + counts_[id];
            if (r < wgt) {
                chosen = id;
                break;
            }
            r -= wgt;
        }
        ++counts_[chosen];
        ++departures_[vertex_];
        vertex_ = g_->edges[chosen].dst;
        return chosen;
    }

  private:
    const Digraph* g_;
    CounterRng rng_;
    int vertex_;
    std::vector<std::uint32_t> counts_;
    std::vector<std::uint32_t> departures_;
    std::vector<double> base_;      // alpha_e as double
    std::vector<double> base_out_;  // alpha_x as double
};

// Markov walk on a graph in a fixed environment.
class GraphQuenchedWalk {
  public:
    GraphQuenchedWalk(const Digraph& g, const GraphEnv& env, int start, CounterRng rng)
        : g_(&g), env_(&env), rng_(std::move(rng)), vertex_(start) {}

    int vertex() const { return vertex_; }

    int step() {
        const auto& out = g_->out_edges[vertex_];
        if (out.empty()) throw std::logic_error("graph quenched walk: stuck at a sink vertex");
        double r = rng_.next_double();
        int chosen = out.back();
        for (int id : out) {
            if (r < env_->edge_prob[id]) {
                chosen = id;
                break;
            }
            r -= env_->edge_prob[id];
        }
        vertex_ = g_->edges[chosen].dst;
        return chosen;
    }

  private:
    const Digraph* g_;
    const GraphEnv* env_;
    CounterRng rng_;
    int vertex_;
};

}  // namespace rwde
