#pragma once

// Reference computations the Monte Carlo layer is tested against: exact
// annealed path probabilities via rising factorials, exhaustive closed-path
// reversal checks, absorption probabilities and invariant measures by sparse
// linear solve (exact rational elimination available for small graphs), and
// quenched environment reversal through the invariant measure.

#include "rwde/graph.hpp"
#include "rwde/rational.hpp"

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace rwde {

struct FinitePath {
    int start = 0;
    std::vector<int> edge_ids;  // consecutive edges of the host graph

    bool closed(const Digraph& g) const {
        if (edge_ids.empty()) return true;
        return g.edges[edge_ids.back()].dst == start;
    }
};

inline void validate_path(const Digraph& g, const FinitePath& path) {
    int at = path.start;
    for (int id : path.edge_ids) {
        if (id < 0 || id >= static_cast<int>(g.edges.size()))
            throw std::invalid_argument("path: edge id out of range");
        if (g.edges[id].src != at) throw std::invalid_argument("path: edges are not consecutive");
        at = g.edges[id].dst;
    }
}

// Probability that the reinforced walk traverses exactly this edge-labeled
// path: prod_e alpha_e^(rising n_e) / prod_x alpha_x^(rising d_x), with d_x
// the number of departures from x along the path. Exact rationals.
inline Rat annealed_path_probability(const Digraph& g, const FinitePath& path) {
    validate_path(g, path);
    std::unordered_map<int, std::uint32_t> edge_count;
    std::unordered_map<int, std::uint32_t> departures;
    std::vector<Rat> vertex_weight(g.num_vertices, Rat(0));
    std::vector<bool> vw_ready(g.num_vertices, false);
    Rat p = 1;
    int at = path.start;
    for (int id : path.edge_ids) {
        if (!vw_ready[at]) {
            vertex_weight[at] = g.out_weight(at);
            vw_ready[at] = true;
        }
        p *= (g.edges[id].weight + edge_count[id]) / (vertex_weight[at] + departures[at]);
        ++edge_count[id];
        ++departures[at];
        at = g.edges[id].dst;
    }
    return p;
}

// Same product with a fixed quenched environment (plain Markov chain).
inline double env_path_probability(const GraphEnv& env, const std::vector<int>& edge_ids) {
    double p = 1.0;
    for (int id : edge_ids) p *= env.edge_prob[id];
    return p;
}

// Annealed probability of a lattice path given as a step-index sequence from
// any start site; every site has total weight Sigma.
template <class WS>
Rat annealed_lattice_path_probability(const WS& w, const std::vector<std::size_t>& step_seq) {
    std::map<std::pair<std::vector<std::int64_t>, std::size_t>, std::uint32_t> edge_count;
    std::map<std::vector<std::int64_t>, std::uint32_t> departures;
    std::vector<std::int64_t> at(w.dim(), 0);
    Rat p = 1;
    for (std::size_t s : step_seq) {
        p *= (w.weight(s) + edge_count[{at, s}]) / (w.sigma() + departures[at]);
        ++edge_count[{at, s}];
        ++departures[at];
        for (int j = 0; j < w.dim(); ++j) at[j] += w.step(s)[j];
    }
    return p;
}

// Depth-first enumeration of closed edge-labeled paths from `base` of length
// 1..max_len. Calls fn(edge_ids) for each; stops when budget runs out.
// Returns false on budget exhaustion.
inline bool for_each_cycle(const Digraph& g, int base, int max_len, std::uint64_t& budget,
                           const std::function<void(const std::vector<int>&)>& fn) {
    std::vector<int> stack;
    bool ok = true;
    std::function<void(int)> dfs = [&](int at) {
        if (!ok || static_cast<int>(stack.size()) >= max_len) return;
        for (int id : g.out_edges[at]) {
            if (!ok) return;
            stack.push_back(id);
            const int nxt = g.edges[id].dst;
            if (nxt == base) {
                if (budget == 0) {
                    ok = false;
                } else {
                    --budget;
                    fn(stack);
                }
            }
            if (ok && static_cast<int>(stack.size()) < max_len) dfs(nxt);
            stack.pop_back();
        }
    };
    dfs(base);
    return ok;
}

struct CycleReversalReport {
    std::uint64_t cycles_checked = 0;
    bool all_equal = true;
    bool truncated = false;  // budget ran out before exhausting length <= max_len
    std::string first_failure;
};

// Checks P_g(sigma) = P_grev(sigma reversed) exactly for every closed path of
// length <= max_len from every base vertex. g must be divergence free and
// grev its reverse with preserved edge ids.
inline CycleReversalReport verify_cycle_reversal(const Digraph& g, const Digraph& grev,
                                                 int max_len,
                                                 std::uint64_t budget = 1'000'000) {
    if (!g.divergence_free())
        throw std::invalid_argument("cycle reversal: graph is not divergence-free");
    CycleReversalReport report;
    for (int base = 0; base < g.num_vertices && !report.truncated; ++base) {
        const bool full = for_each_cycle(g, base, max_len, budget, [&](const std::vector<int>& ids) {
            FinitePath fwd{base, ids};
            FinitePath rev{base, {ids.rbegin(), ids.rend()}};
            const Rat pf = annealed_path_probability(g, fwd);
            const Rat pr = annealed_path_probability(grev, rev);
            ++report.cycles_checked;
            if (pf != pr && report.all_equal) {
                report.all_equal = false;
                std::string desc = "cycle from vertex " + std::to_string(base) + " edges [";
                for (std::size_t i = 0; i < ids.size(); ++i)
                    desc += (i ? "," : "") + std::to_string(ids[i]);
                desc += "]: " + rat_str(pf) + " vs " + rat_str(pr);
                report.first_failure = desc;
            }
        });
        if (!full) report.truncated = true;
    }
    return report;
}

enum class SolveMode { automatic, floating, exact };

namespace detail {

// Vertices from which {targets} is reachable along positive-probability edges.
inline std::vector<bool> can_reach(const Digraph& g, const GraphEnv& env,
                                   const std::vector<int>& targets) {
    std::vector<bool> seen(g.num_vertices, false);
    std::deque<int> queue;
    for (int t : targets) {
        seen[t] = true;
        queue.push_back(t);
    }
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int id : g.in_edges[v]) {
            if (env.edge_prob[id] <= 0.0) continue;
            const int s = g.edges[id].src;
            if (!seen[s]) {
                seen[s] = true;
                queue.push_back(s);
            }
        }
    }
    return seen;
}

inline std::vector<double> solve_dense_rational(const std::vector<std::vector<Rat>>& a,
                                                const std::vector<Rat>& b) {
    const std::size_t n = b.size();
    std::vector<std::vector<Rat>> m(n, std::vector<Rat>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) m[i][j] = a[i][j];
        m[i][n] = b[i];
    }
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t p = col;
        while (p < n && m[p][col] == 0) ++p;
        if (p == n) throw std::invalid_argument("singular system (unreachable states)");
        std::swap(m[col], m[p]);
        const Rat piv = m[col][col];
        for (std::size_t j = col; j <= n; ++j) m[col][j] /= piv;
        for (std::size_t i = 0; i < n; ++i) {
            if (i == col || m[i][col] == 0) continue;
            const Rat f = m[i][col];
            for (std::size_t j = col; j <= n; ++j) m[i][j] -= f * m[col][j];
        }
    }
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) x[i] = rat_to_double(m[i][n]);
    return x;
}

// SparseLU solve with iterative refinement; returns residual max-norm.
inline double solve_sparse_refined(const Eigen::SparseMatrix<double>& a, const Eigen::VectorXd& b,
                                   Eigen::VectorXd& x) {
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(a);
    if (lu.info() != Eigen::Success)
        throw std::invalid_argument("singular system (unreachable states)");
    x = lu.solve(b);
    double res = (a * x - b).cwiseAbs().maxCoeff();
    for (int pass = 0; pass < 4 && res > 1e-15; ++pass) {
        const Eigen::VectorXd corr = lu.solve(b - a * x);
        x += corr;
        const double next = (a * x - b).cwiseAbs().maxCoeff();
        if (next >= res) break;
        res = next;
    }
    return res;
}

}  // namespace detail

// Harmonic hit probabilities h(x) = P_x(H_target < H_absorber): target pinned
// to 1, absorber to 0, everything else solved from h = P h. Residual < 1e-10
// or the solve throws.
inline std::vector<double> absorption_probability(const Digraph& g, const GraphEnv& env,
                                                  int target, int absorber,
                                                  SolveMode mode = SolveMode::automatic) {
    if (target == absorber) throw std::invalid_argument("absorption: target equals absorber");
    env.validate(g, 1e-9);
    const auto reach = detail::can_reach(g, env, {target, absorber});
    for (int v = 0; v < g.num_vertices; ++v)
        if (!reach[v])
            throw std::invalid_argument("singular system (unreachable states): vertex " +
                                        std::to_string(v));

    std::vector<int> unknown_index(g.num_vertices, -1);
    std::vector<int> unknowns;
    for (int v = 0; v < g.num_vertices; ++v) {
        if (v == target || v == absorber) continue;
        unknown_index[v] = static_cast<int>(unknowns.size());
        unknowns.push_back(v);
    }
    const int n = static_cast<int>(unknowns.size());
    std::vector<double> h(g.num_vertices, 0.0);
    h[target] = 1.0;
    if (n == 0) return h;

    if (mode == SolveMode::exact) {
        if (g.num_vertices >= 200)
            throw std::invalid_argument("exact solve supported only for graphs < 200 vertices");
        std::vector<std::vector<Rat>> a(n, std::vector<Rat>(n, Rat(0)));
        std::vector<Rat> b(n, Rat(0));
        for (int i = 0; i < n; ++i) {
            const int v = unknowns[i];
            a[i][i] = 1;
            for (int id : g.out_edges[v]) {
                const Rat w{env.edge_prob[id]};  // exact binary value of the double
                const int dst = g.edges[id].dst;
                if (dst == target)
                    b[i] += w;
                else if (dst != absorber)
                    a[i][unknown_index[dst]] -= w;
            }
        }
        const auto x = detail::solve_dense_rational(a, b);
        for (int i = 0; i < n; ++i) h[unknowns[i]] = x[i];
        return h;
    }

    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    std::vector<double> diag(n, 1.0);
    for (int i = 0; i < n; ++i) {
        const int v = unknowns[i];
        for (int id : g.out_edges[v]) {
            const int dst = g.edges[id].dst;
            if (dst == target)
                b[i] += env.edge_prob[id];
            else if (dst == v)
                diag[i] -= env.edge_prob[id];
            else if (dst != absorber)
                trip.emplace_back(i, unknown_index[dst], -env.edge_prob[id]);
        }
    }
    for (int i = 0; i < n; ++i) trip.emplace_back(i, i, diag[i]);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd x;
    const double res = detail::solve_sparse_refined(a, b, x);
    if (res > 1e-10)
        throw std::logic_error("absorption solve residual " + std::to_string(res) + " > 1e-10");
    for (int i = 0; i < n; ++i) h[unknowns[i]] = x[i];
    return h;
}

namespace detail {

inline void check_irreducible(const Digraph& g, const GraphEnv& env) {
    // strong connectivity over positive-probability edges
    std::vector<bool> fwd(g.num_vertices, false), bwd(g.num_vertices, false);
    std::deque<int> queue{0};
    fwd[0] = true;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int id : g.out_edges[v])
            if (env.edge_prob[id] > 0.0 && !fwd[g.edges[id].dst]) {
                fwd[g.edges[id].dst] = true;
                queue.push_back(g.edges[id].dst);
            }
    }
    queue.push_back(0);
    bwd[0] = true;
    while (!queue.empty()) {
        const int v = queue.front();
        queue.pop_front();
        for (int id : g.in_edges[v])
            if (env.edge_prob[id] > 0.0 && !bwd[g.edges[id].src]) {
                bwd[g.edges[id].src] = true;
                queue.push_back(g.edges[id].src);
            }
    }
    for (int v = 0; v < g.num_vertices; ++v)
        if (!fwd[v] || !bwd[v]) throw std::invalid_argument("reducible chain");
}

}  // namespace detail

// Stationary distribution pi with pi P = pi, sum pi = 1; residual < 1e-10.
inline std::vector<double> invariant_measure(const Digraph& g, const GraphEnv& env) {
    env.validate(g, 1e-9);
    detail::check_irreducible(g, env);
    const int n = g.num_vertices;
    std::vector<Eigen::Triplet<double>> trip;
    // rows 1..n-1: (P^T - I) pi = 0 ; row 0: sum pi = 1
    for (int j = 0; j < n; ++j) trip.emplace_back(0, j, 1.0);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        if (e.dst == 0) continue;  // replaced by the normalization row
        trip.emplace_back(e.dst, e.src, env.edge_prob[i]);
    }
    for (int v = 1; v < n; ++v) trip.emplace_back(v, v, -1.0);
    Eigen::SparseMatrix<double> a(n, n);
    a.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n);
    b[0] = 1.0;
    Eigen::VectorXd x;
    detail::solve_sparse_refined(a, b, x);

    std::vector<double> pi(n);
    double total = 0.0;
    for (int v = 0; v < n; ++v) {
        pi[v] = x[v];
        total += pi[v];
    }
    for (auto& p : pi) p /= total;

    // full-balance residual check
    std::vector<double> flow(n, 0.0);
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        flow[g.edges[i].dst] += pi[g.edges[i].src] * env.edge_prob[i];
    double res = 0.0;
    for (int v = 0; v < n; ++v) res = std::max(res, std::abs(flow[v] - pi[v]));
    if (res > 1e-10)
        throw std::logic_error("invariant measure residual " + std::to_string(res) + " > 1e-10");
    for (double p : pi)
        if (!(p > 0.0)) throw std::logic_error("invariant measure: nonpositive mass");
    return pi;
}

// Quenched reversal: the environment on reverse(g) with
// omega_rev(e) = pi(src) omega(e) / pi(dst), per preserved edge id.
inline GraphEnv reverse_environment(const Digraph& g, const GraphEnv& env,
                                    const std::vector<double>* pi_hint = nullptr) {
    const std::vector<double> pi = pi_hint ? *pi_hint : invariant_measure(g, env);
    GraphEnv rev;
    rev.edge_prob.assign(g.edges.size(), 0.0);
    for (std::size_t i = 0; i < g.edges.size(); ++i)
        rev.edge_prob[i] = pi[g.edges[i].src] * env.edge_prob[i] / pi[g.edges[i].dst];
    // normalize away the linear-solve residue; per-vertex drift is O(residual)
    const Digraph gr = reverse(g);
    for (int v = 0; v < gr.num_vertices; ++v) {
        if (gr.out_edges[v].empty()) continue;
        double s = 0.0;
        for (int id : gr.out_edges[v]) s += rev.edge_prob[id];
        for (int id : gr.out_edges[v]) rev.edge_prob[id] /= s;
    }
    rev.validate(gr, 1e-12);
    return rev;
}

}  // namespace rwde
