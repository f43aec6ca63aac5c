#include "rwde/cylinder.hpp"
#include "rwde/oracle.hpp"
#include "rwde/stats.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

using namespace rwde;

namespace {

WeightSystem example_system() { return nn_weights(2, {Rat(2), Rat(1), Rat(1), Rat(1)}); }

Digraph two_state_chain() {
    auto g = Digraph::with_vertices(2);
    g.add_edge(0, 1, 0, Rat(1));
    g.add_edge(0, 0, 1, Rat(1));
    g.add_edge(1, 0, 0, Rat(1));
    g.add_edge(1, 1, 1, Rat(1));
    return g;
}

// birth-death chain on {-1, ..., K}: -1 absorbs "ruin", K absorbs "win"
Digraph birth_death(int K) {
    auto g = Digraph::with_vertices(K + 2);  // vertex i <-> state i-1
    for (int v = 1; v <= K; ++v) {
        g.add_edge(v, v + 1, 0, Rat(1));
        g.add_edge(v, v - 1, 1, Rat(1));
    }
    // keep the chain irreducible-free; absorbers get self-loops for validity
    g.add_edge(0, 0, 1, Rat(1));
    g.add_edge(K + 1, K + 1, 0, Rat(1));
    return g;
}

GraphEnv birth_death_env(const Digraph& g, int K, double p) {
    GraphEnv env;
    env.edge_prob.assign(g.edges.size(), 0.0);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
        const auto& e = g.edges[i];
        if (e.src == 0 || e.src == K + 1)
            env.edge_prob[i] = 1.0;
        else
            env.edge_prob[i] = e.label == 0 ? p : 1.0 - p;
    }
    return env;
}

}  // namespace

TEST_CASE("single edge probability is alpha_e over alpha_x", "[oracle]") {
    auto g = Digraph::with_vertices(3);
    g.add_edge(0, 1, 0, Rat(2));
    g.add_edge(0, 2, 1, Rat(3));
    g.add_edge(1, 0, 0, Rat(1));
    g.add_edge(2, 0, 0, Rat(4));
    REQUIRE(annealed_path_probability(g, {0, {0}}) == Rat(2, 5));
    REQUIRE(annealed_path_probability(g, {0, {1}}) == Rat(3, 5));
}

TEST_CASE("rising factorial product on a short return path", "[oracle]") {
    const auto w1 = nn_weights(1, {Rat(2), Rat(1)});
    // path 0 -> 1 -> 0: (2/3) * (1/3) via fresh sites... the exact product is
    // [alpha_1 * alpha_{-1}] / [alpha_0 * alpha_1-site] with per-site totals 3
    REQUIRE(annealed_lattice_path_probability(w1, {0, 1}) == Rat(2, 9));
    // same directed edge twice: 0 -> 1 -> 0 -> 1 reinforces (0,1):
    REQUIRE(annealed_lattice_path_probability(w1, {0, 1, 0}) ==
            Rat(2, 3) * Rat(1, 3) * Rat(3, 4));
}

TEST_CASE("path probability validates the path", "[oracle]") {
    auto g = Digraph::with_vertices(2);
    g.add_edge(0, 1, 0, Rat(1));
    g.add_edge(1, 0, 0, Rat(1));
    REQUIRE_THROWS_AS(annealed_path_probability(g, {0, {1}}), std::invalid_argument);
    REQUIRE_THROWS_AS(annealed_path_probability(g, {0, {0, 0}}), std::invalid_argument);
}

TEST_CASE("total probability over all fixed-length lattice paths is one", "[oracle]") {
    const auto w = example_system();
    Rat total = 0;
    std::vector<std::size_t> path(3);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t b = 0; b < 4; ++b)
            for (std::size_t c = 0; c < 4; ++c) {
                path = {a, b, c};
                total += annealed_lattice_path_probability(w, path);
            }
    REQUIRE(total == 1);
}

TEST_CASE("cycle reversal on a symmetric two-vertex graph", "[oracle]") {
    auto g = Digraph::with_vertices(2);
    g.add_edge(0, 1, 0, Rat(3, 2));
    g.add_edge(1, 0, 0, Rat(3, 2));
    const auto report = verify_cycle_reversal(g, reverse(g), 6);
    REQUIRE(report.all_equal);
    REQUIRE(report.cycles_checked > 0);
    REQUIRE_FALSE(report.truncated);
}

TEST_CASE("cycle reversal on the axis cylinder", "[oracle]") {
    const auto w = example_system();
    const auto f = make_frame(w, IVec{1, 0});
    const auto g = build_cylinder(f, w, 1, 1);
    const auto gr = reverse_cylinder(g);
    const auto report = verify_cycle_reversal(g.graph, gr.graph, 8);
    REQUIRE(report.all_equal);
    REQUIRE(report.cycles_checked > 0);
    REQUIRE_FALSE(report.truncated);
}

TEST_CASE("cycle reversal refuses non-divergence-free graphs", "[oracle]") {
    auto g = Digraph::with_vertices(2);
    g.add_edge(0, 1, 0, Rat(2));
    g.add_edge(1, 0, 0, Rat(1));
    REQUIRE_THROWS_AS(verify_cycle_reversal(g, reverse(g), 4), std::invalid_argument);
}

TEST_CASE("cycle budget truncation is reported", "[oracle]") {
    const auto w = example_system();
    const auto f = make_frame(w, IVec{1, 0});
    const auto g = build_cylinder(f, w, 1, 2);
    const auto report = verify_cycle_reversal(g.graph, reverse(g.graph), 8, 10);
    REQUIRE(report.truncated);
}

TEST_CASE("absorption in a deterministic chain", "[oracle]") {
    auto g = Digraph::with_vertices(4);  // 0 -> 1 -> 2 (target), 3 absorber
    g.add_edge(0, 1, 0, Rat(1));
    g.add_edge(1, 2, 0, Rat(1));
    g.add_edge(2, 0, 0, Rat(1));
    g.add_edge(3, 0, 0, Rat(1));
    g.add_edge(0, 3, 1, Rat(1));
    GraphEnv env;
    env.edge_prob = {0.999999999999, 1.0, 1.0, 1.0, 1e-12};
    const auto h = absorption_probability(g, env, 2, 3);
    REQUIRE(h[1] == Catch::Approx(1.0).margin(1e-12));
    REQUIRE(h[0] == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("gambler's ruin closed form", "[oracle]") {
    const int K = 20;
    const double p = 0.6;
    const auto g = birth_death(K);
    const auto env = birth_death_env(g, K, p);
    const auto h = absorption_probability(g, env, K + 1, 0);
    const double rho = (1 - p) / p;
    for (int state = 0; state <= K; ++state) {
        const double expect = (1.0 - std::pow(rho, state + 1)) / (1.0 - std::pow(rho, K + 1));
        // vertex index = state + 1; state -1 is vertex 0
        REQUIRE(std::abs(h[state + 1] - expect) < 1e-10);
    }
}

TEST_CASE("gambler's ruin exact solve agrees", "[oracle]") {
    const int K = 8;
    const auto g = birth_death(K);
    const auto env = birth_death_env(g, K, 0.55);
    const auto hf = absorption_probability(g, env, K + 1, 0, SolveMode::floating);
    const auto he = absorption_probability(g, env, K + 1, 0, SolveMode::exact);
    for (std::size_t v = 0; v < hf.size(); ++v) REQUIRE(std::abs(hf[v] - he[v]) < 1e-12);
}

TEST_CASE("symmetric chain is harmonic-linear", "[oracle]") {
    const int K = 10;
    const auto g = birth_death(K);
    const auto env = birth_death_env(g, K, 0.5);
    const auto h = absorption_probability(g, env, K + 1, 0);
    for (int state = -1; state <= K; ++state) {
        const double expect = double(state + 1) / double(K + 1);
        REQUIRE(std::abs(h[state + 1] - expect) < 1e-10);
    }
}

TEST_CASE("absorption rejects unreachable targets", "[oracle]") {
    auto g = Digraph::with_vertices(3);
    g.add_edge(0, 0, 0, Rat(1));  // isolated loop; cannot reach 1 or 2
    g.add_edge(1, 2, 0, Rat(1));
    g.add_edge(2, 1, 0, Rat(1));
    GraphEnv env;
    env.edge_prob = {1.0, 1.0, 1.0};
    REQUIRE_THROWS_AS(absorption_probability(g, env, 1, 2), std::invalid_argument);
}

TEST_CASE("invariant measure of a doubly stochastic environment is uniform", "[oracle]") {
    auto g = Digraph::with_vertices(3);
    for (int v = 0; v < 3; ++v) {
        g.add_edge(v, (v + 1) % 3, 0, Rat(1));
        g.add_edge(v, (v + 2) % 3, 1, Rat(1));
    }
    GraphEnv env;
    env.edge_prob.assign(6, 0.5);
    const auto pi = invariant_measure(g, env);
    for (double m : pi) REQUIRE(std::abs(m - 1.0 / 3.0) < 1e-12);
}

TEST_CASE("invariant measure of the two-state chain", "[oracle]") {
    const auto g = two_state_chain();
    const double p = 0.3, q = 0.8;
    GraphEnv env;
    env.edge_prob = {p, 1 - p, q, 1 - q};
    const auto pi = invariant_measure(g, env);
    REQUIRE(std::abs(pi[0] - q / (p + q)) < 1e-12);
    REQUIRE(std::abs(pi[1] - p / (p + q)) < 1e-12);
}

TEST_CASE("invariant measure rejects reducible chains", "[oracle]") {
    auto g = Digraph::with_vertices(2);
    g.add_edge(0, 1, 0, Rat(1));
    g.add_edge(1, 1, 0, Rat(1));
    g.add_edge(0, 0, 1, Rat(1));
    GraphEnv env;
    env.edge_prob = {0.5, 1.0, 0.5};
    REQUIRE_THROWS_AS(invariant_measure(g, env), std::invalid_argument);
}

TEST_CASE("randomly sampled cylinder environments have clean invariant measures", "[oracle]") {
    const auto w = example_system();
    const auto f = make_frame(w, IVec{2, 1});
    const auto g = build_cylinder(f, w, 1, 1);
    CounterRng rng(derive_key(31, StreamTag::graph_env));
    for (int trial = 0; trial < 20; ++trial) {
        const auto env = sample_graph_env(g.graph, rng);
        const auto pi = invariant_measure(g.graph, env);
        double total = 0.0;
        for (double m : pi) {
            REQUIRE(m > 0.0);
            total += m;
        }
        REQUIRE(std::abs(total - 1.0) < 1e-12);
    }
}

TEST_CASE("reversing a reversible chain returns the same transition law", "[oracle]") {
    const int K = 6;
    const auto g = birth_death(K);
    // make it irreducible: replace absorber self-loops with reflecting edges
    auto g2 = Digraph::with_vertices(K + 2);
    for (int v = 1; v <= K; ++v) {
        g2.add_edge(v, v + 1, 0, Rat(1));
        g2.add_edge(v, v - 1, 1, Rat(1));
    }
    g2.add_edge(0, 1, 0, Rat(1));
    g2.add_edge(K + 1, K, 1, Rat(1));
    GraphEnv env;
    env.edge_prob.assign(g2.edges.size(), 0.0);
    for (std::size_t i = 0; i < g2.edges.size(); ++i) {
        const auto& e = g2.edges[i];
        if (e.src == 0 || e.src == K + 1)
            env.edge_prob[i] = 1.0;
        else
            env.edge_prob[i] = e.label == 0 ? 0.6 : 0.4;
    }
    const auto rev = reverse_environment(g2, env);
    const auto gr = reverse(g2);
    // birth-death chains are reversible: the reversed environment assigns to
    // the reversed edge (v -> u) the original probability of (v -> u)
    for (std::size_t i = 0; i < gr.edges.size(); ++i) {
        const int src = gr.edges[i].src, dst = gr.edges[i].dst;
        double orig = -1.0;
        for (std::size_t j = 0; j < g2.edges.size(); ++j)
            if (g2.edges[j].src == src && g2.edges[j].dst == dst) orig = env.edge_prob[j];
        REQUIRE(orig >= 0.0);
        REQUIRE(std::abs(rev.edge_prob[i] - orig) < 1e-12);
    }
}

TEST_CASE("two-state reversal computed by hand", "[oracle]") {
    const auto g = two_state_chain();
    const double p = 0.25, q = 0.65;
    GraphEnv env;
    env.edge_prob = {p, 1 - p, q, 1 - q};
    const auto rev = reverse_environment(g, env);
    // pi = (q, p)/(p+q); reversed edge 0 is (1 -> 0) with pi_0 p / pi_1 = q
    REQUIRE(std::abs(rev.edge_prob[0] - q) < 1e-12);
    REQUIRE(std::abs(rev.edge_prob[2] - p) < 1e-12);
    REQUIRE(std::abs(rev.edge_prob[1] - (1 - p)) < 1e-12);
    REQUIRE(std::abs(rev.edge_prob[3] - (1 - q)) < 1e-12);
}

TEST_CASE("reversed environments preserve cycle probabilities", "[oracle]") {
    const auto w = example_system();
    const auto f = make_frame(w, IVec{1, 0});
    const auto g = build_cylinder(f, w, 1, 2);
    CounterRng rng(derive_key(37, StreamTag::graph_env));
    for (int trial = 0; trial < 10; ++trial) {
        const auto env = sample_graph_env(g.graph, rng);
        const auto rev = reverse_environment(g.graph, env);
        std::uint64_t budget = 3000;
        for (int base = 0; base < g.graph.num_vertices; ++base) {
            for_each_cycle(g.graph, base, 5, budget, [&](const std::vector<int>& ids) {
                const double pf = env_path_probability(env, ids);
                const double pr =
                    env_path_probability(rev, std::vector<int>(ids.rbegin(), ids.rend()));
                REQUIRE(std::abs(pf - pr) < 1e-12);
            });
        }
    }
}

TEST_CASE("restricting the reversed sink simplex keeps the Dirichlet law", "[oracle]") {
    // conditional law of the reversed first step given it avoids R: the
    // remaining components, renormalized, form a Dirichlet with the restricted
    // parameters, so each normalized component keeps a Beta marginal
    const auto w = example_system();
    const auto f = make_frame(w, IVec{2, 1});
    const auto g = build_cylinder(f, w, 1, 2);
    const auto gr = reverse(g.graph);

    std::vector<int> left_edges;  // reversed out-edges of bd that avoid R
    Rat restricted_total = 0;
    for (int id : gr.out_edges[g.boundary_vertex]) {
        if (gr.edges[id].dst == g.right_vertex) continue;
        left_edges.push_back(id);
        restricted_total += gr.edges[id].weight;
    }
    REQUIRE(left_edges.size() >= 2);

    CounterRng rng(derive_key(43, StreamTag::graph_env));
    std::vector<std::vector<double>> samples(left_edges.size());
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto env = sample_graph_env(g.graph, rng);
        const auto rev = reverse_environment(g.graph, env);
        double mass = 0.0;
        for (int id : left_edges) mass += rev.edge_prob[id];
        for (std::size_t k = 0; k < left_edges.size(); ++k)
            samples[k].push_back(rev.edge_prob[left_edges[k]] / mass);
    }
    for (std::size_t k = 0; k < left_edges.size(); ++k) {
        const Rat a = gr.edges[left_edges[k]].weight;
        const auto ks =
            ks_test_beta(samples[k], BetaDist{rat_to_double(a), rat_to_double(restricted_total - a)});
        REQUIRE(ks.p_value > 0.01);
    }
}

TEST_CASE("reversed boundary marginal fits the stay-probability Beta law", "[oracle]") {
    const auto w = example_system();
    const auto f = make_frame(w, IVec{1, 0});
    const auto g = build_cylinder(f, w, 1, 2);
    CounterRng rng(derive_key(41, StreamTag::graph_env));
    std::vector<double> one_minus;
    const int n = 2000;
    for (int i = 0; i < n; ++i) {
        const auto env = sample_graph_env(g.graph, rng);
        const auto rev = reverse_environment(g.graph, env);
        // reversed collector edge: (bd -> R) in the reversed graph
        one_minus.push_back(1.0 - rev.edge_prob[g.collector_edge]);
    }
    // 1 - omega_rev(bd,R) ~ Beta(alpha_(left,bd), alpha_(R,bd))
    const double a = rat_to_double(g.left_exit_weight);
    const double b = rat_to_double(g.collector_weight);
    const auto ks = ks_test_beta(one_minus, BetaDist{a, b});
    REQUIRE(ks.p_value > 0.01);
}
