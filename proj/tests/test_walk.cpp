#include "rwde/oracle.hpp"
#include "rwde/stats.hpp"
#include "rwde/walk.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

using namespace rwde;

namespace {

WeightSystem example_system() { return nn_weights(2, {Rat(2), Rat(1), Rat(1), Rat(1)}); }

// environment with the same simplex at every site
struct ConstantEnvironment {
    WeightSystem ws;
    Simplex simplex;
    const Simplex& site_simplex(const IVec&) const { return simplex; }
    const WeightSystem& weights() const { return ws; }
};

}  // namespace

TEST_CASE("zero-step stop yields the bare start", "[walk]") {
    const auto w = example_system();
    const auto traj = urn_walk(w, {3, 4}, StoppingSpec::fixed(0), CounterRng(1));
    REQUIRE(traj.positions == std::vector<IVec>{{3, 4}});
    REQUIRE(traj.completed);
    REQUIRE(traj.num_steps() == 0);
}

TEST_CASE("urn first-step frequencies match the initial weights", "[walk]") {
    const auto w = example_system();
    const int n = 100000;
    std::array<int, 4> hits{};
    for (int i = 0; i < n; ++i) {
        LatticeUrnWalk walk(w, {0, 0}, CounterRng(derive_key(5, StreamTag::urn_walk, i)));
        ++hits[walk.step()];
    }
    const std::array<double, 4> expect{0.4, 0.2, 0.2, 0.2};
    for (int s = 0; s < 4; ++s) {
        const auto st = bernoulli_stats(hits[s], n);
        REQUIRE(std::abs(st.mean - expect[s]) <= 3 * st.standard_error);
    }
}

TEST_CASE("probability of repeating the first edge is reinforced", "[walk]") {
    const auto w = example_system();
    const int n = 100000;
    int both = 0;
    for (int i = 0; i < n; ++i) {
        LatticeUrnWalk walk(w, {0, 0}, CounterRng(derive_key(6, StreamTag::urn_walk, i)));
        const auto s1 = walk.step();
        // second step happens from a fresh site, so only the site totals matter
        if (s1 != 0) continue;
        // walk is now at (1,0); step again and look for another +e1
        if (walk.step() == 0) ++both;
    }
    // P(first two steps are both +e1) = (2/5) * (2/5) because the second site is fresh
    const auto st = bernoulli_stats(both, n);
    REQUIRE(std::abs(st.mean - 0.16) <= 3 * st.standard_error);
}

TEST_CASE("repeating the same directed edge is reinforced", "[walk]") {
    // path e1 then -e1 then e1 re-traverses the first edge: its weight grew to alpha+1
    const auto w = example_system();
    const int n = 200000;
    int seen = 0, repeat = 0;
    for (int i = 0; i < n; ++i) {
        LatticeUrnWalk walk(w, {0, 0}, CounterRng(derive_key(7, StreamTag::urn_walk, i)));
        if (walk.step() != 0) continue;  // +e1
        if (walk.step() != 1) continue;  // back with -e1
        ++seen;
        if (walk.step() == 0) ++repeat;  // +e1 again, now with weight 3 of total 6
    }
    REQUIRE(seen > 0);
    const auto st = bernoulli_stats(repeat, seen);
    REQUIRE(std::abs(st.mean - 0.5) <= 3 * st.standard_error);
}

TEST_CASE("hitting times scan the strict inequalities", "[walk]") {
    Trajectory traj;
    traj.start = {0, 0};
    traj.positions = {{0, 0}, {1, 0}, {2, 0}};
    const auto [t, tt] = hitting_times(traj, {2, 1}, 0);
    REQUIRE(t == 1);
    REQUIRE_FALSE(tt.has_value());

    Trajectory still;
    still.start = {0, 0};
    still.positions = {{0, 0}, {0, 0}, {0, 0}};
    const auto [t2, tt2] = hitting_times(still, {2, 1}, 0);
    REQUIRE_FALSE(t2.has_value());
    REQUIRE_FALSE(tt2.has_value());

    Trajectory down;
    down.start = {0};
    down.positions = {{0}, {-1}, {-2}};
    const auto [t3, tt3] = hitting_times(down, {1}, -1);
    REQUIRE(t3 == 0);  // the start already sits above level -1
    REQUIRE(tt3 == 2);
}

TEST_CASE("edge counts account for every step", "[walk]") {
    const auto w = example_system();
    const auto traj = urn_walk(w, {0, 0}, StoppingSpec::fixed(500), CounterRng(derive_key(8, StreamTag::urn_walk)));
    REQUIRE(traj.num_steps() == 500);
    std::uint64_t total = 0;
    for (const auto& [site, counts] : traj.edge_counts) {
        REQUIRE(counts.size() == w.num_steps());
        for (auto c : counts) total += c;
    }
    REQUIRE(total == 500);

    // consecutive differences are steps
    for (std::size_t n = 1; n < traj.positions.size(); ++n) {
        const IVec d = sub(traj.positions[n], traj.positions[n - 1]);
        REQUIRE(w.step_set().index_of(d).has_value());
    }
}

TEST_CASE("quenched walk in a point-mass environment runs straight", "[walk]") {
    ConstantEnvironment env{example_system(), Simplex{{1.0, 0.0, 0.0, 0.0}}};
    BasicQuenchedWalk<ConstantEnvironment> walk(env, {0, 0}, CounterRng(11));
    for (int i = 0; i < 25; ++i) walk.step();
    REQUIRE(walk.position() == IVec{25, 0});
}

TEST_CASE("quenched frequencies in a fixed environment match its simplex", "[walk]") {
    const auto w = example_system();
    const Environment env(424242, w);
    const auto target = env.site_simplex({0, 0});
    const int n = 100000;
    std::array<int, 4> hits{};
    for (int i = 0; i < n; ++i) {
        LatticeQuenchedWalk walk(env, {0, 0}, CounterRng(derive_key(9, StreamTag::quenched_walk, i)));
        ++hits[walk.step()];
    }
    for (int s = 0; s < 4; ++s) {
        const auto st = bernoulli_stats(hits[s], n);
        REQUIRE(std::abs(st.mean - target.components[s]) <= 3 * st.standard_error + 1e-9);
    }
}

TEST_CASE("environment-averaged quenched walk reproduces the annealed first step", "[walk]") {
    const auto w = example_system();
    const int n_envs = 10000, per_env = 10;
    std::vector<double> env_means;
    env_means.reserve(n_envs);
    for (int e = 0; e < n_envs; ++e) {
        const Environment env(e, w);
        int hit = 0;
        for (int i = 0; i < per_env; ++i) {
            LatticeQuenchedWalk walk(env, {0, 0},
                                     CounterRng(derive_key(10, StreamTag::quenched_walk, e, i)));
            if (walk.step() == 0) ++hit;
        }
        env_means.push_back(double(hit) / per_env);
    }
    const auto st = sample_stats(env_means);
    REQUIRE(std::abs(st.mean - 0.4) <= 3 * st.standard_error);
}

TEST_CASE("urn path frequencies match the exact product formula", "[walk]") {
    const auto w = example_system();
    // two fixed paths of length 4 from the origin
    const std::vector<std::vector<std::size_t>> paths = {{0, 0, 1, 2}, {0, 1, 0, 1}};
    for (const auto& path : paths) {
        const Rat exact = annealed_lattice_path_probability(w, path);
        const int n = 100000;
        int hits = 0;
        for (int i = 0; i < n; ++i) {
            LatticeUrnWalk walk(w, {0, 0}, CounterRng(derive_key(12, StreamTag::urn_walk, i)));
            bool match = true;
            for (std::size_t s : path) {
                if (walk.step() != s) {
                    match = false;
                    break;
                }
            }
            if (match) ++hits;
        }
        const auto st = bernoulli_stats(hits, n);
        REQUIRE(std::abs(st.mean - rat_to_double(exact)) <= 3 * st.standard_error);
    }
}

TEST_CASE("hard cap flags an incomplete trajectory", "[walk]") {
    const auto w = example_system();
    const auto stop = StoppingSpec::hit_halfspace_boundary({1, 0});
    // strong right drift almost never goes negative; cap after 50 steps
    const auto traj = urn_walk(w, {5, 0}, stop, CounterRng(13), 50);
    REQUIRE_FALSE(traj.completed);
    REQUIRE(traj.num_steps() == 50);
}

TEST_CASE("slab runner reports the exit side and time", "[walk]") {
    const auto w = example_system();
    ConstantEnvironment env{w, Simplex{{1.0, 0.0, 0.0, 0.0}}};
    BasicQuenchedWalk<ConstantEnvironment> walk(env, {0, 0}, CounterRng(14));
    const auto out = run_until_slab_exit(walk, IVec{1, 0}, -1, 3);
    REQUIRE(out.exit == SlabExit::high);
    REQUIRE(out.steps == 4);  // first n with X_n . u > 3
}

TEST_CASE("start sampling follows the entry measure", "[walk]") {
    const auto w = example_system();
    const auto f = make_frame(w, IVec{2, 1});
    const int n = 100000;
    int first = 0;
    CounterRng rng(derive_key(15, StreamTag::start_pick));
    for (int i = 0; i < n; ++i)
        if (start_from_mu(f, rng) == f.entry_set[0]) ++first;
    const auto st = bernoulli_stats(first, n);
    REQUIRE(std::abs(st.mean - 0.6) <= 3 * st.standard_error);
}
