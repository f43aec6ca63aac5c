#pragma once

// Trajectory generation on Z^d under the two laws: the oriented-edge
// reinforced (annealed) walk and the quenched Markov walk in a fixed
// environment. Weights enter sampling as doubles; all identity targets stay
// rational and live elsewhere.

#include "rwde/dirichlet.hpp"
#include "rwde/model.hpp"
#include "rwde/rng.hpp"

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

namespace rwde {

inline constexpr std::uint64_t kDefaultStepCap = 10'000'000;

struct IVecHash {
    std::size_t operator()(const IVec& v) const {
        std::uint64_t h = 0xcbf29ce484222325ull;
        for (auto c : v) {
            h ^= static_cast<std::uint64_t>(c);
            h *= 0x100000001b3ull;
            h = detail::mix64(h);
        }
        return static_cast<std::size_t>(h);
    }
};

struct StoppingSpec {
    enum class Mode { fixed_steps, exit_slab, hit_halfspace_boundary };
    Mode mode = Mode::fixed_steps;
    std::uint64_t steps = 0;
    IVec u;
    std::int64_t level_low = 0;   // exit when X.u < level_low * ||u||^2
    std::int64_t level_high = 0;  // or X.u > level_high * ||u||^2

    static StoppingSpec fixed(std::uint64_t n) {
        StoppingSpec s;
        s.mode = Mode::fixed_steps;
        s.steps = n;
        return s;
    }

    static StoppingSpec exit_slab(IVec u, std::int64_t low, std::int64_t high) {
        if (low >= high) throw std::invalid_argument("stopping: slab bounds need low < high");
        StoppingSpec s;
        s.mode = Mode::exit_slab;
        s.u = std::move(u);
        s.level_low = low;
        s.level_high = high;
        return s;
    }

    static StoppingSpec hit_halfspace_boundary(IVec u) {
        StoppingSpec s;
        s.mode = Mode::hit_halfspace_boundary;
        s.u = std::move(u);
        return s;
    }
};

struct Trajectory {
    IVec start;
    std::vector<IVec> positions;  // positions[0] == start
    std::unordered_map<IVec, std::vector<std::uint32_t>, IVecHash> edge_counts;  // urn mode
    bool completed = true;  // false when the hard cap fired before the stop

    std::uint64_t num_steps() const { return positions.size() - 1; }
};

// Projected hitting times: T = inf{n : X_n.u > L ||u||^2} and
// Ttilde = inf{n : X_n.u < L ||u||^2}, scanned over the recorded trajectory.
inline std::pair<std::optional<std::uint64_t>, std::optional<std::uint64_t>> hitting_times(
    const Trajectory& traj, const IVec& u, std::int64_t L) {
    if (traj.positions.empty()) throw std::invalid_argument("hitting times: empty trajectory");
    const std::int64_t threshold = L * norm_sq(u);
    std::optional<std::uint64_t> t, t_tilde;
    for (std::size_t n = 0; n < traj.positions.size(); ++n) {
        const std::int64_t p = dot(traj.positions[n], u);
        if (!t && p > threshold) t = n;
        if (!t_tilde && p < threshold) t_tilde = n;
        if (t && t_tilde) break;
    }
    return {t, t_tilde};
}

class LatticeUrnWalk {
  public:
    LatticeUrnWalk(const WeightSystem& w, IVec start, CounterRng rng)
        : w_(&w), pos_(std::move(start)), rng_(std::move(rng)) {
        base_.reserve(w.num_steps());
        for (const auto& a : w.weights()) base_.push_back(rat_to_double(a));
        base_total_ = rat_to_double(w.sigma());
    }

    const IVec& position() const { return pos_; }
    const std::unordered_map<IVec, std::vector<std::uint32_t>, IVecHash>& edge_counts() const {
        return counts_;
    }

    // One reinforced step; returns the step index taken.
    std::size_t step() {
        auto& site_counts = counts_[pos_];
        if (site_counts.empty()) site_counts.assign(w_->num_steps() + 1, 0);
        const double total = base_total_ + site_counts.back();  // last slot: departures
        double r = rng_.next_double() * total;
        std::size_t chosen = w_->num_steps() - 1;
        for (std::size_t s = 0; s < w_->num_steps(); ++s) {
            const double wgt = base_[s] + site_counts[s];
            if (r < wgt) {
                chosen = s;
                break;
            }
            r -= wgt;
        }
        ++site_counts[chosen];
        ++site_counts.back();
        pos_ = add(pos_, w_->step(chosen));
        return chosen;
    }

  private:
    const WeightSystem* w_;
    IVec pos_;
    CounterRng rng_;
    std::unordered_map<IVec, std::vector<std::uint32_t>, IVecHash> counts_;
    std::vector<double> base_;
    double base_total_ = 0.0;
};

// Env must provide site_simplex(site) and weights(); simplices are cached per
// walker, never shared.
template <class Env>
class BasicQuenchedWalk {
  public:
    BasicQuenchedWalk(const Env& env, IVec start, CounterRng rng)
        : env_(&env), pos_(std::move(start)), rng_(std::move(rng)) {}

    const IVec& position() const { return pos_; }

    std::size_t step() {
        auto it = cache_.find(pos_);
        if (it == cache_.end()) it = cache_.emplace(pos_, env_->site_simplex(pos_)).first;
        const auto& p = it->second.components;
        double r = rng_.next_double();
        std::size_t chosen = p.size() - 1;
        for (std::size_t s = 0; s < p.size(); ++s) {
            if (r < p[s]) {
                chosen = s;
                break;
            }
            r -= p[s];
        }
        pos_ = add(pos_, env_->weights().step(chosen));
        return chosen;
    }

  private:
    const Env* env_;
    IVec pos_;
    CounterRng rng_;
    std::unordered_map<IVec, Simplex, IVecHash> cache_;
};

using LatticeQuenchedWalk = BasicQuenchedWalk<Environment>;

namespace detail {

inline bool stop_reached(const StoppingSpec& stop, const IVec& pos, std::uint64_t n) {
    switch (stop.mode) {
        case StoppingSpec::Mode::fixed_steps:
            return n >= stop.steps;
        case StoppingSpec::Mode::exit_slab: {
            const std::int64_t p = dot(pos, stop.u);
            const std::int64_t nsq = norm_sq(stop.u);
            return p < stop.level_low * nsq || p > stop.level_high * nsq;
        }
        case StoppingSpec::Mode::hit_halfspace_boundary:
            return dot(pos, stop.u) < 0;
    }
    return false;
}

template <class Process>
Trajectory record_walk(Process& proc, const StoppingSpec& stop, std::uint64_t cap) {
    Trajectory traj;
    traj.start = proc.position();
    traj.positions.push_back(proc.position());
    std::uint64_t n = 0;
    while (!stop_reached(stop, proc.position(), n)) {
        if (n >= cap) {
            traj.completed = false;
            break;
        }
        proc.step();
        ++n;
        traj.positions.push_back(proc.position());
    }
    return traj;
}

}  // namespace detail

inline Trajectory urn_walk(const WeightSystem& w, IVec start, const StoppingSpec& stop,
                           CounterRng rng, std::uint64_t cap = kDefaultStepCap) {
    LatticeUrnWalk proc(w, std::move(start), std::move(rng));
    Trajectory traj = detail::record_walk(proc, stop, cap);
    traj.edge_counts = proc.edge_counts();
    // drop the departure slots; callers see per-step counts only
    for (auto& [site, counts] : traj.edge_counts) counts.pop_back();
    return traj;
}

inline Trajectory quenched_walk(const Environment& env, IVec start, const StoppingSpec& stop,
                                CounterRng rng, std::uint64_t cap = kDefaultStepCap) {
    LatticeQuenchedWalk proc(env, std::move(start), std::move(rng));
    return detail::record_walk(proc, stop, cap);
}

// Streaming slab run for Monte Carlo loops that do not need the path.
enum class SlabExit { low, high, capped };

struct SlabOutcome {
    SlabExit exit = SlabExit::capped;
    std::uint64_t steps = 0;
};

template <class Process>
SlabOutcome run_until_slab_exit(Process& proc, const IVec& u, std::int64_t level_low,
                                std::int64_t level_high, std::uint64_t cap = kDefaultStepCap) {
    const std::int64_t nsq = norm_sq(u);
    const std::int64_t lo = level_low * nsq;
    const std::int64_t hi = level_high * nsq;
    std::uint64_t n = 0;
    while (true) {
        const std::int64_t p = dot(proc.position(), u);
        if (p < lo) return {SlabExit::low, n};
        if (p > hi) return {SlabExit::high, n};
        if (n >= cap) return {SlabExit::capped, n};
        proc.step();
        ++n;
    }
}

// Sample a start site from the entry measure mu.
inline IVec start_from_mu(const DirectionFrame& frame, CounterRng& rng) {
    double r = rng.next_double();
    for (std::size_t i = 0; i < frame.entry_set.size(); ++i) {
        const double p = rat_to_double(frame.mu[i]);
        if (r < p) return frame.entry_set[i];
        r -= p;
    }
    return frame.entry_set.back();
}

}  // namespace rwde
