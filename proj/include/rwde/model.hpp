#pragma once

// Step sets and weight systems: the finite set of allowed jumps on Z^d with
// positive rational weights, plus the derived total weight and mean drift.

#include "rwde/rational.hpp"

#include <algorithm>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwde {

struct StepSet {
    int dim = 0;
    std::vector<IVec> steps;  // ordered; order fixes simplex component indexing
    bool nearest_neighbor_mode = false;

    StepSet() = default;

    StepSet(int d, std::vector<IVec> s, bool nearest_neighbor = false)
        : dim(d), steps(std::move(s)), nearest_neighbor_mode(nearest_neighbor) {
        validate();
    }

    static StepSet nearest_neighbor(int d) {
        std::vector<IVec> s;
        for (int i = 0; i < d; ++i) {
            IVec plus(d, 0), minus(d, 0);
            plus[i] = 1;
            minus[i] = -1;
            s.push_back(plus);
            s.push_back(minus);
        }
        return StepSet(d, std::move(s), true);
    }

    // {±e1, ±e2, ±(e1+e2)} on Z^2.
    static StepSet triangular() {
        std::vector<IVec> s{{1, 0}, {-1, 0}, {0, 1}, {0, -1}, {1, 1}, {-1, -1}};
        return StepSet(2, std::move(s), false);
    }

    std::size_t size() const { return steps.size(); }

    std::optional<std::size_t> index_of(const IVec& e) const {
        for (std::size_t i = 0; i < steps.size(); ++i)
            if (steps[i] == e) return i;
        return std::nullopt;
    }

    void validate() const {
        if (dim < 1) throw std::invalid_argument("step set: dimension must be >= 1");
        if (steps.empty()) throw std::invalid_argument("step set: no steps");
        std::set<IVec> seen;
        for (const auto& e : steps) {
            if (static_cast<int>(e.size()) != dim)
                throw std::invalid_argument("step set: step dimension mismatch");
            if (is_zero(e)) throw std::invalid_argument("step set: zero step");
            if (!seen.insert(e).second)
                throw std::invalid_argument("step set: duplicate step " + ivec_str(e));
        }
        if (nearest_neighbor_mode) {
            if (steps.size() != 2 * static_cast<std::size_t>(dim))
                throw std::invalid_argument("nearest-neighbor mode: expected 2d steps");
            for (const auto& e : steps) {
                if (norm_sq(e) != 1)
                    throw std::invalid_argument("nearest-neighbor mode: step " + ivec_str(e) +
                                                " is not a unit vector");
            }
        }
    }
};

class WeightSystem {
  public:
    WeightSystem(StepSet steps, std::vector<Rat> weights)
        : steps_(std::move(steps)), weights_(std::move(weights)) {
        if (weights_.size() != steps_.size())
            throw std::invalid_argument("weight system: weight count does not match step count");
        sigma_ = 0;
        for (const auto& a : weights_) {
            if (a <= 0) throw std::invalid_argument("weight system: weights must be positive");
            sigma_ += a;
        }
        drift_.assign(steps_.dim, Rat(0));
        for (std::size_t i = 0; i < steps_.size(); ++i)
            for (int j = 0; j < steps_.dim; ++j) drift_[j] += weights_[i] * steps_.steps[i][j];
        for (auto& c : drift_) c /= sigma_;
    }

    const StepSet& step_set() const { return steps_; }
    int dim() const { return steps_.dim; }
    std::size_t num_steps() const { return steps_.size(); }
    const IVec& step(std::size_t i) const { return steps_.steps[i]; }
    const Rat& weight(std::size_t i) const { return weights_[i]; }
    const std::vector<Rat>& weights() const { return weights_; }
    const Rat& sigma() const { return sigma_; }

    // Mean first step (1/Sigma) * sum_e alpha_e e, exact.
    const std::vector<Rat>& mean_drift() const { return drift_; }

    bool drift_is_zero() const {
        return std::all_of(drift_.begin(), drift_.end(), [](const Rat& c) { return c == 0; });
    }

    // u . Delta, exact; sign decidable for any integer u.
    Rat drift_dot(const IVec& u) const {
        if (static_cast<int>(u.size()) != steps_.dim)
            throw std::invalid_argument("drift_dot: dimension mismatch");
        Rat s = 0;
        for (int j = 0; j < steps_.dim; ++j) s += drift_[j] * u[j];
        return s;
    }

    // E[(X1.u)_+], E[(X1.u)_-] and E[X1.u] under the first-step law alpha/Sigma.
    Rat mean_proj_pos(const IVec& u) const {
        Rat s = 0;
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            const std::int64_t p = dot(steps_.steps[i], u);
            if (p > 0) s += weights_[i] * p;
        }
        return s / sigma_;
    }

    Rat mean_proj_neg(const IVec& u) const {
        Rat s = 0;
        for (std::size_t i = 0; i < steps_.size(); ++i) {
            const std::int64_t p = dot(steps_.steps[i], u);
            if (p < 0) s += weights_[i] * (-p);
        }
        return s / sigma_;
    }

    Rat mean_proj(const IVec& u) const { return mean_proj_pos(u) - mean_proj_neg(u); }

    // 2*Sigma - alpha_e - alpha_{-e} - 1; positive means the exit time from
    // the edge {x, x+e} has finite mean.
    Rat ballisticity_margin(const IVec& e) const {
        const auto ie = steps_.index_of(e);
        if (!ie) throw std::invalid_argument("ballisticity margin: step not in step set");
        const auto iopp = steps_.index_of(negate(e));
        if (!iopp)
            throw std::invalid_argument("ballisticity margin: opposite step " +
                                        ivec_str(negate(e)) + " not in step set");
        return 2 * sigma_ - weights_[*ie] - weights_[*iopp] - 1;
    }

  private:
    StepSet steps_;
    std::vector<Rat> weights_;
    Rat sigma_;
    std::vector<Rat> drift_;
};

inline WeightSystem nn_weights(int d, const std::vector<Rat>& alpha) {
    return WeightSystem(StepSet::nearest_neighbor(d), alpha);
}

}  // namespace rwde
