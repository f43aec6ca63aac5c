#pragma once

// Dirichlet-distributed transition simplices and lazy i.i.d. environments on
// Z^d. A site's simplex is recomputed from its counter-based stream on every
// query, so the environment is a pure function of (master seed, site) and
// never depends on query order or worker scheduling.

#include "rwde/lattice.hpp"
#include "rwde/model.hpp"
#include "rwde/rng.hpp"

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace rwde {

inline constexpr double kSimplexTol = 1e-12;

struct Simplex {
    std::vector<double> components;  // aligned with the owning step/entry order

    void validate() const {
        double s = 0.0;
        for (double c : components) {
            if (c < 0.0) throw std::logic_error("simplex: negative component");
            s += c;
        }
        if (std::abs(s - 1.0) > kSimplexTol) throw std::logic_error("simplex: does not sum to 1");
    }
};

inline Simplex sample_dirichlet(const std::vector<Rat>& params, CounterRng& rng) {
    std::vector<double> p(params.size());
    for (std::size_t i = 0; i < params.size(); ++i) {
        if (params[i] <= 0) throw std::invalid_argument("dirichlet: parameters must be positive");
        p[i] = rat_to_double(params[i]);
    }
    Simplex s{sample_dirichlet_params(rng, p)};
    s.validate();
    return s;
}

class Environment {
  public:
    Environment(std::uint64_t master_seed, WeightSystem weights)
        : master_seed_(master_seed), weights_(std::move(weights)) {
        params_.reserve(weights_.num_steps());
        for (const auto& a : weights_.weights()) params_.push_back(rat_to_double(a));
    }

    std::uint64_t master_seed() const { return master_seed_; }
    const WeightSystem& weights() const { return weights_; }

    // Deterministic in (master_seed, x); Dirichlet(alpha) marginal,
    // independent across distinct sites.
    Simplex site_simplex(const IVec& x) const {
        CounterRng rng(site_key(master_seed_, StreamTag::site_env, x));
        return Simplex{sample_dirichlet_params(rng, params_)};
    }

    // The boundary component omega(boundary, .) over H0, with parameter
    // sum_{e : (x-e).u < 0} alpha_e at each x; its mean is mu.
    Simplex boundary_simplex(const DirectionFrame& frame) const {
        if (weights_.drift_dot(frame.u) <= 0)
            throw std::invalid_argument("drift condition violated: u.drift <= 0");
        const auto masses = entry_masses(frame.entry_set, frame.u, weights_);
        std::vector<double> p(masses.size());
        for (std::size_t i = 0; i < masses.size(); ++i) p[i] = rat_to_double(masses[i]);
        CounterRng rng(derive_key(master_seed_, StreamTag::boundary_env));
        return Simplex{sample_dirichlet_params(rng, p)};
    }

  private:
    std::uint64_t master_seed_;
    WeightSystem weights_;
    std::vector<double> params_;
};

}  // namespace rwde
