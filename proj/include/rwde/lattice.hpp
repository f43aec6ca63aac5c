#pragma once

// Exact lattice geometry for an integer direction u: primitive normalization,
// integer basis of the orthogonal sublattice u^perp (so the torus quotient is
// as small as possible), the entry set H0 of the discrete half-space
// {x.u >= 0}, the entry measure mu on H0, and step fluxes through u^perp.

#include "rwde/model.hpp"
#include "rwde/rational.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace rwde {

// Unique positive multiple of u_raw with coprime integer coordinates.
inline IVec normalize_direction(const std::vector<Rat>& u_raw) {
    if (u_raw.empty()) throw std::invalid_argument("degenerate direction: empty vector");
    Int lcm_den = 1;
    for (const auto& c : u_raw) {
        const Int den = boost::multiprecision::denominator(c);
        lcm_den = boost::multiprecision::lcm(lcm_den, den);
    }
    std::vector<Int> scaled(u_raw.size());
    Int g = 0;
    for (std::size_t i = 0; i < u_raw.size(); ++i) {
        scaled[i] = boost::multiprecision::numerator(u_raw[i]) * (lcm_den / boost::multiprecision::denominator(u_raw[i]));
        g = boost::multiprecision::gcd(g, scaled[i]);
    }
    if (g == 0) throw std::invalid_argument("degenerate direction: zero vector");
    IVec u(u_raw.size());
    for (std::size_t i = 0; i < u_raw.size(); ++i) u[i] = static_cast<std::int64_t>(scaled[i] / g);
    return u;
}

inline IVec normalize_direction(const IVec& u_raw) {
    std::vector<Rat> r(u_raw.begin(), u_raw.end());
    return normalize_direction(r);
}

namespace detail {

// Fix a deterministic sign: first nonzero coordinate positive.
inline void canonical_sign(IVec& v) {
    for (auto c : v) {
        if (c > 0) return;
        if (c < 0) {
            for (auto& x : v) x = -x;
            return;
        }
    }
}

}  // namespace detail

// Basis of the full sublattice {x in Z^d : x.u = 0} for primitive u, obtained
// by unimodular column reduction of the identity against the form x -> x.u.
// The returned family satisfies |det(u, u_2, ..., u_d)| = ||u||^2.
inline std::vector<IVec> orthogonal_basis(const IVec& u) {
    const int d = static_cast<int>(u.size());
    if (d == 0 || is_zero(u)) throw std::invalid_argument("orthogonal basis: degenerate direction");
    if (d == 1) return {};

    std::vector<IVec> cols(d, IVec(d, 0));
    for (int j = 0; j < d; ++j) cols[j][j] = 1;
    IVec dots(u.begin(), u.end());  // dots[j] = u . cols[j]

    // Euclidean column reduction until a single nonzero dot remains.
    while (true) {
        int pivot = -1;
        for (int j = 0; j < d; ++j) {
            if (dots[j] != 0 && (pivot < 0 || std::llabs(dots[j]) < std::llabs(dots[pivot])))
                pivot = j;
        }
        if (pivot < 0) throw std::logic_error("orthogonal basis: zero form");
        bool reduced_any = false;
        for (int j = 0; j < d; ++j) {
            if (j == pivot || dots[j] == 0) continue;
            const std::int64_t q = dots[j] / dots[pivot];
            if (q != 0) {
                cols[j] = sub(cols[j], scale(q, cols[pivot]));
                dots[j] -= q * dots[pivot];
            }
            reduced_any = reduced_any || dots[j] != 0;
        }
        bool single = true;
        for (int j = 0; j < d; ++j)
            if (j != pivot && dots[j] != 0) single = false;
        if (single) {
            std::vector<IVec> basis;
            for (int j = 0; j < d; ++j)
                if (j != pivot) basis.push_back(cols[j]);
            for (auto& v : basis) detail::canonical_sign(v);
            std::sort(basis.begin(), basis.end());
            // gcd(u) = 1 makes the surviving dot +-1, so the remaining columns
            // generate the whole kernel; cross-check via the determinant.
            std::vector<IVec> full{u};
            full.insert(full.end(), basis.begin(), basis.end());
            if (abs_det_columns(full) != Int(norm_sq(u)))
                throw std::logic_error("orthogonal basis: determinant check failed (u not primitive?)");
            return basis;
        }
        if (!reduced_any) throw std::logic_error("orthogonal basis: reduction stalled");
    }
}

// Exact coordinates in the frame (b_1, ..., b_d); column basis inverted once.
class FrameSolver {
  public:
    explicit FrameSolver(const std::vector<IVec>& basis_columns) {
        d_ = static_cast<int>(basis_columns.size());
        std::vector<std::vector<Rat>> m(d_, std::vector<Rat>(2 * d_, Rat(0)));
        for (int j = 0; j < d_; ++j) {
            if (static_cast<int>(basis_columns[j].size()) != d_)
                throw std::invalid_argument("frame: basis column dimension mismatch");
            for (int i = 0; i < d_; ++i) m[i][j] = basis_columns[j][i];
        }
        for (int i = 0; i < d_; ++i) m[i][d_ + i] = 1;
        for (int col = 0; col < d_; ++col) {
            int p = col;
            while (p < d_ && m[p][col] == 0) ++p;
            if (p == d_) throw std::invalid_argument("frame: basis is singular");
            std::swap(m[col], m[p]);
            const Rat piv = m[col][col];
            for (int j = 0; j < 2 * d_; ++j) m[col][j] /= piv;
            for (int i = 0; i < d_; ++i) {
                if (i == col || m[i][col] == 0) continue;
                const Rat f = m[i][col];
                for (int j = 0; j < 2 * d_; ++j) m[i][j] -= f * m[col][j];
            }
        }
        inv_.assign(d_, std::vector<Rat>(d_));
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) inv_[i][j] = m[i][d_ + j];
    }

    std::vector<Rat> coords(const IVec& x) const {
        if (static_cast<int>(x.size()) != d_) throw std::invalid_argument("frame: point dimension mismatch");
        std::vector<Rat> c(d_, Rat(0));
        for (int i = 0; i < d_; ++i)
            for (int j = 0; j < d_; ++j) c[i] += inv_[i][j] * x[j];
        return c;
    }

  private:
    int d_ = 0;
    std::vector<std::vector<Rat>> inv_;
};

inline Int floor_rat(const Rat& r) {
    Int num = boost::multiprecision::numerator(r);
    Int den = boost::multiprecision::denominator(r);
    Int q = num / den;
    if (num % den != 0 && num < 0) --q;
    return q;
}

// Flux of step e through the oriented hyperplane u^perp, scaled by the
// hypersurface area: |det(e, u_2, ..., u_d)| when u.e > 0, else 0. Counts the
// lattice classes {x : x.u <= 0 < (x+e).u} modulo Z u_2 + ... + Z u_d.
inline Int flux(const IVec& u, const std::vector<IVec>& ortho_basis, const IVec& e) {
    if (dot(u, e) <= 0) return 0;
    if (u.size() == 1) return Int(std::llabs(e[0]));
    std::vector<IVec> cols{e};
    cols.insert(cols.end(), ortho_basis.begin(), ortho_basis.end());
    return abs_det_columns(cols);
}

// One representative per class of H = {x : exists e, (x-e).u < 0 <= x.u}
// modulo the orthogonal sublattice; each representative has frame coordinates
// t in [0, max_e(e.u)/||u||^2) and c_i in [0,1), ordered lexicographically by
// those exact coordinates.
inline std::vector<IVec> entry_points(const IVec& u, const std::vector<IVec>& ortho_basis,
                                      const StepSet& steps) {
    const int d = static_cast<int>(u.size());
    std::int64_t max_proj = 0;
    for (const auto& e : steps.steps) max_proj = std::max(max_proj, dot(e, u));
    if (max_proj <= 0) return {};  // no step enters the half-space

    std::vector<IVec> frame{u};
    frame.insert(frame.end(), ortho_basis.begin(), ortho_basis.end());
    const FrameSolver solver(frame);

    // Bounding box of {t u + sum c_i u_i : t in [0, max_proj/||u||^2], c_i in [0,1]}.
    const Rat tmax = Rat(max_proj, norm_sq(u));
    std::vector<std::int64_t> lo(d, 0), hi(d, 0);
    for (int j = 0; j < d; ++j) {
        Rat lo_r = std::min(Rat(0), Rat(tmax * u[j]));
        Rat hi_r = std::max(Rat(0), Rat(tmax * u[j]));
        for (const auto& b : ortho_basis) {
            lo_r += std::min(Rat(0), Rat(b[j]));
            hi_r += std::max(Rat(0), Rat(b[j]));
        }
        lo[j] = static_cast<std::int64_t>(floor_rat(lo_r));
        hi[j] = static_cast<std::int64_t>(-floor_rat(-hi_r));  // ceil
    }

    struct Entry {
        std::vector<Rat> coords;
        IVec site;
    };
    std::vector<Entry> found;

    IVec x(lo.begin(), lo.end());
    while (true) {
        const std::int64_t proj = dot(x, u);
        if (proj >= 0 && proj < max_proj) {
            bool in_h = false;
            for (const auto& e : steps.steps) {
                if (proj - dot(e, u) < 0) {
                    in_h = true;
                    break;
                }
            }
            if (in_h) {
                auto c = solver.coords(x);
                bool canonical = true;
                for (int i = 1; i < d; ++i)
                    if (c[i] < 0 || c[i] >= 1) canonical = false;
                if (canonical) found.push_back({std::move(c), x});
            }
        }
        int j = 0;
        while (j < d && ++x[j] > hi[j]) {
            x[j] = lo[j];
            ++j;
        }
        if (j == d) break;
    }

    std::sort(found.begin(), found.end(),
              [](const Entry& a, const Entry& b) { return a.coords < b.coords; });
    std::vector<IVec> h0;
    h0.reserve(found.size());
    for (auto& f : found) h0.push_back(std::move(f.site));
    return h0;
}

// Unnormalized entry masses: mass(x) = sum of alpha_e over steps entering x
// from the complementary half-space.
inline std::vector<Rat> entry_masses(const std::vector<IVec>& h0, const IVec& u,
                                     const WeightSystem& w) {
    std::vector<Rat> masses;
    masses.reserve(h0.size());
    for (const auto& x : h0) {
        Rat m = 0;
        for (std::size_t i = 0; i < w.num_steps(); ++i)
            if (dot(sub(x, w.step(i)), u) < 0) m += w.weight(i);
        masses.push_back(m);
    }
    return masses;
}

struct EntryMeasure {
    std::vector<Rat> mu;  // aligned with H0, sums to 1 exactly
    Rat normalizer;       // Z
};

inline EntryMeasure entry_measure(const std::vector<IVec>& h0, const IVec& u,
                                  const WeightSystem& w) {
    if (w.drift_dot(u) <= 0) throw std::invalid_argument("drift condition violated: u.drift <= 0");
    auto masses = entry_masses(h0, u, w);
    Rat z = 0;
    for (const auto& m : masses) z += m;
    if (z <= 0) throw std::logic_error("entry measure: empty normalizer");
    EntryMeasure em;
    em.normalizer = z;
    em.mu.reserve(masses.size());
    for (auto& m : masses) em.mu.push_back(m / z);
    return em;
}

// Direction frame: primitive u, smallest integer scale k with ||k u|| >=
// max_e ||e|| (used only when slicing slabs into cylinders), the orthogonal
// sublattice basis, and the entry set with its measure. Geometry is always
// expressed against the primitive u.
struct DirectionFrame {
    IVec u;
    std::int64_t scale = 1;
    std::vector<IVec> ortho_basis;
    std::vector<IVec> entry_set;  // H0
    std::vector<Rat> mu;          // aligned with entry_set
    Rat normalizer;               // Z

    std::int64_t u_norm_sq() const { return norm_sq(u); }
    IVec scaled_u() const { return rwde::scale(scale, u); }

    std::size_t entry_index(const IVec& x) const {
        for (std::size_t i = 0; i < entry_set.size(); ++i)
            if (entry_set[i] == x) return i;
        throw std::invalid_argument("entry point not in H0: " + ivec_str(x));
    }
};

inline DirectionFrame make_frame(const WeightSystem& w, const IVec& u_any) {
    DirectionFrame f;
    f.u = normalize_direction(u_any);
    if (static_cast<int>(f.u.size()) != w.dim())
        throw std::invalid_argument("direction dimension does not match the model");
    if (w.drift_dot(f.u) <= 0)
        throw std::invalid_argument("drift condition violated: u.drift <= 0");
    f.ortho_basis = orthogonal_basis(f.u);
    std::int64_t max_step_sq = 0;
    for (const auto& e : w.step_set().steps) max_step_sq = std::max(max_step_sq, norm_sq(e));
    f.scale = 1;
    while (f.scale * f.scale * norm_sq(f.u) < max_step_sq) ++f.scale;
    f.entry_set = entry_points(f.u, f.ortho_basis, w.step_set());
    auto em = entry_measure(f.entry_set, f.u, w);
    f.mu = std::move(em.mu);
    f.normalizer = em.normalizer;
    return f;
}

inline DirectionFrame make_frame(const WeightSystem& w, const std::vector<Rat>& u_raw) {
    return make_frame(w, normalize_direction(u_raw));
}

}  // namespace rwde
