#pragma once

// The finite graph G_{N,L}: the slab {0 <= x.u' <= L ||u'||^2} wrapped on a
// torus in the orthogonal directions (period N u_i), together with a left
// sink vertex (bd), a right collector (R), boundary edges per step, and one
// collector edge (R, bd) weighted so the whole graph has zero weight
// divergence. u' is the frame's scaled direction, which guarantees that no
// step can jump across a slab face of thickness ||u'||^2.

#include "rwde/graph.hpp"
#include "rwde/lattice.hpp"
#include "rwde/model.hpp"

#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace rwde {

struct CylinderGraph {
    Digraph graph;
    std::vector<IVec> sites;  // canonical representatives; vertex id = index
    int right_vertex = -1;
    int boundary_vertex = -1;
    std::vector<int> left_set;   // enter-capable through the left face
    std::vector<int> right_set;  // exit-capable through the right face
    int N = 1;
    int L = 1;
    DirectionFrame frame;
    std::vector<WeightSystem> weights;  // single element; wrapped for default construction
    Rat collector_weight;               // alpha_(R, bd)
    Rat left_exit_weight;               // alpha_(left set, bd)
    int collector_edge = -1;            // edge id of (R, bd)
    bool reversed = false;

    int num_vertices() const { return graph.num_vertices; }
    const WeightSystem& weight_system() const { return weights.front(); }

    std::string vertex_name(int v) const {
        if (v == right_vertex) return "R";
        if (v == boundary_vertex) return "bd";
        return ivec_str(sites[v]);
    }
};

namespace detail {

struct SiteIndexer {
    std::map<IVec, int> ids;
    int id_of(const IVec& x) const {
        auto it = ids.find(x);
        if (it == ids.end()) throw std::logic_error("cylinder: site lookup failed for " + ivec_str(x));
        return it->second;
    }
};

}  // namespace detail

// Canonicalize a slab site: reduce each orthogonal frame coordinate mod N.
inline IVec canonical_cylinder_site(const IVec& x, const DirectionFrame& frame,
                                    const FrameSolver& solver, int N) {
    auto c = solver.coords(x);
    IVec y = x;
    for (std::size_t i = 1; i < c.size(); ++i) {
        const Int m = floor_rat(c[i] / N);
        if (m != 0) y = sub(y, scale(static_cast<std::int64_t>(m) * N, frame.ortho_basis[i - 1]));
    }
    return y;
}

inline CylinderGraph build_cylinder(const DirectionFrame& frame, const WeightSystem& w, int N,
                                    int L) {
    if (N < 1 || L < 1) throw std::invalid_argument("cylinder: N and L must be >= 1");
    if (w.drift_dot(frame.u) <= 0)
        throw std::invalid_argument("drift condition violated: u.drift <= 0");

    const int d = w.dim();
    const IVec u_scaled = frame.scaled_u();
    const std::int64_t slab_height = static_cast<std::int64_t>(L) * norm_sq(u_scaled);
    for (const auto& e : w.step_set().steps) {
        if (norm_sq(e) > norm_sq(u_scaled))
            throw std::invalid_argument("cylinder: frame scale too small for step " + ivec_str(e));
        if (std::llabs(dot(e, u_scaled)) > slab_height)
            throw std::invalid_argument("cylinder: slab too thin, step " + ivec_str(e) +
                                        " jumps across it; increase L");
    }

    std::vector<IVec> frame_cols{u_scaled};
    frame_cols.insert(frame_cols.end(), frame.ortho_basis.begin(), frame.ortho_basis.end());
    const FrameSolver solver(frame_cols);

    // Enumerate canonical sites: t in [0, L], orthogonal coordinates in [0, N).
    std::vector<std::int64_t> lo(d, 0), hi(d, 0);
    for (int j = 0; j < d; ++j) {
        Rat lo_r = std::min(Rat(0), Rat(static_cast<std::int64_t>(L) * u_scaled[j]));
        Rat hi_r = std::max(Rat(0), Rat(static_cast<std::int64_t>(L) * u_scaled[j]));
        for (const auto& b : frame.ortho_basis) {
            lo_r += std::min(Rat(0), Rat(static_cast<std::int64_t>(N) * b[j]));
            hi_r += std::max(Rat(0), Rat(static_cast<std::int64_t>(N) * b[j]));
        }
        lo[j] = static_cast<std::int64_t>(floor_rat(lo_r));
        hi[j] = static_cast<std::int64_t>(-floor_rat(-hi_r));
    }

    struct SiteEntry {
        std::vector<Rat> coords;
        IVec site;
    };
    std::vector<SiteEntry> entries;
    IVec x(lo.begin(), lo.end());
    while (true) {
        const std::int64_t proj = dot(x, u_scaled);
        if (proj >= 0 && proj <= slab_height) {
            auto c = solver.coords(x);
            bool canonical = true;
            for (int i = 1; i < d; ++i)
                if (c[i] < 0 || c[i] >= N) canonical = false;
            if (canonical) entries.push_back({std::move(c), x});
        }
        int j = 0;
        while (j < d && ++x[j] > hi[j]) {
            x[j] = lo[j];
            ++j;
        }
        if (j == d) break;
    }
    std::sort(entries.begin(), entries.end(),
              [](const SiteEntry& a, const SiteEntry& b) { return a.coords < b.coords; });

    CylinderGraph g;
    g.N = N;
    g.L = L;
    g.frame = frame;
    g.weights.push_back(w);
    detail::SiteIndexer indexer;
    for (auto& e : entries) {
        indexer.ids.emplace(e.site, static_cast<int>(g.sites.size()));
        g.sites.push_back(std::move(e.site));
    }
    const int n_sites = static_cast<int>(g.sites.size());
    g.right_vertex = n_sites;
    g.boundary_vertex = n_sites + 1;
    g.graph = Digraph::with_vertices(n_sites + 2);

    Rat right_boundary_exits = 0;  // sum over exit-capable-right sites of all their exits
    Rat left_boundary_exits = 0;   // same for enter-capable-left sites

    for (int v = 0; v < n_sites; ++v) {
        const IVec& site = g.sites[v];
        bool exit_right_capable = false;
        bool enter_left_capable = false;
        Rat all_exits = 0;
        for (std::size_t s = 0; s < w.num_steps(); ++s) {
            const IVec& e = w.step(s);
            const std::int64_t fwd = dot(add(site, e), u_scaled);
            if (fwd < 0) {
                g.graph.add_edge(v, g.boundary_vertex, static_cast<int>(s), w.weight(s));
                all_exits += w.weight(s);
            } else if (fwd > slab_height) {
                g.graph.add_edge(v, g.right_vertex, static_cast<int>(s), w.weight(s));
                all_exits += w.weight(s);
                exit_right_capable = true;
            } else {
                const IVec y = canonical_cylinder_site(add(site, e), frame, solver, N);
                g.graph.add_edge(v, indexer.id_of(y), static_cast<int>(s), w.weight(s));
            }
            const std::int64_t bwd = dot(sub(site, e), u_scaled);
            if (bwd < 0) {
                g.graph.add_edge(g.boundary_vertex, v, static_cast<int>(s), w.weight(s));
                enter_left_capable = true;
            } else if (bwd > slab_height) {
                g.graph.add_edge(g.right_vertex, v, static_cast<int>(s), w.weight(s));
            }
        }
        if (exit_right_capable) {
            g.right_set.push_back(v);
            right_boundary_exits += all_exits;
        }
        if (enter_left_capable) {
            g.left_set.push_back(v);
            left_boundary_exits += all_exits;
        }
    }

    g.collector_weight = right_boundary_exits - left_boundary_exits;
    if (g.collector_weight <= 0)
        throw std::invalid_argument("drift condition violated on cylinder: collector weight " +
                                    rat_str(g.collector_weight) + " <= 0");
    g.collector_edge = static_cast<int>(g.graph.edges.size());
    g.graph.add_edge(g.right_vertex, g.boundary_vertex, kCollectorLabel, g.collector_weight);

    if (!g.graph.divergence_free())
        throw std::logic_error(
            "cylinder: divergence check failed; the boundary sets overlap for this (u, steps, L), "
            "increase L");

    g.left_exit_weight = g.graph.in_weight(g.boundary_vertex) - g.collector_weight;
    return g;
}

// Every edge reversed with the same weight; edge ids are preserved, so the
// reverse of edge i is edge i. The reverse contains the edge (bd, R).
inline CylinderGraph reverse_cylinder(const CylinderGraph& g) {
    CylinderGraph r = g;
    r.graph = reverse(g.graph);
    r.reversed = !g.reversed;
    return r;
}

// alpha_(L,bd) / alpha_(R,bd), checked against the step-law expectations
// sum_e (-u.e)_+ alpha_e / sum_e (u.e) alpha_e.
inline Rat exit_ratio(const CylinderGraph& g) {
    const Rat ratio = g.left_exit_weight / g.collector_weight;
    const WeightSystem& w = g.weight_system();
    Rat num = 0, den = 0;
    for (std::size_t s = 0; s < w.num_steps(); ++s) {
        const std::int64_t p = dot(w.step(s), g.frame.u);
        if (p < 0) num += w.weight(s) * (-p);
        den += w.weight(s) * p;
    }
    if (ratio != num / den)
        throw std::logic_error("exit ratio mismatch: " + rat_str(ratio) + " vs " +
                               rat_str(num / den));
    return ratio;
}

// Closed forms from the flux computation; exact rationals.
inline Rat collector_weight_closed_form(const DirectionFrame& frame, const WeightSystem& w,
                                        int N) {
    std::vector<IVec> cols{frame.u};
    cols.insert(cols.end(), frame.ortho_basis.begin(), frame.ortho_basis.end());
    const Rat det{abs_det_columns(cols)};
    Rat proj_sum = 0;  // u . sum_e alpha_e e
    for (std::size_t s = 0; s < w.num_steps(); ++s) proj_sum += w.weight(s) * dot(w.step(s), frame.u);
    Rat n_pow = 1;
    for (int i = 1; i < w.dim(); ++i) n_pow *= N;
    return n_pow * det * proj_sum / norm_sq(frame.u);
}

inline Rat left_weight_closed_form(const DirectionFrame& frame, const WeightSystem& w, int N) {
    std::vector<IVec> cols{frame.u};
    cols.insert(cols.end(), frame.ortho_basis.begin(), frame.ortho_basis.end());
    const Rat det{abs_det_columns(cols)};
    Rat neg_sum = 0;  // sum_e (-u.e)_+ alpha_e
    for (std::size_t s = 0; s < w.num_steps(); ++s) {
        const std::int64_t p = dot(w.step(s), frame.u);
        if (p < 0) neg_sum += w.weight(s) * (-p);
    }
    Rat n_pow = 1;
    for (int i = 1; i < w.dim(); ++i) n_pow *= N;
    return n_pow * det * neg_sum / norm_sq(frame.u);
}

// Vertex ids of the N^{d-1} torus translates of entry point h0_index.
inline std::vector<int> entry_vertex_ids(const CylinderGraph& g, std::size_t h0_index) {
    const auto& frame = g.frame;
    const IVec& rep = frame.entry_set.at(h0_index);
    std::vector<IVec> frame_cols{g.frame.scaled_u()};
    frame_cols.insert(frame_cols.end(), frame.ortho_basis.begin(), frame.ortho_basis.end());
    const FrameSolver solver(frame_cols);
    detail::SiteIndexer indexer;
    for (std::size_t i = 0; i < g.sites.size(); ++i) indexer.ids.emplace(g.sites[i], static_cast<int>(i));

    const int d = static_cast<int>(frame.u.size());
    std::vector<int> ids;
    std::vector<int> offs(std::max(0, d - 1), 0);
    while (true) {
        IVec x = rep;
        for (int i = 0; i + 1 < d; ++i) x = add(x, scale(offs[i], frame.ortho_basis[i]));
        ids.push_back(indexer.id_of(canonical_cylinder_site(x, frame, solver, g.N)));
        int j = 0;
        while (j < d - 1 && ++offs[j] >= g.N) {
            offs[j] = 0;
            ++j;
        }
        if (j >= d - 1) break;
    }
    return ids;
}

// Plain-text edge list: "source target label weight" per line, one header.
inline std::string edge_list_dump(const CylinderGraph& g) {
    std::ostringstream os;
    os << "# source target step weight\n";
    for (const auto& e : g.graph.edges) {
        const std::string label = e.label == kCollectorLabel ? "collector" : std::to_string(e.label);
        os << g.vertex_name(e.src) << "\t" << g.vertex_name(e.dst) << "\t" << label << "\t"
           << rat_str(e.weight) << "\n";
    }
    return os.str();
}

}  // namespace rwde
