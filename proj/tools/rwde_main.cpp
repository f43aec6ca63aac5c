// rwde: reinforced / random-environment walk experiments.
//
// Single binary with one subcommand per experiment plus catalog, frame and
// graph inspection, config-driven runs, and trajectory export. Exit status:
// 0 when every verdict passes, 1 when an experiment fails its threshold,
// 2 for configuration or validation errors.

#include "rwde/config.hpp"
#include "rwde/report.hpp"
#include "rwde/walk.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace rwde;

struct CommonCli {
    int dim = 2;
    std::string alpha = "2,1,1,1";
    std::string step_set;     // "1,0;-1,0;0,1;0,-1"
    bool triangular = false;
    std::string u = "1,0";
    std::uint64_t seed = 1;
    int workers = 1;
    bool json = false;
    std::string out_dir;
};

void add_common_flags(CLI::App* cmd, CommonCli& c, bool with_direction = true) {
    cmd->add_option("--dim", c.dim, "lattice dimension")->capture_default_str();
    cmd->add_option("--alpha", c.alpha,
                    "step weights, comma separated, rationals allowed (\"3/2\")")
        ->capture_default_str();
    cmd->add_option("--step-set", c.step_set,
                    "custom step set, e.g. \"1,0;-1,0;0,1;0,-1\" (default: nearest neighbor)");
    cmd->add_flag("--triangular", c.triangular, "use the planar triangular step set");
    if (with_direction)
        cmd->add_option("--u", c.u, "direction, integer or rational tuple (\"2,1\", \"1/2,1/3\")")
            ->capture_default_str();
    cmd->add_option("--seed", c.seed, "master seed; all randomness derives from it")
        ->capture_default_str();
    cmd->add_option("--workers", c.workers, "worker threads (results identical for any count)")
        ->capture_default_str();
    cmd->add_flag("--json", c.json, "emit the report as JSON on stdout");
    cmd->add_option("--out", c.out_dir, "directory for report JSON files");
}

WeightSystem model_from_cli(const CommonCli& c) {
    StepSet steps;
    if (!c.step_set.empty()) {
        std::vector<IVec> list;
        std::stringstream ss(c.step_set);
        std::string part;
        while (std::getline(ss, part, ';')) {
            IVec e;
            for (const auto& r : parse_tuple(part)) {
                if (boost::multiprecision::denominator(r) != 1)
                    throw ConfigError("--step-set: integer coordinates only");
                e.push_back(static_cast<std::int64_t>(boost::multiprecision::numerator(r)));
            }
            list.push_back(std::move(e));
        }
        steps = StepSet(c.dim, std::move(list));
    } else if (c.triangular) {
        steps = StepSet::triangular();
    } else {
        steps = StepSet::nearest_neighbor(c.dim);
    }
    return WeightSystem(std::move(steps), parse_tuple(c.alpha));
}

IVec direction_from_cli(const CommonCli& c) { return normalize_direction(parse_tuple(c.u)); }

RunOptions options_from_cli(const CommonCli& c) {
    RunOptions opt;
    opt.seed = c.seed;
    opt.workers = c.workers;
    return opt;
}

int emit_report(const ExperimentReport& report, const CommonCli& c) {
    const Json j = report_to_json(report);
    if (c.json)
        std::cout << j.dump(2) << "\n";
    else
        std::cout << render_report_text(report) << "\n";
    if (!c.out_dir.empty()) {
        std::filesystem::create_directories(c.out_dir);
        const auto path = std::filesystem::path(c.out_dir) / (report.name + ".json");
        std::ofstream f(path);
        f << j.dump(2) << "\n";
        if (!f) throw std::runtime_error("could not write " + path.string());
    }
    return report.pass ? 0 : 1;
}

Json frame_to_json(const DirectionFrame& f) {
    Json j;
    j["u"] = f.u;
    j["scale"] = f.scale;
    Json basis = Json::array();
    for (const auto& b : f.ortho_basis) basis.push_back(b);
    j["basis"] = basis;
    Json h0 = Json::array();
    for (const auto& x : f.entry_set) h0.push_back(x);
    j["H0"] = h0;
    Json mu = Json::array();
    for (const auto& m : f.mu) mu.push_back(rat_str(m));
    j["mu"] = mu;
    j["Z"] = rat_str(f.normalizer);
    return j;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"oriented-edge reinforced walks and walks in Dirichlet environment: "
                 "exact identities and Monte Carlo verification"};
    app.require_subcommand(1);

    // list ------------------------------------------------------------------
    auto* list_cmd = app.add_subcommand("list", "catalog of experiments with identity anchors");
    bool list_json = false;
    list_cmd->add_flag("--json", list_json, "machine-readable catalog");

    // frame / graph -----------------------------------------------------------
    CommonCli frame_cli;
    auto* frame_cmd = app.add_subcommand("frame", "dump the direction frame (basis, H0, mu) as JSON");
    add_common_flags(frame_cmd, frame_cli);

    CommonCli graph_cli;
    int graph_n = 1, graph_l = 1;
    std::string graph_file;
    auto* graph_cmd = app.add_subcommand("graph", "dump the cylinder graph as a plain-text edge list");
    add_common_flags(graph_cmd, graph_cli);
    graph_cmd->add_option("--N", graph_n, "torus refinement")->capture_default_str();
    graph_cmd->add_option("--L", graph_l, "slab length")->capture_default_str();
    graph_cmd->add_option("--out-file", graph_file, "write the edge list to a file");

    // walk --------------------------------------------------------------------
    CommonCli walk_cli;
    std::string walk_mode = "urn";
    std::uint64_t walk_steps = 1000;
    std::string walk_csv;
    std::string walk_start = "";
    auto* walk_cmd = app.add_subcommand("walk", "generate one trajectory and export it as CSV");
    add_common_flags(walk_cmd, walk_cli, false);
    walk_cmd->add_option("--mode", walk_mode, "urn | quenched")->capture_default_str();
    walk_cmd->add_option("--n-steps", walk_steps, "number of steps")->capture_default_str();
    walk_cmd->add_option("--csv", walk_csv, "CSV output path (stdout when omitted)");
    walk_cmd->add_option("--start", walk_start, "start site, e.g. \"0,0\"");

    // env-window ----------------------------------------------------------------
    CommonCli env_cli;
    std::string env_min = "-1,-1", env_max = "1,1";
    auto* env_cmd = app.add_subcommand(
        "env-window", "dump the site simplices of a lattice window as JSON (debugging aid)");
    add_common_flags(env_cmd, env_cli, false);
    env_cmd->add_option("--min", env_min, "lower corner, e.g. \"-1,-1\"")->capture_default_str();
    env_cmd->add_option("--max", env_max, "upper corner, e.g. \"1,1\"")->capture_default_str();

    // run --config --------------------------------------------------------------
    CommonCli run_cli;
    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run the experiment described by a JSON config");
    run_cmd->add_option("--config", config_path, "path to the config file")->required();
    add_common_flags(run_cmd, run_cli);

    // experiment subcommands ----------------------------------------------------
    struct ExpCli {
        CommonCli common;
        std::vector<int> ladder;
        int L = 0;
        int N = 1;
        int L_trunc = 200;
        std::uint64_t walks = 100000;
        std::uint64_t envs = 0;
        std::uint64_t steps = 100000;
        int max_cycle_len = 8;
        std::uint64_t budget = 1'000'000;
        double angle_threshold = 0.1;
    };

    auto add_experiment = [&](const char* name, const char* help) {
        auto cli = std::make_shared<ExpCli>();
        auto* cmd = app.add_subcommand(name, help);
        add_common_flags(cmd, cli->common);
        return std::pair{cmd, cli};
    };

    auto [identity_cmd, identity_cli] = add_experiment(
        "identity", "half-space stay probability vs the exact ratio identity (Eq. (4))");
    identity_cli->ladder = {10, 20, 40, 80};
    identity_cmd->add_option("--L-ladder", identity_cli->ladder, "slab levels")->delimiter(',');
    identity_cmd->add_option("--walks", identity_cli->walks, "walks per level")->capture_default_str();

    auto [ratio_cmd, ratio_cli] =
        add_experiment("slab-ratio", "slab exit probability ratio vs the exact ratio (Eq. (7))");
    ratio_cli->L = 10;
    ratio_cmd->add_option("--L", ratio_cli->L, "slab half-length")->capture_default_str();
    ratio_cmd->add_option("--walks", ratio_cli->walks, "walks per side")->capture_default_str();

    auto [return_cmd, return_cli] =
        add_experiment("return-time", "conditional return time identity");
    return_cmd->add_option("--L-trunc", return_cli->L_trunc, "truncation level")->capture_default_str();
    return_cmd->add_option("--walks", return_cli->walks, "walks per side")->capture_default_str();

    auto [beta_cmd, beta_cli] = add_experiment(
        "beta-law", "quenched stay probability on the cylinder vs the Beta law (Eq. (5))");
    beta_cli->L = 200;
    beta_cli->envs = 2000;
    std::string beta_samples_csv;
    beta_cmd->add_option("--L", beta_cli->L, "cylinder truncation")->capture_default_str();
    beta_cmd->add_option("--envs", beta_cli->envs, "sampled environments")->capture_default_str();
    beta_cmd->add_option("--samples-csv", beta_samples_csv,
                         "dump the sampled quenched probabilities as CSV");

    auto [lemma1_cmd, lemma1_cli] = add_experiment(
        "verify-lemma1", "exact closed-path reversal check on the cylinder graph (Lemma 1)");
    lemma1_cli->L = 1;
    lemma1_cmd->add_option("--N", lemma1_cli->N, "torus refinement")->capture_default_str();
    lemma1_cmd->add_option("--L", lemma1_cli->L, "slab length")->capture_default_str();
    lemma1_cmd->add_option("--max-cycle-len", lemma1_cli->max_cycle_len, "cycle length bound")
        ->capture_default_str();
    lemma1_cmd->add_option("--budget", lemma1_cli->budget, "cycle count budget")->capture_default_str();

    auto [lemma2_cmd, lemma2_cli] = add_experiment(
        "verify-lemma2", "environment reversal: cycles preserved, Beta marginals (Lemma 2)");
    lemma2_cli->L = 2;
    lemma2_cli->envs = 5000;
    lemma2_cli->max_cycle_len = 6;
    lemma2_cmd->add_option("--L", lemma2_cli->L, "slab length")->capture_default_str();
    lemma2_cmd->add_option("--envs", lemma2_cli->envs, "sampled environments")->capture_default_str();
    lemma2_cmd->add_option("--max-cycle-len", lemma2_cli->max_cycle_len, "cycle length bound")
        ->capture_default_str();

    auto [trans_cmd, trans_cli] = add_experiment(
        "transience", "slab escape probabilities dominate the exact bound (Theorem 1)");
    trans_cli->ladder = {5, 10, 20, 40};
    trans_cmd->add_option("--L-ladder", trans_cli->ladder, "slab levels")->delimiter(',');
    trans_cmd->add_option("--walks", trans_cli->walks, "walks per level")->capture_default_str();

    auto [shift_cmd, shift_cli] = add_experiment(
        "start-shift", "entry-measure start equals sink start on the cylinder graph");
    shift_cli->L = 2;
    shift_cmd->add_option("--N", shift_cli->N, "torus refinement")->capture_default_str();
    shift_cmd->add_option("--L", shift_cli->L, "slab length")->capture_default_str();
    shift_cmd->add_option("--walks", shift_cli->walks, "walks per side")->capture_default_str();

    auto [dir_cmd, dir_cli] = add_experiment(
        "direction", "asymptotic direction of the reinforced walk (Corollary)");
    dir_cli->walks = 100;
    dir_cmd->add_option("--steps", dir_cli->steps, "steps per walk")->capture_default_str();
    dir_cmd->add_option("--walks", dir_cli->walks, "number of walks")->capture_default_str();
    dir_cmd->add_option("--angle-threshold", dir_cli->angle_threshold, "final mean angle bound")
        ->capture_default_str();

    auto [osc_cmd, osc_cli] = add_experiment(
        "oscillate", "demonstration: projection oscillation when u.drift = 0 (no verdict)");
    osc_cli->walks = 20;
    osc_cmd->add_option("--steps", osc_cli->steps, "steps per walk")->capture_default_str();
    osc_cmd->add_option("--walks", osc_cli->walks, "number of walks")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        { const int code = app.exit(e); return code == 0 ? 0 : 2; }
    }

    try {
        if (app.got_subcommand(list_cmd)) {
            const auto& catalog = experiment_catalog();
            if (list_json) {
                Json arr = Json::array();
                for (const auto& e : catalog)
                    arr.push_back(Json{{"name", e.name},
                                       {"anchor", e.anchor},
                                       {"summary", e.summary},
                                       {"defaults", e.defaults}});
                std::cout << arr.dump(2) << "\n";
            } else {
                for (const auto& e : catalog)
                    std::cout << std::left << std::setw(22) << e.name << std::setw(24) << e.anchor
                              << e.summary << "\n" << std::string(22, ' ') << "defaults: "
                              << e.defaults << "\n";
            }
            return 0;
        }

        if (app.got_subcommand(frame_cmd)) {
            const auto w = model_from_cli(frame_cli);
            const auto f = make_frame(w, direction_from_cli(frame_cli));
            std::cout << frame_to_json(f).dump(2) << "\n";
            return 0;
        }

        if (app.got_subcommand(graph_cmd)) {
            const auto w = model_from_cli(graph_cli);
            const auto f = make_frame(w, direction_from_cli(graph_cli));
            const auto g = build_cylinder(f, w, graph_n, graph_l);
            const std::string dump = edge_list_dump(g);
            if (graph_file.empty()) {
                std::cout << dump;
            } else {
                std::ofstream out(graph_file);
                out << dump;
                if (!out) throw std::runtime_error("could not write " + graph_file);
            }
            return 0;
        }

        if (app.got_subcommand(walk_cmd)) {
            const auto w = model_from_cli(walk_cli);
            IVec start(w.dim(), 0);
            if (!walk_start.empty()) {
                start.clear();
                for (const auto& r : parse_tuple(walk_start))
                    start.push_back(static_cast<std::int64_t>(boost::multiprecision::numerator(r)));
            }
            const auto stop = StoppingSpec::fixed(walk_steps);
            Trajectory traj;
            if (walk_mode == "urn") {
                traj = urn_walk(w, start, stop, CounterRng(derive_key(walk_cli.seed, StreamTag::urn_walk)));
            } else if (walk_mode == "quenched") {
                Environment env(walk_cli.seed, w);
                traj = quenched_walk(env, start, stop,
                                     CounterRng(derive_key(walk_cli.seed, StreamTag::quenched_walk)));
            } else {
                throw ConfigError("--mode must be urn or quenched");
            }
            std::ostringstream csv;
            csv << "step";
            for (int j = 0; j < w.dim(); ++j) csv << ",x" << j;
            csv << "\n";
            for (std::size_t n = 0; n < traj.positions.size(); ++n) {
                csv << n;
                for (int j = 0; j < w.dim(); ++j) csv << "," << traj.positions[n][j];
                csv << "\n";
            }
            if (walk_csv.empty()) {
                std::cout << csv.str();
            } else {
                std::ofstream out(walk_csv);
                out << csv.str();
                if (!out) throw std::runtime_error("could not write " + walk_csv);
            }
            return 0;
        }

        if (app.got_subcommand(env_cmd)) {
            const auto w = model_from_cli(env_cli);
            auto corner = [&](const std::string& text) {
                IVec v;
                for (const auto& r : parse_tuple(text))
                    v.push_back(static_cast<std::int64_t>(boost::multiprecision::numerator(r)));
                if (static_cast<int>(v.size()) != w.dim())
                    throw ConfigError("window corner dimension mismatch");
                return v;
            };
            const IVec lo = corner(env_min), hi = corner(env_max);
            for (int j = 0; j < w.dim(); ++j)
                if (lo[j] > hi[j]) throw ConfigError("window corner order: min > max");
            const Environment env(env_cli.seed, w);
            Json sites = Json::array();
            IVec x = lo;
            while (true) {
                sites.push_back(Json{{"site", x}, {"simplex", env.site_simplex(x).components}});
                int j = 0;
                while (j < w.dim() && ++x[j] > hi[j]) {
                    x[j] = lo[j];
                    ++j;
                }
                if (j == w.dim()) break;
            }
            std::cout << Json{{"seed", env_cli.seed}, {"sites", sites}}.dump(2) << "\n";
            return 0;
        }

        if (app.got_subcommand(run_cmd)) {
            std::ifstream in(config_path);
            if (!in) throw ConfigError("cannot open config file " + config_path);
            Json j;
            try {
                j = Json::parse(in);
            } catch (const Json::parse_error& e) {
                throw ConfigError(std::string("config parse error: ") + e.what());
            }
            RunConfig cfg = parse_run_config(j);
            // explicit CLI flags override the file
            for (const auto& [flag, apply] : std::vector<std::pair<std::string, std::function<void()>>>{
                     {"--seed", [&] { cfg.options.seed = run_cli.seed; }},
                     {"--workers", [&] { cfg.options.workers = run_cli.workers; }},
                     {"--out", [&] { cfg.out_dir = run_cli.out_dir; }},
                     {"--u", [&] { cfg.direction = direction_from_cli(run_cli); }},
                     {"--alpha", [&] { cfg.model = model_from_cli(run_cli); }},
                     {"--dim", [&] { cfg.model = model_from_cli(run_cli); }}}) {
                if (run_cmd->count(flag) > 0) apply();
            }
            if (run_cmd->count("--json") > 0) cfg.emit_json = true;
            const auto report = run_named_experiment(cfg.experiment, cfg.model, cfg.direction,
                                                     cfg.experiment_params, cfg.options);
            CommonCli out_cli = run_cli;
            out_cli.json = cfg.emit_json || run_cli.json;
            out_cli.out_dir = cfg.out_dir;
            return emit_report(report, out_cli);
        }

        // experiment subcommands
        auto dispatch = [&](CLI::App* cmd, const ExpCli& cli, const std::string& name,
                            Json params) -> std::optional<int> {
            if (!app.got_subcommand(cmd)) return std::nullopt;
            const auto w = model_from_cli(cli.common);
            RunOptions opt = options_from_cli(cli.common);
            opt.angle_threshold = cli.angle_threshold;
            std::optional<IVec> u;
            if (name != "asymptotic-direction") u = direction_from_cli(cli.common);
            const auto report = run_named_experiment(name, w, u, params, opt);
            return emit_report(report, cli.common);
        };

        if (auto rc = dispatch(identity_cmd, *identity_cli, "halfspace-stay",
                               Json{{"L_ladder", identity_cli->ladder}, {"walks", identity_cli->walks}}))
            return *rc;
        if (auto rc = dispatch(ratio_cmd, *ratio_cli, "slab-ratio",
                               Json{{"L", ratio_cli->L}, {"walks", ratio_cli->walks}}))
            return *rc;
        if (auto rc = dispatch(return_cmd, *return_cli, "conditional-return",
                               Json{{"L_trunc", return_cli->L_trunc}, {"walks", return_cli->walks}}))
            return *rc;
        if (app.got_subcommand(beta_cmd)) {
            const auto w = model_from_cli(beta_cli->common);
            const auto f = make_frame(w, direction_from_cli(beta_cli->common));
            std::vector<double> samples;
            const auto report = cylinder_beta_experiment(
                w, f, beta_cli->L, beta_cli->envs, options_from_cli(beta_cli->common), {},
                beta_samples_csv.empty() ? nullptr : &samples);
            if (!beta_samples_csv.empty()) {
                std::ofstream csv(beta_samples_csv);
                csv << "environment,stay_probability\n";
                for (std::size_t i = 0; i < samples.size(); ++i) csv << i << "," << samples[i] << "\n";
                if (!csv) throw std::runtime_error("could not write " + beta_samples_csv);
            }
            return emit_report(report, beta_cli->common);
        }
        if (auto rc = dispatch(lemma1_cmd, *lemma1_cli, "cycle-reversal",
                               Json{{"N", lemma1_cli->N},
                                    {"L", lemma1_cli->L},
                                    {"max_cycle_len", lemma1_cli->max_cycle_len},
                                    {"budget", lemma1_cli->budget}}))
            return *rc;
        if (auto rc = dispatch(lemma2_cmd, *lemma2_cli, "environment-reversal",
                               Json{{"L", lemma2_cli->L},
                                    {"environments", lemma2_cli->envs},
                                    {"max_cycle_len", lemma2_cli->max_cycle_len}}))
            return *rc;
        if (auto rc = dispatch(trans_cmd, *trans_cli, "transience-bound",
                               Json{{"L_ladder", trans_cli->ladder}, {"walks", trans_cli->walks}}))
            return *rc;
        if (auto rc = dispatch(shift_cmd, *shift_cli, "start-shift",
                               Json{{"N", shift_cli->N}, {"L", shift_cli->L}, {"walks", shift_cli->walks}}))
            return *rc;
        if (auto rc = dispatch(dir_cmd, *dir_cli, "asymptotic-direction",
                               Json{{"steps", dir_cli->steps}, {"walks", dir_cli->walks}}))
            return *rc;
        if (auto rc = dispatch(osc_cmd, *osc_cli, "oscillation-demo",
                               Json{{"steps", osc_cli->steps}, {"walks", osc_cli->walks}}))
            return *rc;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    std::cerr << "no subcommand executed\n";
    return 2;
}
