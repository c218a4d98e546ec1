#include "auvctl/config.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#ifndef AUVCTL_VERSION
#define AUVCTL_VERSION "unknown"
#endif

using namespace auvctl;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
    std::string config_path;
    std::string out;
    std::vector<std::uint64_t> seeds;
    int seed_count = 0;
    int threads = 0;
    std::string controller;
    std::string condition;
};

RunConfig resolve(const Common& c) {
    RunConfig cfg;
    try {
        cfg = c.config_path.empty() ? RunConfig::from_json(json::object()) : RunConfig::load(c.config_path);
    } catch (const IoError& e) {
        throw ConfigError(e.what());
    }
    if (!c.out.empty()) cfg.output_dir = c.out;
    if (!c.seeds.empty()) cfg.seeds = c.seeds;
    if (c.seed_count > 0) {
        cfg.seeds.clear();
        for (int i = 1; i <= c.seed_count; ++i) cfg.seeds.push_back(static_cast<std::uint64_t>(i));
    }
    if (c.threads > 0) cfg.threads = c.threads;
    if (!c.controller.empty()) cfg.env.controller.kind = controller_kind_from_string(c.controller);
    if (c.condition == "ideal") {
        cfg.env.mode = rl::ControlMode::Ideal;
    } else if (!c.condition.empty()) {
        cfg.env.mode = rl::ControlMode::Controlled;
        cfg.env.sea = SeaCondition::for_regime(sea_regime_from_string(c.condition), cfg.env.sea.current);
    }
    cfg.validate();
    return cfg;
}

fs::path prepare(const RunConfig& cfg) {
    const fs::path dir(cfg.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
    return dir;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw IoError("cannot write " + p.string());
    return out;
}

void write_manifest(const fs::path& dir, const std::string& command, const RunConfig& cfg, const json& extra = {}) {
    json m = {{"command", command},
              {"config_hash", cfg.hash()},
              {"seeds", cfg.seeds},
              {"build_version", AUVCTL_VERSION},
              {"config", cfg.to_json()}};
    if (!extra.is_null()) m["outputs"] = extra;
    open_out(dir / "manifest.json") << m.dump(2) << '\n';
}

rl::Policy pick_policy(const RunConfig& cfg, const std::string& scripted) {
    if (!scripted.empty()) {
        if (scripted == "zero") return rl::zero_policy();
        if (scripted == "guidance") return rl::guidance_policy();
        if (scripted == "random") return rl::random_policy(cfg.seeds.front());
        throw ConfigError("unknown scripted policy '" + scripted + "' (expected zero, guidance or random)");
    }
    if (cfg.policy.empty()) return rl::guidance_policy();
    if (!fs::exists(cfg.policy)) throw ConfigError("policy file not found: " + cfg.policy);
    const rl::PolicyBundle b = rl::PolicyBundle::load(cfg.policy);
    rl::Environment probe_env(cfg.env);
    if (b.obs_width() != probe_env.obs_width())
        throw ConfigError("policy " + cfg.policy + " expects " + std::to_string(b.obs_width()) +
                          " observations but the configured task provides " + std::to_string(probe_env.obs_width()));
    return b.policy();
}

void write_probe_file(const fs::path& p, const ProbeResult& r) {
    auto out = open_out(p);
    write_probe_csv(out, r);
}

std::string metrics_header() { return "seed,return,steps,ssn,ec,dt,collisions,tracking_rms,terminal"; }

std::string metrics_row(std::uint64_t seed, const rl::EpisodeResult& r) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu,%.9g,%d,%d,%.9g,%.9g,%d,%.9g,%d", static_cast<unsigned long long>(seed),
                  r.episode_return, r.steps, r.metrics.ssn, r.metrics.ec, r.metrics.dt, r.metrics.collisions,
                  r.metrics.tracking_rms, r.terminal ? 1 : 0);
    return buf;
}

int cmd_simulate(const Common& c, const std::string& scripted) {
    RunConfig cfg = resolve(c);
    const rl::Policy policy = pick_policy(cfg, scripted);
    const fs::path dir = prepare(cfg);
    cfg.env.record_trace = true;
    rl::Environment env(cfg.env);
    const std::uint64_t seed = cfg.seeds.front();
    const rl::EpisodeResult r = rl::rollout(env, policy, seed);
    auto traj = open_out(dir / "trajectory.csv");
    traj << rl::trace_csv_header() << '\n';
    for (const auto& rec : r.trace) rl::write_trace_row(traj, rec);
    open_out(dir / "metrics.csv") << metrics_header() << '\n' << metrics_row(seed, r) << '\n';
    write_manifest(dir, "simulate", cfg, {"trajectory.csv", "metrics.csv"});
    std::printf("%s\n%s\n", metrics_header().c_str(), metrics_row(seed, r).c_str());
    return 0;
}

int cmd_train(const Common& c, long steps, long stop_after, bool resume) {
    RunConfig cfg = resolve(c);
    if (steps >= 0) cfg.train.total_steps = steps;
    if (stop_after >= 0) cfg.train.stop_after = stop_after;
    cfg.validate();
    const fs::path dir = prepare(cfg);
    const fs::path ckpt = dir / "checkpoint.bin";
    cfg.train.checkpoint_path = ckpt.string();

    std::unique_ptr<rl::Trainer> t;
    if (resume) {
        if (!fs::exists(ckpt)) throw IoError("no checkpoint to resume at " + ckpt.string());
        t = std::make_unique<rl::Trainer>(rl::Trainer::load_checkpoint(ckpt.string(), cfg.env));
        t->mutable_config().stop_after = cfg.train.stop_after;
        t->mutable_config().checkpoint_path = ckpt.string();
    } else {
        t = std::make_unique<rl::Trainer>(cfg.env, cfg.train);
    }
    const bool done = t->run();
    auto log = open_out(dir / "train_log.csv");
    rl::write_train_log(log, t->log());
    t->current_policy().save((dir / "policy.bin").string());
    t->best_policy().save((dir / "best_policy.bin").string());
    write_manifest(dir, "train", cfg, {"policy.bin", "best_policy.bin", "train_log.csv", "checkpoint.bin"});
    std::printf("steps %ld episodes %zu %s\n", t->steps(), t->log().size(), done ? "finished" : "paused");
    return 0;
}

std::unique_ptr<llm::LlmClient> make_client(const RunConfig& cfg) {
    if (cfg.llm.client == "rule") return std::make_unique<llm::RuleBasedClient>();
    if (cfg.llm.client == "fixture") {
        if (cfg.llm.fixtures_dir.empty()) throw ConfigError("llm.fixtures_dir is required for the fixture client");
        return std::make_unique<llm::FixtureClient>(llm::FixtureClient::from_directory(cfg.llm.fixtures_dir));
    }
    return std::make_unique<llm::HttpClient>(llm::HttpClientConfig::from_env());
}

int cmd_optimize(const Common& c, const std::string& client_name, const std::string& fixtures, int budget,
                 const std::string& scripted) {
    RunConfig cfg = resolve(c);
    if (!client_name.empty()) cfg.llm.client = client_name;
    if (!fixtures.empty()) cfg.llm.fixtures_dir = fixtures;
    if (budget >= 0) cfg.llm.loop.budget = budget;
    cfg.validate();
    const fs::path dir = prepare(cfg);
    cfg.llm.loop.archive_dir = (dir / "archive").string();

    auto client = make_client(cfg);
    std::unique_ptr<llm::LlmClient> memory = cfg.llm.memory_client ? make_client(cfg) : nullptr;

    llm::SimEvaluatorConfig ec;
    ec.env = cfg.env;
    ec.train = cfg.train;
    ec.retrain_steps = cfg.llm.retrain_steps;
    ec.eval_seeds = cfg.llm.eval_seeds;
    ec.threads = cfg.threads;
    ec.probe = cfg.probe;
    ec.reference_seed = cfg.llm.reference_seed;
    ec.reference_duration = cfg.llm.reference_duration;
    if (!scripted.empty()) ec.fixed_policy = pick_policy(cfg, scripted);
    llm::SimEvaluator evaluator(ec);

    llm::OptParams init;
    init.weights = cfg.env.weights;
    init.controller = cfg.env.controller;
    const llm::LoopResult r = llm::run_optimization_loop(init, *client, evaluator, cfg.llm.loop, memory.get());

    auto rec = open_out(dir / "records.jsonl");
    for (const auto& x : r.records) rec << llm::to_json(x).dump() << '\n';
    open_out(dir / "final_params.json") << llm::to_json(r.final_params).dump(2) << '\n';
    open_out(dir / "best_params.json") << llm::to_json(r.best_params).dump(2) << '\n';
    if (auto* t = evaluator.trainer()) t->current_policy().save((dir / "policy.bin").string());
    write_manifest(dir, "optimize", cfg,
                   {{"records", "records.jsonl"}, {"stop_reason", llm::to_string(r.reason)},
                    {"iterations", r.records.size()}});
    std::printf("iterations %zu stop %s\n", r.records.size(), llm::to_string(r.reason).c_str());
    return 0;
}

int cmd_evaluate(const Common& c, const std::string& scripted) {
    const RunConfig cfg = resolve(c);
    const rl::Policy policy = pick_policy(cfg, scripted);
    const fs::path dir = prepare(cfg);
    const rl::EvalSummary s = rl::evaluate(cfg.env, policy, cfg.seeds, cfg.threads);
    auto out = open_out(dir / "episodes.csv");
    out << metrics_header() << '\n';
    for (std::size_t i = 0; i < s.episodes.size(); ++i) out << metrics_row(cfg.seeds[i], s.episodes[i]) << '\n';
    char buf[256];
    std::snprintf(buf, sizeof buf, "%zu,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g", s.episodes.size(), s.mean_return,
                  s.std_return, s.mean_ssn, s.std_ssn, s.mean_metrics.ec, s.std_ec, s.mean_metrics.dt, s.std_dt);
    open_out(dir / "summary.csv") << "episodes,return_mean,return_std,ssn_mean,ssn_std,ec_mean,ec_std,dt_mean,dt_std\n"
                                  << buf << '\n';
    write_manifest(dir, "evaluate", cfg, {"episodes.csv", "summary.csv"});
    std::printf("episodes %zu return %.4g +- %.4g ssn %.4g dt %.4g\n", s.episodes.size(), s.mean_return,
                s.std_return, s.mean_ssn, s.mean_metrics.dt);
    return 0;
}

struct Cell {
    std::vector<double> ssn, ec, dt, collisions, tracking;
    int failed = 0;
    std::string error;
};

std::pair<double, double> mean_std(const std::vector<double>& v) {
    if (v.empty()) return {0.0, 0.0};
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return {m, std::sqrt(s / static_cast<double>(v.size()))};
}

int cmd_compare(const Common& c, const std::vector<std::string>& controllers,
                const std::vector<std::string>& conditions, const std::string& scripted) {
    if (controllers.empty()) throw CLI::ValidationError("--controllers", "at least one controller is required");
    if (conditions.empty()) throw CLI::ValidationError("--conditions", "at least one condition is required");
    const RunConfig cfg = resolve(c);
    std::vector<ControllerKind> kinds;
    for (const auto& k : controllers) kinds.push_back(controller_kind_from_string(k));
    for (const auto& cond : conditions)
        if (cond != "ideal") sea_regime_from_string(cond);
    const rl::Policy policy = pick_policy(cfg, scripted);
    const fs::path dir = prepare(cfg);
    const ReferenceSeries ref = record_tracking_reference(cfg.llm.reference_seed, cfg.llm.reference_duration);

    auto table = open_out(dir / "compare.csv");
    table << "controller,condition,episodes,failed,ssn_mean,ssn_std,ec_mean,ec_std,dt_mean,dt_std,collisions_mean,"
             "tracking_rms_mean,tracking_rms_std,error\n";
    for (std::size_t ki = 0; ki < kinds.size(); ++ki) {
        for (const auto& cond : conditions) {
            Cell cell;
            rl::EnvConfig env = cfg.env;
            env.controller.kind = kinds[ki];
            const bool ideal = cond == "ideal";
            env.mode = ideal ? rl::ControlMode::Ideal : rl::ControlMode::Controlled;
            if (!ideal) env.sea = SeaCondition::for_regime(sea_regime_from_string(cond), cfg.env.sea.current);
            for (std::uint64_t seed : cfg.seeds) {
                try {
                    rl::Environment e(env);
                    const rl::EpisodeResult r = rl::rollout(e, policy, seed);
                    cell.ssn.push_back(r.metrics.ssn);
                    cell.ec.push_back(r.metrics.ec);
                    cell.dt.push_back(r.metrics.dt);
                    cell.collisions.push_back(r.metrics.collisions);
                    ProbeConfig pc = cfg.probe;
                    pc.sea = ideal ? SeaCondition::calm() : env.sea;
                    pc.spectrum = env.spectrum;
                    pc.wave_seed = seed;
                    const ProbeResult pr = reference_probe(env.controller, pc, ref);
                    cell.tracking.push_back(pr.tracking_rms());
                    if (seed == cfg.seeds.front())
                        write_probe_file(dir / ("tracking_" + controllers[ki] + "_" + cond + ".csv"), pr);
                } catch (const std::exception& ex) {
                    ++cell.failed;
                    cell.error = ex.what();
                }
            }
            const auto [sm, ss] = mean_std(cell.ssn);
            const auto [em, es] = mean_std(cell.ec);
            const auto [dm, ds] = mean_std(cell.dt);
            const auto [cm, cs] = mean_std(cell.collisions);
            const auto [tm, ts] = mean_std(cell.tracking);
            (void)cs;
            std::string err = cell.error;
            for (char& ch : err)
                if (ch == ',' || ch == '\n') ch = ' ';
            char buf[512];
            std::snprintf(buf, sizeof buf, "%s,%s,%zu,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g,%s",
                          controllers[ki].c_str(), cond.c_str(), cell.ssn.size(), cell.failed, sm, ss, em, es, dm, ds,
                          cm, tm, ts, err.c_str());
            table << buf << '\n';
            std::printf("%s\n", buf);
        }
    }
    write_manifest(dir, "compare", cfg, {"compare.csv"});
    return 0;
}

int cmd_export(const Common& c, const std::string& what) {
    RunConfig cfg = resolve(c);
    const fs::path dir = prepare(cfg);
    if (what == "config") {
        open_out(dir / "config.json") << cfg.to_json().dump(2) << '\n';
    } else if (what == "spectrum") {
        auto out = open_out(dir / "spectrum.csv");
        out << "frequency,density\n";
        const auto& sp = cfg.env.spectrum;
        for (int i = 0; i <= 400; ++i) {
            const double f = sp.f_min + (sp.f_max - sp.f_min) * i / 400.0;
            out << f << ',' << jonswap_spectrum(f, sp) << '\n';
        }
    } else if (what == "terrain") {
        rl::Environment env(cfg.env);
        env.reset(cfg.seeds.front());
        const Terrain& t = env.terrain();
        auto out = open_out(dir / "terrain.csv");
        out << "x,y,depth\n";
        for (double x = 0.0; x <= 600.0; x += 5.0)
            for (double y = 0.0; y <= 600.0; y += 5.0) out << x << ',' << y << ',' << depth_at(t, x, y) << '\n';
    } else if (what == "probe") {
        ProbeConfig pc = cfg.probe;
        pc.sea = cfg.env.sea;
        pc.spectrum = cfg.env.spectrum;
        write_probe_file(dir / "heading_step.csv", step_probe(cfg.env.controller, pc, kPi / 4, 0.0, 60.0));
        write_probe_file(dir / "depth_step.csv", step_probe(cfg.env.controller, pc, 0.0, 5.0, 90.0));
        const ReferenceSeries ref = record_tracking_reference(cfg.llm.reference_seed, cfg.llm.reference_duration);
        write_probe_file(dir / "reference_tracking.csv", reference_probe(cfg.env.controller, pc, ref));
    } else {
        throw ConfigError("unknown export '" + what + "' (expected config, spectrum, terrain or probe)");
    }
    write_manifest(dir, "export " + what, cfg);
    return 0;
}

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("-c,--config", c.config_path, "JSON run configuration");
    sub->add_option("-o,--out", c.out, "Output directory (overrides output_dir)");
    sub->add_option("--seeds", c.seeds, "Seed list (overrides seeds)")->delimiter(',');
    sub->add_option("--seed-count", c.seed_count, "Use seeds 1..N");
    sub->add_option("--threads", c.threads, "Parallel evaluation threads");
    sub->add_option("--controller", c.controller, "Override controller kind: s_surface, pid or pvs");
    sub->add_option("--condition", c.condition, "Override condition: ideal, calm, es or ves");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"AUV control, RL training and language-model parameter tuning"};
    app.require_subcommand(1);
    app.set_version_flag("--version", AUVCTL_VERSION);

    Common common;
    std::string scripted, client, fixtures, what;
    long steps = -1, stop_after = -1;
    int budget = -1;
    bool resume = false;
    std::vector<std::string> controllers, conditions;

    auto* sim = app.add_subcommand("simulate", "Run one episode and write its trajectory");
    auto* train = app.add_subcommand("train", "Train a TD3 policy");
    auto* opt = app.add_subcommand("optimize", "Run the reward/controller tuning loop");
    auto* eval = app.add_subcommand("evaluate", "Evaluate a policy over seeds");
    auto* cmp = app.add_subcommand("compare", "Controllers x sea conditions table and tracking traces");
    auto* exp = app.add_subcommand("export", "Write plot-ready series");
    for (auto* s : {sim, train, opt, eval, cmp, exp}) add_common(s, common);
    for (auto* s : {sim, eval, cmp, opt})
        s->add_option("--scripted", scripted, "Use a scripted policy: zero, guidance or random");
    train->add_option("--steps", steps, "Total environment steps");
    train->add_option("--stop-after", stop_after, "Pause at the first episode boundary after this many steps");
    train->add_flag("--resume", resume, "Continue from <out>/checkpoint.bin");
    opt->add_option("--client", client, "rule, fixture or http");
    opt->add_option("--fixtures", fixtures, "Directory of fixture responses");
    opt->add_option("--budget", budget, "Maximum iterations");
    cmp->add_option("--controllers", controllers, "s_surface,pid,pvs")->delimiter(',');
    cmp->add_option("--conditions", conditions, "ideal,calm,es,ves")->delimiter(',');
    exp->add_option("what", what, "config, spectrum, terrain or probe")->required();

    try {
        app.parse(argc, argv);
        if (sim->parsed()) return cmd_simulate(common, scripted);
        if (train->parsed()) return cmd_train(common, steps, stop_after, resume);
        if (opt->parsed()) return cmd_optimize(common, client, fixtures, budget, scripted);
        if (eval->parsed()) return cmd_evaluate(common, scripted);
        if (cmp->parsed()) return cmd_compare(common, controllers, conditions, scripted);
        if (exp->parsed()) return cmd_export(common, what);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const InvalidParams& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 1;
}
