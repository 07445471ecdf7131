#include "shiftwave/commands.hpp"

#include <atomic>
#include <chrono>
#include <cstdlib>
#include <iostream>
#include <map>
#include <sstream>
#include <thread>

#include "shiftwave/acceptance.hpp"
#include "shiftwave/csv.hpp"
#include "shiftwave/wave.hpp"

namespace shiftwave {

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

struct ResultLog {
    CsvTable table;
    explicit ResultLog() {
        table.header = {"scenario_id", "command", "config_hash", "status", "outputs", "wall_ms"};
    }
    void add(const std::string& id, const std::string& cmd, const std::string& hash,
             const std::string& status, const std::string& outputs, double ms) {
        table.rows.push_back({id, cmd, hash, status, outputs, fmt_g12(ms)});
    }
    void write(const std::string& out_dir) { write_csv(out_dir + "/result.csv", table); }
};

std::string speed_cell(const SpeedValue& sv) { return sv.defined ? fmt_g12(sv.value) : "NA"; }

void emit_speed_row(CsvTable& t, const char* name, const SpeedValue& sv) {
    t.rows.push_back({name, speed_cell(sv), sv.defined ? fmt_g12(sv.lambda_argmin) : "NA",
                      sv.defined ? "" : sv.reason});
}

ProfilePair sandwich_midpoint(const Sandwich& sw) {
    ProfilePair mid;
    mid.grid = sw.upper.grid;
    mid.phi.resize(sw.upper.phi.size());
    mid.psi.resize(sw.upper.psi.size());
    for (std::size_t j = 0; j < mid.phi.size(); ++j) {
        mid.phi[j] = 0.5 * (sw.upper.phi[j] + sw.lower.phi[j]);
        mid.psi[j] = 0.5 * (sw.upper.psi[j] + sw.lower.psi[j]);
    }
    return mid;
}

void write_profile_csv(const std::string& path, const ProfilePair& pair,
                       const std::vector<double>& residual) {
    CsvTable t;
    t.header = {"z", "phi", "psi", "residual_local"};
    for (int j = 0; j < pair.grid.n; ++j) {
        const std::size_t sj = static_cast<std::size_t>(j);
        t.rows.push_back({fmt_g12(pair.grid.at(j)), fmt_g12(pair.phi[sj]), fmt_g12(pair.psi[sj]),
                          fmt_g12(residual[sj])});
    }
    write_csv(path, t);
}

const char* status_name(SolveStatus st) {
    switch (st) {
        case SolveStatus::Converged: return "converged";
        case SolveStatus::QuasiSolution: return "quasi-solution";
        case SolveStatus::NotConverged: return "not-converged";
    }
    return "not-converged";
}

struct SimOutput {
    RunResult run;
    OutcomeReport outcome;
    SpeedReport speeds;
};

SimOutput simulate_and_classify(const ScenarioConfig& cfg, const ValidatedModel& model) {
    SimOutput out;
    Field init = make_initial(cfg.init_kind, cfg.init_center, cfg.init_width, cfg.init_amp_u,
                              cfg.init_amp_v, cfg.grid, model);
    ProbeConfig pc{cfg.frames, cfg.probe_dt, cfg.snapshot_times};
    out.run = run(model, std::move(init), cfg.T, pc, cfg.dt);
    out.speeds = speed_report(model);
    out.outcome = classify_outcome(out.run.probes, model, out.speeds, cfg.thresholds);
    return out;
}

Verdict headline_verdict(const OutcomeReport& rep) {
    bool any = false, all_extinct = true;
    for (const BandVerdict& b : rep.bands) {
        any = true;
        if (b.verdict == Verdict::Coexistence) return Verdict::Coexistence;
        if (b.verdict != Verdict::Extinct) all_extinct = false;
    }
    for (const BandVerdict& b : rep.bands) {
        if (b.verdict == Verdict::PreyOnlySaturated) return Verdict::PreyOnlySaturated;
    }
    if (any && all_extinct) return Verdict::Extinct;
    return Verdict::Indeterminate;
}

std::string bands_cell(const OutcomeReport& rep) {
    std::ostringstream os;
    for (std::size_t i = 0; i < rep.bands.size(); ++i) {
        if (i) os << ';';
        const BandVerdict& b = rep.bands[i];
        os << '[' << fmt_g12(b.c_lo) << ' ' << fmt_g12(b.c_hi) << ']' << verdict_name(b.verdict);
    }
    return os.str();
}

void write_probe_csv(const std::string& path, const ProbeSeries& probes) {
    CsvTable t;
    t.header = {"t", "frame_speed", "u", "v"};
    for (std::size_t k = 0; k < probes.times.size(); ++k) {
        for (std::size_t c = 0; c < probes.frames.size(); ++c) {
            t.rows.push_back({fmt_g12(probes.times[k]), fmt_g12(probes.frames[c]),
                              fmt_g12(probes.u[c][k]), fmt_g12(probes.v[c][k])});
        }
    }
    write_csv(path, t);
}

void write_outcome_csv(const std::string& path, const OutcomeReport& rep) {
    CsvTable t;
    t.header = {"band_lo", "band_hi", "verdict", "u_level", "v_level", "note"};
    for (const BandVerdict& b : rep.bands) {
        std::string note = b.note;
        for (char& c : note) {
            if (c == ',') c = ';';
        }
        t.rows.push_back({fmt_g12(b.c_lo), fmt_g12(b.c_hi), verdict_name(b.verdict),
                          fmt_g12(b.u_level), fmt_g12(b.v_level), note});
    }
    write_csv(path, t);
}

}  // namespace

int thread_cap() {
    if (const char* env = std::getenv("SHIFTWAVE_THREADS")) {
        const int v = std::atoi(env);
        if (v >= 1) return v;
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<int>(hc);
}

int cmd_speeds(const ScenarioConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    const ValidatedModel model = cfg.validated();
    const SpeedReport rep = speed_report(model);

    CsvTable t;
    t.header = {"name", "value", "lambda_argmin", "reason"};
    emit_speed_row(t, "s_star_prey", rep.s_star_prey);
    emit_speed_row(t, "s_star_pred", rep.s_star_pred);
    emit_speed_row(t, "s_dstar_prey", rep.s_dstar_prey);
    emit_speed_row(t, "s_dstar_pred", rep.s_dstar_pred);
    emit_speed_row(t, "s_underline", rep.s_underline);
    emit_speed_row(t, "s_hat", rep.s_hat);
    write_csv(out_dir + "/speeds.csv", t);

    for (const auto& row : t.rows) {
        std::cout << row[0] << " = " << row[1];
        if (row[1] != "NA") std::cout << "  (lambda_argmin " << row[2] << ")";
        else std::cout << "  [" << row[3] << "]";
        std::cout << "\n";
    }

    ResultLog log;
    log.add(cfg.scenario_id, "speeds", cfg.config_hash, "ok", "speeds.csv", elapsed_ms(t0));
    log.write(out_dir);
    return 0;
}

int cmd_wave(const ScenarioConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    const ValidatedModel model = cfg.validated();
    const double s = cfg.model.s;

    TailTag expected;
    Sandwich sw;
    if (cfg.wave_type == "front") {
        expected = TailTag::Front;
        FrontSolveOptions opt;
        opt.steady_tol = std::min(cfg.steady_tol, 1e-9);
        sw = build_sandwich_front(model, s, cfg.grid, opt);
    } else if (cfg.wave_type == "mixed") {
        expected = TailTag::MixedFrontPulse;
        sw = build_sandwich_mixed(model, s, cfg.grid);
    } else {
        throw ConfigError("wave_type must be 'front' or 'mixed', got '" + cfg.wave_type + "'");
    }

    const SupersubReport check = check_supersub(sw, model, s, cfg.slack_tol);
    {
        CsvTable t;
        t.header = {"name", "value"};
        auto add = [&](const char* k, double v) { t.rows.push_back({k, fmt_g12(v)}); };
        t.rows.push_back({"type", cfg.wave_type});
        add("gamma1", sw.params.gamma1);
        add("gamma2", sw.params.gamma2);
        add("lambda1", sw.params.lambda1);
        add("lambda2", sw.params.lambda2);
        add("mu", sw.params.mu);
        add("eta", sw.params.eta);
        add("k", sw.params.k);
        add("L", sw.params.L);
        add("q", sw.params.q);
        add("lambda_star", sw.params.lambda_star);
        add("lambda_tilde", sw.params.lambda_tilde);
        add("s_crit_grid", sw.params.s_crit_grid);
        const char* names[4] = {"worst_slack_u1", "worst_slack_u2", "worst_slack_l1",
                                "worst_slack_l2"};
        for (std::size_t i = 0; i < 4; ++i) add(names[i], check.worst_slack[i]);
        write_csv(out_dir + "/sandwich_params.csv", t);
    }
    if (!check.pass) {
        std::cout << "sandwich verification failed: worst slacks " << check.worst_slack[0] << " "
                  << check.worst_slack[1] << " " << check.worst_slack[2] << " "
                  << check.worst_slack[3] << "\n";
        ResultLog log;
        log.add(cfg.scenario_id, "wave", cfg.config_hash, "failed", "sandwich verification",
                elapsed_ms(t0));
        log.write(out_dir);
        return 3;
    }

    const bool want_monotone = cfg.method == "monotone" || cfg.method == "both";
    const bool want_relax = cfg.method == "relaxation" || cfg.method == "both";
    if (!want_monotone && !want_relax) {
        throw ConfigError("method must be 'monotone', 'relaxation' or 'both'");
    }

    CsvTable summary;
    summary.header = {"method", "status", "iterations", "gap", "residual", "tail"};
    ResultLog log;
    bool ok = false;

    auto report = [&](const WaveSolution& sol, const char* method) {
        summary.rows.push_back({method, status_name(sol.status), fmt_g12(sol.iterations),
                                fmt_g12(sol.gap), fmt_g12(sol.residual),
                                tail_tag_name(sol.tail)});
        std::cout << method << ": " << status_name(sol.status) << ", iterations "
                  << sol.iterations << ", gap " << fmt_g12(sol.gap) << ", residual "
                  << fmt_g12(sol.residual) << ", tail " << tail_tag_name(sol.tail) << "\n";
        if (sol.status == SolveStatus::Converged && sol.tail == expected) ok = true;
        std::ostringstream outputs;
        outputs << "tail=" << tail_tag_name(sol.tail) << " residual=" << fmt_g12(sol.residual);
        log.add(cfg.scenario_id, std::string("wave/") + method, cfg.config_hash,
                status_name(sol.status), outputs.str(), elapsed_ms(t0));
    };

    std::optional<WaveSolution> mono;
    if (want_monotone) {
        mono = solve_wave_monotone(sw, model, s, cfg.tol, cfg.maxiter);
        ProfilePair reclassified = mono->pair;
        mono->tail = classify_tails(reclassified, model, cfg.tail_tol, cfg.edge_fraction);
        write_profile_csv(out_dir + "/wave_profile_monotone.csv", mono->pair,
                          residual_profile(mono->pair, model, s));
        report(*mono, "monotone");
    }
    if (want_relax) {
        const double T = cfg.wave_T > 0.0
                             ? cfg.wave_T
                             : std::max(1000.0, 4.0 * cfg.grid.width() / std::max(s, 0.05));
        ProfilePair init = mono ? mono->pair : sandwich_midpoint(sw);
        WaveSolution rel = solve_wave_relaxation(model, s, std::move(init), cfg.dt, T,
                                                 cfg.steady_tol);
        rel.tail = classify_tails(rel.pair, model, cfg.tail_tol, cfg.edge_fraction);
        write_profile_csv(out_dir + "/wave_profile_relaxation.csv", rel.pair,
                          residual_profile(rel.pair, model, s));
        report(rel, "relaxation");
    }

    write_csv(out_dir + "/wave_summary.csv", summary);
    log.write(out_dir);
    return ok ? 0 : 3;
}

int cmd_simulate(const ScenarioConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    const ValidatedModel model = cfg.validated();
    const SimOutput out = simulate_and_classify(cfg, model);

    write_probe_csv(out_dir + "/probes.csv", out.run.probes);
    {
        CsvTable t;
        t.header = {"t", "x", "u", "v"};
        for (const Snapshot& snap : out.run.snapshots) {
            for (int j = 0; j < cfg.grid.n; ++j) {
                const std::size_t sj = static_cast<std::size_t>(j);
                t.rows.push_back({fmt_g12(snap.t), fmt_g12(cfg.grid.at(j)), fmt_g12(snap.u[sj]),
                                  fmt_g12(snap.v[sj])});
            }
        }
        write_csv(out_dir + "/snapshots.csv", t);
    }
    write_outcome_csv(out_dir + "/outcome.csv", out.outcome);
    std::cout << "final t = " << fmt_g12(out.run.final_field.t) << ", headline verdict "
              << verdict_name(headline_verdict(out.outcome)) << "\n";

    ResultLog log;
    log.add(cfg.scenario_id, "simulate", cfg.config_hash, "ok",
            "probes.csv snapshots.csv outcome.csv", elapsed_ms(t0));
    log.write(out_dir);
    return 0;
}

int cmd_classify(const ScenarioConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    if (cfg.probes_file.empty()) {
        throw ConfigError("classify needs scenario.probes_file pointing at a probe CSV");
    }
    const ValidatedModel model = cfg.validated();
    const CsvTable t = read_csv(cfg.probes_file);
    if (t.header != std::vector<std::string>{"t", "frame_speed", "u", "v"}) {
        throw ConfigError("probe CSV must have header t,frame_speed,u,v: " + cfg.probes_file);
    }

    ProbeSeries series;
    std::map<std::string, std::size_t> frame_idx;
    std::string last_time;
    for (const auto& row : t.rows) {
        if (row.size() != 4) throw ConfigError("malformed probe CSV row in " + cfg.probes_file);
        if (row[0] != last_time) {
            series.times.push_back(std::strtod(row[0].c_str(), nullptr));
            last_time = row[0];
        }
        auto it = frame_idx.find(row[1]);
        if (it == frame_idx.end()) {
            it = frame_idx.emplace(row[1], series.frames.size()).first;
            series.frames.push_back(std::strtod(row[1].c_str(), nullptr));
            series.u.emplace_back();
            series.v.emplace_back();
        }
        series.u[it->second].push_back(std::strtod(row[2].c_str(), nullptr));
        series.v[it->second].push_back(std::strtod(row[3].c_str(), nullptr));
    }
    for (std::size_t c = 0; c < series.frames.size(); ++c) {
        if (series.u[c].size() != series.times.size()) {
            throw ConfigError("probe CSV is ragged (frames missing at some times): " +
                              cfg.probes_file);
        }
    }

    const SpeedReport speeds = speed_report(model);
    const OutcomeReport rep = classify_outcome(series, model, speeds, cfg.thresholds);
    write_outcome_csv(out_dir + "/outcome.csv", rep);

    std::cout << "kappa_floor = " << fmt_g12(rep.kappa_floor) << ", coexistence target ("
              << fmt_g12(rep.target.u_star) << ", " << fmt_g12(rep.target.v_star) << ")\n";
    for (const BandVerdict& b : rep.bands) {
        std::cout << "band [" << fmt_g12(b.c_lo) << ", " << fmt_g12(b.c_hi)
                  << "]: " << verdict_name(b.verdict) << "  u=" << fmt_g12(b.u_level)
                  << " v=" << fmt_g12(b.v_level);
        if (!b.note.empty()) std::cout << "  (" << b.note << ")";
        std::cout << "\n";
    }

    ResultLog log;
    log.add(cfg.scenario_id, "classify", cfg.config_hash, "ok", "outcome.csv", elapsed_ms(t0));
    log.write(out_dir);
    return 0;
}

int cmd_sweep(const ScenarioConfig& cfg, const std::string& out_dir) {
    const auto t0 = Clock::now();
    if (cfg.s_list.empty()) throw ConfigError("sweep needs a nonempty scenario.s_list");
    for (std::size_t i = 1; i < cfg.s_list.size(); ++i) {
        if (cfg.s_list[i] < cfg.s_list[i - 1]) {
            throw ConfigError("sweep s_list must be nondecreasing");
        }
    }
    std::vector<double> s_values;
    for (double s : cfg.s_list) {
        if (!s_values.empty() && s == s_values.back()) {
            std::cerr << "warning: duplicate s=" << s << " in s_list, deduplicated\n";
            continue;
        }
        s_values.push_back(s);
    }

    struct Row {
        std::string status, verdict, bands, u_level, v_level;
    };
    std::vector<Row> rows(s_values.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= s_values.size()) return;
            ScenarioConfig local = cfg;
            local.model.s = s_values[i];
            Row& row = rows[i];
            try {
                const ValidatedModel model = local.validated();
                const SimOutput out = simulate_and_classify(local, model);
                row.status = "ok";
                row.verdict = verdict_name(headline_verdict(out.outcome));
                row.bands = bands_cell(out.outcome);
                double ul = 0.0, vl = 0.0;
                if (!out.outcome.bands.empty()) {
                    ul = out.outcome.bands.front().u_level;
                    vl = out.outcome.bands.front().v_level;
                }
                row.u_level = fmt_g12(ul);
                row.v_level = fmt_g12(vl);
            } catch (const std::exception& e) {
                row.status = "failed";
                std::string msg = e.what();
                for (char& c : msg) {
                    if (c == ',' || c == '\n') c = ';';
                }
                row.verdict = "";
                row.bands = msg;
                row.u_level = row.v_level = "";
            }
        }
    };

    const int nthreads = std::min<int>(thread_cap(), static_cast<int>(s_values.size()));
    std::vector<std::thread> pool;
    for (int i = 1; i < nthreads; ++i) pool.emplace_back(worker);
    worker();
    for (auto& th : pool) th.join();

    CsvTable t;
    t.header = {"s", "status", "verdict", "bands", "u_level", "v_level"};
    ResultLog log;
    bool any_failed = false;
    for (std::size_t i = 0; i < s_values.size(); ++i) {
        t.rows.push_back({fmt_g12(s_values[i]), rows[i].status, rows[i].verdict, rows[i].bands,
                          rows[i].u_level, rows[i].v_level});
        if (rows[i].status != "ok") any_failed = true;
        log.add(cfg.scenario_id + "/s=" + fmt_g12(s_values[i]), "sweep", cfg.config_hash,
                rows[i].status, rows[i].verdict, elapsed_ms(t0));
        std::cout << "s=" << fmt_g12(s_values[i]) << ": " << rows[i].status << " "
                  << rows[i].verdict << "\n";
    }
    write_csv(out_dir + "/sweep.csv", t);
    log.write(out_dir);
    return any_failed ? 3 : 0;
}

int cmd_accept(const std::string& config_dir, const std::string& out_dir,
               const std::vector<std::string>& overrides, const std::vector<int>& only) {
    const auto t0 = Clock::now();
    const std::vector<CriterionResult> results = run_acceptance(config_dir, overrides, only);

    CsvTable t;
    t.header = {"criterion", "name", "status", "detail", "seconds"};
    bool all_pass = true;
    for (const CriterionResult& r : results) {
        std::string detail = r.detail;
        for (char& c : detail) {
            if (c == ',' || c == '\n') c = ';';
        }
        t.rows.push_back({fmt_g12(r.id), r.name, r.pass ? "pass" : "FAIL", detail,
                          fmt_g12(r.seconds)});
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << "criterion " << r.id << " (" << r.name
                  << "): " << r.detail << "  [" << fmt_g12(r.seconds) << " s]\n";
        if (!r.pass) all_pass = false;
    }
    write_csv(out_dir + "/accept_summary.csv", t);

    ResultLog log;
    log.add("acceptance", "accept", "", all_pass ? "ok" : "failed",
            "accept_summary.csv", elapsed_ms(t0));
    log.write(out_dir);
    std::cout << (all_pass ? "all criteria passed\n" : "some criteria FAILED\n");
    return all_pass ? 0 : 3;
}

}  // namespace shiftwave
