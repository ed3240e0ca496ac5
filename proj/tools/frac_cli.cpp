// frac: batch front end for the simulation library.
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "frac/ambiguity.hpp"
#include "frac/comm.hpp"
#include "frac/harness.hpp"
#include "frac/im_codec.hpp"
#include "frac/parallel.hpp"
#include "frac/phase_transition.hpp"
#include "frac/rng.hpp"

using namespace frac;

namespace {

struct Globals {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::string trials;
    std::string out;
    int workers = default_workers();
    // per-field overrides
    std::optional<int> N, M, K, P, Q_r, Q_c, J, I;
    std::optional<double> f_c, B, T_0, T_p, r_max, F_s_radar, d_R, F_s_comm, c;
};

RawParams resolve_params(const Globals& g) {
    RawParams p = g.config.empty() ? table1_params() : load_params(g.config);
    if (g.N) p.N = *g.N;
    if (g.M) p.M = *g.M;
    if (g.K) p.K = *g.K;
    if (g.P) p.P = *g.P;
    if (g.Q_r) p.Q_r = *g.Q_r;
    if (g.Q_c) p.Q_c = *g.Q_c;
    if (g.J) p.J = *g.J;
    if (g.I) p.I = *g.I;
    if (g.f_c) p.f_c = *g.f_c;
    if (g.B) p.B = *g.B;
    if (g.T_0) p.T_0 = *g.T_0;
    if (g.T_p) p.T_p = *g.T_p;
    if (g.r_max) {
        p.r_max = *g.r_max;
        if (!g.F_s_radar) p.F_s_radar.reset();
    }
    if (g.F_s_radar) {
        p.F_s_radar = *g.F_s_radar;
        if (!g.r_max) p.r_max.reset();
    }
    if (g.d_R) p.d_R = *g.d_R;
    if (g.F_s_comm) p.F_s_comm = *g.F_s_comm;
    if (g.c) p.c = *g.c;
    if (g.seed) p.seed = *g.seed;
    return p;
}

int trials_or(const Globals& g, int dflt) {
    if (g.trials.empty()) return dflt;
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(g.trials, &pos);
    } catch (const std::exception&) {
        throw ValidationError("--trials must be a number");
    }
    if (pos != g.trials.size() || !(v >= 1.0) || v != std::floor(v) || v > 2e9)
        throw ValidationError("--trials must be a positive integer");
    return static_cast<int>(v);
}

// Output sink: --out file or stdout.
class Sink {
public:
    explicit Sink(const std::string& path) {
        if (!path.empty()) {
            file_ = std::make_unique<std::ofstream>(path);
            if (!*file_) throw ValidationError("cannot open output file: " + path);
        }
        os().precision(10);
    }
    std::ostream& os() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void set_param(RawParams& p, const std::string& name, int v) {
    if (name == "N") p.N = v;
    else if (name == "M") p.M = v;
    else if (name == "K") p.K = v;
    else if (name == "P") p.P = v;
    else if (name == "Q_r") p.Q_r = v;
    else if (name == "Q_c") p.Q_c = v;
    else if (name == "J") p.J = v;
    else throw ValidationError("cannot sweep parameter " + name);
}

// "K=1,2" -> ("K", {1, 2})
std::pair<std::string, std::vector<int>> parse_param_sweep(const std::string& s) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw ValidationError("sweep must look like NAME=v1,v2");
    return {s.substr(0, eq), parse_int_list(s.substr(eq + 1))};
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"FRaC dual-function radar/communications simulator"};
    app.require_subcommand(1);
    app.fallthrough();
    Globals g;
    app.add_option("--config", g.config, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--seed", g.seed, "master RNG seed");
    app.add_option("--trials", g.trials, "Monte Carlo trial count (accepts 1e4 notation)");
    app.add_option("--out", g.out, "output file (default stdout)");
    app.add_option("--workers", g.workers, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--N", g.N, "pulses per CPI");
    app.add_option("--M", g.M, "sub-carriers");
    app.add_option("--K", g.K, "active carriers per pulse");
    app.add_option("--P", g.P, "transmit antennas");
    app.add_option("--Q_r", g.Q_r, "radar receive elements");
    app.add_option("--Q_c", g.Q_c, "comm receive antennas");
    app.add_option("--J", g.J, "PSK order");
    app.add_option("--I", g.I, "channel taps");
    app.add_option("--f_c", g.f_c, "carrier start frequency [Hz]");
    app.add_option("--B", g.B, "total bandwidth [Hz]");
    app.add_option("--T_0", g.T_0, "PRI [s]");
    app.add_option("--T_p", g.T_p, "pulse width [s]");
    app.add_option("--r_max", g.r_max, "maximum range [m]");
    app.add_option("--F_s_radar", g.F_s_radar, "radar sampling rate [Hz]");
    app.add_option("--d_R", g.d_R, "receive element spacing [m]");
    app.add_option("--F_s_comm", g.F_s_comm, "comm sampling rate [Hz]");
    app.add_option("--c", g.c, "propagation speed [m/s]");

    // encode
    auto* enc = app.add_subcommand("encode", "map a message to a pulse selection");
    std::string bits_hex, mapping_path;
    enc->add_option("--bits", bits_hex, "message as hex")->required();
    enc->add_option("--mapping", mapping_path, "explicit IM mapping table (JSON)");

    // ambiguity
    auto* amb = app.add_subcommand("ambiguity", "ambiguity-function cross sections");
    std::string plane = "rtheta";
    int grid = 256;
    bool expected = false;
    amb->add_option("--plane", plane, "rtheta or vtheta")->check(CLI::IsMember({"rtheta", "vtheta"}));
    amb->add_option("--grid", grid, "points per axis")->check(CLI::PositiveNumber);
    amb->add_flag("--expected", expected, "closed-form expectation instead of one realisation");

    // phase-transition
    auto* pt = app.add_subcommand("phase-transition", "target-capacity threshold");
    bool theory = false, empirical = false;
    std::string sweep, L_list = "1:1:16", summary_path;
    pt->add_flag("--theory", theory, "theoretical thresholds");
    pt->add_flag("--empirical", empirical, "Monte Carlo recovery curves");
    pt->add_option("--sweep", sweep, "parameter sweep, e.g. K=1,2");
    pt->add_option("--L", L_list, "target counts for --empirical");
    pt->add_option("--summary", summary_path, "write the JSON threshold summary here (default stderr)");

    // radar-hit-rate
    auto* hr = app.add_subcommand("radar-hit-rate", "grid-triple hit rate versus SNR");
    std::string snr = "0:2:20", scene_path, solver = "omp", selection = "uniform", hr_sweep;
    bool random_scene = false, no_snap = false;
    int targets = 3;
    hr->add_option("--snr-db", snr, "SNR sweep start:step:stop or list");
    hr->add_option("--scene", scene_path, "scene file (default: three-target scene)");
    hr->add_flag("--random-scene", random_scene, "fresh on-grid scene per trial");
    hr->add_option("--targets", targets, "targets per random scene")->check(CLI::PositiveNumber);
    hr->add_option("--solver", solver, "omp or bp")->check(CLI::IsMember({"omp", "bp"}));
    int bp_max_iter = 20000;
    hr->add_option("--bp-max-iter", bp_max_iter, "ADMM iteration cap")->check(CLI::PositiveNumber);
    hr->add_option("--selection", selection, "uniform or message")->check(CLI::IsMember({"uniform", "message"}));
    hr->add_option("--sweep", hr_sweep, "parameter sweep, e.g. K=1,2 or M=8,16");
    hr->add_flag("--no-snap", no_snap, "keep the scene off-grid");

    // recovery-map
    auto* rm = app.add_subcommand("recovery-map", "true versus recovered targets");
    double rm_snr = 1e9;
    rm->add_option("--scene", scene_path, "scene file");
    rm->add_option("--snr-db", rm_snr, "radar SNR (default noiseless)");
    rm->add_option("--solver", solver, "omp or bp")->check(CLI::IsMember({"omp", "bp"}));
    rm->add_option("--bp-max-iter", bp_max_iter, "ADMM iteration cap")->check(CLI::PositiveNumber);
    rm->add_flag("--no-snap", no_snap, "keep the scene off-grid");

    // comm-ber
    auto* ber = app.add_subcommand("comm-ber", "uncoded BER versus SNR");
    std::string decoder = "ml", scheme = "frac", rate_const = "per-sample";
    int psk_order = 64, draws_per_channel = 10;
    bool explicit_noise = false;
    ber->add_option("--snr-db", snr, "SNR sweep");
    ber->add_option("--decoder", decoder, "ml or sod")->check(CLI::IsMember({"ml", "sod"}));
    ber->add_option("--scheme", scheme, "frac or psk")->check(CLI::IsMember({"frac", "psk"}));
    ber->add_option("--psk-order", psk_order, "constellation order of the psk scheme");
    ber->add_option("--draws-per-channel", draws_per_channel, "symbols per channel draw")->check(CLI::PositiveNumber);
    ber->add_option("--mapping", mapping_path, "explicit IM mapping table (JSON)");
    ber->add_flag("--explicit-noise", explicit_noise, "draw noise per received sample");

    // comm-rate
    auto* rate = app.add_subcommand("comm-rate", "achievable rate versus SNR");
    int channels = 100, noise_draws = 100;
    rate->add_option("--snr-db", snr, "SNR sweep");
    rate->add_option("--channels", channels, "channel realisations")->check(CLI::PositiveNumber);
    rate->add_option("--noise-draws", noise_draws, "noise draws per channel")->check(CLI::PositiveNumber);
    rate->add_option("--scheme", scheme, "frac or psk")->check(CLI::IsMember({"frac", "psk"}));
    rate->add_option("--psk-order", psk_order, "constellation order of the psk scheme");
    rate->add_option("--rate-constant", rate_const, "per-sample or verbatim")
        ->check(CLI::IsMember({"per-sample", "verbatim"}));

    auto* res = app.add_subcommand("resolution-report", "range/velocity/angle resolution");
    auto* hw = app.add_subcommand("hw-report", "RF chain and sampling comparison");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        const RawParams params = resolve_params(g);
        const SystemConfig cfg = derive(params);
        const std::uint64_t seed = params.seed;
        Sink sink(g.out);
        std::ostream& os = sink.os();

        if (*enc) {
            std::optional<MappingTable> table;
            if (!mapping_path.empty()) table = MappingTable::load(mapping_path);
            ImCodec codec(cfg, table);
            const Bits b = bits_from_hex(bits_hex, codec.budget().n_total);
            const PulseSelection s = codec.encode(b);
            nlohmann::json j = nlohmann::json::parse(selection_to_json(s, cfg.J));
            j["bits"] = bits_to_string(b);
            j["n_total"] = codec.budget().n_total;
            os << j.dump(2) << "\n";
        } else if (*amb) {
            write_csv_preamble(os, params, "ambiguity");
            const AfPlane pl = plane == "rtheta" ? AfPlane::kRangeAngle : AfPlane::kVelocityAngle;
            std::optional<SelectionSequence> sel;
            if (!expected) {
                auto rng = stream_rng(seed, 0xaf0, 0);
                sel = random_selection_sequence(cfg, rng);
            }
            const auto pts = af_plane(cfg, sel ? &*sel : nullptr, pl, grid, g.workers);
            os << (pl == AfPlane::kRangeAngle ? "d_r,d_theta,magnitude\n" : "d_v,d_theta,magnitude\n");
            for (const auto& p : pts) os << p.a << "," << p.b << "," << p.magnitude << "\n";
        } else if (*pt) {
            if (theory == empirical) throw ValidationError("choose exactly one of --theory and --empirical");
            nlohmann::json summary = nlohmann::json::array();
            std::vector<std::pair<std::string, RawParams>> cols;
            if (sweep.empty()) {
                if (theory) cols = table3_columns();
                else cols.emplace_back("config", params);
            } else {
                const auto [name, vals] = parse_param_sweep(sweep);
                for (int v : vals) {
                    RawParams p = params;
                    set_param(p, name, v);
                    cols.emplace_back(name + "=" + std::to_string(v), p);
                }
            }
            write_csv_preamble(os, params, theory ? "pt_theory" : "pt_empirical");
            if (theory) {
                os << "param,n1,n2,L_exact,beta_exact,L_approx,beta_approx\n";
                for (const auto& [label, p] : cols) {
                    const PtProblem prob = PtProblem::from_config(derive(p));
                    const PtSolution ex = solve_threshold(prob);
                    const PtSolution ap = approx_threshold(prob);
                    os << label << "," << prob.n1 << "," << prob.n2 << "," << ex.l_star << "," << ex.beta_star << ","
                       << ap.l_star << "," << ap.beta_star << "\n";
                    summary.push_back({{"param", label}, {"L_exact", ex.l_star}, {"L_approx", ap.l_star},
                                       {"approx_ratio_warning", ap.warn_small_ratio}});
                }
            } else {
                PtEmpiricalOptions o;
                o.trials = trials_or(g, 200);
                o.seed = seed;
                o.workers = g.workers;
                os << "param,L,probability,successes,trials,nonconverged\n";
                for (const auto& [label, p] : cols) {
                    const SystemConfig c2 = derive(p);
                    const PtCurve curve = empirical_transition(c2, parse_int_list(L_list), o);
                    for (const auto& q : curve.points)
                        os << label << "," << q.L << "," << q.probability() << "," << q.successes << "," << q.trials
                           << "," << q.nonconverged << "\n";
                    const double th = solve_threshold(PtProblem::from_config(c2)).l_star;
                    summary.push_back({{"param", label},
                                       {"crossing", std::isnan(curve.crossing) ? nlohmann::json(nullptr)
                                                                               : nlohmann::json(curve.crossing)},
                                       {"L_exact", th}});
                }
            }
            if (summary_path.empty()) std::cerr << summary.dump(2) << "\n";
            else {
                std::ofstream sf(summary_path);
                if (!sf) throw ValidationError("cannot write summary file");
                sf << summary.dump(2) << "\n";
            }
        } else if (*hr) {
            HitRateOptions o;
            o.snr_db = parse_sweep(snr);
            o.trials = trials_or(g, 2000);
            o.seed = seed;
            o.workers = g.workers;
            o.random_scene = random_scene;
            o.random_targets = targets;
            if (!scene_path.empty()) o.scene = load_scene(scene_path);
            o.snap = !no_snap;
            o.solver = solver == "omp" ? RadarSolver::kOmp : RadarSolver::kBp;
            o.bp_max_iter = bp_max_iter;
            o.mode = selection == "uniform" ? SelectionMode::kUniform : SelectionMode::kMessage;
            std::vector<std::pair<std::string, RawParams>> cols;
            if (hr_sweep.empty()) cols.emplace_back("config", params);
            else {
                const auto [name, vals] = parse_param_sweep(hr_sweep);
                for (int v : vals) {
                    RawParams p = params;
                    set_param(p, name, v);
                    cols.emplace_back(name + "=" + std::to_string(v), p);
                }
            }
            write_csv_preamble(os, params, "hit_rate");
            os << "param,snr_db,probability,stderr,ci_low,ci_high,hits,trials\n";
            for (const auto& [label, p] : cols) {
                const auto r = run_hit_rate(derive(p), o);
                for (const auto& q : r.points)
                    os << label << "," << q.snr_db << "," << q.probability << "," << q.stderr_ << "," << q.ci_low
                       << "," << q.ci_high << "," << q.hits << "," << q.trials << "\n";
            }
        } else if (*rm) {
            RecoveryMapOptions o;
            if (!scene_path.empty()) o.scene = load_scene(scene_path);
            o.snap = !no_snap;
            o.snr_db = rm_snr;
            o.seed = seed;
            o.solver = solver == "omp" ? RadarSolver::kOmp : RadarSolver::kBp;
            o.bp_max_iter = bp_max_iter;
            write_csv_preamble(os, params, "recovery_map");
            os << "kind,r,v,theta_deg,abs_beta,arg_beta,flat_index,cell\n";
            for (const auto& r : run_recovery_map(cfg, o))
                os << (r.truth ? "true" : "recovered") << "," << r.r << "," << r.v << "," << r.theta * 180.0 / kPi
                   << "," << r.abs_beta << "," << r.arg_beta << "," << r.flat << "," << r.cell << "\n";
        } else if (*ber) {
            std::optional<MappingTable> table;
            if (!mapping_path.empty()) table = MappingTable::load(mapping_path);
            const SymbolSet set = scheme == "frac" ? frac_symbol_set(cfg, table) : psk_symbol_set(cfg, psk_order);
            BerOptions o;
            o.seed = seed;
            o.trials = trials_or(g, 10000);
            o.draws_per_channel = draws_per_channel;
            o.workers = g.workers;
            o.explicit_noise = explicit_noise;
            const auto pts = simulate_ber(cfg, set, decoder == "ml" ? Decoder::kMl : Decoder::kSod, parse_sweep(snr), o);
            write_csv_preamble(os, params, "comm_ber");
            os << "snr_db,ber,stderr,bit_errors,bits\n";
            for (const auto& p : pts)
                os << p.snr_db << "," << p.ber << "," << p.stderr_ << "," << p.bit_errors << "," << p.bits << "\n";
        } else if (*rate) {
            const SymbolSet set = scheme == "frac" ? frac_symbol_set(cfg) : psk_symbol_set(cfg, psk_order);
            RateOptions o;
            o.seed = seed;
            o.channels = channels;
            o.noise_draws = noise_draws;
            o.workers = g.workers;
            o.constant = rate_const == "per-sample" ? RateConstant::kPerSample : RateConstant::kVerbatim;
            write_csv_preamble(os, params, "comm_rate");
            os << "snr_db,rate,stderr\n";
            for (double s : parse_sweep(snr)) {
                const auto r = achievable_rate(cfg, set, s, o);
                os << r.snr_db << "," << r.mean << "," << r.stderr_ << "\n";
            }
        } else if (*res) {
            const auto r = resolution_report(cfg);
            write_csv_preamble(os, params, "resolution_report");
            os << "range_m,velocity_mps,angle_deg\n" << r.range_m << "," << r.velocity_mps << "," << r.angle_deg << "\n";
        } else if (*hw) {
            const auto r = report_hw(cfg);
            write_csv_preamble(os, params, "hw_report");
            for (const auto& n : r.notes) os << "# " << n << "\n";
            os << "system,rf_modules,sampling_rate_hz,samples_per_pulse\n";
            for (const auto& c : r.columns)
                os << c.system << "," << c.rf_modules << "," << c.sampling_rate << "," << c.samples_per_pulse << "\n";
        }
    } catch (const ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ConvergenceError& e) {
        std::cerr << "solver: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "fatal: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
