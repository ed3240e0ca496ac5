#include "frac/radar_sim.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "frac/rng.hpp"

namespace frac {

int coarse_cell(double r, const SystemConfig& cfg) {
    return static_cast<int>(std::floor(2.0 * r * cfg.delta_f / cfg.c + 0.5));
}

TargetFreqs target_freqs(const Target& t, const SystemConfig& cfg, int cell) {
    TargetFreqs f;
    f.cell = cell;
    f.f_r = 2.0 * t.r * cfg.delta_f / cfg.c - cell;
    f.f_v = 2.0 * t.v * cfg.T_0 * cfg.f_c / cfg.c;
    f.f_theta = cfg.f_c * cfg.d_R * std::sin(t.theta) / cfg.c;
    f.alpha_tilde = t.alpha * cis_turns(-2.0 * t.r * cfg.f_c / cfg.c);
    return f;
}

TargetFreqs target_freqs(const Target& t, const SystemConfig& cfg) {
    return target_freqs(t, cfg, coarse_cell(t.r, cfg));
}

std::vector<std::string> check_target(const Target& t, const SystemConfig& cfg) {
    std::vector<std::string> bad;
    if (!(t.r >= 0.0 && t.r < cfg.r_max)) bad.push_back("range outside [0, r_max)");
    const double vmax = cfg.c / (4.0 * cfg.T_0 * cfg.f_c);
    if (!(std::abs(t.v) < vmax)) bad.push_back("velocity outside the unambiguous interval");
    const double s = cfg.c / (2.0 * cfg.f_c * cfg.d_R);
    const double theta_max = s < 1.0 ? std::asin(s) : kPi / 2.0;
    if (!(std::abs(t.theta) < theta_max)) bad.push_back("azimuth outside the unambiguous interval");
    if (!std::isfinite(t.alpha.real()) || !std::isfinite(t.alpha.imag())) bad.push_back("non-finite reflectivity");
    return bad;
}

std::vector<std::string> model_warnings(const Scene& scene, const SystemConfig& cfg) {
    std::vector<std::string> w;
    const double cell = cfg.c / (2.0 * cfg.delta_f);
    for (std::size_t l = 0; l < scene.size(); ++l) {
        if (std::abs(scene[l].v) * cfg.N * cfg.T_0 > 0.1 * cell)
            w.push_back("target " + std::to_string(l) + ": range migration over the CPI is not negligible");
    }
    if (cfg.Q_r * cfg.P * cfg.d_R > 0.1 * cell) w.push_back("array aperture is not small against c/(2 B_sub)");
    return w;
}

namespace {

void check_sequence(const SelectionSequence& sel, const SystemConfig& cfg) {
    if (sel.empty()) throw ValidationError("empty selection sequence");
    if (static_cast<int>(sel.size()) != cfg.N) throw ValidationError("selection sequence length must equal N");
    for (const auto& s : sel) validate_selection(s, cfg.M, cfg.P, cfg.K, cfg.J);
}

// Slow-time/angle factor of one target for pulse n, slot k, receiver q.
cd slow_factor(const TargetFreqs& f, const PulseSelection& s, int n, int k, int q, const SystemConfig& cfg,
               bool exact_xi) {
    const int m = s.carriers[k];
    const int p = s.antennas[k];
    const double xi = exact_xi ? cfg.xi(m) : 1.0;
    const double turns = -(m * f.f_r) - xi * f.f_v * n - xi * f.f_theta * (cfg.Q_r * p + q);
    return cis_turns(turns);
}

}  // namespace

FastTimeCube simulate_fast_time(const Scene& scene, const SelectionSequence& sel, const SystemConfig& cfg,
                                double sigma_r, std::mt19937_64& rng, NoiseDomain domain) {
    check_sequence(sel, cfg);
    if (!(sigma_r >= 0.0)) throw ValidationError("sigma_r must be non-negative");
    FastTimeCube cube;
    cube.N = cfg.N;
    cube.K = cfg.K;
    cube.Q_r = cfg.Q_r;
    cube.G = cfg.G;
    cube.selections = sel;
    cube.data.assign(static_cast<std::size_t>(cfg.N) * cfg.K * cfg.Q_r * cfg.G, cd{});
    cube.noise_variance = domain == NoiseDomain::kCompressed ? sigma_r * sigma_r / cfg.G : sigma_r * sigma_r;

    CVec fast(cfg.G);
    for (const Target& t : scene) {
        // the whole range enters the carrier term; cell 0 keeps f_r = 2 r delta_f / c
        const TargetFreqs f = target_freqs(t, cfg, 0);
        const double beat = 2.0 * cfg.kappa * t.r * cfg.T_s_radar / cfg.c;
        for (int g = 0; g < cfg.G; ++g) fast[g] = f.alpha_tilde * cis_turns(-beat * g);
        for (int n = 0; n < cfg.N; ++n)
            for (int k = 0; k < cfg.K; ++k)
                for (int q = 0; q < cfg.Q_r; ++q) {
                    const cd s = slow_factor(f, sel[n], n, k, q, cfg, true);
                    cd* row = &cube.at(n, k, q, 0);
                    for (int g = 0; g < cfg.G; ++g) row[g] += s * fast[g];
                }
    }
    if (cube.noise_variance > 0.0)
        for (auto& x : cube.data) x += complex_normal(rng, cube.noise_variance);
    return cube;
}

CrrpCube pulse_compress(const FastTimeCube& cube) {
    CrrpCube out;
    out.N = cube.N;
    out.K = cube.K;
    out.Q_r = cube.Q_r;
    out.G = cube.G;
    out.selections = cube.selections;
    out.data.assign(cube.data.size(), cd{});
    const int G = cube.G;
    // e^{+j 2 pi i / G} twiddles, indexed by (gt*g) mod G
    CVec tw(G);
    for (int i = 0; i < G; ++i) tw[i] = cis_turns(static_cast<double>(i) / G);
    const std::size_t rows = cube.data.size() / G;
    for (std::size_t r = 0; r < rows; ++r) {
        const cd* in = cube.data.data() + r * G;
        cd* o = out.data.data() + r * G;
        for (int g = 0; g < G; ++g) {
            cd acc{};
            for (int gt = 0; gt < G; ++gt) acc += in[gt] * tw[(static_cast<long>(gt) * g) % G];
            o[g] = acc;
        }
    }
    return out;
}

CoarseCellSlice extract_cell(const CrrpCube& crrp, int g) {
    if (g < 0 || g >= crrp.G) throw ValidationError("coarse cell index out of range");
    CoarseCellSlice s;
    s.N = crrp.N;
    s.K = crrp.K;
    s.Q_r = crrp.Q_r;
    s.cell = g;
    s.data.resize(static_cast<std::size_t>(crrp.N) * crrp.K * crrp.Q_r);
    for (int n = 0; n < crrp.N; ++n)
        for (int k = 0; k < crrp.K; ++k)
            for (int q = 0; q < crrp.Q_r; ++q)
                s.data[(static_cast<std::size_t>(n) * crrp.K + k) * crrp.Q_r + q] = crrp.at(n, k, q, g);
    return s;
}

CoarseCellSlice simulate_cell_direct(const Scene& scene, const SelectionSequence& sel, const SystemConfig& cfg,
                                     double sigma_r, std::mt19937_64& rng, int g, const CellSimOptions& opt) {
    check_sequence(sel, cfg);
    if (!(sigma_r >= 0.0)) throw ValidationError("sigma_r must be non-negative");
    CoarseCellSlice out;
    out.N = cfg.N;
    out.K = cfg.K;
    out.Q_r = cfg.Q_r;
    out.cell = g;
    out.data.assign(static_cast<std::size_t>(cfg.N) * cfg.K * cfg.Q_r, cd{});
    for (const Target& t : scene) {
        // grid points with m = 0 sit on the lower cell edge
        if (opt.require_in_cell && opt.gain != EchoGain::kExactKernel &&
            std::abs(2.0 * t.r * cfg.delta_f / cfg.c - g) > 0.5 + 1e-9)
            throw ValidationError("target at r = " + std::to_string(t.r) + " m is not in coarse cell " +
                                  std::to_string(g));
        const TargetFreqs f = target_freqs(t, cfg, g);
        cd beta;
        switch (opt.gain) {
            case EchoGain::kNominal:
                beta = static_cast<double>(cfg.G) * f.alpha_tilde;
                break;
            case EchoGain::kUnit:
                beta = f.alpha_tilde;
                break;
            case EchoGain::kExactKernel: {
                const double beat = 2.0 * cfg.kappa * t.r * cfg.T_s_radar / cfg.c;
                cd acc{};
                for (int gt = 0; gt < cfg.G; ++gt)
                    acc += cis_turns(-beat * gt) * cis_turns(static_cast<double>(gt) * g / cfg.G);
                beta = f.alpha_tilde * acc;
                break;
            }
        }
        std::size_t row = 0;
        for (int n = 0; n < cfg.N; ++n)
            for (int k = 0; k < cfg.K; ++k)
                for (int q = 0; q < cfg.Q_r; ++q)
                    out.data[row++] += beta * slow_factor(f, sel[n], n, k, q, cfg, opt.exact_xi);
    }
    if (sigma_r > 0.0)
        for (auto& x : out.data) x += complex_normal(rng, sigma_r * sigma_r);
    return out;
}

double radar_sigma_from_snr_db(const SystemConfig& cfg, double snr_db) {
    return std::sqrt(static_cast<double>(cfg.N) * cfg.K * cfg.Q_r / std::pow(10.0, snr_db / 10.0));
}

Scene parse_scene(const std::string& text) {
    Scene scene;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
        for (auto& ch : line)
            if (ch == ',' || ch == ';' || ch == '\t') ch = ' ';
        std::istringstream ls(line);
        std::vector<double> v;
        double x;
        while (ls >> x) v.push_back(x);
        if (!ls.eof()) throw ValidationError("scene line " + std::to_string(lineno) + ": not a number");
        if (v.empty()) continue;
        if (v.size() != 5)
            throw ValidationError("scene line " + std::to_string(lineno) + ": expected 5 fields");
        Target t;
        t.r = v[0];
        t.v = v[1];
        t.theta = v[2] * kPi / 180.0;
        t.alpha = std::polar(v[3], v[4]);
        scene.push_back(t);
    }
    return scene;
}

Scene load_scene(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open scene file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_scene(ss.str());
}

std::string format_scene(const Scene& scene) {
    std::ostringstream os;
    os.precision(17);
    os << "# range_m, velocity_mps, azimuth_deg, abs_alpha, arg_alpha_rad\n";
    for (const auto& t : scene)
        os << t.r << ", " << t.v << ", " << t.theta * 180.0 / kPi << ", " << std::abs(t.alpha) << ", "
           << std::arg(t.alpha) << "\n";
    return os.str();
}

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
    unsigned char b[8];
    for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
    os.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t get_u64(std::istream& is) {
    unsigned char b[8];
    is.read(reinterpret_cast<char*>(b), 8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
    return v;
}

void put_f64(std::ostream& os, double d) {
    std::uint64_t u;
    std::memcpy(&u, &d, 8);
    put_u64(os, u);
}

double get_f64(std::istream& is) {
    const std::uint64_t u = get_u64(is);
    double d;
    std::memcpy(&d, &u, 8);
    return d;
}

}  // namespace

void write_cube(const std::string& path, const FastTimeCube& cube, const std::string& cfg_hash) {
    nlohmann::json h;
    h["dims"] = {cube.N, cube.K, cube.Q_r, cube.G};
    h["order"] = "n,k,q_r,g";
    h["config_hash"] = cfg_hash;
    h["noise_variance"] = cube.noise_variance;
    const std::string hs = h.dump();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ValidationError("cannot write cube file: " + path);
    os.write("FRACCUBE", 8);
    put_u64(os, hs.size());
    os.write(hs.data(), static_cast<std::streamsize>(hs.size()));
    for (const cd& x : cube.data) {
        put_f64(os, x.real());
        put_f64(os, x.imag());
    }
}

FastTimeCube read_cube(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ValidationError("cannot open cube file: " + path);
    char magic[8];
    is.read(magic, 8);
    if (!is || std::memcmp(magic, "FRACCUBE", 8) != 0) throw ValidationError("not a cube file");
    const std::uint64_t len = get_u64(is);
    if (len > (1u << 20)) throw ValidationError("cube header too large");
    std::string hs(len, '\0');
    is.read(hs.data(), static_cast<std::streamsize>(len));
    const auto h = nlohmann::json::parse(hs);
    FastTimeCube cube;
    cube.N = h["dims"][0];
    cube.K = h["dims"][1];
    cube.Q_r = h["dims"][2];
    cube.G = h["dims"][3];
    cube.noise_variance = h["noise_variance"];
    cube.data.resize(static_cast<std::size_t>(cube.N) * cube.K * cube.Q_r * cube.G);
    for (auto& x : cube.data) {
        const double re = get_f64(is);
        const double im = get_f64(is);
        x = {re, im};
    }
    if (!is) throw ValidationError("truncated cube file");
    return cube;
}

}  // namespace frac
