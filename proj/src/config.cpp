#include "frac/config.hpp"

#include <bit>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#ifndef FRAC_VERSION
#define FRAC_VERSION "0.1.0"
#endif

namespace frac {

using nlohmann::json;

std::uint64_t binomial(int n, int k) {
    if (k < 0 || n < 0 || k > n) return 0;
    k = std::min(k, n - k);
    std::uint64_t r = 1;
    for (int i = 1; i <= k; ++i) {
        // r * (n-k+i) / i stays integral at every step
        const unsigned __int128 t = static_cast<unsigned __int128>(r) * static_cast<unsigned>(n - k + i);
        if (t / i > std::numeric_limits<std::uint64_t>::max())
            throw ValidationError("binomial coefficient overflows 64 bits");
        r = static_cast<std::uint64_t>(t / i);
    }
    return r;
}

std::uint64_t factorial(int n) {
    if (n > 20) throw ValidationError("factorial overflows 64 bits");
    std::uint64_t r = 1;
    for (int i = 2; i <= n; ++i) r *= static_cast<std::uint64_t>(i);
    return r;
}

int floor_log2(std::uint64_t x) {
    if (x == 0) throw ValidationError("floor_log2 of zero");
    return static_cast<int>(std::bit_width(x)) - 1;
}

BitBudget bit_budget(int M, int K, int P, int J) {
    if (K < 1 || K > M || K > P) throw ValidationError("need 1 <= K <= min(M, P)");
    if (J < 1 || !std::has_single_bit(static_cast<unsigned>(J)))
        throw ValidationError("J must be a power of two");
    BitBudget b;
    b.n_carrier = floor_log2(binomial(M, K));
    b.n_antenna = floor_log2(binomial(P, K));
    b.n_perm = floor_log2(factorial(K));
    b.n_im = b.n_carrier + b.n_antenna + b.n_perm;
    b.n_pm = K * floor_log2(static_cast<std::uint64_t>(J));
    b.n_total = b.n_im + b.n_pm;
    return b;
}

BitBudget bit_budget(const SystemConfig& cfg) { return bit_budget(cfg.M, cfg.K, cfg.P, cfg.J); }

namespace {

void require(bool ok, const std::string& what) {
    if (!ok) throw ValidationError(what);
}

bool positive_finite(double x) { return std::isfinite(x) && x > 0.0; }

}  // namespace

SystemConfig derive(const RawParams& raw) {
    require(raw.N >= 1 && raw.M >= 1 && raw.P >= 1, "N, M, P must be >= 1");
    require(raw.Q_r >= 1, "Q_r must be >= 1");
    require(raw.Q_c >= 1, "Q_c must be >= 1");
    require(raw.I >= 1, "channel tap count I must be >= 1");
    require(raw.K >= 1 && raw.K <= std::min(raw.M, raw.P), "need 1 <= K <= min(M, P)");
    require(raw.J >= 1 && std::has_single_bit(static_cast<unsigned>(raw.J)), "J must be a power of two");
    require(positive_finite(raw.f_c) && positive_finite(raw.B), "f_c and B must be positive");
    require(positive_finite(raw.T_0) && positive_finite(raw.T_p), "T_0 and T_p must be positive");
    require(raw.T_p <= raw.T_0, "pulse width T_p exceeds PRI T_0");
    require(positive_finite(raw.c), "c must be positive");
    require(raw.r_max.has_value() != raw.F_s_radar.has_value(),
            "give exactly one of r_max and F_s_radar");

    SystemConfig s{};
    s.raw = raw;
    s.N = raw.N; s.M = raw.M; s.K = raw.K; s.P = raw.P;
    s.Q_r = raw.Q_r; s.Q_c = raw.Q_c; s.J = raw.J; s.I = raw.I;
    s.f_c = raw.f_c; s.B = raw.B; s.T_0 = raw.T_0; s.T_p = raw.T_p; s.c = raw.c;
    s.seed = raw.seed;

    s.delta_f = raw.B / raw.M;
    s.kappa = s.delta_f / raw.T_p;
    s.lambda = raw.c / raw.f_c;
    s.d_R = raw.d_R.value_or(s.lambda / 2.0);
    require(positive_finite(s.d_R), "d_R must be positive");
    s.d_T = raw.Q_r * s.d_R;

    if (raw.r_max) {
        require(positive_finite(*raw.r_max), "r_max must be positive");
        s.r_max = *raw.r_max;
        s.F_s_radar = 2.0 * s.r_max * s.delta_f / (raw.c * raw.T_0);
    } else {
        require(positive_finite(*raw.F_s_radar), "F_s_radar must be positive");
        s.F_s_radar = *raw.F_s_radar;
        s.r_max = s.F_s_radar * raw.c * raw.T_0 / (2.0 * s.delta_f);
    }
    s.T_s_radar = 1.0 / s.F_s_radar;
    // tiny slack so that T_0*F_s landing on an integer is not lost to rounding
    s.G = static_cast<int>(std::floor(raw.T_0 * s.F_s_radar * (1.0 + 1e-12)));
    require(s.G >= 1, "fewer than one fast-time sample per PRI");

    s.F_s_comm = raw.F_s_comm.value_or(raw.B);
    require(positive_finite(s.F_s_comm), "F_s_comm must be positive");
    s.T_s_comm = 1.0 / s.F_s_comm;
    s.U = static_cast<int>(std::floor(raw.T_p * s.F_s_comm * (1.0 + 1e-12)));
    require(s.U >= 1, "fewer than one comm sample per pulse");
    return s;
}

RawParams table1_params() { return RawParams{}; }

namespace {

template <class T>
void opt_to_json(json& j, const char* key, const std::optional<T>& v) {
    if (v) j[key] = *v;
    else j[key] = nullptr;
}

json to_json_obj(const RawParams& r) {
    json j;
    j["N"] = r.N; j["M"] = r.M; j["K"] = r.K; j["P"] = r.P;
    j["Q_r"] = r.Q_r; j["Q_c"] = r.Q_c; j["J"] = r.J; j["I"] = r.I;
    j["f_c"] = r.f_c; j["B"] = r.B; j["T_0"] = r.T_0; j["T_p"] = r.T_p;
    opt_to_json(j, "r_max", r.r_max);
    opt_to_json(j, "F_s_radar", r.F_s_radar);
    opt_to_json(j, "d_R", r.d_R);
    opt_to_json(j, "F_s_comm", r.F_s_comm);
    j["c"] = r.c;
    j["seed"] = r.seed;
    return j;
}

}  // namespace

RawParams params_from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ValidationError(std::string("config parse error: ") + e.what());
    }
    if (!j.is_object()) throw ValidationError("config must be a JSON object");
    RawParams r;
    const bool has_rmax = j.contains("r_max") && !j["r_max"].is_null();
    const bool has_fs = j.contains("F_s_radar") && !j["F_s_radar"].is_null();
    if (has_rmax && !has_fs) r.F_s_radar.reset();
    try {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const std::string& k = it.key();
            const json& v = it.value();
            auto opt = [&](std::optional<double>& dst) {
                if (v.is_null()) dst.reset();
                else dst = v.get<double>();
            };
            if (k == "N") r.N = v.get<int>();
            else if (k == "M") r.M = v.get<int>();
            else if (k == "K") r.K = v.get<int>();
            else if (k == "P") r.P = v.get<int>();
            else if (k == "Q_r") r.Q_r = v.get<int>();
            else if (k == "Q_c") r.Q_c = v.get<int>();
            else if (k == "J") r.J = v.get<int>();
            else if (k == "I") r.I = v.get<int>();
            else if (k == "f_c") r.f_c = v.get<double>();
            else if (k == "B") r.B = v.get<double>();
            else if (k == "T_0") r.T_0 = v.get<double>();
            else if (k == "T_p") r.T_p = v.get<double>();
            else if (k == "r_max") opt(r.r_max);
            else if (k == "F_s_radar") opt(r.F_s_radar);
            else if (k == "d_R") opt(r.d_R);
            else if (k == "F_s_comm") opt(r.F_s_comm);
            else if (k == "c") r.c = v.get<double>();
            else if (k == "seed") r.seed = v.get<std::uint64_t>();
            else throw ValidationError("unknown config key: " + k);
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("config type error: ") + e.what());
    }
    return r;
}

std::string params_to_json(const RawParams& raw) { return to_json_obj(raw).dump(2); }

RawParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return params_from_json(ss.str());
}

std::string config_hash(const RawParams& raw) {
    // FNV-1a over the compact canonical dump (keys are sorted by nlohmann::json)
    const std::string s = to_json_obj(raw).dump();
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char ch : s) {
        h ^= ch;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

const char* version_string() { return FRAC_VERSION; }

}  // namespace frac
