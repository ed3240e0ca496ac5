#include "frac/comm.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

#include <Eigen/Dense>

#include "frac/kernels.hpp"
#include "frac/parallel.hpp"
#include "frac/rng.hpp"

namespace frac {

ChannelRealization sample_channel(const SystemConfig& cfg, std::mt19937_64& rng) {
    ChannelRealization ch;
    ch.P = cfg.P;
    ch.Q_c = cfg.Q_c;
    ch.I = cfg.I;
    ch.taps.resize(static_cast<std::size_t>(cfg.P) * cfg.Q_c * cfg.I);
    for (int p = 0; p < cfg.P; ++p)
        for (int q = 0; q < cfg.Q_c; ++q)
            for (int i = 0; i < cfg.I; ++i) ch.h(p, q, i) = complex_normal(rng, std::exp(-static_cast<double>(i)));
    return ch;
}

BasebandWaveforms make_waveforms(const SystemConfig& cfg) {
    BasebandWaveforms wf;
    wf.M = cfg.M;
    wf.U = cfg.U;
    wf.s.resize(static_cast<std::size_t>(cfg.M) * cfg.U);
    for (int m = 0; m < cfg.M; ++m)
        for (int u = 0; u < cfg.U; ++u) {
            const double t = u * cfg.T_s_comm;
            // chirp pi kappa t^2 plus the sub-carrier shift, in turns
            const double turns = 0.5 * cfg.kappa * t * t + m * cfg.delta_f * t;
            wf.s[static_cast<std::size_t>(m) * cfg.U + u] = cis_turns(turns);
        }
    return wf;
}

PsiMatrix build_psi(const ChannelRealization& ch, const BasebandWaveforms& wf, const SystemConfig& cfg) {
    if (ch.P != cfg.P || ch.Q_c != cfg.Q_c || wf.M != cfg.M || wf.U != cfg.U)
        throw ValidationError("channel / waveform dimensions do not match config");
    PsiMatrix psi;
    psi.P = cfg.P;
    psi.M = cfg.M;
    psi.Q_c = cfg.Q_c;
    psi.U = cfg.U;
    psi.rows = cfg.Q_c * cfg.U;
    psi.cols = cfg.P * cfg.M;
    psi.data.assign(static_cast<std::size_t>(psi.rows) * psi.cols, cd{});
    const auto& k = simd::active();
    const int U = cfg.U;
    for (int m = 0; m < cfg.M; ++m)
        for (int p = 0; p < cfg.P; ++p) {
            cd* col = psi.col(PsiMatrix::column_index(m, p, cfg.P));
            for (int q = 0; q < cfg.Q_c; ++q) {
                cd* blk = col + static_cast<std::size_t>(q) * U;
                // banded lower-triangular convolution, truncated to U samples
                for (int i = 0; i < ch.I && i < U; ++i)
                    k.axpy(ch.h(p, q, i), wf.waveform(m), blk + i, static_cast<std::size_t>(U - i));
            }
        }
    return psi;
}

CVec SymbolVector::dense() const {
    CVec e(length, cd{});
    for (std::size_t i = 0; i < index.size(); ++i) e[index[i]] = value[i];
    return e;
}

SymbolVector selection_to_symbol(const PulseSelection& sel, int M, int P, int J) {
    const int K = static_cast<int>(sel.carriers.size());
    validate_selection(sel, M, P, K, J);
    SymbolVector e;
    e.length = M * P;
    std::vector<int> order(K);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return sel.carriers[a] < sel.carriers[b]; });
    for (int k : order) {
        e.index.push_back(PsiMatrix::column_index(sel.carriers[k], sel.antennas[k], P));
        e.value.push_back(cis_turns(static_cast<double>(sel.symbols[k]) / J));
    }
    return e;
}

SymbolVector selection_to_symbol(const PulseSelection& sel, const SystemConfig& cfg) {
    return selection_to_symbol(sel, cfg.M, cfg.P, cfg.J);
}

PulseSelection symbol_to_selection(const SymbolVector& e, int M, int P, int J) {
    if (e.length != M * P) throw ValidationError("symbol vector length must be M*P");
    PulseSelection s;
    for (std::size_t i = 0; i < e.index.size(); ++i) {
        const int m = e.index[i] / P, p = e.index[i] % P;
        if (std::abs(std::abs(e.value[i]) - 1.0) > 1e-9) throw ValidationError("symbol entry is not unit modulus");
        const double turns = std::arg(e.value[i]) / kTwoPi;
        const long j = std::lround(turns * J);
        if (std::abs(turns * J - static_cast<double>(j)) > 1e-6) throw ValidationError("symbol phase is off the PSK grid");
        s.carriers.push_back(m);
        s.antennas.push_back(p);
        s.symbols.push_back(static_cast<int>(((j % J) + J) % J));
    }
    validate_selection(s, M, P, static_cast<int>(s.carriers.size()), J);
    return s;
}

CVec transmit(const SymbolVector& e, const PsiMatrix& psi, double sigma_c, std::mt19937_64& rng) {
    if (!(sigma_c >= 0.0)) throw ValidationError("sigma_c must be non-negative");
    if (e.length != psi.cols) throw ValidationError("symbol vector does not match Psi");
    CVec y(psi.rows, cd{});
    const auto& k = simd::active();
    for (std::size_t i = 0; i < e.index.size(); ++i)
        k.axpy(e.value[i], psi.col(e.index[i]), y.data(), static_cast<std::size_t>(psi.rows));
    if (sigma_c > 0.0)
        for (auto& v : y) v += complex_normal(rng, sigma_c * sigma_c);
    return y;
}

namespace {

void finish_set(SymbolSet& set) {
    for (std::size_t i = 0; i < set.symbols.size(); ++i) {
        std::uint64_t mask = 0;
        for (int idx : set.symbols[i].index) mask |= std::uint64_t{1} << (idx / set.P);
        set.carrier_mask.push_back(mask);
        set.by_carriers[mask].push_back(i);
    }
}

}  // namespace

SymbolSet frac_symbol_set(const SystemConfig& cfg, const std::optional<MappingTable>& table) {
    if (cfg.M > 64) throw ValidationError("symbol sets support at most 64 carriers");
    ImCodec codec(cfg, table);
    const int bits = codec.budget().n_total;
    if (bits > kMaxEnumerableBits) throw ValidationError("symbol set too large to enumerate");
    SymbolSet set;
    set.bits = bits;
    set.K = cfg.K;
    set.M = cfg.M;
    set.P = cfg.P;
    const std::uint64_t n = std::uint64_t{1} << bits;
    for (std::uint64_t cw = 0; cw < n; ++cw) {
        set.symbols.push_back(selection_to_symbol(codec.encode(cw), cfg));
        set.codewords.push_back(cw);
    }
    finish_set(set);
    return set;
}

SymbolSet psk_symbol_set(const SystemConfig& cfg, int Jp) {
    if (Jp < 2 || (Jp & (Jp - 1)) != 0) throw ValidationError("PSK order must be a power of two");
    const int bits = floor_log2(static_cast<std::uint64_t>(Jp));
    if (bits > kMaxEnumerableBits) throw ValidationError("symbol set too large to enumerate");
    SymbolSet set;
    set.bits = bits;
    set.K = 1;
    set.M = cfg.M;
    set.P = cfg.P;
    for (int j = 0; j < Jp; ++j) {
        SymbolVector e;
        e.length = cfg.M * cfg.P;
        e.index.push_back(0);
        e.value.push_back(cis_turns(static_cast<double>(j) / Jp));
        set.symbols.push_back(e);
        set.codewords.push_back(static_cast<std::uint64_t>(j));
    }
    finish_set(set);
    return set;
}

LinkModel::LinkModel(PsiMatrix psi) : psi_(std::move(psi)) {
    const int n = psi_.cols;
    const auto& k = simd::active();
    gram_.resize(static_cast<std::size_t>(n) * n);
    colnorm_.resize(n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            const cd g = k.dotc(psi_.col(i), psi_.col(j), static_cast<std::size_t>(psi_.rows));
            gram_[static_cast<std::size_t>(i) * n + j] = g;
            gram_[static_cast<std::size_t>(j) * n + i] = std::conj(g);
        }
    for (int j = 0; j < n; ++j) colnorm_[j] = std::sqrt(gram_[static_cast<std::size_t>(j) * n + j].real());
    // G = F F^H with F = V D^{1/2}; tolerant of a singular Gram
    Eigen::MatrixXcd G(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) G(i, j) = gram_[static_cast<std::size_t>(i) * n + j];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G);
    const Eigen::VectorXd d = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Eigen::MatrixXcd F = es.eigenvectors() * d.asDiagonal();
    chol_.resize(static_cast<std::size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) chol_[static_cast<std::size_t>(i) * n + j] = F(i, j);
}

CVec LinkModel::matched(const CVec& y) const {
    if (static_cast<int>(y.size()) != psi_.rows) throw ValidationError("received vector does not match Psi");
    const auto& k = simd::active();
    CVec z(psi_.cols);
    for (int j = 0; j < psi_.cols; ++j) z[j] = k.dotc(psi_.col(j), y.data(), y.size());
    return z;
}

double LinkModel::metric(const SymbolVector& e, const CVec& z) const {
    double quad = 0.0, lin = 0.0;
    const std::size_t K = e.index.size();
    for (std::size_t a = 0; a < K; ++a) {
        const cd ea = std::conj(e.value[a]);
        lin += (ea * z[e.index[a]]).real();
        for (std::size_t b = 0; b < K; ++b) quad += (ea * gram(e.index[a], e.index[b]) * e.value[b]).real();
    }
    return quad - 2.0 * lin;
}

CVec LinkModel::noise_statistic(double sigma, std::mt19937_64& rng) const {
    const int n = psi_.cols;
    CVec w(n);
    for (auto& v : w) v = complex_normal(rng, 1.0);
    CVec out(n, cd{});
    for (int i = 0; i < n; ++i) {
        cd acc{};
        for (int j = 0; j < n; ++j) acc += chol_[static_cast<std::size_t>(i) * n + j] * w[j];
        out[i] = sigma * acc;
    }
    return out;
}

CVec LinkModel::noiseless_statistic(const SymbolVector& e) const {
    const int n = psi_.cols;
    CVec out(n, cd{});
    for (int i = 0; i < n; ++i)
        for (std::size_t a = 0; a < e.index.size(); ++a) out[i] += gram(i, e.index[a]) * e.value[a];
    return out;
}

std::size_t ml_decode_stat(const LinkModel& link, const CVec& z, const SymbolSet& set) {
    if (set.symbols.empty()) throw ValidationError("empty symbol set");
    if (set.bits > kMaxEnumerableBits) throw ValidationError("symbol set too large to enumerate");
    std::size_t best = 0;
    double best_v = link.metric(set.symbols[0], z);
    for (std::size_t i = 1; i < set.symbols.size(); ++i) {
        const double v = link.metric(set.symbols[i], z);
        if (v < best_v) {
            best_v = v;
            best = i;
        }
    }
    return best;
}

std::size_t ml_decode(const LinkModel& link, const CVec& y, const SymbolSet& set) {
    return ml_decode_stat(link, link.matched(y), set);
}

std::size_t sod_decode_stat(const LinkModel& link, const CVec& z, const SymbolSet& set, SodTrace* trace) {
    const int M = set.M, P = set.P;
    std::vector<double> gmax(M, 0.0);
    for (int m = 0; m < M; ++m)
        for (int p = 0; p < P; ++p) {
            const int j = PsiMatrix::column_index(m, p, P);
            const double nrm = link.column_norm(j);
            if (nrm > 0.0) gmax[m] = std::max(gmax[m], std::abs(z[j]) / nrm);
        }
    std::vector<int> order(M);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return gmax[a] > gmax[b]; });
    std::uint64_t mask = 0;
    for (int k = 0; k < set.K; ++k) mask |= std::uint64_t{1} << order[k];

    auto it = set.by_carriers.find(mask);
    bool fallback = false;
    if (it == set.by_carriers.end()) {
        // strongest carrier set that the encoder can produce
        fallback = true;
        double best = -1.0;
        for (auto c = set.by_carriers.begin(); c != set.by_carriers.end(); ++c) {
            double s = 0.0;
            for (int m = 0; m < M; ++m)
                if (c->first >> m & 1u) s += gmax[m] * gmax[m];
            if (s > best) {
                best = s;
                it = c;
            }
        }
    }
    const auto& cand = it->second;
    std::size_t best = cand.front();
    double best_v = link.metric(set.symbols[best], z);
    for (std::size_t i = 1; i < cand.size(); ++i) {
        const double v = link.metric(set.symbols[cand[i]], z);
        if (v < best_v) {
            best_v = v;
            best = cand[i];
        }
    }
    if (trace) {
        trace->detected_carriers.clear();
        for (int m = 0; m < M; ++m)
            if (it->first >> m & 1u) trace->detected_carriers.push_back(m);
        trace->fallback = fallback;
        trace->searched = cand.size();
    }
    return best;
}

std::size_t sod_decode(const LinkModel& link, const CVec& y, const SymbolSet& set, SodTrace* trace) {
    return sod_decode_stat(link, link.matched(y), set, trace);
}

double comm_sigma_from_snr_db(const SystemConfig& cfg, int K, double snr_db) {
    double pdp = 0.0;
    for (int i = 0; i < cfg.I; ++i) pdp += std::exp(-static_cast<double>(i));
    return std::sqrt(K * cfg.Q_c * cfg.U * pdp / std::pow(10.0, snr_db / 10.0));
}

std::vector<BerPoint> simulate_ber(const SystemConfig& cfg, const SymbolSet& set, Decoder dec,
                                   const std::vector<double>& snr_db, const BerOptions& opt) {
    if (opt.trials < 1 || opt.draws_per_channel < 1) throw ValidationError("trial counts must be positive");
    if (snr_db.empty()) throw ValidationError("empty SNR list");
    const int per = opt.draws_per_channel;
    const int blocks = (opt.trials + per - 1) / per;
    const std::size_t S = snr_db.size();
    std::vector<double> sigma(S);
    for (std::size_t s = 0; s < S; ++s) sigma[s] = comm_sigma_from_snr_db(cfg, set.K, snr_db[s]);
    const BasebandWaveforms wf = make_waveforms(cfg);

    struct Block {
        std::vector<std::uint64_t> errors;
        std::uint64_t bits = 0;
    };
    auto parts = parallel_map<Block>(static_cast<std::size_t>(blocks), opt.workers, [&](std::size_t b) {
        Block out{std::vector<std::uint64_t>(S, 0), 0};
        auto crng = stream_rng(opt.seed, 0xc4a7, b);
        const LinkModel link(build_psi(sample_channel(cfg, crng), wf, cfg));
        const int lo = static_cast<int>(b) * per;
        const int hi = std::min(opt.trials, lo + per);
        for (int t = lo; t < hi; ++t) {
            auto rng = stream_rng(opt.seed, 0xbe4, static_cast<std::uint64_t>(t));
            std::uniform_int_distribution<std::size_t> pick(0, set.symbols.size() - 1);
            const std::size_t tx = pick(rng);
            const SymbolVector& e = set.symbols[tx];
            CVec zs, nz;
            CVec w;
            if (opt.explicit_noise) {
                w.resize(link.psi().rows);
                for (auto& v : w) v = complex_normal(rng, 1.0);
            } else {
                nz = link.noise_statistic(1.0, rng);
            }
            const CVec z0 = link.noiseless_statistic(e);
            for (std::size_t s = 0; s < S; ++s) {
                CVec z(z0);
                if (opt.explicit_noise) {
                    CVec y(link.psi().rows, cd{});
                    const auto& k = simd::active();
                    for (std::size_t i = 0; i < e.index.size(); ++i)
                        k.axpy(e.value[i], link.psi().col(e.index[i]), y.data(), y.size());
                    k.axpy(sigma[s], w.data(), y.data(), y.size());
                    z = link.matched(y);
                } else {
                    for (std::size_t i = 0; i < z.size(); ++i) z[i] += sigma[s] * nz[i];
                }
                const std::size_t rx = dec == Decoder::kMl ? ml_decode_stat(link, z, set) : sod_decode_stat(link, z, set);
                out.errors[s] += static_cast<std::uint64_t>(std::popcount(set.codewords[tx] ^ set.codewords[rx]));
            }
            out.bits += static_cast<std::uint64_t>(set.bits);
        }
        return out;
    });

    std::vector<BerPoint> res(S);
    for (std::size_t s = 0; s < S; ++s) {
        BerPoint p{snr_db[s], 0.0, 0.0, 0, 0};
        std::vector<double> frac_b;
        for (const auto& b : parts) {
            p.bit_errors += b.errors[s];
            p.bits += b.bits;
            frac_b.push_back(b.bits ? static_cast<double>(b.errors[s]) / b.bits : 0.0);
        }
        p.ber = static_cast<double>(p.bit_errors) / static_cast<double>(p.bits);
        // spread across channel blocks
        if (frac_b.size() > 1) {
            double m = 0.0, v = 0.0;
            for (double x : frac_b) m += x;
            m /= frac_b.size();
            for (double x : frac_b) v += (x - m) * (x - m);
            v /= (frac_b.size() - 1);
            p.stderr_ = std::sqrt(v / frac_b.size());
        }
        res[s] = p;
    }
    return res;
}

RateEstimate achievable_rate(const SystemConfig& cfg, const SymbolSet& set, double snr_db, const RateOptions& opt) {
    if (opt.channels < 1 || opt.noise_draws < 1) throw ValidationError("Monte Carlo counts must be positive");
    if (set.bits > kMaxEnumerableBits) throw ValidationError("symbol set too large to enumerate");
    const double sigma = comm_sigma_from_snr_db(cfg, set.K, snr_db);
    const double s2 = sigma * sigma;
    const double log2e = 1.0 / std::log(2.0);
    const double log2E = std::log2(static_cast<double>(set.symbols.size()));
    const BasebandWaveforms wf = make_waveforms(cfg);
    const auto& k = simd::active();

    auto per_channel = parallel_map<double>(static_cast<std::size_t>(opt.channels), opt.workers, [&](std::size_t c) {
        auto crng = stream_rng(opt.seed, 0x7a7e, c);
        const LinkModel link(build_psi(sample_channel(cfg, crng), wf, cfg));
        const std::size_t rows = static_cast<std::size_t>(link.psi().rows);
        std::vector<double> expo(set.symbols.size());
        double acc = 0.0;
        for (int d = 0; d < opt.noise_draws; ++d) {
            auto rng = stream_rng(opt.seed, 0x7a7f, c * static_cast<std::uint64_t>(opt.noise_draws) + d);
            std::uniform_int_distribution<std::size_t> pick(0, set.symbols.size() - 1);
            const SymbolVector& e = set.symbols[pick(rng)];
            CVec y = transmit(e, link.psi(), sigma, rng);
            const double yy = k.norm_sq(y.data(), rows);
            const CVec z = link.matched(y);
            // w = y - Psi e_tx
            CVec w(y);
            for (std::size_t i = 0; i < e.index.size(); ++i)
                k.axpy(-e.value[i], link.psi().col(e.index[i]), w.data(), rows);
            const double ww = k.norm_sq(w.data(), rows);
            double mx = -1e300;
            for (std::size_t i = 0; i < set.symbols.size(); ++i) {
                const double dist = link.metric(set.symbols[i], z) + yy;   // ||y - Psi e||^2
                expo[i] = opt.constant == RateConstant::kPerSample ? -(dist - ww) / s2 : -dist / s2;
                mx = std::max(mx, expo[i]);
            }
            double sum = 0.0;
            for (double x : expo) sum += std::exp(x - mx);
            const double log2sum = (mx + std::log(sum)) * log2e;
            double sample = log2E - log2sum;
            if (opt.constant == RateConstant::kVerbatim) sample -= cfg.Q_c * log2e;
            acc += sample;
        }
        return acc / opt.noise_draws;
    });
    RateEstimate r{snr_db, 0.0, 0.0};
    for (double x : per_channel) r.mean += x;
    r.mean /= opt.channels;
    if (opt.channels > 1) {
        double v = 0.0;
        for (double x : per_channel) v += (x - r.mean) * (x - r.mean);
        v /= (opt.channels - 1);
        r.stderr_ = std::sqrt(v / opt.channels);
    }
    return r;
}

}  // namespace frac
