#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <vector>

#include "frac/config.hpp"
#include "frac/im_codec.hpp"

namespace frac {

struct ChannelRealization {
    int P = 0, Q_c = 0, I = 0;
    CVec taps;   // [(p*Q_c + q)*I + i]

    const cd& h(int p, int q, int i) const { return taps[(static_cast<std::size_t>(p) * Q_c + q) * I + i]; }
    cd& h(int p, int q, int i) { return taps[(static_cast<std::size_t>(p) * Q_c + q) * I + i]; }
};

ChannelRealization sample_channel(const SystemConfig& cfg, std::mt19937_64& rng);

struct BasebandWaveforms {
    int M = 0, U = 0;
    CVec s;   // [m*U + u]

    const cd* waveform(int m) const { return s.data() + static_cast<std::size_t>(m) * U; }
};

BasebandWaveforms make_waveforms(const SystemConfig& cfg);

// Column-major, Q_c*U rows, P*M columns; column m*P + p.
struct PsiMatrix {
    int rows = 0, cols = 0;
    int P = 0, M = 0, Q_c = 0, U = 0;
    CVec data;

    static int column_index(int m, int p, int P) { return m * P + p; }
    const cd* col(int j) const { return data.data() + static_cast<std::size_t>(j) * rows; }
    cd* col(int j) { return data.data() + static_cast<std::size_t>(j) * rows; }
};

PsiMatrix build_psi(const ChannelRealization& ch, const BasebandWaveforms& wf, const SystemConfig& cfg);

// K unit-modulus entries at positions m*P + p, ascending.
struct SymbolVector {
    int length = 0;
    std::vector<int> index;
    CVec value;

    CVec dense() const;
    bool operator==(const SymbolVector&) const = default;
};

SymbolVector selection_to_symbol(const PulseSelection& sel, int M, int P, int J);
SymbolVector selection_to_symbol(const PulseSelection& sel, const SystemConfig& cfg);
PulseSelection symbol_to_selection(const SymbolVector& e, int M, int P, int J);

// y = Psi e + w, w ~ CN(0, sigma_c^2 I).
CVec transmit(const SymbolVector& e, const PsiMatrix& psi, double sigma_c, std::mt19937_64& rng);

// Candidate transmit vectors in codeword order, with their carrier sets.
struct SymbolSet {
    std::vector<SymbolVector> symbols;
    std::vector<std::uint64_t> codewords;
    int bits = 0;
    int K = 0;
    int M = 0, P = 0;
    std::vector<std::uint64_t> carrier_mask;                         // per symbol
    std::map<std::uint64_t, std::vector<std::size_t>> by_carriers;   // mask -> symbol indices
};

inline constexpr int kMaxEnumerableBits = 20;

SymbolSet frac_symbol_set(const SystemConfig& cfg, const std::optional<MappingTable>& table = std::nullopt);
// Single carrier 0 on antenna 0 with Jp-PSK.
SymbolSet psk_symbol_set(const SystemConfig& cfg, int Jp);

// Psi together with its Gram matrix; decoders only need Psi^H y.
class LinkModel {
public:
    explicit LinkModel(PsiMatrix psi);

    const PsiMatrix& psi() const { return psi_; }
    int dim() const { return psi_.cols; }
    const cd& gram(int i, int j) const { return gram_[static_cast<std::size_t>(i) * psi_.cols + j]; }
    double column_norm(int j) const { return colnorm_[j]; }

    CVec matched(const CVec& y) const;   // Psi^H y
    // ||y - Psi e||^2 - ||y||^2 from z = Psi^H y.
    double metric(const SymbolVector& e, const CVec& z) const;
    // Draws Psi^H w for w ~ CN(0, sigma^2 I) using the Gram factor.
    CVec noise_statistic(double sigma, std::mt19937_64& rng) const;
    CVec noiseless_statistic(const SymbolVector& e) const;   // G e

private:
    PsiMatrix psi_;
    CVec gram_;      // row-major P*M x P*M
    CVec chol_;      // lower factor, row-major
    std::vector<double> colnorm_;
};

std::size_t ml_decode_stat(const LinkModel& link, const CVec& z, const SymbolSet& set);
std::size_t ml_decode(const LinkModel& link, const CVec& y, const SymbolSet& set);

struct SodTrace {
    std::vector<int> detected_carriers;
    bool fallback = false;   // detected set was not encodable
    std::size_t searched = 0;
};

std::size_t sod_decode_stat(const LinkModel& link, const CVec& z, const SymbolSet& set, SodTrace* trace = nullptr);
std::size_t sod_decode(const LinkModel& link, const CVec& y, const SymbolSet& set, SodTrace* trace = nullptr);

// sigma_c^2 = K Q_c U sum_i e^{-i} / SNR.
double comm_sigma_from_snr_db(const SystemConfig& cfg, int K, double snr_db);

enum class Decoder { kMl, kSod };

struct BerOptions {
    std::uint64_t seed = 1;
    int trials = 10000;
    int draws_per_channel = 10;
    int workers = 1;
    bool explicit_noise = false;   // draw w in the sample domain instead of Psi^H w
};

struct BerPoint {
    double snr_db;
    double ber;
    double stderr_;
    std::uint64_t bit_errors;
    std::uint64_t bits;
};

// Channels and symbol/noise draws are shared across SNR points.
std::vector<BerPoint> simulate_ber(const SystemConfig& cfg, const SymbolSet& set, Decoder dec,
                                   const std::vector<double>& snr_db, const BerOptions& opt);

enum class RateConstant {
    kPerSample,   // -Q_c U log2 e
    kVerbatim,    // -Q_c log2 e
};

struct RateOptions {
    std::uint64_t seed = 1;
    int channels = 100;
    int noise_draws = 100;
    int workers = 1;
    RateConstant constant = RateConstant::kPerSample;
};

struct RateEstimate {
    double snr_db;
    double mean;
    double stderr_;
};

RateEstimate achievable_rate(const SystemConfig& cfg, const SymbolSet& set, double snr_db, const RateOptions& opt);

}  // namespace frac
