#include "frac/im_codec.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include <json.hpp>

namespace frac {

Bits bits_from_string(const std::string& s) {
    Bits b;
    b.reserve(s.size());
    for (char ch : s) {
        if (ch == '0') b.push_back(0);
        else if (ch == '1') b.push_back(1);
        else throw ValidationError("bit string may contain only 0 and 1");
    }
    return b;
}

std::string bits_to_string(const Bits& b) {
    std::string s;
    for (auto x : b) s.push_back(x ? '1' : '0');
    return s;
}

Bits bits_from_uint(std::uint64_t v, int width) {
    Bits b(static_cast<std::size_t>(width));
    for (int i = 0; i < width; ++i) b[width - 1 - i] = static_cast<std::uint8_t>((v >> i) & 1u);
    return b;
}

std::uint64_t bits_to_uint(const Bits& b) {
    if (b.size() > 64) throw ValidationError("bit string longer than 64");
    std::uint64_t v = 0;
    for (auto x : b) v = (v << 1) | (x ? 1u : 0u);
    return v;
}

Bits bits_from_hex(const std::string& hex, int width) {
    std::string h = hex;
    if (h.rfind("0x", 0) == 0 || h.rfind("0X", 0) == 0) h = h.substr(2);
    if (h.empty()) throw ValidationError("empty hex string");
    Bits all;
    for (char ch : h) {
        int v;
        if (ch >= '0' && ch <= '9') v = ch - '0';
        else if (ch >= 'a' && ch <= 'f') v = ch - 'a' + 10;
        else if (ch >= 'A' && ch <= 'F') v = ch - 'A' + 10;
        else throw ValidationError("bad hex digit");
        for (int i = 3; i >= 0; --i) all.push_back(static_cast<std::uint8_t>((v >> i) & 1));
    }
    if (static_cast<int>(all.size()) < width) all.insert(all.begin(), width - all.size(), 0);
    const std::size_t extra = all.size() - width;
    for (std::size_t i = 0; i < extra; ++i)
        if (all[i]) throw ValidationError("hex value does not fit in " + std::to_string(width) + " bits");
    return Bits(all.begin() + static_cast<long>(extra), all.end());
}

std::uint64_t rank_combination(const std::vector<int>& c, int n) {
    const int k = static_cast<int>(c.size());
    std::uint64_t rank = 0;
    int x = 0;
    for (int i = 0; i < k; ++i) {
        for (; x < c[i]; ++x) rank += binomial(n - x - 1, k - i - 1);
        ++x;
    }
    return rank;
}

std::vector<int> unrank_combination(std::uint64_t rank, int n, int k) {
    if (rank >= binomial(n, k)) throw ValidationError("combination rank out of range");
    std::vector<int> c;
    c.reserve(k);
    int x = 0;
    for (int i = 0; i < k; ++i) {
        for (;; ++x) {
            const std::uint64_t cnt = binomial(n - x - 1, k - i - 1);
            if (rank < cnt) break;
            rank -= cnt;
        }
        c.push_back(x++);
    }
    return c;
}

std::uint64_t rank_permutation(const std::vector<int>& perm) {
    const int k = static_cast<int>(perm.size());
    std::uint64_t rank = 0;
    for (int i = 0; i < k; ++i) {
        int smaller = 0;
        for (int j = i + 1; j < k; ++j)
            if (perm[j] < perm[i]) ++smaller;
        rank = rank * static_cast<std::uint64_t>(k - i) + static_cast<std::uint64_t>(smaller);
    }
    return rank;
}

std::vector<int> unrank_permutation(std::uint64_t rank, int k) {
    if (rank >= factorial(k)) throw ValidationError("permutation rank out of range");
    std::vector<int> digits(k);
    for (int i = k - 1; i >= 0; --i) {
        const auto base = static_cast<std::uint64_t>(k - i);
        digits[i] = static_cast<int>(rank % base);
        rank /= base;
    }
    std::vector<int> pool(k);
    std::iota(pool.begin(), pool.end(), 0);
    std::vector<int> perm;
    perm.reserve(k);
    for (int i = 0; i < k; ++i) {
        perm.push_back(pool[digits[i]]);
        pool.erase(pool.begin() + digits[i]);
    }
    return perm;
}

MappingTable MappingTable::from_json(const std::string& text) {
    using nlohmann::json;
    MappingTable t;
    try {
        const json j = json::parse(text);
        t.M = j.at("M").get<int>();
        t.K = j.at("K").get<int>();
        t.P = j.at("P").get<int>();
        for (const auto& e : j.at("entries")) {
            const Bits b = bits_from_string(e.at("bits").get<std::string>());
            auto car = e.at("carriers").get<std::vector<int>>();
            auto ant = e.at("antennas").get<std::vector<int>>();
            if (static_cast<int>(car.size()) != t.K || static_cast<int>(ant.size()) != t.K)
                throw ValidationError("mapping entry must list K carriers and K antennas");
            if (!t.entries.emplace(bits_to_uint(b), std::make_pair(car, ant)).second)
                throw ValidationError("duplicate mapping entry");
        }
    } catch (const json::exception& e) {
        throw ValidationError(std::string("mapping table: ") + e.what());
    }
    return t;
}

MappingTable MappingTable::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open mapping table: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_json(ss.str());
}

void validate_selection(const PulseSelection& sel, int M, int P, int K, int J) {
    if (static_cast<int>(sel.carriers.size()) != K || static_cast<int>(sel.antennas.size()) != K ||
        static_cast<int>(sel.symbols.size()) != K)
        throw ValidationError("selection must have K carriers, antennas and symbols");
    auto distinct_in = [](std::vector<int> v, int hi) {
        std::sort(v.begin(), v.end());
        if (std::adjacent_find(v.begin(), v.end()) != v.end()) return false;
        return v.empty() || (v.front() >= 0 && v.back() < hi);
    };
    if (!distinct_in(sel.carriers, M)) throw ValidationError("carriers must be distinct and < M");
    if (!distinct_in(sel.antennas, P)) throw ValidationError("antennas must be distinct and < P");
    for (int s : sel.symbols)
        if (s < 0 || s >= J) throw ValidationError("PM symbol out of range");
}

ImCodec::ImCodec(const SystemConfig& cfg, std::optional<MappingTable> table)
    : M_(cfg.M), K_(cfg.K), P_(cfg.P), J_(cfg.J), budget_(bit_budget(cfg)), table_(std::move(table)) {
    if (table_) {
        if (table_->M != M_ || table_->K != K_ || table_->P != P_)
            throw ValidationError("mapping table dimensions do not match config");
        const std::uint64_t need = std::uint64_t{1} << budget_.n_im;
        if (table_->entries.size() != need)
            throw ValidationError("mapping table must have 2^n_im entries");
        for (const auto& [key, val] : table_->entries) {
            if (key >= need) throw ValidationError("mapping table key wider than n_im bits");
            PulseSelection probe{val.first, val.second, std::vector<int>(K_, 0)};
            validate_selection(probe, M_, P_, K_, J_);
            auto norm = val;
            // assignment is what matters: order pairs by carrier
            std::vector<int> idx(K_);
            std::iota(idx.begin(), idx.end(), 0);
            std::sort(idx.begin(), idx.end(), [&](int a, int b) { return val.first[a] < val.first[b]; });
            for (int k = 0; k < K_; ++k) {
                norm.first[k] = val.first[idx[k]];
                norm.second[k] = val.second[idx[k]];
            }
            if (!inverse_.emplace(norm, key).second)
                throw ValidationError("mapping table assigns one selection twice");
        }
    }
}

PulseSelection ImCodec::encode(const Bits& bits) const {
    if (static_cast<int>(bits.size()) != budget_.n_total)
        throw ValidationError("expected " + std::to_string(budget_.n_total) + " bits, got " +
                              std::to_string(bits.size()));
    auto field = [&](int& pos, int width) {
        std::uint64_t v = 0;
        for (int i = 0; i < width; ++i) v = (v << 1) | bits[pos++];
        return v;
    };
    int pos = 0;
    PulseSelection sel;
    if (table_) {
        const std::uint64_t key = field(pos, budget_.n_im);
        const auto& e = table_->entries.at(key);
        std::vector<int> idx(K_);
        std::iota(idx.begin(), idx.end(), 0);
        std::sort(idx.begin(), idx.end(), [&](int a, int b) { return e.first[a] < e.first[b]; });
        for (int k : idx) {
            sel.carriers.push_back(e.first[k]);
            sel.antennas.push_back(e.second[k]);
        }
    } else {
        const std::uint64_t rc = field(pos, budget_.n_carrier);
        const std::uint64_t ra = field(pos, budget_.n_antenna);
        const std::uint64_t rp = field(pos, budget_.n_perm);
        sel.carriers = unrank_combination(rc, M_, K_);
        const auto ants = unrank_combination(ra, P_, K_);
        const auto perm = unrank_permutation(rp, K_);
        sel.antennas.resize(K_);
        for (int k = 0; k < K_; ++k) sel.antennas[k] = ants[perm[k]];
    }
    const int bps = budget_.n_pm / K_;
    sel.symbols.resize(K_);
    for (int k = 0; k < K_; ++k) sel.symbols[k] = static_cast<int>(field(pos, bps));
    return sel;
}

PulseSelection ImCodec::encode(std::uint64_t codeword) const {
    return encode(bits_from_uint(codeword, budget_.n_total));
}

std::uint64_t ImCodec::decode_index(const PulseSelection& in) const {
    validate_selection(in, M_, P_, K_, J_);
    // canonical order: ascending carrier
    std::vector<int> idx(K_);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return in.carriers[a] < in.carriers[b]; });
    std::vector<int> car(K_), ant(K_), sym(K_);
    for (int k = 0; k < K_; ++k) {
        car[k] = in.carriers[idx[k]];
        ant[k] = in.antennas[idx[k]];
        sym[k] = in.symbols[idx[k]];
    }
    std::uint64_t im;
    if (table_) {
        auto it = inverse_.find({car, ant});
        if (it == inverse_.end()) throw ValidationError("selection not in mapping table");
        im = it->second;
    } else {
        const std::uint64_t rc = rank_combination(car, M_);
        std::vector<int> sorted_ant = ant;
        std::sort(sorted_ant.begin(), sorted_ant.end());
        const std::uint64_t ra = rank_combination(sorted_ant, P_);
        std::vector<int> perm(K_);
        for (int k = 0; k < K_; ++k)
            perm[k] = static_cast<int>(std::lower_bound(sorted_ant.begin(), sorted_ant.end(), ant[k]) -
                                       sorted_ant.begin());
        const std::uint64_t rp = rank_permutation(perm);
        if (rc >> budget_.n_carrier || ra >> budget_.n_antenna || rp >> budget_.n_perm)
            throw ValidationError("selection is outside the encodable subset");
        im = (((rc << budget_.n_antenna) | ra) << budget_.n_perm) | rp;
    }
    const int bps = budget_.n_pm / K_;
    std::uint64_t cw = im;
    for (int k = 0; k < K_; ++k) cw = (cw << bps) | static_cast<std::uint64_t>(sym[k]);
    return cw;
}

Bits ImCodec::decode(const PulseSelection& sel) const {
    return bits_from_uint(decode_index(sel), budget_.n_total);
}

bool ImCodec::reachable(const PulseSelection& sel) const {
    try {
        (void)decode_index(sel);
        return true;
    } catch (const ValidationError&) {
        return false;
    }
}

namespace {

std::vector<int> random_subset(int n, int k, std::mt19937_64& rng) {
    std::vector<int> pool(n);
    std::iota(pool.begin(), pool.end(), 0);
    for (int i = 0; i < k; ++i) {
        std::uniform_int_distribution<int> d(i, n - 1);
        std::swap(pool[i], pool[d(rng)]);
    }
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

}  // namespace

PulseSelection random_selection(const SystemConfig& cfg, std::mt19937_64& rng, SelectionMode mode) {
    if (mode == SelectionMode::kMessage) {
        const BitBudget b = bit_budget(cfg);
        Bits bits(b.n_total);
        std::uniform_int_distribution<int> coin(0, 1);
        for (auto& x : bits) x = static_cast<std::uint8_t>(coin(rng));
        return ImCodec(cfg).encode(bits);
    }
    PulseSelection s;
    s.carriers = random_subset(cfg.M, cfg.K, rng);
    s.antennas = random_subset(cfg.P, cfg.K, rng);
    std::shuffle(s.antennas.begin(), s.antennas.end(), rng);
    std::uniform_int_distribution<int> sym(0, cfg.J - 1);
    s.symbols.resize(cfg.K);
    for (auto& x : s.symbols) x = sym(rng);
    return s;
}

SelectionSequence random_selection_sequence(const SystemConfig& cfg, std::mt19937_64& rng,
                                            SelectionMode mode) {
    SelectionSequence seq;
    seq.reserve(cfg.N);
    for (int n = 0; n < cfg.N; ++n) seq.push_back(random_selection(cfg, rng, mode));
    return seq;
}

std::string selection_to_json(const PulseSelection& sel, int J) {
    nlohmann::json j;
    j["carriers"] = sel.carriers;
    j["antennas"] = sel.antennas;
    j["symbols"] = sel.symbols;
    std::vector<double> ph;
    for (std::size_t k = 0; k < sel.symbols.size(); ++k) ph.push_back(sel.phase(static_cast<int>(k), J));
    j["phases_rad"] = ph;
    return j.dump();
}

}  // namespace frac
