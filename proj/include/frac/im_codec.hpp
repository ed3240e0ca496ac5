#pragma once

#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "frac/config.hpp"

namespace frac {

// One pulse: carriers[k] is radiated from antennas[k] with phase 2*pi*symbols[k]/J.
struct PulseSelection {
    std::vector<int> carriers;
    std::vector<int> antennas;
    std::vector<int> symbols;

    double phase(int k, int J) const { return kTwoPi * symbols[k] / J; }
    bool operator==(const PulseSelection&) const = default;
};

using SelectionSequence = std::vector<PulseSelection>;

// Bits are stored one per byte, most significant field first.
using Bits = std::vector<std::uint8_t>;

Bits bits_from_string(const std::string& s);      // "0110..."
std::string bits_to_string(const Bits& b);
Bits bits_from_uint(std::uint64_t v, int width);
std::uint64_t bits_to_uint(const Bits& b);
Bits bits_from_hex(const std::string& hex, int width);  // low `width` bits of the hex value

// Lexicographic ranking of sorted K-subsets of {0..n-1}.
std::uint64_t rank_combination(const std::vector<int>& sorted, int n);
std::vector<int> unrank_combination(std::uint64_t rank, int n, int k);

// Lehmer code, lexicographic order; index 0 is the identity.
std::uint64_t rank_permutation(const std::vector<int>& perm);
std::vector<int> unrank_permutation(std::uint64_t rank, int k);

// Optional explicit table for the index-modulation bits (carrier/antenna assignment).
struct MappingTable {
    int M = 0, K = 0, P = 0;
    std::map<std::uint64_t, std::pair<std::vector<int>, std::vector<int>>> entries;  // im bits -> (carriers, antennas)

    static MappingTable from_json(const std::string& text);
    static MappingTable load(const std::string& path);
};

class ImCodec {
public:
    explicit ImCodec(const SystemConfig& cfg, std::optional<MappingTable> table = std::nullopt);

    const BitBudget& budget() const { return budget_; }

    PulseSelection encode(const Bits& bits) const;
    PulseSelection encode(std::uint64_t codeword) const;
    Bits decode(const PulseSelection& sel) const;            // throws ValidationError if unreachable
    std::uint64_t decode_index(const PulseSelection& sel) const;
    bool reachable(const PulseSelection& sel) const;

private:
    int M_, K_, P_, J_;
    BitBudget budget_;
    std::optional<MappingTable> table_;
    std::map<std::pair<std::vector<int>, std::vector<int>>, std::uint64_t> inverse_;
};

enum class SelectionMode {
    kUniform,   // every carrier/antenna combination, uniform
    kMessage,   // uniform random message bits through the encoder
};

void validate_selection(const PulseSelection& sel, int M, int P, int K, int J);

PulseSelection random_selection(const SystemConfig& cfg, std::mt19937_64& rng,
                                SelectionMode mode = SelectionMode::kUniform);
SelectionSequence random_selection_sequence(const SystemConfig& cfg, std::mt19937_64& rng,
                                            SelectionMode mode = SelectionMode::kUniform);

std::string selection_to_json(const PulseSelection& sel, int J);

}  // namespace frac
