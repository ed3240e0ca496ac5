#include <doctest.h>

#include <cmath>
#include <set>

#include "frac/im_codec.hpp"
#include "frac/rng.hpp"

using namespace frac;

namespace {

SystemConfig small(int M, int K, int P, int J) {
    RawParams p = table1_params();
    p.M = M;
    p.K = K;
    p.P = P;
    p.J = J;
    return derive(p);
}

const char* kFig4Table = R"({"M": 2, "K": 1, "P": 2, "entries": [
    {"bits": "00", "carriers": [0], "antennas": [0]},
    {"bits": "01", "carriers": [0], "antennas": [1]},
    {"bits": "10", "carriers": [1], "antennas": [0]},
    {"bits": "11", "carriers": [1], "antennas": [1]}]})";

}  // namespace

TEST_CASE("bit helpers") {
    CHECK(bits_to_string(bits_from_string("0110")) == "0110");
    CHECK(bits_to_uint(bits_from_string("0110")) == 6);
    CHECK(bits_to_string(bits_from_uint(5, 6)) == "000101");
    CHECK(bits_to_string(bits_from_hex("1f", 6)) == "011111");
    CHECK(bits_to_string(bits_from_hex("0x6", 3)) == "110");
    CHECK_THROWS_AS(bits_from_string("01x"), ValidationError);
    CHECK_THROWS_AS(bits_from_hex("zz", 4), ValidationError);
    CHECK_THROWS_AS(bits_from_hex("ff", 4), ValidationError);
}

TEST_CASE("combination ranking is a bijection") {
    for (int n = 1; n <= 7; ++n)
        for (int k = 1; k <= n; ++k) {
            const std::uint64_t total = binomial(n, k);
            std::set<std::vector<int>> seen;
            for (std::uint64_t r = 0; r < total; ++r) {
                const auto c = unrank_combination(r, n, k);
                CHECK(std::is_sorted(c.begin(), c.end()));
                CHECK(rank_combination(c, n) == r);
                seen.insert(c);
            }
            CHECK(seen.size() == total);
        }
    const auto first = unrank_combination(0, 8, 3);
    CHECK(first == std::vector<int>{0, 1, 2});
    const auto last = unrank_combination(binomial(8, 3) - 1, 8, 3);
    CHECK(last == std::vector<int>{5, 6, 7});
}

TEST_CASE("permutation ranking is a bijection") {
    for (int k = 1; k <= 5; ++k) {
        std::set<std::vector<int>> seen;
        for (std::uint64_t r = 0; r < factorial(k); ++r) {
            const auto p = unrank_permutation(r, k);
            CHECK(rank_permutation(p) == r);
            seen.insert(p);
        }
        CHECK(seen.size() == factorial(k));
    }
    CHECK(unrank_permutation(0, 4) == std::vector<int>{0, 1, 2, 3});
}

TEST_CASE("all-zero message") {
    const SystemConfig c = small(8, 2, 4, 4);
    ImCodec codec(c);
    const PulseSelection s = codec.encode(Bits(codec.budget().n_total, 0));
    CHECK(s.carriers == std::vector<int>{0, 1});
    CHECK(s.antennas == std::vector<int>{0, 1});
    CHECK(s.symbols == std::vector<int>{0, 0});
    CHECK(bits_to_uint(codec.decode(s)) == 0);
}

TEST_CASE("exhaustive round trip") {
    struct Case {
        int M, K, P, J;
    };
    for (const Case cs : {Case{8, 1, 4, 2}, Case{4, 2, 4, 2}, Case{8, 2, 4, 2}, Case{8, 3, 4, 2}, Case{2, 1, 2, 2},
                          Case{8, 1, 4, 4}, Case{4, 4, 4, 2}, Case{16, 1, 8, 2}, Case{8, 2, 8, 2}}) {
        const SystemConfig c = small(cs.M, cs.K, cs.P, cs.J);
        ImCodec codec(c);
        const int n = codec.budget().n_total;
        REQUIRE(n <= 12);
        for (std::uint64_t w = 0; w < (std::uint64_t{1} << n); ++w) {
            const PulseSelection s = codec.encode(w);
            validate_selection(s, cs.M, cs.P, cs.K, cs.J);
            CHECK(codec.reachable(s));
            CHECK(codec.decode_index(s) == w);
        }
    }
}

TEST_CASE("randomised round trip above the exhaustive limit") {
    const SystemConfig c = small(32, 4, 16, 4);
    ImCodec codec(c);
    REQUIRE(codec.budget().n_total > 12);
    auto rng = stream_rng(5, 1, 0);
    std::uniform_int_distribution<int> bit(0, 1);
    for (int t = 0; t < 10000; ++t) {
        Bits b(codec.budget().n_total);
        for (auto& x : b) x = static_cast<std::uint8_t>(bit(rng));
        CHECK(codec.decode(codec.encode(b)) == b);
    }
}

TEST_CASE("decode ignores the listing order of pairs") {
    const SystemConfig c = small(8, 2, 4, 2);
    ImCodec codec(c);
    for (std::uint64_t w = 0; w < 512; ++w) {
        PulseSelection s = codec.encode(w);
        std::swap(s.carriers[0], s.carriers[1]);
        std::swap(s.antennas[0], s.antennas[1]);
        std::swap(s.symbols[0], s.symbols[1]);
        CHECK(codec.decode_index(s) == w);
    }
}

TEST_CASE("unreachable selections are flagged") {
    // C(8,3) = 56 -> only the first 32 carrier sets are encodable
    const SystemConfig c = small(8, 3, 4, 2);
    ImCodec codec(c);
    const PulseSelection s{{5, 6, 7}, {0, 1, 2}, {0, 0, 0}};
    CHECK_FALSE(codec.reachable(s));
    CHECK_THROWS_AS(codec.decode(s), ValidationError);
}

TEST_CASE("wrong message length") {
    ImCodec codec(small(8, 1, 4, 2));
    CHECK_THROWS_AS(codec.encode(Bits(5, 0)), ValidationError);
}

TEST_CASE("explicit mapping table") {
    const SystemConfig c = small(2, 1, 2, 2);
    ImCodec codec(c, MappingTable::from_json(kFig4Table));
    const PulseSelection s = codec.encode(bits_from_string("110"));
    CHECK(s.carriers == std::vector<int>{1});
    CHECK(s.antennas == std::vector<int>{1});
    CHECK(s.symbols == std::vector<int>{0});
    CHECK(bits_to_string(codec.decode(PulseSelection{{1}, {1}, {0}})) == "110");
    for (std::uint64_t w = 0; w < 8; ++w) CHECK(codec.decode_index(codec.encode(w)) == w);

    CHECK_THROWS_AS(ImCodec(small(8, 1, 4, 2), MappingTable::from_json(kFig4Table)), ValidationError);
    CHECK_THROWS_AS(MappingTable::from_json(R"({"M": 2})"), ValidationError);
}

TEST_CASE("selection validation") {
    CHECK_THROWS_AS(validate_selection({{1, 1}, {0, 1}, {0, 0}}, 8, 4, 2, 2), ValidationError);
    CHECK_THROWS_AS(validate_selection({{1, 2}, {3, 3}, {0, 0}}, 8, 4, 2, 2), ValidationError);
    CHECK_THROWS_AS(validate_selection({{1, 8}, {0, 1}, {0, 0}}, 8, 4, 2, 2), ValidationError);
    CHECK_THROWS_AS(validate_selection({{1, 2}, {0, 1}, {0, 2}}, 8, 4, 2, 2), ValidationError);
    CHECK_NOTHROW(validate_selection({{1, 2}, {0, 1}, {0, 1}}, 8, 4, 2, 2));
}

TEST_CASE("random selections have uniform marginals") {
    const SystemConfig c = small(8, 2, 4, 2);
    const int pulses = 100000;
    auto rng = stream_rng(11, 2, 0);
    std::vector<int> car(8), ant(4), sym(2);
    for (int i = 0; i < pulses; ++i) {
        const PulseSelection s = random_selection(c, rng);
        validate_selection(s, 8, 4, 2, 2);
        for (int k = 0; k < 2; ++k) {
            ++car[s.carriers[k]];
            ++ant[s.antennas[k]];
            ++sym[s.symbols[k]];
        }
    }
    auto within = [&](const std::vector<int>& counts, double p) {
        const double sd = std::sqrt(pulses * p * (1 - p));
        for (int n : counts) CHECK(std::abs(n - pulses * p) < 3.5 * sd);
    };
    within(car, 2.0 / 8);
    within(ant, 2.0 / 4);
    const double sd = std::sqrt(2.0 * pulses * 0.25);
    for (int n : sym) CHECK(std::abs(n - pulses) < 3.5 * sd);
}

TEST_CASE("uniform mode reaches non-encodable sets") {
    const SystemConfig c = small(8, 3, 4, 2);
    ImCodec codec(c);
    auto rng = stream_rng(3, 3, 0);
    int unreachable = 0;
    for (int i = 0; i < 2000; ++i)
        if (!codec.reachable(random_selection(c, rng, SelectionMode::kUniform))) ++unreachable;
    CHECK(unreachable > 0);
    for (int i = 0; i < 2000; ++i) CHECK(codec.reachable(random_selection(c, rng, SelectionMode::kMessage)));
}

TEST_CASE("M = P = K leaves only permutation and phase") {
    const SystemConfig c = small(3, 3, 3, 2);
    auto rng = stream_rng(1, 1, 1);
    const auto seq = random_selection_sequence(c, rng);
    CHECK(seq.size() == static_cast<std::size_t>(c.N));
    for (const auto& s : seq) {
        auto cs = s.carriers, as = s.antennas;
        std::sort(cs.begin(), cs.end());
        std::sort(as.begin(), as.end());
        CHECK(cs == std::vector<int>{0, 1, 2});
        CHECK(as == std::vector<int>{0, 1, 2});
    }
}
