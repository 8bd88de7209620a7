#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "oalg/supernatural.hpp"

#include <random>

using namespace oalg;

namespace {

ExpSeq seq(std::vector<std::uint64_t> prefix, std::uint64_t slope, std::uint64_t intercept) {
    ExpSeq f;
    f.prefix = std::move(prefix);
    f.slope = slope;
    f.intercept = intercept;
    return f;
}

ExpSeq random_seq(std::mt19937_64& rng, bool small = false) {
    std::uniform_int_distribution<std::size_t> len(0, small ? 4 : 6);
    std::uniform_int_distribution<std::uint64_t> val(0, small ? 12 : 50);
    std::uniform_int_distribution<std::uint64_t> slope(0, small ? 4 : 10);
    ExpSeq f;
    std::size_t n = len(rng);
    for (std::size_t i = 0; i < n; ++i) f.prefix.push_back(val(rng));
    f.slope = slope(rng);
    f.intercept = val(rng);
    return f;
}

// Independent bounded oracle for the pointwise relation.
bool pointwise_oracle(const ExpSeq& f, const ExpSeq& g, std::uint64_t terms) {
    for (std::uint64_t i = 0; i < terms; ++i)
        if (f.at(i) > g.at(i)) return false;
    return true;
}

}  // namespace

TEST_CASE("sequence evaluation mixes prefix and tail") {
    ExpSeq f = seq({3, 1, 4}, 2, 1);
    CHECK(f.at(0) == 3);
    CHECK(f.at(2) == 4);
    CHECK(f.at(3) == 7);   // 2*3+1
    CHECK(f.at(10) == 21);
}

TEST_CASE("pointwise comparison on canned pairs") {
    CHECK(pointwise_leq(seq({1, 2}, 1, 0), seq({1, 2}, 1, 0)));
    CHECK(pointwise_leq(seq({0, 1}, 1, 0), seq({5, 5}, 1, 3)));
    CHECK(!pointwise_leq(seq({9}, 0, 0), seq({2}, 3, 0)));
    CHECK(!pointwise_leq(seq({}, 2, 0), seq({}, 1, 100)));  // tails eventually cross
}

TEST_CASE("pointwise comparison matches the bounded oracle") {
    std::mt19937_64 rng(13);
    for (int trial = 0; trial < 1000; ++trial) {
        ExpSeq f = random_seq(rng), g = random_seq(rng);
        // with linear tails the oracle window past both prefixes is conclusive
        std::uint64_t terms = 10 * (std::max(f.prefix.size(), g.prefix.size()) + 2) + 200;
        CHECK(pointwise_leq(f, g) == pointwise_oracle(f, g, terms));
    }
}

TEST_CASE("shifted domination and its least witness") {
    auto r = leq_infty(seq({10, 10}, 1, 0), seq({0, 0}, 1, 0));
    CHECK(r.holds);
    CHECK(r.witness == 10);

    auto r2 = leq_infty(seq({}, 1, 0), seq({}, 1, 5));
    CHECK(r2.holds);
    CHECK(r2.witness == 0);

    auto r3 = leq_infty(seq({}, 3, 0), seq({}, 2, 1000));
    CHECK(!r3.holds);
    CHECK(!r3.refutation.empty());
}

TEST_CASE("the witness is the least shift, by brute force") {
    std::mt19937_64 rng(17);
    for (int trial = 0; trial < 1000; ++trial) {
        ExpSeq f = random_seq(rng, true), g = random_seq(rng, true);
        g.slope = f.slope;  // keep the relation decidable with a finite window
        auto r = leq_infty(f, g);
        REQUIRE(r.holds);
        std::uint64_t terms = std::max(f.prefix.size(), g.prefix.size()) + 2;
        BigInt sup = 0;
        for (std::uint64_t i = 0; i < terms; ++i) {
            BigInt d = f.at(i) - g.at(i);
            if (d > sup) sup = d;
        }
        CHECK(BigInt(r.witness) == sup);
        if (r.witness > 0) {
            ExpSeq shifted = g;  // g + (witness-1) must fail somewhere
            bool ok = true;
            for (std::uint64_t i = 0; i < terms; ++i)
                if (f.at(i) > shifted.at(i) + (r.witness - 1)) ok = false;
            CHECK(!ok);
        }
    }
}

TEST_CASE("pointwise domination gives witness zero") {
    std::mt19937_64 rng(19);
    for (int trial = 0; trial < 300; ++trial) {
        ExpSeq f = random_seq(rng), g = random_seq(rng);
        if (!pointwise_leq(f, g)) continue;
        auto r = leq_infty(f, g);
        CHECK(r.holds);
        CHECK(r.witness == 0);
    }
}

TEST_CASE("the bounded oracle mode is sound on its window") {
    ExpSeq f = seq({200}, 1, 0), g = seq({}, 1, 0);
    CHECK(!bounded_leq_oracle(f, g, 200, 100));   // needs shift 200
    CHECK(bounded_leq_oracle(f, g, 200, 200));
    CHECK(bounded_leq_oracle(seq({}, 1, 0), seq({}, 1, 0), 200, 0));
}

TEST_CASE("embedding relations") {
    CHECK(cf_embeds(seq({5}, 2, 0), seq({}, 2, 0)));
    CHECK(!cf_embeds(seq({}, 2, 0), seq({}, 1, 0)));
    CHECK(cf_biembed(seq({7}, 1, 0), seq({0}, 1, 0)));
    CHECK(!cf_biembed(seq({}, 2, 0), seq({}, 1, 0)));
}

TEST_CASE("biembedding is an equivalence on random triples") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 300; ++trial) {
        ExpSeq f = random_seq(rng), g = random_seq(rng), h = random_seq(rng);
        CHECK(cf_biembed(f, f));
        CHECK(cf_biembed(f, g) == cf_biembed(g, f));
        if (cf_biembed(f, g) && cf_biembed(g, h)) CHECK(cf_biembed(f, h));
    }
}

TEST_CASE("UHF isomorphism is value equality, not structural equality") {
    ExpSeq f = seq({1, 3}, 2, 1);       // 1, 3, 5, 7, ...
    ExpSeq g = seq({1, 3, 5, 7}, 2, 1);  // same values, longer prefix
    CHECK(uhf_iso(f, g));
    CHECK(!(f == g));
    CHECK(!uhf_iso(f, seq({1, 3}, 2, 2)));
    std::mt19937_64 rng(29);
    for (int trial = 0; trial < 1000; ++trial) {
        ExpSeq a = random_seq(rng), b = random_seq(rng);
        if (uhf_iso(a, b)) {
            CHECK(pointwise_leq(a, b));
            CHECK(pointwise_leq(b, a));
        }
    }
}

TEST_CASE("prime stream") {
    CHECK(nth_prime(1) == 2);
    CHECK(nth_prime(2) == 3);
    CHECK(nth_prime(5) == 11);
    CHECK(nth_prime(25) == 97);
}

TEST_CASE("supernatural numbers from multiplicity streams") {
    auto s = supernatural_of_multiplicities({2, 2, 2});
    CHECK(s.exponent(2) == 3);
    CHECK(s.exponent(3) == 0);

    auto t = supernatural_of_multiplicities({6, 10});
    CHECK(t.exponent(2) == 2);
    CHECK(t.exponent(3) == 1);
    CHECK(t.exponent(5) == 1);

    auto inf = supernatural_of_multiplicities({2, 2, 2, 2}, 3);
    CHECK(inf.exponent(2) == SupernaturalNumber::kInf);
}

TEST_CASE("K0 membership by denominator domination") {
    auto s = supernatural_of_multiplicities({2, 2, 3});
    CHECK(k0_contains(Rat(1, 12), s));
    CHECK(k0_contains(Rat(1, 4), s));
    CHECK(k0_contains(Rat(5, 6), s));
    CHECK(!k0_contains(Rat(1, 8), s));
    CHECK(!k0_contains(Rat(1, 5), s));
    CHECK(k0_contains(Rat(7), s));  // integers always belong

    SupernaturalNumber inf2;
    inf2.set(2, SupernaturalNumber::kInf);
    CHECK(k0_contains(Rat(1, 1024), inf2));
    CHECK(!k0_contains(Rat(1, 3), inf2));

    CHECK(k0_contains(Rat(0), s));
}

TEST_CASE("sequence text codec roundtrips") {
    ExpSeq f = seq({3, 1, 4}, 2, 1);
    CHECK(expseq_str(f) == "prefix=[3,1,4];tail=2*i+1");
    CHECK(parse_expseq(expseq_str(f)) == f);
    ExpSeq empty = seq({}, 0, 5);
    CHECK(parse_expseq(expseq_str(empty)) == empty);
    CHECK_THROWS(parse_expseq("garbage"));
}
