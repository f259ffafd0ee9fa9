#include "support.hpp"

#include "digitflux/structure.hpp"

#include <doctest.h>

#include <numeric>

using namespace digitflux;
using testsupport::fixture;

namespace {

// Hand-run of the NAF weight transducer: 0 -> 0 -> 1 ... (LSB first)
int naf_weight(std::uint64_t n) {
    int w = 0;
    while (n) {
        if (n & 1) {
            int digit = 2 - static_cast<int>(n & 3);  // 1 or -1
            n -= digit;
            ++w;
        }
        n >>= 1;
    }
    return w;
}

}  // namespace

TEST_CASE("rationals parse integers, fractions and decimals") {
    CHECK(parse_rational("3") == 3);
    CHECK(parse_rational("-6/4") == Rational(-3, 2));
    CHECK(parse_rational("0.25") == Rational(1, 4));
    CHECK(parse_rational("-1.5e-1") == Rational(-3, 20));
    CHECK(parse_rational("2e3") == 2000);
    CHECK_THROWS(parse_rational("1/0"));
    CHECK_THROWS(parse_rational("abc"));
    CHECK_THROWS(parse_rational(""));
    CHECK(to_string(Rational(432, 2197)) == "432/2197");
    CHECK(to_string(Rational(-4, 2)) == "-2");
}

TEST_CASE("validate") {
    CHECK(validate(fixture("naf.fst")).empty());

    auto single = make_transducer(2, 1, {{0, 0}}, {{0, 0}}, {0});
    CHECK(validate(single).empty());

    std::vector<std::optional<Rational>> finals{Rational(0), Rational(0)};
    Transducer missing(2, 1, {"0", "1"}, finals, {{0, 0, 0, 0}, {1, 0, 0, 0}, {1, 1, 1, 0}});
    auto v = validate(missing);
    REQUIRE(v.size() == 1);
    CHECK(v[0].kind == Violation::Kind::Incomplete);
    CHECK(v[0].message == "incomplete at (0,1)");

    Transducer dup(2, 1, {"0"}, {Rational(0)}, {{0, 0, 0, 0}, {0, 0, 0, 1}, {0, 1, 0, 0}});
    auto w = validate(dup);
    REQUIRE(w.size() == 1);
    CHECK(w[0].kind == Violation::Kind::Nondeterministic);

    Transducer nofinal(2, 1, {"0"}, {std::nullopt}, {{0, 0, 0, 0}, {0, 1, 0, 0}});
    auto x = validate(nofinal);
    REQUIRE(x.size() == 1);
    CHECK(x[0].kind == Violation::Kind::MissingFinalOutput);
}

TEST_CASE("digits are least significant first without leading zeros") {
    CHECK(digits({11}, 2) == std::vector<InputSymbol>{{1}, {1}, {0}, {1}});
    CHECK(digits({0}, 2).empty());
    CHECK(digits({3, 5}, 2) == std::vector<InputSymbol>{{1, 1}, {1, 0}, {0, 1}});
    CHECK(digits({0, 4}, 3) == std::vector<InputSymbol>{{0, 1}, {0, 1}});
    for (int code = 0; code < 27; ++code) CHECK(encode_symbol(decode_symbol(code, 3, 3), 3) == code);
}

TEST_CASE("evaluate") {
    auto naf = fixture("naf.fst");
    CHECK(evaluate(naf, 3) == 2);
    CHECK(evaluate(naf, 0) == naf.final_output(0));
    for (std::uint64_t n = 0; n < 2048; ++n) CHECK(evaluate(naf, n) == naf_weight(n));

    auto sign = fixture("signflip.fst");
    CHECK(evaluate(sign, 5) == -1);
    for (std::uint64_t n = 0; n < 64; ++n) CHECK(evaluate(sign, n) == (n % 2 ? -1 : 1));

    for (int q = 2; q <= 5; ++q) {
        auto sd = fixture("sumdigits-q" + std::to_string(q) + ".fst");
        for (std::uint64_t n = 0; n < 500; ++n) {
            std::uint64_t m = n, s = 0;
            while (m) s += m % q, m /= q;
            CHECK(evaluate(sd, n) == Rational(static_cast<long>(s)));
        }
    }
}

TEST_CASE("text format round trip") {
    for (const char* name : {"naf.fst", "signflip.fst", "sixperiodic.fst", "sumdigits-q2.fst", "sumdigits-q3.fst",
                             "sumdigits-q4.fst", "sumdigits-q5.fst"}) {
        auto t = fixture(name);
        auto text = serialize(t);
        auto again = parse_transducer(text);
        CHECK(again == t);
        CHECK(serialize(again) == text);
    }
    std::mt19937_64 rng(7);
    for (int i = 0; i < 50; ++i) {
        auto t = testsupport::random_transducer(rng, 2 + i % 3, 1 + i % 2, 1 + i % 5);
        auto again = parse_transducer(serialize(t));
        CHECK(again == t);
    }
}

TEST_CASE("text format labels and errors") {
    auto t = parse_transducer(
        "transducer v1\nq 2\nd 1\ninitial start\nfinal start 1/2\nfinal sink 0\n"
        "trans start 0 -> sink 1\ntrans start 1 -> sink 0.5\ntrans sink 0 -> sink 0\ntrans sink 1 -> sink 0\n");
    CHECK(t.labels() == std::vector<std::string>{"start", "sink"});
    CHECK(evaluate(t, 1) == Rational(1, 2));
    CHECK(parse_transducer(serialize(t)) == t);

    auto reordered = parse_transducer(
        "transducer v1\nq 2\nstates 2\ninitial 1\nfinal 0 0\nfinal 1 0\n"
        "trans 1 0 -> 0 1\ntrans 1 1 -> 0 0\ntrans 0 0 -> 0 0\ntrans 0 1 -> 0 0\n");
    CHECK(reordered.labels() == std::vector<std::string>{"1", "0"});
    CHECK(evaluate(reordered, 2) == 1);
    CHECK(parse_transducer(serialize(reordered)) == reordered);

    try {
        parse_transducer("transducer v1\nq 2\ninitial 0\ntrans 0 2 -> 0 0\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line == 4);
    }
    CHECK_THROWS_AS(parse_transducer("automaton v1\n"), ParseError);
    CHECK_THROWS_AS(parse_transducer("transducer v1\nq 2\ninitial 0\nfinal 0 x\n"), ParseError);
    CHECK_THROWS_AS(parse_transducer("transducer v1\nq 2\nd 2\ninitial 0\ntrans 0 1 -> 0 0\n"), ParseError);
}

TEST_CASE("structure of the bundled transducers") {
    auto six = structure(fixture("sixperiodic.fst"));
    CHECK(six.component_count() == 2);
    auto periods = six.component_periods;
    std::sort(periods.begin(), periods.end());
    CHECK(periods == std::vector<int>{2, 3});
    CHECK(six.final_period == 6);
    CHECK_FALSE(six.reset_sequence);

    auto sd = structure(fixture("sumdigits-q2.fst"));
    CHECK(sd.component_count() == 1);
    CHECK(sd.final_period == 1);
    CHECK(sd.reset_sequence);

    auto sign = structure(fixture("signflip.fst"));
    CHECK(sign.component_count() == 1);
    CHECK(sign.component(0) == std::vector<int>{1});
    CHECK(sign.final_period == 1);
    REQUIRE(sign.reset_sequence);
    CHECK(*sign.reset_sequence == std::vector<int>{0});

    auto naf = structure(fixture("naf.fst"));
    CHECK(naf.component_count() == 1);
    CHECK(naf.scc_list.size() == 1);
    CHECK(naf.final_period == 1);
}

TEST_CASE("structure invariants on random transducers") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        auto t = testsupport::random_transducer(rng, 2 + i % 2, 1, 1 + i % 7);
        auto r = structure(t);
        std::vector<int> all;
        for (const auto& c : r.scc_list) all.insert(all.end(), c.begin(), c.end());
        std::sort(all.begin(), all.end());
        CHECK(all == r.accessible);
        int p = 1;
        for (std::size_t j = 0; j < r.final_components.size(); ++j) {
            const auto& comp = r.component(static_cast<int>(j));
            for (int s : comp)
                for (int e = 0; e < t.symbol_count(); ++e) CHECK(r.scc_of[t.next(s, e)] == r.final_components[j]);
            // Every closed walk of length L inside the component has p_j | L.
            const int pj = r.component_periods[j];
            for (int s : comp) {
                std::vector<int> frontier{s};
                for (int len = 1; len <= 8; ++len) {
                    std::vector<int> next;
                    for (int v : frontier)
                        for (int e = 0; e < t.symbol_count(); ++e) next.push_back(t.next(v, e));
                    std::sort(next.begin(), next.end());
                    next.erase(std::unique(next.begin(), next.end()), next.end());
                    if (std::find(next.begin(), next.end(), s) != next.end()) CHECK(len % pj == 0);
                    frontier = next;
                }
            }
            p = std::lcm(p, pj);
        }
        CHECK(p == r.final_period);
        if (r.reset_sequence) {
            CHECK(is_reset_word(t, *r.reset_sequence));
            CHECK(r.finally_connected);
            CHECK(r.finally_aperiodic);
        }
        if (!r.finally_connected || !r.finally_aperiodic) CHECK_FALSE(r.reset_sequence);
    }
}

TEST_CASE("two disjoint final loops have no reset word") {
    auto t = make_transducer(2, 1, {{1, 2}, {1, 1}, {2, 2}}, {{0, 0}, {0, 0}, {0, 0}}, {0, 0, 0});
    CHECK_FALSE(find_reset(t));
    CHECK(structure(t).component_count() == 2);
}
