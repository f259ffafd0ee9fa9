#pragma once

#include "digitflux/rational.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace digitflux {

// One input letter: d digits, each in [0, q).
using InputSymbol = std::vector<int>;

// Symbols are stored as the code sum_i digits[i] * q^i.
int encode_symbol(const InputSymbol& digits, int q);
InputSymbol decode_symbol(int code, int q, int d);

struct Arc {
    int from = 0;
    int symbol = 0;
    int to = 0;
    Rational output;

    bool operator==(const Arc&) const = default;
};

// Deterministic subsequential transducer reading q-ary digit vectors.
// State 0 is the initial state. The object may hold an incomplete or
// nondeterministic arc list; validate() reports such defects and every
// other operation requires an empty violation list.
class Transducer {
public:
    Transducer() = default;
    Transducer(int q, int d, std::vector<std::string> labels,
               std::vector<std::optional<Rational>> final_outputs, std::vector<Arc> arcs);

    int q() const { return q_; }
    int d() const { return d_; }
    int state_count() const { return static_cast<int>(labels_.size()); }
    int symbol_count() const { return symbol_count_; }
    int initial() const { return 0; }

    const std::vector<std::string>& labels() const { return labels_; }
    const std::vector<Arc>& arcs() const { return arcs_; }
    const std::vector<std::optional<Rational>>& final_outputs() const { return finals_; }

    bool has_final_output(int s) const { return finals_[s].has_value(); }
    const Rational& final_output(int s) const;

    // First arc for (s, symbol) or nullptr.
    const Arc* arc(int s, int symbol) const;
    int next(int s, int symbol) const { return arc_checked(s, symbol).to; }
    const Rational& output(int s, int symbol) const { return arc_checked(s, symbol).output; }

    bool operator==(const Transducer& other) const;

private:
    const Arc& arc_checked(int s, int symbol) const;

    int q_ = 2;
    int d_ = 1;
    int symbol_count_ = 2;
    std::vector<std::string> labels_;
    std::vector<std::optional<Rational>> finals_;
    std::vector<Arc> arcs_;
    std::vector<int> table_;  // state * symbol_count + symbol -> arc index or -1
};

struct Violation {
    enum class Kind { BadParameters, DigitOutOfRange, BadState, Incomplete, Nondeterministic, MissingFinalOutput };
    Kind kind;
    int state = -1;
    int symbol = -1;
    std::string message;
};

std::vector<Violation> validate(const Transducer& t);

// Joint q-ary expansion, least significant symbol first, no leading zero symbol.
std::vector<InputSymbol> digits(const std::vector<std::uint64_t>& n, int q);
std::vector<int> digit_codes(const std::vector<std::uint64_t>& n, int q);

// Output sum along the run on the expansion of n plus the final output of
// the last state.
Rational evaluate(const Transducer& t, const std::vector<std::uint64_t>& n);
Rational evaluate(const Transducer& t, std::uint64_t n);

// Runs the transducer on a symbol word from a given state.
int run(const Transducer& t, int state, const std::vector<int>& word);

// Text format ------------------------------------------------------------

struct ParseError : std::runtime_error {
    ParseError(int line, const std::string& message);
    int line;
};

Transducer parse_transducer(std::string_view text);
std::string serialize(const Transducer& t);

// Convenience constructor for code and tests; outputs[s][symbol], next[s][symbol].
Transducer make_transducer(int q, int d, const std::vector<std::vector<int>>& next,
                           const std::vector<std::vector<Rational>>& outputs,
                           const std::vector<Rational>& final_outputs);

}  // namespace digitflux
