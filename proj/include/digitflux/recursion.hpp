#pragma once

#include "digitflux/rational.hpp"
#include "digitflux/transducer.hpp"

#include <cstddef>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

namespace digitflux {

using IVec = std::vector<long long>;

// a(q^kappa n + lambda) = a(q^kappa_lambda n + r) + t
struct RecursionRule {
    int kappa_lambda = 0;
    IVec r;
    Rational t;
};

struct RecursionSystem {
    int q = 2;
    int d = 1;
    int kappa = 1;
    std::string name = "a";
    // Indexed by the code sum_i lambda_i * (q^kappa)^i.
    std::vector<RecursionRule> rules;
    std::map<IVec, Rational> initial_values;

    long long modulus() const;  // q^kappa
    std::size_t rule_index(const IVec& lambda) const;
    IVec lambda_of(std::size_t index) const;
    const RecursionRule& rule(const IVec& lambda) const { return rules.at(rule_index(lambda)); }

    // A(n): the argument on the right-hand side, or nullopt when it is negative.
    std::optional<IVec> apply(const IVec& n) const;
};

// Throws std::invalid_argument naming the violated constraint.
void check_system(const RecursionSystem& sys);

struct RecursionParseError : std::runtime_error {
    RecursionParseError(int line, const std::string& message);
    int line;
};

// Parses the `recursion v1` language. Rules may use different moduli; each is
// expanded to the largest modulus so that every residue has exactly one rule.
RecursionSystem parse_recursion(std::string_view text);
std::string serialize(const RecursionSystem& sys);

struct CarryState {
    IVec carry;
    int level = 0;
    bool final = true;

    bool operator<(const CarryState& o) const {
        return std::tie(level, carry, final) < std::tie(o.level, o.carry, o.final);
    }
    bool operator==(const CarryState& o) const = default;
    bool nonnegative() const;
    bool simple(int kappa) const { return final && nonnegative() && level <= kappa; }
};

struct RawTransition {
    int to = 0;
    int symbol = -1;  // -1 marks a recursion transition with empty input
    Rational output;
    bool recursion() const { return symbol < 0; }
};

// Accessible part of the carry/level automaton. State 0 is (0, 0)_F; every
// state has either one recursion transition or q^d storing transitions.
struct RawAutomaton {
    std::vector<CarryState> states;
    std::vector<std::vector<RawTransition>> out;
    int level_bound = 0;                  // J
    std::optional<Rational> carry_lower;  // l_min, d = 1 only
};

struct StateCapExceeded : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr std::size_t default_state_cap = 100000;

RawAutomaton build_raw(const RecursionSystem& sys, std::size_t state_cap = default_state_cap);

struct ZeroInputCycle {
    std::vector<int> states;   // raw state indices in cycle order
    std::vector<IVec> carries; // distinct carries, sorted
    Rational output_sum;
};

struct WellPosednessReport {
    bool well_posed = false;
    std::vector<std::vector<IVec>> classes;  // F_1..F_K, each sorted
    std::vector<ZeroInputCycle> cycles;      // all zero-input cycles through simple states
    std::vector<ZeroInputCycle> bad_cycles;  // those with nonzero output sum
    std::vector<std::vector<IVec>> missing;  // classes without an initial value
    std::vector<IVec> extra;                 // initial values outside every class or duplicating one

    std::string explanation() const;
};

WellPosednessReport well_posedness(const RawAutomaton& raw, const RecursionSystem& sys);

struct IllPosedError : std::runtime_error {
    explicit IllPosedError(const WellPosednessReport& r);
    WellPosednessReport report;
};

// Value a(n) obtained by following n -> A(n) until an initial value is met.
// nullopt if the walk hits A = infinity or a cycle without initial value.
class RecursionEvaluator {
public:
    explicit RecursionEvaluator(const RecursionSystem& sys) : sys_(sys) {}
    std::optional<Rational> value(const IVec& n);

private:
    const RecursionSystem& sys_;
    std::map<IVec, std::optional<Rational>> memo_;
};

// Removes recursion transitions and non-final states. Requires well-posedness.
Transducer reduce(const RawAutomaton& raw, const RecursionSystem& sys);

struct Compilation {
    RawAutomaton raw;
    WellPosednessReport report;
    std::optional<Transducer> transducer;  // empty when ill-posed
};

Compilation compile(const RecursionSystem& sys, std::size_t state_cap = default_state_cap);

std::string format_vector(const IVec& v);

}  // namespace digitflux
