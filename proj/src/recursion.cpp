#include "digitflux/recursion.hpp"

#include <algorithm>
#include <cctype>
#include <deque>
#include <set>
#include <sstream>

namespace digitflux {

namespace {

long long checked_mul(long long a, long long b) {
    long long r;
    if (__builtin_mul_overflow(a, b, &r)) throw std::overflow_error("carry arithmetic overflow");
    return r;
}

long long checked_add(long long a, long long b) {
    long long r;
    if (__builtin_add_overflow(a, b, &r)) throw std::overflow_error("carry arithmetic overflow");
    return r;
}

long long lpow(long long base, int e) {
    long long r = 1;
    for (int i = 0; i < e; ++i) r = checked_mul(r, base);
    return r;
}

long long floor_div(long long a, long long b) {
    long long q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

long long floor_mod(long long a, long long b) { return a - floor_div(a, b) * b; }

}  // namespace

std::string format_vector(const IVec& v) {
    if (v.size() == 1) return std::to_string(v[0]);
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
    return s + ")";
}

long long RecursionSystem::modulus() const { return lpow(q, kappa); }

std::size_t RecursionSystem::rule_index(const IVec& lambda) const {
    const long long m = modulus();
    std::size_t idx = 0;
    for (auto it = lambda.rbegin(); it != lambda.rend(); ++it) idx = idx * static_cast<std::size_t>(m) + static_cast<std::size_t>(*it);
    return idx;
}

IVec RecursionSystem::lambda_of(std::size_t index) const {
    const auto m = static_cast<std::size_t>(modulus());
    IVec out(d);
    for (int i = 0; i < d; ++i) {
        out[i] = static_cast<long long>(index % m);
        index /= m;
    }
    return out;
}

std::optional<IVec> RecursionSystem::apply(const IVec& n) const {
    const long long m = modulus();
    IVec lambda(d), s(d);
    for (int i = 0; i < d; ++i) {
        lambda[i] = floor_mod(n[i], m);
        s[i] = floor_div(n[i], m);
    }
    const RecursionRule& rule = this->rule(lambda);
    const long long scale = lpow(q, rule.kappa_lambda);
    IVec out(d);
    for (int i = 0; i < d; ++i) {
        out[i] = checked_add(checked_mul(scale, s[i]), rule.r[i]);
        if (out[i] < 0) return std::nullopt;
    }
    return out;
}

void check_system(const RecursionSystem& sys) {
    if (sys.q < 2) throw std::invalid_argument("q must be at least 2");
    if (sys.d < 1) throw std::invalid_argument("d must be at least 1");
    if (sys.kappa < 1) throw std::invalid_argument("kappa must be at least 1");
    std::size_t expected = 1;
    for (int i = 0; i < sys.d; ++i) expected *= static_cast<std::size_t>(sys.modulus());
    if (sys.rules.size() != expected)
        throw std::invalid_argument("expected one rule per residue modulo q^kappa");
    for (std::size_t i = 0; i < sys.rules.size(); ++i) {
        const auto& rule = sys.rules[i];
        const std::string where = " in the rule for residue " + format_vector(sys.lambda_of(i));
        if (rule.kappa_lambda < 0 || rule.kappa_lambda >= sys.kappa)
            throw std::invalid_argument("right-hand modulus must be a smaller power of q than the left one" + where);
        if (static_cast<int>(rule.r.size()) != sys.d) throw std::invalid_argument("dimension mismatch" + where);
        if (sys.d >= 2)
            for (long long v : rule.r)
                if (v < 0) throw std::invalid_argument("negative right-hand offset not allowed for d >= 2" + where);
    }
    for (const auto& [n, v] : sys.initial_values) {
        if (static_cast<int>(n.size()) != sys.d) throw std::invalid_argument("initial value with wrong dimension");
        for (long long c : n)
            if (c < 0) throw std::invalid_argument("initial value at negative argument " + format_vector(n));
    }
}

// Parser -----------------------------------------------------------------

RecursionParseError::RecursionParseError(int line_no, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + message), line(line_no) {}

namespace {

struct Affine {
    long long coef = 0;  // multiplier of the variable
    long long constant = 0;
};

struct Call {
    std::string name;
    std::vector<Affine> args;
};

struct RawRule {
    Call lhs, rhs;
    Rational t;
    int line;
};

struct Lexer {
    std::string s;
    std::size_t pos = 0;
    int line;

    [[noreturn]] void fail(const std::string& msg) const { throw RecursionParseError(line, msg); }
    void skip() {
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    }
    bool eof() {
        skip();
        return pos >= s.size();
    }
    bool accept(char c) {
        skip();
        if (pos < s.size() && s[pos] == c) {
            ++pos;
            return true;
        }
        return false;
    }
    void expect(char c) {
        if (!accept(c)) fail(std::string("expected '") + c + "'");
    }
    std::string identifier() {
        skip();
        std::size_t start = pos;
        while (pos < s.size() && (std::isalnum(static_cast<unsigned char>(s[pos])) || s[pos] == '_')) ++pos;
        if (start == pos || std::isdigit(static_cast<unsigned char>(s[start]))) fail("expected a name");
        return s.substr(start, pos - start);
    }
    long long integer() {
        skip();
        std::size_t start = pos;
        while (pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]))) ++pos;
        if (start == pos) fail("expected an integer");
        try {
            return std::stoll(s.substr(start, pos - start));
        } catch (const std::out_of_range&) {
            fail("integer too large");
        }
    }
    bool peek_digit() {
        skip();
        return pos < s.size() && std::isdigit(static_cast<unsigned char>(s[pos]));
    }
    bool peek_alpha() {
        skip();
        return pos < s.size() && (std::isalpha(static_cast<unsigned char>(s[pos])) || s[pos] == '_');
    }

    // Sum of terms "c", "c n", "c*n", "n" with signs.
    Affine affine(std::string& variable) {
        Affine a;
        bool first = true;
        for (;;) {
            int sign = 1;
            if (accept('+')) {
            } else if (accept('-')) {
                sign = -1;
            } else if (!first) {
                break;
            }
            long long c = 1;
            bool has_number = false;
            if (peek_digit()) {
                c = integer();
                has_number = true;
                accept('*');
            }
            if (peek_alpha()) {
                std::string v = identifier();
                if (variable.empty()) variable = v;
                if (v != variable) fail("mixed variable names '" + variable + "' and '" + v + "'");
                a.coef = checked_add(a.coef, sign * c);
            } else {
                if (!has_number) fail("expected a term");
                a.constant = checked_add(a.constant, sign * c);
            }
            first = false;
        }
        return a;
    }

    Call call(std::string& variable) {
        Call c;
        c.name = identifier();
        expect('(');
        c.args.push_back(affine(variable));
        while (accept(',')) c.args.push_back(affine(variable));
        expect(')');
        return c;
    }

    std::string rest() {
        skip();
        std::string r = s.substr(pos);
        while (!r.empty() && std::isspace(static_cast<unsigned char>(r.back()))) r.pop_back();
        pos = s.size();
        return r;
    }
};

// Smallest b with b^k = m for some k >= 1.
long long minimal_base(long long m) {
    for (long long b = 2; b * b <= m; ++b) {
        long long v = b;
        while (v < m) v *= b;
        if (v == m) return b;
    }
    return m;
}

// Exponent k with q^k = m, or -1.
int log_exact(long long m, int q) {
    int k = 0;
    long long v = 1;
    while (v < m) {
        v *= q;
        ++k;
    }
    return v == m ? k : -1;
}

}  // namespace

RecursionSystem parse_recursion(std::string_view text) {
    struct Statement { std::string text; int line; };
    std::vector<Statement> statements;
    {
        std::istringstream in{std::string(text)};
        std::string line;
        int line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream parts(line);
            for (std::string part; std::getline(parts, part, ';');)
                if (part.find_first_not_of(" \t\r") != std::string::npos) statements.push_back({part, line_no});
        }
    }

    std::optional<int> q, d;
    std::vector<RawRule> raw_rules;
    std::vector<std::pair<Call, std::pair<Rational, int>>> inits;
    std::string name;

    for (std::size_t i = 0; i < statements.size(); ++i) {
        Lexer lx{statements[i].text, 0, statements[i].line};
        std::istringstream words(statements[i].text);
        std::string w0, w1, w2;
        words >> w0 >> w1;
        if (w0 == "recursion") {
            if (i != 0 || w1 != "v1" || (words >> w2)) lx.fail("expected header 'recursion v1' on the first line");
            continue;
        }
        if (w0 == "q" || w0 == "d") {
            long long v = 0;
            try {
                std::size_t used = 0;
                v = std::stoll(w1, &used);
                if (used != w1.size() || (words >> w2)) throw std::invalid_argument("");
            } catch (const std::exception&) {
                lx.fail("'" + w0 + "' takes one integer");
            }
            (w0 == "q" ? q : d) = static_cast<int>(v);
            continue;
        }
        std::string var;
        bool is_init = false;
        if (w0 == "init") {
            lx.identifier();
            is_init = true;
        }
        Call lhs = lx.call(var);
        if (!name.empty() && lhs.name != name) lx.fail("function name '" + lhs.name + "' differs from '" + name + "'");
        name = lhs.name;
        lx.expect('=');
        if (is_init) {
            for (const auto& a : lhs.args)
                if (a.coef != 0) lx.fail("initial values need constant arguments");
            std::string value = lx.rest();
            try {
                inits.push_back({lhs, {parse_rational(value), lx.line}});
            } catch (const std::invalid_argument& e) {
                lx.fail(e.what());
            }
            continue;
        }
        Call rhs = lx.call(var);
        if (rhs.name != name) lx.fail("right-hand side must call '" + name + "'");
        Rational t = 0;
        if (!lx.eof()) {
            int sign = 0;
            if (lx.accept('+')) sign = 1;
            else if (lx.accept('-')) sign = -1;
            else lx.fail("expected '+ value' after the right-hand side");
            std::string value = lx.rest();
            try {
                t = parse_rational(value);
            } catch (const std::invalid_argument& e) {
                lx.fail(e.what());
            }
            if (sign < 0) t = -t;
        }
        if (lhs.args.size() != rhs.args.size()) lx.fail("both sides need the same number of arguments");
        raw_rules.push_back({lhs, rhs, t, lx.line});
    }

    if (raw_rules.empty()) throw RecursionParseError(statements.empty() ? 0 : statements.back().line, "no recursion rules");
    if (!d) d = static_cast<int>(raw_rules.front().lhs.args.size());
    if (*d < 1) throw RecursionParseError(1, "d must be at least 1");

    // Moduli must be uniform across the components of one side.
    auto side_modulus = [&](const Call& c, int line) {
        long long m = c.args.front().coef;
        for (const auto& a : c.args)
            if (a.coef != m) throw RecursionParseError(line, "all components of one side must use the same modulus");
        if (m < 1) throw RecursionParseError(line, "the variable must appear with a positive multiplier");
        return m;
    };
    if (!q) {
        long long smallest = 0;
        for (const auto& r : raw_rules)
            for (long long m : {side_modulus(r.lhs, r.line), side_modulus(r.rhs, r.line)})
                if (m > 1 && (smallest == 0 || m < smallest)) smallest = m;
        if (smallest == 0) throw RecursionParseError(raw_rules.front().line, "cannot infer q; add a 'q' line");
        q = static_cast<int>(minimal_base(smallest));
    }
    if (*q < 2) throw RecursionParseError(1, "q must be at least 2");

    RecursionSystem sys;
    sys.q = *q;
    sys.d = *d;
    sys.name = name;

    struct Normalized { int k, k_rhs; IVec lambda, r; Rational t; int line; };
    std::vector<Normalized> norm;
    for (const auto& r : raw_rules) {
        if (static_cast<int>(r.lhs.args.size()) != sys.d)
            throw RecursionParseError(r.line, "expected " + std::to_string(sys.d) + " arguments");
        long long ml = side_modulus(r.lhs, r.line), mr = side_modulus(r.rhs, r.line);
        int k = log_exact(ml, sys.q), kr = log_exact(mr, sys.q);
        if (k < 0) throw RecursionParseError(r.line, "left modulus " + std::to_string(ml) + " is not a power of q=" + std::to_string(sys.q));
        if (kr < 0) throw RecursionParseError(r.line, "right modulus " + std::to_string(mr) + " is not a power of q=" + std::to_string(sys.q));
        if (k < 1) throw RecursionParseError(r.line, "left modulus must be at least q");
        if (kr >= k) throw RecursionParseError(r.line, "right modulus must be smaller than the left modulus");
        Normalized n{k, kr, {}, {}, r.t, r.line};
        for (int i = 0; i < sys.d; ++i) {
            long long lam = r.lhs.args[i].constant;
            if (lam < 0 || lam >= ml) throw RecursionParseError(r.line, "left offset must lie in [0, modulus)");
            n.lambda.push_back(lam);
            n.r.push_back(r.rhs.args[i].constant);
        }
        norm.push_back(n);
    }
    sys.kappa = 0;
    for (const auto& n : norm) sys.kappa = std::max(sys.kappa, n.k);

    const long long M = sys.modulus();
    std::size_t total = 1;
    for (int i = 0; i < sys.d; ++i) total *= static_cast<std::size_t>(M);
    if (total > 1'000'000) throw RecursionParseError(norm.front().line, "rule table too large");
    std::vector<int> defined_at(total, 0);
    sys.rules.assign(total, {});
    for (const auto& n : norm) {
        const long long ql = lpow(sys.q, n.k), qr = lpow(sys.q, n.k_rhs);
        const long long copies = lpow(sys.q, sys.kappa - n.k);
        std::size_t count = 1;
        for (int i = 0; i < sys.d; ++i) count *= static_cast<std::size_t>(copies);
        for (std::size_t c = 0; c < count; ++c) {
            std::size_t rest = c;
            IVec lambda(sys.d), r(sys.d);
            for (int i = 0; i < sys.d; ++i) {
                long long mu = static_cast<long long>(rest % static_cast<std::size_t>(copies));
                rest /= static_cast<std::size_t>(copies);
                lambda[i] = n.lambda[i] + ql * mu;
                r[i] = n.r[i] + qr * mu;
            }
            std::size_t idx = sys.rule_index(lambda);
            if (defined_at[idx])
                throw RecursionParseError(n.line, "residue " + format_vector(lambda) + " modulo " + std::to_string(M) +
                                                      " already covered by line " + std::to_string(defined_at[idx]));
            defined_at[idx] = n.line;
            sys.rules[idx] = {n.k_rhs + sys.kappa - n.k, r, n.t};
        }
    }
    for (std::size_t i = 0; i < total; ++i)
        if (!defined_at[i])
            throw RecursionParseError(statements.back().line,
                                      "no rule for residue " + format_vector(sys.lambda_of(i)) + " modulo " + std::to_string(M));

    for (const auto& [call, value] : inits) {
        if (static_cast<int>(call.args.size()) != sys.d)
            throw RecursionParseError(value.second, "expected " + std::to_string(sys.d) + " arguments");
        IVec arg;
        for (const auto& a : call.args) arg.push_back(a.constant);
        for (long long c : arg)
            if (c < 0) throw RecursionParseError(value.second, "initial value at a negative argument");
        if (sys.initial_values.count(arg)) throw RecursionParseError(value.second, "initial value given twice");
        sys.initial_values[arg] = value.first;
    }
    try {
        check_system(sys);
    } catch (const std::invalid_argument& e) {
        throw RecursionParseError(norm.front().line, e.what());
    }
    return sys;
}

std::string serialize(const RecursionSystem& sys) {
    std::ostringstream out;
    out << "recursion v1\nq " << sys.q << "\nd " << sys.d << "\n";
    const long long M = sys.modulus();
    auto side = [&](long long mod, const IVec& offsets) {
        std::string s = sys.name + "(";
        for (std::size_t i = 0; i < offsets.size(); ++i) {
            if (i) s += ", ";
            s += std::to_string(mod) + "n";
            if (offsets[i] >= 0) s += "+";
            s += std::to_string(offsets[i]);
        }
        return s + ")";
    };
    for (std::size_t i = 0; i < sys.rules.size(); ++i) {
        const auto& rule = sys.rules[i];
        out << side(M, sys.lambda_of(i)) << " = " << side(lpow(sys.q, rule.kappa_lambda), rule.r);
        if (rule.t < 0) out << " - " << to_string(-rule.t) << "\n";
        else out << " + " << to_string(rule.t) << "\n";
    }
    for (const auto& [n, v] : sys.initial_values) {
        out << "init " << sys.name << "(";
        for (std::size_t i = 0; i < n.size(); ++i) out << (i ? ", " : "") << n[i];
        out << ") = " << to_string(v) << "\n";
    }
    return out.str();
}

// Carry automaton --------------------------------------------------------

bool CarryState::nonnegative() const {
    return std::all_of(carry.begin(), carry.end(), [](long long v) { return v >= 0; });
}

RawAutomaton build_raw(const RecursionSystem& sys, std::size_t state_cap) {
    check_system(sys);
    RawAutomaton raw;
    const long long M = sys.modulus();
    const int symbols = static_cast<int>(lpow(sys.q, sys.d));

    if (sys.d == 1) {
        Rational lmin = 0, min_shift;
        bool first = true;
        for (const auto& rule : sys.rules) {
            Rational qk = to_rational(lpow(sys.q, rule.kappa_lambda));
            Rational bound = (Rational(-1) + to_rational(rule.r[0]) / qk) / (Rational(1) / qk - Rational(1) / to_rational(M));
            lmin = std::min(lmin, bound);
            Rational shift = to_rational(rule.r[0]) / qk;
            if (first || shift < min_shift) min_shift = shift;
            first = false;
        }
        raw.carry_lower = lmin;
        // floor(lmin / q^kappa)
        Rational ratio = lmin / to_rational(M);
        Integer fl;
        mpz_fdiv_q(fl.get_mpz_t(), ratio.get_num_mpz_t(), ratio.get_den_mpz_t());
        Rational target = Rational(-fl) - min_shift;
        int J = sys.kappa;
        while (to_rational(lpow(sys.q, J - sys.kappa)) < target) ++J;
        raw.level_bound = J;
    } else {
        raw.level_bound = sys.kappa;
    }

    std::map<CarryState, int> index;
    std::deque<int> queue;
    auto intern = [&](CarryState st) {
        auto [it, inserted] = index.emplace(st, static_cast<int>(raw.states.size()));
        if (inserted) {
            if (raw.states.size() >= state_cap)
                throw StateCapExceeded("carry automaton exceeded " + std::to_string(state_cap) + " states");
            if (sys.d == 1) {
                if (to_rational(st.carry[0]) < *raw.carry_lower)
                    throw std::logic_error("carry " + std::to_string(st.carry[0]) + " below the proven lower bound");
                if (st.level > raw.level_bound) throw std::logic_error("level above the proven bound");
            }
            raw.states.push_back(std::move(st));
            raw.out.emplace_back();
            queue.push_back(it->second);
        }
        return it->second;
    };
    intern({IVec(sys.d, 0), 0, true});

    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        const CarryState st = raw.states[i];
        std::vector<RawTransition> out;
        bool recursion = false;
        if (st.level >= sys.kappa) {
            IVec lambda(sys.d), s(sys.d);
            for (int c = 0; c < sys.d; ++c) {
                lambda[c] = floor_mod(st.carry[c], M);
                s[c] = floor_div(st.carry[c], M);
            }
            const RecursionRule& rule = sys.rule(lambda);
            const long long scale = lpow(sys.q, rule.kappa_lambda);
            const int level = rule.kappa_lambda + st.level - sys.kappa;
            const long long step = lpow(sys.q, level);
            IVec carry(sys.d);
            recursion = true;
            for (int c = 0; c < sys.d; ++c) {
                carry[c] = checked_add(checked_mul(scale, s[c]), rule.r[c]);
                // Smallest admissible value of q^level * n_c + carry_c over n >= 0, n != 0.
                long long worst = sys.d == 1 ? checked_add(step, carry[c]) : carry[c];
                if (worst < 0) recursion = false;
            }
            if (recursion) out.push_back({intern({carry, level, false}), -1, rule.t});
        }
        if (!recursion) {
            const long long step = lpow(sys.q, st.level);
            for (int e = 0; e < symbols; ++e) {
                IVec carry = st.carry;
                int code = e;
                for (int c = 0; c < sys.d; ++c) {
                    carry[c] = checked_add(carry[c], checked_mul(step, code % sys.q));
                    code /= sys.q;
                }
                out.push_back({intern({carry, st.level + 1, true}), e, Rational(0)});
            }
        }
        raw.out[i] = std::move(out);
    }
    return raw;
}

WellPosednessReport well_posedness(const RawAutomaton& raw, const RecursionSystem& sys) {
    WellPosednessReport rep;
    const int n = static_cast<int>(raw.states.size());
    // Zero-input successor: the recursion transition, or the storing transition on symbol 0.
    auto succ = [&](int i) { return raw.out[i].front().to; };

    std::vector<int> color(n, 0);  // 0 new, 1 on current walk, 2 done
    for (int start = 0; start < n; ++start) {
        if (color[start]) continue;
        std::vector<int> walk;
        int v = start;
        while (color[v] == 0) {
            color[v] = 1;
            walk.push_back(v);
            v = succ(v);
        }
        if (color[v] == 1) {
            auto pos = std::find(walk.begin(), walk.end(), v);
            ZeroInputCycle cyc;
            cyc.states.assign(pos, walk.end());
            cyc.output_sum = 0;
            bool simple = true;
            std::set<IVec> carries;
            for (int s : cyc.states) {
                const CarryState& st = raw.states[s];
                simple = simple && st.nonnegative() && st.level <= sys.kappa;
                carries.insert(st.carry);
                cyc.output_sum += raw.out[s].front().output;
            }
            cyc.carries.assign(carries.begin(), carries.end());
            if (simple) rep.cycles.push_back(cyc);
        }
        for (int s : walk) color[s] = 2;
    }

    std::set<std::vector<IVec>> class_set;
    for (const auto& cyc : rep.cycles) {
        if (cyc.output_sum != 0) rep.bad_cycles.push_back(cyc);
        class_set.insert(cyc.carries);
    }
    std::set<IVec> seen;
    for (const auto& st : raw.states) {
        if (!st.nonnegative() || !seen.insert(st.carry).second) continue;
        if (!sys.apply(st.carry)) class_set.insert({st.carry});
    }
    rep.classes.assign(class_set.begin(), class_set.end());

    std::map<IVec, int> class_of;
    for (std::size_t k = 0; k < rep.classes.size(); ++k)
        for (const auto& c : rep.classes[k]) class_of[c] = static_cast<int>(k);
    std::vector<int> hits(rep.classes.size(), 0);
    for (const auto& [arg, value] : sys.initial_values) {
        auto it = class_of.find(arg);
        if (it == class_of.end() || hits[it->second]++ > 0) rep.extra.push_back(arg);
    }
    for (std::size_t k = 0; k < rep.classes.size(); ++k)
        if (!hits[k]) rep.missing.push_back(rep.classes[k]);
    rep.well_posed = rep.bad_cycles.empty() && rep.missing.empty() && rep.extra.empty();
    return rep;
}

std::string WellPosednessReport::explanation() const {
    std::ostringstream out;
    auto set_text = [](const std::vector<IVec>& s) {
        std::string t = "{";
        for (std::size_t i = 0; i < s.size(); ++i) t += (i ? ", " : "") + format_vector(s[i]);
        return t + "}";
    };
    if (well_posed) {
        out << "well-posed; classes:";
        for (const auto& c : classes) out << " " << set_text(c);
        return out.str();
    }
    out << "ill-posed: the recursion with initial values is well-posed if and only if every zero-input cycle "
           "through simple states has output sum 0 and the initial values contain exactly one representative "
           "of each class F_1, ..., F_K.";
    for (const auto& c : bad_cycles)
        out << "\n  cycle through carries " << set_text(c.carries) << " has output sum " << to_string(c.output_sum);
    for (const auto& m : missing) out << "\n  no initial value for class " << set_text(m);
    for (const auto& e : extra) out << "\n  superfluous initial value at " << format_vector(e);
    return out.str();
}

IllPosedError::IllPosedError(const WellPosednessReport& r) : std::runtime_error(r.explanation()), report(r) {}

std::optional<Rational> RecursionEvaluator::value(const IVec& n) {
    std::vector<IVec> path;
    std::set<IVec> on_path;
    IVec cur = n;
    std::optional<Rational> base;
    for (;;) {
        if (auto it = memo_.find(cur); it != memo_.end()) {
            base = it->second;
            break;
        }
        if (auto it = sys_.initial_values.find(cur); it != sys_.initial_values.end()) {
            base = it->second;
            memo_[cur] = base;
            break;
        }
        if (!on_path.insert(cur).second) break;  // cycle without an initial value
        path.push_back(cur);
        auto next = sys_.apply(cur);
        if (!next) break;
        cur = *next;
    }
    const long long M = sys_.modulus();
    for (auto it = path.rbegin(); it != path.rend(); ++it) {
        if (base) {
            IVec lambda(it->size());
            for (std::size_t c = 0; c < it->size(); ++c) lambda[c] = floor_mod((*it)[c], M);
            base = *base + sys_.rule(lambda).t;
        }
        memo_[*it] = base;
    }
    return base;
}

Transducer reduce(const RawAutomaton& raw, const RecursionSystem& sys) {
    const int symbols = static_cast<int>(lpow(sys.q, sys.d));
    // Follow recursion transitions to the storing state and sum their outputs.
    auto resolve = [&](int i) {
        Rational acc = 0;
        while (raw.out[i].front().recursion()) {
            acc += raw.out[i].front().output;
            i = raw.out[i].front().to;
        }
        return std::pair{i, acc};
    };
    // Like resolve, but stops before a step into a negative carry: there the recursion only holds
    // for a nonzero remaining input, so the final output would be wrong.
    auto settle = [&](int i) {
        Rational acc = 0;
        while (raw.out[i].front().recursion() && raw.states[raw.out[i].front().to].nonnegative()) {
            acc += raw.out[i].front().output;
            i = raw.out[i].front().to;
        }
        return std::pair{i, acc};
    };

    // Reduced states are keyed by (carry, level); the final flag does not change behaviour.
    std::map<std::pair<IVec, int>, int> reduced;
    std::vector<int> order;
    std::deque<int> queue;
    auto visit = [&](int raw_index) {
        const CarryState& st = raw.states[raw_index];
        auto [it, inserted] = reduced.emplace(std::pair{st.carry, st.level}, static_cast<int>(order.size()));
        if (inserted) {
            order.push_back(raw_index);
            queue.push_back(raw_index);
        }
        return it->second;
    };
    visit(settle(0).first);
    std::vector<Arc> arcs;
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        const int from = reduced.at({raw.states[i].carry, raw.states[i].level});
        auto [storing, lead] = resolve(i);
        for (int e = 0; e < symbols; ++e) {
            const RawTransition& tr = raw.out[storing][e];
            auto [target, acc] = settle(tr.to);
            arcs.push_back({from, e, visit(target), lead + tr.output + acc});
        }
    }

    RecursionEvaluator eval(sys);
    std::vector<std::string> labels;
    std::vector<std::optional<Rational>> finals;
    for (int i : order) {
        const CarryState& st = raw.states[i];
        labels.push_back(format_vector(st.carry) + "@" + std::to_string(st.level));
        if (!st.nonnegative()) {
            finals.emplace_back(Rational(0));
            continue;
        }
        auto v = eval.value(st.carry);
        if (!v) throw std::runtime_error("no initial value reachable from " + format_vector(st.carry));
        finals.emplace_back(*v);
    }
    return Transducer(sys.q, sys.d, std::move(labels), std::move(finals), std::move(arcs));
}

Compilation compile(const RecursionSystem& sys, std::size_t state_cap) {
    Compilation c;
    c.raw = build_raw(sys, state_cap);
    c.report = well_posedness(c.raw, sys);
    if (c.report.well_posed) c.transducer = reduce(c.raw, sys);
    return c;
}

}  // namespace digitflux
