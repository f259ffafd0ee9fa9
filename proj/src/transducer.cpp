#include "digitflux/transducer.hpp"

#include <algorithm>
#include <charconv>
#include <map>
#include <sstream>

namespace digitflux {

int encode_symbol(const InputSymbol& digits, int q) {
    int code = 0;
    for (auto it = digits.rbegin(); it != digits.rend(); ++it) code = code * q + *it;
    return code;
}

InputSymbol decode_symbol(int code, int q, int d) {
    InputSymbol out(d);
    for (int i = 0; i < d; ++i) {
        out[i] = code % q;
        code /= q;
    }
    return out;
}

namespace {

int ipow(int base, int e) {
    int r = 1;
    while (e-- > 0) r *= base;
    return r;
}

}  // namespace

Transducer::Transducer(int q, int d, std::vector<std::string> labels,
                       std::vector<std::optional<Rational>> final_outputs, std::vector<Arc> arcs)
    : q_(q), d_(d), labels_(std::move(labels)), finals_(std::move(final_outputs)), arcs_(std::move(arcs)) {
    if (q_ < 2 || d_ < 1 || d_ > 8) throw std::invalid_argument("transducer needs q >= 2 and 1 <= d <= 8");
    if (finals_.size() != labels_.size()) throw std::invalid_argument("final output list does not match state count");
    symbol_count_ = ipow(q_, d_);
    for (auto& f : finals_)
        if (f) f->canonicalize();
    for (auto& a : arcs_) a.output.canonicalize();
    table_.assign(labels_.size() * static_cast<std::size_t>(symbol_count_), -1);
    for (std::size_t i = 0; i < arcs_.size(); ++i) {
        const Arc& a = arcs_[i];
        if (a.from < 0 || a.from >= state_count() || a.symbol < 0 || a.symbol >= symbol_count_) continue;
        int& slot = table_[static_cast<std::size_t>(a.from) * symbol_count_ + a.symbol];
        if (slot < 0) slot = static_cast<int>(i);
    }
}

const Rational& Transducer::final_output(int s) const {
    if (!finals_.at(s)) throw std::logic_error("state " + labels_[s] + " has no final output");
    return *finals_[s];
}

const Arc* Transducer::arc(int s, int symbol) const {
    int idx = table_[static_cast<std::size_t>(s) * symbol_count_ + symbol];
    return idx < 0 ? nullptr : &arcs_[idx];
}

const Arc& Transducer::arc_checked(int s, int symbol) const {
    const Arc* a = arc(s, symbol);
    if (!a) throw std::logic_error("missing transition at state " + labels_[s]);
    return *a;
}

bool Transducer::operator==(const Transducer& other) const {
    if (q_ != other.q_ || d_ != other.d_ || labels_ != other.labels_ || finals_ != other.finals_) return false;
    auto key = [](const Arc& a) { return std::tuple(a.from, a.symbol, a.to); };
    auto sorted = [&](std::vector<Arc> v) {
        std::stable_sort(v.begin(), v.end(), [&](const Arc& x, const Arc& y) { return key(x) < key(y); });
        return v;
    };
    return sorted(arcs_) == sorted(other.arcs_);
}

std::vector<Violation> validate(const Transducer& t) {
    std::vector<Violation> out;
    auto label = [&](int s) { return (s >= 0 && s < t.state_count()) ? t.labels()[s] : std::to_string(s); };
    auto sym = [&](int code) {
        auto digits = decode_symbol(code, t.q(), t.d());
        std::string s;
        for (std::size_t i = 0; i < digits.size(); ++i) s += (i ? "," : "") + std::to_string(digits[i]);
        return s;
    };
    if (t.state_count() < 1) {
        out.push_back({Violation::Kind::BadParameters, -1, -1, "no states"});
        return out;
    }
    std::vector<int> seen(static_cast<std::size_t>(t.state_count()) * t.symbol_count(), 0);
    for (const Arc& a : t.arcs()) {
        if (a.from < 0 || a.from >= t.state_count() || a.to < 0 || a.to >= t.state_count()) {
            out.push_back({Violation::Kind::BadState, a.from, a.symbol, "transition references unknown state"});
            continue;
        }
        if (a.symbol < 0 || a.symbol >= t.symbol_count()) {
            out.push_back({Violation::Kind::DigitOutOfRange, a.from, a.symbol, "digit out of range at state " + label(a.from)});
            continue;
        }
        seen[static_cast<std::size_t>(a.from) * t.symbol_count() + a.symbol]++;
    }
    for (int s = 0; s < t.state_count(); ++s) {
        for (int e = 0; e < t.symbol_count(); ++e) {
            int count = seen[static_cast<std::size_t>(s) * t.symbol_count() + e];
            if (count == 0)
                out.push_back({Violation::Kind::Incomplete, s, e, "incomplete at (" + label(s) + "," + sym(e) + ")"});
            else if (count > 1)
                out.push_back({Violation::Kind::Nondeterministic, s, e,
                               "nondeterministic at (" + label(s) + "," + sym(e) + ")"});
        }
        if (!t.has_final_output(s))
            out.push_back({Violation::Kind::MissingFinalOutput, s, -1, "no final output for state " + label(s)});
    }
    return out;
}

std::vector<int> digit_codes(const std::vector<std::uint64_t>& n, int q) {
    std::vector<std::uint64_t> rest = n;
    std::vector<int> word;
    auto nonzero = [&] { return std::any_of(rest.begin(), rest.end(), [](std::uint64_t v) { return v != 0; }); };
    while (nonzero()) {
        int code = 0;
        int scale = 1;
        for (auto& v : rest) {
            code += static_cast<int>(v % static_cast<std::uint64_t>(q)) * scale;
            v /= static_cast<std::uint64_t>(q);
            scale *= q;
        }
        word.push_back(code);
    }
    return word;
}

std::vector<InputSymbol> digits(const std::vector<std::uint64_t>& n, int q) {
    std::vector<InputSymbol> out;
    for (int code : digit_codes(n, q)) out.push_back(decode_symbol(code, q, static_cast<int>(n.size())));
    return out;
}

Rational evaluate(const Transducer& t, const std::vector<std::uint64_t>& n) {
    if (static_cast<int>(n.size()) != t.d()) throw std::invalid_argument("argument dimension differs from d");
    int s = t.initial();
    Rational sum = 0;
    for (int code : digit_codes(n, t.q())) {
        const Arc* a = t.arc(s, code);
        if (!a) throw std::logic_error("evaluate on an incomplete transducer");
        sum += a->output;
        s = a->to;
    }
    return sum + t.final_output(s);
}

Rational evaluate(const Transducer& t, std::uint64_t n) { return evaluate(t, std::vector<std::uint64_t>{n}); }

int run(const Transducer& t, int state, const std::vector<int>& word) {
    for (int code : word) state = t.next(state, code);
    return state;
}

// Text format ------------------------------------------------------------

ParseError::ParseError(int line_no, const std::string& message)
    : std::runtime_error("line " + std::to_string(line_no) + ": " + message), line(line_no) {}

namespace {

std::vector<std::string> tokenize(const std::string& line) {
    std::istringstream in(line);
    std::vector<std::string> tokens;
    for (std::string tok; in >> tok;) tokens.push_back(tok);
    return tokens;
}

int parse_int(const std::string& s, int line) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) throw ParseError(line, "expected integer, got '" + s + "'");
    return v;
}

bool is_numeral(const std::string& s) {
    return !s.empty() && s.size() < 9 && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

Transducer parse_transducer(std::string_view text) {
    struct RawFinal { std::string state; Rational value; int line; };
    struct RawArc { std::string from; std::string digits; std::string to; Rational output; int line; };

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    bool header = false;
    int q = -1, d = 1, declared_states = -1;
    std::optional<std::string> initial;
    std::vector<RawFinal> finals;
    std::vector<RawArc> raw_arcs;
    std::vector<std::string> appearance;

    auto note = [&](const std::string& label) {
        if (std::find(appearance.begin(), appearance.end(), label) == appearance.end()) appearance.push_back(label);
    };
    auto rational = [&](const std::string& s) {
        try {
            return parse_rational(s);
        } catch (const std::invalid_argument& e) {
            throw ParseError(line_no, e.what());
        }
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        auto tok = tokenize(line);
        if (tok.empty()) continue;
        if (!header) {
            if (tok.size() != 2 || tok[0] != "transducer" || tok[1] != "v1")
                throw ParseError(line_no, "expected header 'transducer v1'");
            header = true;
            continue;
        }
        const std::string& key = tok[0];
        if (key == "q" || key == "d" || key == "states") {
            if (tok.size() != 2) throw ParseError(line_no, "'" + key + "' takes one integer");
            int v = parse_int(tok[1], line_no);
            if (key == "q") q = v;
            if (key == "d") d = v;
            if (key == "states") declared_states = v;
        } else if (key == "initial") {
            if (tok.size() != 2) throw ParseError(line_no, "'initial' takes one state");
            if (initial) throw ParseError(line_no, "initial state declared twice");
            initial = tok[1];
        } else if (key == "final") {
            if (tok.size() != 3) throw ParseError(line_no, "'final' takes a state and an output");
            for (const auto& f : finals)
                if (f.state == tok[1]) throw ParseError(line_no, "second final output for state " + tok[1]);
            finals.push_back({tok[1], rational(tok[2]), line_no});
            note(tok[1]);
        } else if (key == "trans") {
            auto arrow = std::find(tok.begin(), tok.end(), "->");
            if (arrow == tok.end() || arrow - tok.begin() < 3 || tok.end() - arrow != 3)
                throw ParseError(line_no, "expected 'trans FROM DIGITS -> TO OUTPUT'");
            std::string digit_text;
            for (auto it = tok.begin() + 2; it != arrow; ++it) digit_text += *it;
            raw_arcs.push_back({tok[1], digit_text, arrow[1], rational(arrow[2]), line_no});
            note(tok[1]);
            note(arrow[1]);
        } else {
            throw ParseError(line_no, "unknown directive '" + key + "'");
        }
    }
    if (!header) throw ParseError(line_no, "empty input");
    if (q < 2) throw ParseError(line_no, "missing or invalid 'q'");
    if (d < 1 || d > 8) throw ParseError(line_no, "invalid 'd'");
    if (!initial) throw ParseError(line_no, "missing 'initial'");
    note(*initial);

    // Numeral labels within the declared range keep numeric order with the
    // initial state moved to the front; other labels keep first-appearance order.
    std::vector<std::string> labels;
    bool numerals = declared_states > 0 && std::all_of(appearance.begin(), appearance.end(), [&](const std::string& s) {
                        return is_numeral(s) && std::stoi(s) < declared_states &&
                               (s == "0" || s.front() != '0');
                    });
    if (numerals) {
        labels.push_back(*initial);
        for (int i = 0; i < declared_states; ++i)
            if (std::to_string(i) != *initial) labels.push_back(std::to_string(i));
    } else {
        labels.push_back(*initial);
        for (const auto& s : appearance)
            if (s != *initial) labels.push_back(s);
        if (declared_states >= 0 && declared_states != static_cast<int>(labels.size()))
            throw ParseError(line_no, "'states " + std::to_string(declared_states) + "' does not match the " +
                                          std::to_string(labels.size()) + " labels used");
    }
    auto index = [&](const std::string& label) {
        return static_cast<int>(std::find(labels.begin(), labels.end(), label) - labels.begin());
    };

    std::vector<std::optional<Rational>> final_outputs(labels.size());
    for (const auto& f : finals) final_outputs[index(f.state)] = f.value;

    std::vector<Arc> arcs;
    for (const auto& a : raw_arcs) {
        InputSymbol sym;
        std::string part;
        std::istringstream ds(a.digits);
        while (std::getline(ds, part, ',')) {
            int v = parse_int(part, a.line);
            if (v < 0 || v >= q) throw ParseError(a.line, "digit " + part + " out of range for q=" + std::to_string(q));
            sym.push_back(v);
        }
        if (static_cast<int>(sym.size()) != d)
            throw ParseError(a.line, "expected " + std::to_string(d) + " digits, got '" + a.digits + "'");
        arcs.push_back({index(a.from), encode_symbol(sym, q), index(a.to), a.output});
    }
    return Transducer(q, d, std::move(labels), std::move(final_outputs), std::move(arcs));
}

std::string serialize(const Transducer& t) {
    std::ostringstream out;
    out << "transducer v1\n";
    out << "q " << t.q() << "\n";
    out << "d " << t.d() << "\n";
    out << "states " << t.state_count() << "\n";
    out << "initial " << t.labels()[0] << "\n";
    for (int s = 0; s < t.state_count(); ++s)
        if (t.has_final_output(s)) out << "final " << t.labels()[s] << " " << to_string(*t.final_outputs()[s]) << "\n";
    std::vector<Arc> arcs = t.arcs();
    std::stable_sort(arcs.begin(), arcs.end(),
                     [](const Arc& a, const Arc& b) { return std::tie(a.from, a.symbol) < std::tie(b.from, b.symbol); });
    for (const Arc& a : arcs) {
        auto digits = decode_symbol(a.symbol, t.q(), t.d());
        out << "trans " << t.labels()[a.from] << " ";
        for (std::size_t i = 0; i < digits.size(); ++i) out << (i ? "," : "") << digits[i];
        out << " -> " << t.labels()[a.to] << " " << to_string(a.output) << "\n";
    }
    return out.str();
}

Transducer make_transducer(int q, int d, const std::vector<std::vector<int>>& next,
                           const std::vector<std::vector<Rational>>& outputs,
                           const std::vector<Rational>& final_outputs) {
    std::vector<std::string> labels;
    std::vector<std::optional<Rational>> finals;
    std::vector<Arc> arcs;
    for (std::size_t s = 0; s < next.size(); ++s) {
        labels.push_back(std::to_string(s));
        finals.emplace_back(final_outputs.at(s));
        for (std::size_t e = 0; e < next[s].size(); ++e)
            arcs.push_back({static_cast<int>(s), static_cast<int>(e), next[s][e], outputs.at(s).at(e)});
    }
    return Transducer(q, d, std::move(labels), std::move(finals), std::move(arcs));
}

}  // namespace digitflux
