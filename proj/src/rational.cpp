#include "digitflux/rational.hpp"

#include <cctype>
#include <stdexcept>

namespace digitflux {

namespace {

bool all_digits(std::string_view s) {
    if (s.empty()) return false;
    for (char c : s)
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    return true;
}

Integer pow10(unsigned long e) {
    Integer r;
    mpz_ui_pow_ui(r.get_mpz_t(), 10, e);
    return r;
}

}  // namespace

Rational parse_rational(std::string_view text) {
    std::string_view s = text;
    auto fail = [&]() -> Rational {
        throw std::invalid_argument("malformed rational '" + std::string(text) + "'");
    };
    if (s.empty()) return fail();

    bool negative = false;
    if (s.front() == '+' || s.front() == '-') {
        negative = s.front() == '-';
        s.remove_prefix(1);
    }

    Rational result;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = s.substr(0, slash);
        auto den = s.substr(slash + 1);
        if (!all_digits(num) || !all_digits(den)) return fail();
        Integer d(std::string(den), 10);
        if (d == 0) throw std::invalid_argument("zero denominator in '" + std::string(text) + "'");
        result = Rational(Integer(std::string(num), 10), d);
        result.canonicalize();
    } else {
        long exponent = 0;
        if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
            auto exp_part = s.substr(e + 1);
            bool exp_negative = false;
            if (!exp_part.empty() && (exp_part.front() == '+' || exp_part.front() == '-')) {
                exp_negative = exp_part.front() == '-';
                exp_part.remove_prefix(1);
            }
            if (!all_digits(exp_part) || exp_part.size() > 6) return fail();
            exponent = std::stol(std::string(exp_part));
            if (exp_negative) exponent = -exponent;
            s = s.substr(0, e);
        }
        std::string digits;
        if (auto dot = s.find('.'); dot != std::string_view::npos) {
            auto ip = s.substr(0, dot);
            auto fp = s.substr(dot + 1);
            if (ip.empty() && fp.empty()) return fail();
            if ((!ip.empty() && !all_digits(ip)) || (!fp.empty() && !all_digits(fp))) return fail();
            digits = std::string(ip) + std::string(fp);
            exponent -= static_cast<long>(fp.size());
        } else {
            if (!all_digits(s)) return fail();
            digits = std::string(s);
        }
        Integer mant(digits, 10);
        if (exponent >= 0)
            result = Rational(mant * pow10(static_cast<unsigned long>(exponent)));
        else
            result = Rational(mant, pow10(static_cast<unsigned long>(-exponent)));
        result.canonicalize();
    }
    if (negative) result = -result;
    return result;
}

std::string to_string(const Rational& value) {
    Rational r = value;
    r.canonicalize();
    if (r.get_den() == 1) return r.get_num().get_str();
    return r.get_num().get_str() + "/" + r.get_den().get_str();
}

bool is_integer(const Rational& r) { return r.get_den() == 1; }

double to_double(const Rational& r) { return r.get_d(); }

}  // namespace digitflux
