#include "digitflux/cli.hpp"

#include "digitflux/acceptance.hpp"
#include "digitflux/dirichlet.hpp"
#include "digitflux/empirical.hpp"
#include "digitflux/recursion.hpp"
#include "digitflux/spectral.hpp"
#include "digitflux/structure.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#ifndef DIGITFLUX_CORPUS
#define DIGITFLUX_CORPUS "fixtures"
#endif

namespace digitflux {

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string read_input(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

bool is_recursion_text(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        return line.compare(start, 9, "recursion") == 0;
    }
    return false;
}

std::string violation_text(const std::vector<Violation>& v) {
    std::ostringstream s;
    s << "invalid transducer:";
    for (const auto& x : v) s << "\n  " << x.message;
    return s.str();
}

Transducer compile_or_throw(const RecursionSystem& sys) {
    auto c = compile(sys);
    if (!c.transducer) throw IllPosedError(c.report);
    return *c.transducer;
}

// Transducer from a .fst file, or compiled from a recursion file.
Transducer load(const std::string& path) {
    const std::string text = read_input(path);
    if (is_recursion_text(text)) return compile_or_throw(parse_recursion(text));
    auto t = parse_transducer(text);
    if (auto v = validate(t); !v.empty()) throw DomainError(violation_text(v));
    return t;
}

std::string num(double v) {
    if (std::isnan(v)) return "nan";
    std::ostringstream s;
    s << std::setprecision(15) << v;
    return s.str();
}

// Writes to --out when given, otherwise to the command's stdout.
class Sink {
public:
    Sink(const std::string& path, std::ostream& fallback) : fallback_(fallback) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot write " + path);
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : fallback_; }

private:
    std::ofstream file_;
    std::ostream& fallback_;
};

std::string word_text(const std::vector<int>& w) {
    std::string s;
    for (std::size_t i = 0; i < w.size(); ++i) s += (i ? " " : "") + std::to_string(w[i]);
    return s;
}

std::string set_text(const std::vector<int>& states, const Transducer& t) {
    std::string s = "{";
    for (std::size_t i = 0; i < states.size(); ++i) s += (i ? ", " : "") + t.labels()[states[i]];
    return s + "}";
}

void print_structure(const Transducer& t, std::ostream& out) {
    const auto rep = analyze(t);
    const auto& s = rep.structure;
    out << "q=" << t.q() << "\nd=" << t.d() << "\nstates=" << t.state_count() << "\naccessible=" << s.accessible.size()
        << "\nstrong_components=" << s.scc_list.size() << "\nfinal_components=" << s.component_count() << '\n';
    for (int j = 0; j < s.component_count(); ++j)
        out << "  C" << j + 1 << " period=" << s.component_periods[j] << " states=" << set_text(s.component(j), t) << '\n';
    out << "final_period=" << s.final_period << "\nfinally_connected=" << (s.finally_connected ? "yes" : "no")
        << "\nfinally_aperiodic=" << (s.finally_aperiodic ? "yes" : "no")
        << "\nreset_word=" << (s.reset_sequence ? word_text(*s.reset_sequence) + " (least significant first)" : "none")
        << "\nnondiff_applicable="
        << (s.nondiff_applicable ? (*s.nondiff_applicable ? "yes" : "no") : "n/a") << '\n';
}

void print_analysis(const Transducer& t, std::ostream& out) {
    const auto rep = analyze(t);
    out << "e_T=" << to_string(rep.e_T) << "\nv_T=" << to_string(rep.v_T)
        << "\nclassification=" << to_string(rep.classification) << "\nperiod=" << rep.period()
        << "\nsecond_modulus=" << num(rep.second_modulus) << "\nxi=" << num(rep.xi)
        << "\nexact_no_error_term=" << (rep.exact_no_error_term ? "yes" : "no") << '\n';
    for (int j = 0; j < static_cast<int>(rep.components.size()); ++j) {
        const auto& c = rep.components[j];
        out << "C" << j + 1 << " a=" << to_string(c.a) << " b=" << to_string(c.b) << " lambda=" << to_string(c.lambda) << '\n';
    }
}

struct Flags {
    std::string out;
    int precision = 30;
    long long terms = 23;
    long long depth = 1024;
    int max_exp = 16;
    std::string grid = "8:12:0.01";
    int threads = 1;
    std::string corpus = DIGITFLUX_CORPUS;
    std::vector<int> criteria;
    bool no_stretch = false;
    std::string input;
    bool terms_given = false;
};

SpecialFunctionContext context(const Flags& f) {
    SpecialFunctionContext ctx;
    ctx.precision = f.precision;
    ctx.terms = f.depth;
    ctx.threads = f.threads;
    return ctx;
}

int cmd_validate(const Flags& f, std::ostream& out) {
    const std::string text = read_input(f.input);
    if (is_recursion_text(text)) {
        const auto sys = parse_recursion(text);
        const auto raw = build_raw(sys);
        const auto rep = well_posedness(raw, sys);
        if (!rep.well_posed) throw IllPosedError(rep);
        out << "ok: " << rep.explanation() << '\n';
        return kExitOk;
    }
    const auto t = parse_transducer(text);
    if (auto v = validate(t); !v.empty()) throw DomainError(violation_text(v));
    out << "ok: transducer with " << t.state_count() << " states, q=" << t.q() << ", d=" << t.d() << '\n';
    return kExitOk;
}

int cmd_compile(const Flags& f, std::ostream& out) {
    const std::string text = read_input(f.input);
    if (!is_recursion_text(text)) throw UsageError(f.input + " is not a recursion file");
    const auto t = compile_or_throw(parse_recursion(text));
    Sink sink(f.out, out);
    sink.stream() << serialize(t);
    return kExitOk;
}

int cmd_fourier(const Flags& f, std::ostream& out) {
    const auto t = load(f.input);
    const auto res = fourier(t, f.terms, context(f));
    Sink sink(f.out, out);
    auto& s = sink.stream();
    s << "k,re,im,err\n";
    for (long long k = 0; k <= res.K; ++k) {
        const auto c = res.coefficient(k);
        s << k << ',' << num(c.real()) << ',' << num(c.imag()) << ',' << num(res.error[static_cast<std::size_t>(k + res.K)]) << '\n';
    }
    return kExitOk;
}

int cmd_empirical(const Flags& f, std::ostream& out) {
    const auto t = load(f.input);
    if (f.max_exp * std::log2(double(t.q())) > 63 + 1e-9)
        throw UsageError("--max-exp too large: q^" + std::to_string(f.max_exp) + " exceeds 2^63");
    const auto rep = analyze(t);
    Sink sink(f.out, out);
    auto& s = sink.stream();
    s << "N,mean,variance,ks_distance,reference_scale\n";
    std::uint64_t N = 1;
    for (int e = 1; e <= f.max_exp; ++e) {
        N *= static_cast<std::uint64_t>(t.q());
        const auto m = prefix_moments(t, N);
        s << N << ',' << num(m.mean.get_d()) << ',' << num(m.variance.get_d()) << ',';
        if (t.d() == 1) {
            const auto c = distribution_check(t, rep, N);
            s << (c.quantitative ? num(c.ks_distance) : "refused") << ',' << num(c.reference_scale);
        } else {
            s << ',';
        }
        s << '\n';
    }
    return kExitOk;
}

int cmd_fluctuation(const Flags& f, std::ostream& out) {
    const auto t = load(f.input);
    std::vector<double> grid;
    try {
        grid = parse_grid(f.grid);
    } catch (const std::invalid_argument& e) {
        throw UsageError(std::string("--grid: ") + e.what());
    }
    std::optional<FourierEngine> eng;
    std::optional<FourierResult> series;
    if (f.terms_given) {
        eng.emplace(t, context(f));
        series = eng->fourier(f.terms);
    }
    const auto rep = eng ? eng->report() : analyze(t);
    Sink sink(f.out, out);
    auto& s = sink.stream();
    s << "x,empirical_psi1" << (series ? ",fourier_partial" : "") << '\n';
    for (const auto& row : fluctuation_samples(t, rep, grid)) {
        s << num(row.x) << ',' << num(row.value);
        if (series) s << ',' << num(series->evaluate(row.log_n));
        s << '\n';
    }
    return kExitOk;
}

int cmd_selftest(const Flags& f, std::ostream& out, std::ostream& err) {
    AcceptanceOptions opt;
    opt.corpus_dir = f.corpus;
    opt.threads = f.threads;
    opt.only = f.criteria;
    opt.stretch = !f.no_stretch;
    AcceptanceReport report;
    try {
        report = run_acceptance(opt);
    } catch (const std::invalid_argument& e) {
        throw UsageError(e.what());
    }
    Sink sink(f.out, out);
    sink.stream() << format_report(report);
    for (const auto& w : report.warnings) err << "warning: " << w << '\n';
    sink.stream() << report.rows.size() - report.failures() << "/" << report.rows.size() << " criteria passed\n";
    return report.passed() ? kExitOk : kExitDomain;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"digitflux: asymptotic analysis of transducer-defined digital sequences"};
    app.require_subcommand(1);
    Flags f;

    auto add_input = [&](CLI::App* c) {
        c->add_option("file", f.input, "transducer (.fst) or recursion (.rec) file")->required();
    };
    auto add_out = [&](CLI::App* c) { c->add_option("--out", f.out, "write the result to this file instead of stdout"); };
    auto add_numeric = [&](CLI::App* c) {
        c->add_option("--precision", f.precision, "working precision in decimal digits")
            ->capture_default_str()
            ->check(CLI::Range(1, 65));
        c->add_option("--depth", f.depth, "R: terms summed directly before the tail recursion")
            ->capture_default_str()
            ->check(CLI::Range(16LL, 1LL << 30));
        c->add_option("--threads", f.threads, "worker threads; results do not depend on it")
            ->capture_default_str()
            ->check(CLI::Range(1, 256));
    };

    auto* validate_cmd = app.add_subcommand("validate", "check a transducer or recursion file");
    add_input(validate_cmd);
    auto* structure_cmd = app.add_subcommand("structure", "components, periods and reset word");
    add_input(structure_cmd);
    add_out(structure_cmd);
    auto* compile_cmd = app.add_subcommand("compile", "compile a recursion into a transducer");
    add_input(compile_cmd);
    add_out(compile_cmd);
    auto* analyze_cmd = app.add_subcommand("analyze", "e_T, v_T, spectrum and limit law");
    add_input(analyze_cmd);
    add_out(analyze_cmd);
    auto* fourier_cmd = app.add_subcommand("fourier", "Fourier coefficients c_k, k = 0..K, as CSV k,re,im,err");
    add_input(fourier_cmd);
    add_out(fourier_cmd);
    add_numeric(fourier_cmd);
    fourier_cmd->add_option("--terms", f.terms, "K")->capture_default_str()->check(CLI::Range(0LL, 100000LL));
    auto* empirical_cmd =
        app.add_subcommand("empirical", "moments and KS distance at N = q^e, as CSV N,mean,variance,ks_distance,reference_scale");
    add_input(empirical_cmd);
    add_out(empirical_cmd);
    empirical_cmd->add_option("--max-exp", f.max_exp, "largest exponent e")->capture_default_str()->check(CLI::Range(1, 63));
    auto* fluct_cmd = app.add_subcommand(
        "fluctuation", "mean(N) - e_T log_q N on a grid of x = log_q N, as CSV x,empirical_psi1[,fourier_partial]");
    add_input(fluct_cmd);
    add_out(fluct_cmd);
    add_numeric(fluct_cmd);
    fluct_cmd->add_option("--grid", f.grid, "lo:hi:step")->capture_default_str();
    fluct_cmd->add_option("--terms", f.terms, "also evaluate the Fourier series with K terms")->check(CLI::Range(0LL, 100000LL));
    auto* self_cmd = app.add_subcommand("selftest", "run the acceptance suite on a corpus directory");
    add_out(self_cmd);
    self_cmd->add_option("--corpus", f.corpus, "corpus directory")->capture_default_str();
    self_cmd->add_option("--threads", f.threads, "worker threads")->capture_default_str()->check(CLI::Range(1, 256));
    self_cmd->add_option("--criteria", f.criteria, "run only these criteria")->delimiter(',')->check(CLI::Range(1, 10));
    self_cmd->add_flag("--no-stretch", f.no_stretch, "skip the precision-50 comparison");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return kExitOk;
        }
        err << "digitflux: " << e.what() << "\n";
        return kExitUsage;
    }
    f.terms_given = fluct_cmd->count("--terms") > 0;

    try {
        if (*validate_cmd) return cmd_validate(f, out);
        if (*structure_cmd) {
            const auto t = load(f.input);
            Sink sink(f.out, out);
            print_structure(t, sink.stream());
            return kExitOk;
        }
        if (*compile_cmd) return cmd_compile(f, out);
        if (*analyze_cmd) {
            const auto t = load(f.input);
            Sink sink(f.out, out);
            print_analysis(t, sink.stream());
            return kExitOk;
        }
        if (*fourier_cmd) return cmd_fourier(f, out);
        if (*empirical_cmd) return cmd_empirical(f, out);
        if (*fluct_cmd) return cmd_fluctuation(f, out);
        if (*self_cmd) return cmd_selftest(f, out, err);
    } catch (const UsageError& e) {
        err << "digitflux: " << e.what() << '\n';
        return kExitUsage;
    } catch (const std::exception& e) {
        // ill-posed systems, parse errors, invalid transducers, unsupported inputs
        err << "digitflux: " << e.what() << '\n';
        return kExitDomain;
    }
    return kExitUsage;
}

}  // namespace digitflux
