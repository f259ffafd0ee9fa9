#include "digitflux/acceptance.hpp"

#include "digitflux/dirichlet.hpp"
#include "digitflux/empirical.hpp"
#include "digitflux/oracles.hpp"
#include "digitflux/recursion.hpp"
#include "digitflux/spectral.hpp"
#include "digitflux/structure.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>

namespace digitflux {

namespace fs = std::filesystem;

namespace {

class Corpus {
public:
    explicit Corpus(fs::path dir) : dir_(std::move(dir)) {}

    std::string text(const std::string& name) const {
        std::ifstream in(dir_ / name);
        if (!in) throw std::runtime_error("missing corpus file " + name);
        std::ostringstream s;
        s << in.rdbuf();
        return s.str();
    }
    Transducer transducer(const std::string& name) const { return parse_transducer(text(name)); }
    RecursionSystem recursion(const std::string& name) const { return parse_recursion(text(name)); }
    Transducer paperfolding() const {
        auto c = compile(recursion("paperfolding.rec"));
        if (!c.transducer) throw std::runtime_error("paperfolding.rec is ill-posed");
        return *c.transducer;
    }
    bool empty() const {
        for (const char* f : kCorpusFiles)
            if (fs::exists(dir_ / f)) return false;
        return true;
    }

private:
    fs::path dir_;
};

std::string fmt(double v, int digits = 3) {
    std::ostringstream s;
    s << std::setprecision(digits) << v;
    return s.str();
}

struct Check {
    bool pass = true;
    std::ostringstream detail;

    void require(bool ok, const std::string& what) {
        if (!ok) {
            if (!pass) detail << "; ";
            detail << what;
            pass = false;
        }
    }
};

double elapsed(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

const char* const kD1Fixtures[] = {"naf.fst",          "signflip.fst",     "sixperiodic.fst", "sumdigits-q2.fst",
                                   "sumdigits-q3.fst", "sumdigits-q4.fst", "sumdigits-q5.fst"};

CriterionResult paperfolding_constants(const Corpus& corpus, const AcceptanceOptions&) {
    const auto start = std::chrono::steady_clock::now();
    const auto rep = analyze(corpus.paperfolding());
    const double target = std::abs(std::complex<double>(-0.7718445063, 1.1151425080));
    const double seconds = elapsed(start);
    Check c;
    c.require(rep.e_T == Rational(8, 13), "e_T = " + rep.e_T.get_str());
    c.require(rep.v_T == Rational(432, 2197), "v_T = " + rep.v_T.get_str());
    c.require(std::abs(rep.second_modulus - target) <= 1e-6, "second modulus " + fmt(rep.second_modulus, 12));
    c.require(seconds < 10, "took " + fmt(seconds) + " s");
    if (c.pass)
        c.detail << "e_T = 8/13, v_T = 432/2197, |mu_2| = " << fmt(rep.second_modulus, 12);
    return {1, "paperfolding constants", c.pass, c.detail.str(), 0};
}

CriterionResult table_reproduction(const Corpus& corpus, const AcceptanceOptions& opt) {
    const auto table = parse_reference_table(corpus.text("paperfolding-fourier.csv"));
    const auto pf = corpus.paperfolding();
    Check c;
    c.require(!table.empty(), "empty reference table");
    long long K = 0;
    for (const auto& row : table) K = std::max(K, std::abs(row.k));

    auto worst_against = [&](const FourierResult& res, long long& at) {
        double worst = 0;
        for (const auto& row : table) {
            const double d = std::abs(res.coefficient(row.k) - std::complex<double>(row.re, row.im));
            if (d > worst) worst = d, at = row.k;
        }
        return worst;
    };

    SpecialFunctionContext ctx;
    ctx.threads = opt.threads;
    const auto start = std::chrono::steady_clock::now();
    const auto res = fourier(pf, K, ctx);
    const double seconds = elapsed(start);
    long long at = 0;
    const double worst = worst_against(res, at);
    c.require(worst <= 1e-6, "max deviation " + fmt(worst) + " at k = " + std::to_string(at));
    c.require(seconds < 120, "took " + fmt(seconds) + " s");
    if (c.pass) c.detail << table.size() << " coefficients, max deviation " << fmt(worst);

    if (opt.stretch) {
        ctx.precision = 50;
        const auto fine = fourier(pf, K, ctx);
        long long fat = 0;
        const double fworst = worst_against(fine, fat);
        c.detail << "; precision 50: max deviation " << fmt(fworst) << (fworst <= 1e-8 ? " (within 1e-8)" : " (above 1e-8)");
    }
    return {2, "fourier coefficient table", c.pass, c.detail.str(), 0};
}

CriterionResult delange(const Corpus& corpus, const AcceptanceOptions& opt) {
    SpecialFunctionContext ctx;
    ctx.threads = opt.threads;
    Check c;
    double worst = 0;
    const auto start = std::chrono::steady_clock::now();
    for (int q = 2; q <= 5; ++q) {
        const FourierEngine eng(corpus.transducer("sumdigits-q" + std::to_string(q) + ".fst"), ctx);
        for (long long k = 0; k <= 10; ++k) {
            const double d = std::abs(eng.coefficient(k).value - sum_of_digits_coefficient(q, k));
            worst = std::max(worst, d);
            c.require(d <= 1e-9, "q = " + std::to_string(q) + ", k = " + std::to_string(k) + ": " + fmt(d));
        }
    }
    const double seconds = elapsed(start);
    c.require(seconds < 60, "took " + fmt(seconds) + " s");
    if (c.pass) c.detail << "44 coefficients, max deviation " << fmt(worst);
    return {3, "sum-of-digits closed forms", c.pass, c.detail.str(), 0};
}

CriterionResult six_periodic(const Corpus& corpus, const AcceptanceOptions&) {
    const auto rep = analyze(corpus.transducer("sixperiodic.fst"));
    Check c;
    c.require(rep.e_T == Rational(11, 8), "e_T = " + rep.e_T.get_str());
    c.require(rep.period() == 6, "period " + std::to_string(rep.period()));
    if (c.pass) c.detail << "e_T = 11/8, p = 6";
    return {4, "six-periodic example", c.pass, c.detail.str(), 0};
}

// First n with evaluate != brute force, or nullopt.
std::optional<std::string> compiler_mismatch(const RecursionSystem& sys, int d, long long side) {
    const auto comp = compile(sys);
    if (!comp.transducer) return std::string("reported ill-posed");
    BruteForceRecursion brute(sys);
    if (d == 1) {
        for (long long n = 0; n < side; ++n)
            if (evaluate(*comp.transducer, std::uint64_t(n)) != brute({n})) return "n = " + std::to_string(n);
        return std::nullopt;
    }
    for (long long x = 0; x < side; ++x)
        for (long long y = 0; y < side; ++y)
            if (evaluate(*comp.transducer, {std::uint64_t(x), std::uint64_t(y)}) != brute({x, y}))
                return "n = (" + std::to_string(x) + ", " + std::to_string(y) + ")";
    return std::nullopt;
}

CriterionResult compiler_oracle(const Corpus& corpus, const AcceptanceOptions&) {
    Check c;
    if (auto bad = compiler_mismatch(corpus.recursion("paperfolding.rec"), 1, 4096)) c.require(false, "paperfolding " + *bad);
    std::mt19937_64 rng(20240501);
    for (int i = 0; i < 50; ++i)
        if (auto bad = compiler_mismatch(random_well_posed(rng, 1), 1, 4096))
            c.require(false, "d = 1 system " + std::to_string(i) + ": " + *bad);
    for (int i = 0; i < 20; ++i)
        if (auto bad = compiler_mismatch(random_well_posed(rng, 2), 2, 32))
            c.require(false, "d = 2 system " + std::to_string(i) + ": " + *bad);
    const auto ill = compile(corpus.recursion("illposed.rec"));
    c.require(!ill.report.well_posed && !ill.transducer && !ill.report.bad_cycles.empty(), "ill-posed fixture not detected");
    if (c.pass) c.detail << "paperfolding, 50 systems on [0,4096), 20 on [0,32)^2; ill-posed fixture rejected";
    return {5, "compiler against brute force", c.pass, c.detail.str(), 0};
}

// Compares running sums of evaluate with prefix_moments at every N in probes (sorted, <= limit).
bool running_agrees(const Transducer& t, const std::vector<std::uint64_t>& probes) {
    Rational s1 = 0, s2 = 0;
    std::size_t next = 0;
    for (std::uint64_t n = 0; next < probes.size(); ++n) {
        const Rational v = evaluate(t, n);
        s1 += v;
        s2 += v * v;
        if (n + 1 == probes[next]) {
            const auto m = prefix_moments(t, n + 1);
            if (m.sum1 != s1 || m.sum2 != s2) return false;
            ++next;
        }
    }
    return true;
}

bool boxes_agree(const Transducer& t, int L) {
    std::vector<std::vector<Rational>> p1(L + 1, std::vector<Rational>(L + 1, Rational(0))), p2 = p1;
    for (int a = 0; a < L; ++a)
        for (int b = 0; b < L; ++b) {
            const Rational v = evaluate(t, {std::uint64_t(a), std::uint64_t(b)});
            p1[a + 1][b + 1] = v + p1[a][b + 1] + p1[a + 1][b] - p1[a][b];
            p2[a + 1][b + 1] = v * v + p2[a][b + 1] + p2[a + 1][b] - p2[a][b];
        }
    for (int A = 1; A <= L; ++A)
        for (int B = 1; B <= L; ++B) {
            const auto m = prefix_moments(t, {std::uint64_t(A), std::uint64_t(B)});
            if (m.sum1 != p1[A][B] || m.sum2 != p2[A][B]) return false;
        }
    return true;
}

CriterionResult prefix_exactness(const Corpus& corpus, const AcceptanceOptions&) {
    Check c;
    std::vector<std::uint64_t> all(4096);
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i + 1;
    for (const char* name : kD1Fixtures) c.require(running_agrees(corpus.transducer(name), all), name);
    const auto pf = corpus.paperfolding();
    c.require(running_agrees(pf, all), "paperfolding");

    // every N up to 300, then powers of q and their neighbours up to 4096
    std::vector<std::uint64_t> probes;
    for (std::uint64_t n = 1; n <= 300; ++n) probes.push_back(n);
    for (std::uint64_t n : {511, 512, 513, 729, 1000, 1023, 1024, 1025, 2048, 2187, 3000, 4095, 4096}) probes.push_back(n);
    std::mt19937_64 rng(97531);
    std::uniform_int_distribution<int> qd(2, 4), sd(1, 5);
    for (int i = 0; i < 200; ++i) {
        const int q = qd(rng);
        const auto t = random_transducer(rng, q, 1, sd(rng));
        c.require(running_agrees(t, probes), "random d = 1 transducer " + std::to_string(i));
    }
    for (int i = 0; i < 20; ++i) {
        const auto t = random_transducer(rng, 2 + i % 2, 2, 1 + i % 4);
        c.require(boxes_agree(t, 32), "random d = 2 transducer " + std::to_string(i));
    }

    const int reps = 200;
    const auto start = std::chrono::steady_clock::now();
    Rational guard = 0;
    for (int i = 0; i < reps; ++i) guard += prefix_moments(pf, (std::uint64_t(1) << 40) + i).sum1;
    const double ms = elapsed(start) * 1000 / reps;
    c.require(ms < 1, "2^40 query took " + fmt(ms) + " ms");
    if (c.pass) c.detail << "corpus and 220 random transducers exact; 2^40 query " << fmt(ms) << " ms";
    return {6, "prefix-moment exactness", c.pass, c.detail.str(), 0};
}

CriterionResult fluctuation_coherence(const Corpus& corpus, const AcceptanceOptions& opt) {
    const auto pf = corpus.paperfolding();
    SpecialFunctionContext ctx;
    ctx.precision = 15;
    ctx.threads = opt.threads;
    const FourierEngine eng(pf, ctx);
    const auto series = eng.fourier(200);
    std::vector<double> grid(500);
    for (int i = 0; i < 500; ++i) grid[i] = 10 + 2.0 * i / 499;
    double sup = 0;
    for (const auto& row : fluctuation_samples(pf, eng.report(), grid))
        sup = std::max(sup, std::abs(row.value - series.evaluate(row.log_n)));
    Check c;
    c.require(sup <= 0.01, "sup " + fmt(sup));
    if (c.pass) c.detail << "sup " << fmt(sup) << " over 500 points";
    return {7, "fluctuation against fourier series", c.pass, c.detail.str(), 0};
}

CriterionResult distribution(const Corpus& corpus, const AcceptanceOptions&) {
    Check c;
    std::ostringstream summary;
    const std::pair<std::string, Transducer> cases[] = {{"paperfolding", corpus.paperfolding()},
                                                        {"sumdigits-q2", corpus.transducer("sumdigits-q2.fst")}};
    for (const auto& [name, t] : cases) {
        const auto rep = analyze(t);
        std::vector<double> ks;
        for (int e : {16, 19, 22}) {
            const auto d = distribution_check(t, rep, std::uint64_t(1) << e);
            c.require(d.quantitative, name + " refused at 2^" + std::to_string(e));
            ks.push_back(d.ks_distance);
        }
        c.require(ks[1] < ks[0] && ks[2] < ks[1], name + " not decreasing");
        c.require(ks[2] <= 0.2, name + " above 0.2 at 2^22");
        summary << (name == "paperfolding" ? "" : "; ") << name << " " << fmt(ks[0]) << ", " << fmt(ks[1]) << ", " << fmt(ks[2]);
    }
    c.detail << (c.pass ? "" : " (") << summary.str() << (c.pass ? "" : ")");
    return {8, "kolmogorov-smirnov decrease", c.pass, c.detail.str(), 0};
}

CriterionResult degenerate(const Corpus& corpus, const AcceptanceOptions&) {
    const auto t = corpus.transducer("signflip.fst");
    const auto rep = analyze(t);
    Check c;
    c.require(rep.e_T == 0, "e_T = " + rep.e_T.get_str());
    c.require(rep.v_T == 0, "v_T = " + rep.v_T.get_str());
    c.require(rep.classification == Classification::Degenerate, "classified " + to_string(rep.classification));
    const auto d = distribution_check(t, rep, 1 << 12);
    c.require(!d.quantitative && std::isnan(d.ks_distance), "quantitative mode not refused");
    if (c.pass) c.detail << "degenerate, KS refused, support of " << d.support.size() << " values";
    return {9, "degenerate guardrails", c.pass, c.detail.str(), 0};
}

// Symbol 0 from the initial state enters block A, every other symbol block B;
// both blocks are closed, so there are at least two final components.
Transducer split_transducer(std::mt19937_64& rng, int q, int block) {
    const int n = 1 + 2 * block;
    std::uniform_int_distribution<int> pick(0, block - 1);
    std::vector<std::vector<int>> next(n, std::vector<int>(q));
    std::vector<std::vector<Rational>> out(n, std::vector<Rational>(q, Rational(0)));
    for (int e = 0; e < q; ++e) next[0][e] = e == 0 ? 1 : 1 + block;
    for (int s = 1; s < n; ++s) {
        const int base = s <= block ? 1 : 1 + block;
        for (int e = 0; e < q; ++e) {
            next[s][e] = base + pick(rng);
            out[s][e] = e;
        }
    }
    return make_transducer(q, 1, next, out, std::vector<Rational>(n, Rational(0)));
}

// A cycle of length m whose states branch only forwards, so the period is m.
Transducer cyclic_transducer(std::mt19937_64& rng, int q, int m) {
    std::uniform_int_distribution<int> o(-2, 2);
    std::vector<std::vector<int>> next(m, std::vector<int>(q));
    std::vector<std::vector<Rational>> out(m, std::vector<Rational>(q));
    for (int s = 0; s < m; ++s)
        for (int e = 0; e < q; ++e) {
            next[s][e] = (s + 1) % m;
            out[s][e] = o(rng);
        }
    return make_transducer(q, 1, next, out, std::vector<Rational>(m, Rational(0)));
}

CriterionResult structural(const Corpus& corpus, const AcceptanceOptions&) {
    Check c;
    const auto pf = corpus.paperfolding();
    const auto s = structure(pf);
    c.require(s.reset_sequence.has_value(), "no reset word for paperfolding");
    if (s.reset_sequence) {
        c.require(is_reset_word(pf, *s.reset_sequence), "found word does not reset");
        // replay from the initial state after random prefixes
        std::mt19937_64 rng(4242);
        std::uniform_int_distribution<int> len(0, 24), sym(0, pf.symbol_count() - 1);
        const int target = run(pf, 0, *s.reset_sequence);
        for (int i = 0; i < 1000; ++i) {
            std::vector<int> w(len(rng));
            for (int& e : w) e = sym(rng);
            w.insert(w.end(), s.reset_sequence->begin(), s.reset_sequence->end());
            if (run(pf, 0, w) != target) {
                c.require(false, "replay " + std::to_string(i) + " ends elsewhere");
                break;
            }
        }
    }
    // (00001) as written, read least significant digit first
    c.require(is_reset_word(pf, {1, 0, 0, 0, 0}), "00001 does not reset");
    c.require(analyze(pf).structure.nondiff_applicable.value_or(false), "non-differentiability not applicable");

    std::vector<Transducer> all{pf};
    for (const char* name : kD1Fixtures) all.push_back(corpus.transducer(name));
    std::mt19937_64 rng(8642);
    std::uniform_int_distribution<int> qd(2, 3), dd(1, 2), sd(1, 6);
    for (int i = 0; i < 200; ++i) {
        const int q = qd(rng), d = dd(rng);
        all.push_back(random_transducer(rng, q, d, sd(rng)));
    }
    std::uniform_int_distribution<int> bd(1, 4), md(2, 6);
    for (int i = 0; i < 50; ++i) {
        const int q = qd(rng);
        all.push_back(split_transducer(rng, q, bd(rng)));
        all.push_back(cyclic_transducer(rng, q, md(rng)));
    }
    int multi = 0;
    for (std::size_t i = 0; i < all.size(); ++i) {
        const auto r = structure(all[i]);
        if (r.component_count() > 1 || r.final_period > 1) {
            ++multi;
            c.require(!r.reset_sequence && !find_reset(all[i]), "reset word despite c > 1 or p > 1 (case " + std::to_string(i) + ")");
        }
        if (r.reset_sequence) c.require(is_reset_word(all[i], *r.reset_sequence), "invalid reset word (case " + std::to_string(i) + ")");
    }
    if (c.pass) c.detail << "reset word of length " << s.reset_sequence->size() << " verified; " << multi << " of " << all.size()
                         << " cases with c > 1 or p > 1 have none";
    return {10, "structural suite", c.pass, c.detail.str(), 0};
}

}  // namespace

bool AcceptanceReport::passed() const { return failures() == 0; }

int AcceptanceReport::failures() const {
    return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const CriterionResult& r) { return !r.pass; }));
}

std::vector<ReferenceCoefficient> parse_reference_table(const std::string& text) {
    std::vector<ReferenceCoefficient> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#' || line.rfind("k,", 0) == 0) continue;
        std::istringstream row(line);
        ReferenceCoefficient c;
        char comma1 = 0, comma2 = 0;
        if (!(row >> c.k >> comma1 >> c.re >> comma2 >> c.im) || comma1 != ',' || comma2 != ',')
            throw std::runtime_error("reference table line " + std::to_string(lineno) + ": expected k,re,im");
        out.push_back(c);
    }
    return out;
}

AcceptanceReport run_acceptance(const AcceptanceOptions& opt) {
    if (!fs::is_directory(opt.corpus_dir)) throw std::invalid_argument("corpus directory not found: " + opt.corpus_dir);
    for (int id : opt.only)
        if (id < 1 || id > 10) throw std::invalid_argument("criterion ids are 1..10");
    AcceptanceReport report;
    const Corpus corpus(opt.corpus_dir);
    if (corpus.empty()) {
        report.warnings.push_back("corpus " + opt.corpus_dir + " is empty; nothing was checked");
        return report;
    }
    using Fn = std::function<CriterionResult(const Corpus&, const AcceptanceOptions&)>;
    const std::pair<const char*, Fn> criteria[] = {
        {"paperfolding constants", paperfolding_constants},
        {"fourier coefficient table", table_reproduction},
        {"sum-of-digits closed forms", delange},
        {"six-periodic example", six_periodic},
        {"compiler against brute force", compiler_oracle},
        {"prefix-moment exactness", prefix_exactness},
        {"fluctuation against fourier series", fluctuation_coherence},
        {"kolmogorov-smirnov decrease", distribution},
        {"degenerate guardrails", degenerate},
        {"structural suite", structural},
    };
    for (int id = 1; id <= 10; ++id) {
        if (!opt.only.empty() && std::find(opt.only.begin(), opt.only.end(), id) == opt.only.end()) continue;
        const auto start = std::chrono::steady_clock::now();
        CriterionResult r;
        try {
            r = criteria[id - 1].second(corpus, opt);
        } catch (const std::exception& e) {
            r = {id, criteria[id - 1].first, false, e.what(), 0};
        }
        r.seconds = elapsed(start);
        report.rows.push_back(std::move(r));
    }
    return report;
}

std::string format_report(const AcceptanceReport& r) {
    std::ostringstream out;
    for (const auto& row : r.rows) {
        out << (row.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << row.id << "  " << std::left << std::setw(36) << row.name
            << std::right << std::fixed << std::setprecision(2) << std::setw(8) << row.seconds << " s  " << row.detail << '\n';
        out.unsetf(std::ios::fixed);
    }
    for (const auto& w : r.warnings) out << "warning: " << w << '\n';
    return out.str();
}

}  // namespace digitflux
