#include "support.hpp"

#include "digitflux/acceptance.hpp"
#include "digitflux/cli.hpp"

#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace digitflux;
using testsupport::fixture_path;
namespace fs = std::filesystem;

namespace {

struct Run {
    int code;
    std::string out, err;
};

Run cli(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = run_cli(args, out, err);
    return {code, out.str(), err.str()};
}

// Fresh empty directory under the temp path, removed on destruction.
struct TempDir {
    fs::path path;
    explicit TempDir(const std::string& tag) {
        path = fs::temp_directory_path() / ("digitflux-" + tag + "-" + std::to_string(std::random_device{}()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    fs::path operator/(const std::string& name) const { return path / name; }
};

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream o(p);
    o << text;
}

const char* const kTransducerFixtures[] = {"naf.fst",          "signflip.fst",     "sixperiodic.fst", "sumdigits-q2.fst",
                                           "sumdigits-q3.fst", "sumdigits-q4.fst", "sumdigits-q5.fst"};

}  // namespace

TEST_CASE("analyze prints the paperfolding constants") {
    const auto r = cli({"analyze", fixture_path("paperfolding.rec")});
    CHECK(r.code == kExitOk);
    CHECK(r.out.find("e_T=8/13\n") != std::string::npos);
    CHECK(r.out.find("v_T=432/2197\n") != std::string::npos);
    const auto six = cli({"analyze", fixture_path("sixperiodic.fst")});
    CHECK(six.out.find("e_T=11/8\n") != std::string::npos);
    CHECK(six.out.find("period=6\n") != std::string::npos);
}

TEST_CASE("exit codes") {
    CHECK(cli({"validate", fixture_path("naf.fst")}).code == kExitOk);
    CHECK(cli({"validate", fixture_path("paperfolding.rec")}).code == kExitOk);

    const auto ill = cli({"compile", fixture_path("illposed.rec")});
    CHECK(ill.code == kExitDomain);
    CHECK(ill.err.find("is well-posed if and only if") != std::string::npos);
    CHECK(cli({"validate", fixture_path("illposed.rec")}).code == kExitDomain);
    CHECK(cli({"analyze", fixture_path("illposed.rec")}).code == kExitDomain);

    TempDir dir("exit");
    // state 1 lacks the arc for digit 1
    write_file(dir / "incomplete.fst", "transducer v1\nq 2\nd 1\nstates 2\ninitial 0\nfinal 0 0\nfinal 1 0\ntrans 0 0 -> 1 0\ntrans 0 1 -> 0 1\ntrans 1 0 -> 1 0\n");
    const auto bad = cli({"validate", (dir / "incomplete.fst").string()});
    CHECK(bad.code == kExitDomain);
    CHECK(!bad.err.empty());
    write_file(dir / "garbage.fst", "transducer v1\nq two\n");
    CHECK(cli({"analyze", (dir / "garbage.fst").string()}).code == kExitDomain);

    CHECK(cli({}).code == kExitUsage);
    CHECK(cli({"bogus"}).code == kExitUsage);
    CHECK(cli({"fourier"}).code == kExitUsage);
    CHECK(cli({"analyze", (dir / "missing.fst").string()}).code == kExitUsage);
    CHECK(cli({"fourier", fixture_path("naf.fst"), "--precision", "99"}).code == kExitUsage);
    CHECK(cli({"fourier", fixture_path("naf.fst"), "--terms", "-1"}).code == kExitUsage);
    CHECK(cli({"fluctuation", fixture_path("naf.fst"), "--grid", "1:2"}).code == kExitUsage);
    CHECK(cli({"empirical", fixture_path("sumdigits-q3.fst"), "--max-exp", "40"}).code == kExitUsage);
    CHECK(cli({"selftest", "--corpus", (dir / "nowhere").string()}).code == kExitUsage);
    CHECK(cli({"selftest", "--criteria", "11"}).code == kExitUsage);

    const auto help = cli({"--help"});
    CHECK(help.code == kExitOk);
    for (const char* flag : {"validate", "structure", "compile", "analyze", "fourier", "empirical", "fluctuation", "selftest"})
        CHECK(help.out.find(flag) != std::string::npos);
    const auto fhelp = cli({"fourier", "--help"});
    for (const char* flag : {"--out", "--precision", "--terms", "--depth", "--threads"}) CHECK(fhelp.out.find(flag) != std::string::npos);
    CHECK(cli({"fluctuation", "--help"}).out.find("--grid") != std::string::npos);
    CHECK(cli({"empirical", "--help"}).out.find("--max-exp") != std::string::npos);
}

TEST_CASE("the installed tool maps exit codes") {
    auto status = [](const std::string& args) {
        const std::string cmd = std::string(DIGITFLUX_TOOL) + " " + args + " > /dev/null 2>&1";
        const int s = std::system(cmd.c_str());
        return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
    };
    CHECK(status("validate " + fixture_path("naf.fst")) == 0);
    CHECK(status("compile " + fixture_path("illposed.rec")) == 1);
    CHECK(status("frobnicate") == 2);
}

TEST_CASE("output does not depend on threads or destination") {
    const auto pf = fixture_path("paperfolding.rec");
    const auto one = cli({"fourier", pf, "--terms", "12", "--threads", "1"});
    const auto four = cli({"fourier", pf, "--terms", "12", "--threads", "4"});
    REQUIRE(one.code == kExitOk);
    CHECK(one.out == four.out);
    CHECK(one.out.rfind("k,re,im,err\n0,1.530815128", 0) == 0);

    TempDir dir("out");
    const auto file = (dir / "c.csv").string();
    const auto quiet = cli({"fourier", pf, "--terms", "12", "--out", file});
    CHECK(quiet.out.empty());
    CHECK(testsupport::read_file(file) == one.out);

    const auto f1 = cli({"fluctuation", pf, "--grid", "10:10.5:0.1", "--terms", "20", "--threads", "1"});
    const auto f2 = cli({"fluctuation", pf, "--grid", "10:10.5:0.1", "--terms", "20", "--threads", "3"});
    CHECK(f1.out == f2.out);
    CHECK(f1.out.rfind("x,empirical_psi1,fourier_partial\n", 0) == 0);
    CHECK(std::count(f1.out.begin(), f1.out.end(), '\n') == 7);
    CHECK(cli({"fluctuation", pf, "--grid", "10:10.5:0.1"}).out.rfind("x,empirical_psi1\n", 0) == 0);

    const auto e = cli({"empirical", fixture_path("sumdigits-q2.fst"), "--max-exp", "3"});
    CHECK(e.out == "N,mean,variance,ks_distance,reference_scale\n"
                   "2,0.5,0.25,0.341344746068543,1\n"
                   "4,1,0.5,0.25,0.707106781186547\n"
                   "8,1.5,0.75,0.218148569174614,0.577350269189626\n");
    const auto sf = cli({"empirical", fixture_path("signflip.fst"), "--max-exp", "2"});
    CHECK(sf.out.find("refused") != std::string::npos);
    CHECK(cli({"structure", pf}).out.find("nondiff_applicable=yes") != std::string::npos);
}

TEST_CASE("parse and serialize round-trip the corpus") {
    for (const char* name : kTransducerFixtures) {
        INFO(name);
        const auto t = testsupport::fixture(name);
        const std::string s = serialize(t);
        const auto back = parse_transducer(s);
        CHECK(back == t);
        CHECK(serialize(back) == s);
    }
    for (const char* name : {"paperfolding.rec", "illposed.rec"}) {
        INFO(name);
        const auto sys = testsupport::fixture_recursion(name);
        const std::string s = serialize(sys);
        CHECK(serialize(parse_recursion(s)) == s);
    }
    // compile output is a transducer file describing the same transducer
    const auto c = cli({"compile", fixture_path("paperfolding.rec")});
    REQUIRE(c.code == kExitOk);
    CHECK(parse_transducer(c.out) == testsupport::paperfolding());
    TempDir dir("compiled");
    write_file(dir / "pf.fst", c.out);
    CHECK(cli({"analyze", (dir / "pf.fst").string()}).out == cli({"analyze", fixture_path("paperfolding.rec")}).out);
}

TEST_CASE("reference table parsing") {
    const auto rows = parse_reference_table(testsupport::read_file(fixture_path("paperfolding-fourier.csv")));
    REQUIRE(rows.size() == 24);
    CHECK(rows[0].k == 0);
    CHECK(rows[0].re == 1.5308151288);
    CHECK(rows[23].k == 23);
    CHECK_THROWS_AS(parse_reference_table("k,re,im\n1;2;3\n"), std::runtime_error);
}

TEST_CASE("selftest on an empty corpus passes trivially with a warning") {
    TempDir dir("empty");
    const auto r = cli({"selftest", "--corpus", dir.path.string()});
    CHECK(r.code == kExitOk);
    CHECK(r.err.find("warning") != std::string::npos);
    CHECK(r.out.find("0/0 criteria passed") != std::string::npos);
}

TEST_CASE("selftest subset and missing fixtures") {
    TempDir dir("partial");
    fs::copy_file(fixture_path("sixperiodic.fst"), dir / "sixperiodic.fst");
    const auto r = cli({"selftest", "--corpus", dir.path.string(), "--criteria", "4,9"});
    CHECK(r.code == kExitDomain);
    CHECK(r.out.find("PASS   4") != std::string::npos);
    CHECK(r.out.find("FAIL   9") != std::string::npos);
    CHECK(r.out.find("missing corpus file signflip.fst") != std::string::npos);
}

TEST_CASE("a perturbed table value fails exactly one criterion") {
    TempDir dir("perturbed");
    for (const char* name : kCorpusFiles) fs::copy_file(fixture_path(name), dir / name);
    std::string table = testsupport::read_file(fixture_path("paperfolding-fourier.csv"));
    const std::string from = "7,0.0015033904,", to = "7,0.0015133904,";
    REQUIRE(table.find(from) != std::string::npos);
    table.replace(table.find(from), from.size(), to);
    write_file(dir / "paperfolding-fourier.csv", table);

    const auto r = cli({"selftest", "--corpus", dir.path.string(), "--threads", "8", "--no-stretch"});
    MESSAGE(r.out);
    CHECK(r.code == kExitDomain);
    CHECK(std::count(r.out.begin(), r.out.end(), '\n') == 11);
    int fails = 0;
    std::istringstream lines(r.out);
    for (std::string line; std::getline(lines, line);)
        if (line.rfind("FAIL", 0) == 0) {
            ++fails;
            CHECK(line.rfind("FAIL   2", 0) == 0);
            CHECK(line.find("at k = 7") != std::string::npos);
        }
    CHECK(fails == 1);
    CHECK(r.out.find("9/10 criteria passed") != std::string::npos);
}
