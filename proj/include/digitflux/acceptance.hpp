#pragma once

#include <string>
#include <vector>

namespace digitflux {

// Corpus files looked up in AcceptanceOptions::corpus_dir.
inline const char* const kCorpusFiles[] = {
    "naf.fst",          "signflip.fst",     "sixperiodic.fst",  "sumdigits-q2.fst",         "sumdigits-q3.fst",
    "sumdigits-q4.fst", "sumdigits-q5.fst", "paperfolding.rec", "illposed.rec", "paperfolding-fourier.csv"};

struct AcceptanceOptions {
    std::string corpus_dir = "fixtures";
    int threads = 1;
    std::vector<int> only;  // criterion ids to run; empty runs all ten
    bool stretch = true;    // also report the 1e-8 comparison at precision 50 for criterion 2
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0;
};

struct AcceptanceReport {
    std::vector<CriterionResult> rows;
    std::vector<std::string> warnings;

    bool passed() const;
    int failures() const;
};

// Throws std::invalid_argument when corpus_dir is not a directory or an id is
// outside 1..10. A directory holding none of kCorpusFiles yields no rows and a
// warning; a criterion whose files are missing fails.
AcceptanceReport run_acceptance(const AcceptanceOptions& opt);

// One line per criterion, then the warnings.
std::string format_report(const AcceptanceReport& r);

// k,re,im rows; throws std::runtime_error on malformed lines.
struct ReferenceCoefficient {
    long long k = 0;
    double re = 0, im = 0;
};
std::vector<ReferenceCoefficient> parse_reference_table(const std::string& text);

}  // namespace digitflux
