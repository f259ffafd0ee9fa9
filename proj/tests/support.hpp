#pragma once

#include "digitflux/oracles.hpp"
#include "digitflux/recursion.hpp"
#include "digitflux/transducer.hpp"

#include <fstream>
#include <random>
#include <sstream>
#include <string>

namespace testsupport {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

inline std::string fixture_path(const std::string& name) { return std::string(DIGITFLUX_FIXTURES) + "/" + name; }

inline digitflux::Transducer fixture(const std::string& name) {
    return digitflux::parse_transducer(read_file(fixture_path(name)));
}

inline digitflux::RecursionSystem fixture_recursion(const std::string& name) {
    return digitflux::parse_recursion(read_file(fixture_path(name)));
}

inline digitflux::Transducer paperfolding() {
    auto c = digitflux::compile(fixture_recursion("paperfolding.rec"));
    return *c.transducer;
}

using digitflux::random_transducer;

}  // namespace testsupport
