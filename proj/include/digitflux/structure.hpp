#pragma once

#include "digitflux/transducer.hpp"

#include <optional>
#include <vector>

namespace digitflux {

struct StructureReport {
    std::vector<int> accessible;                // sorted state indices
    std::vector<std::vector<int>> scc_list;     // partition of the accessible states
    std::vector<int> final_components;          // indices into scc_list, C_1..C_c
    std::vector<int> component_periods;         // p_j, aligned with final_components
    int final_period = 1;                       // lcm of the p_j
    bool finally_connected = true;
    bool finally_aperiodic = true;
    std::optional<std::vector<int>> reset_sequence;  // symbol codes in reading order
    // d = 1, reset word present and all outputs integers. The remaining
    // condition on e_T is decided by the spectral analysis.
    bool nondiff_preconditions = false;
    std::optional<bool> nondiff_applicable;

    const std::vector<int>& component(int j) const { return scc_list[final_components[j]]; }
    int component_count() const { return static_cast<int>(final_components.size()); }
    // scc index per state, -1 for inaccessible states.
    std::vector<int> scc_of;
};

StructureReport structure(const Transducer& t);

// Synchronizing word over the accessible states by pairwise merging.
std::optional<std::vector<int>> find_reset(const Transducer& t);

// True iff the word sends every accessible state to one common state.
bool is_reset_word(const Transducer& t, const std::vector<int>& word);

std::vector<int> accessible_states(const Transducer& t);

}  // namespace digitflux
