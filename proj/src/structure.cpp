#include "digitflux/structure.hpp"

#include <algorithm>
#include <numeric>
#include <queue>
#include <set>

namespace digitflux {

std::vector<int> accessible_states(const Transducer& t) {
    std::vector<char> seen(t.state_count(), 0);
    std::vector<int> stack{t.initial()};
    seen[t.initial()] = 1;
    while (!stack.empty()) {
        int s = stack.back();
        stack.pop_back();
        for (int e = 0; e < t.symbol_count(); ++e) {
            const Arc* a = t.arc(s, e);
            if (a && !seen[a->to]) {
                seen[a->to] = 1;
                stack.push_back(a->to);
            }
        }
    }
    std::vector<int> out;
    for (int s = 0; s < t.state_count(); ++s)
        if (seen[s]) out.push_back(s);
    return out;
}

namespace {

// Iterative Tarjan over the accessible subgraph. Components come out in
// reverse topological order of the condensation.
std::vector<std::vector<int>> tarjan(const Transducer& t, const std::vector<int>& nodes) {
    const int n = t.state_count();
    std::vector<int> index(n, -1), low(n, 0);
    std::vector<char> on_stack(n, 0);
    std::vector<int> stack;
    std::vector<std::vector<int>> out;
    int counter = 0;

    struct Frame { int v; int next_symbol; };
    for (int root : nodes) {
        if (index[root] >= 0) continue;
        std::vector<Frame> call{{root, 0}};
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.next_symbol < t.symbol_count()) {
                int w = t.next(f.v, f.next_symbol++);
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.push_back({w, 0});
                } else if (on_stack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
                continue;
            }
            int v = f.v;
            call.pop_back();
            if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            if (low[v] == index[v]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != v);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
    }
    return out;
}

int component_period(const Transducer& t, const std::vector<int>& comp, const std::vector<int>& scc_of, int id) {
    std::vector<int> depth(t.state_count(), -1);
    std::queue<int> bfs;
    depth[comp.front()] = 0;
    bfs.push(comp.front());
    int g = 0;
    while (!bfs.empty()) {
        int v = bfs.front();
        bfs.pop();
        for (int e = 0; e < t.symbol_count(); ++e) {
            int w = t.next(v, e);
            if (scc_of[w] != id) continue;
            if (depth[w] < 0) {
                depth[w] = depth[v] + 1;
                bfs.push(w);
            } else {
                g = std::gcd(g, std::abs(depth[v] + 1 - depth[w]));
            }
        }
    }
    return g;  // 0 only for a single state without self-loop, which is never final
}

}  // namespace

StructureReport structure(const Transducer& t) {
    StructureReport r;
    r.accessible = accessible_states(t);
    r.scc_list = tarjan(t, r.accessible);
    // Tarjan emits sinks first; present components in topological order instead.
    std::reverse(r.scc_list.begin(), r.scc_list.end());
    r.scc_of.assign(t.state_count(), -1);
    for (int c = 0; c < static_cast<int>(r.scc_list.size()); ++c)
        for (int s : r.scc_list[c]) r.scc_of[s] = c;

    for (int c = 0; c < static_cast<int>(r.scc_list.size()); ++c) {
        bool leaves = false;
        for (int s : r.scc_list[c])
            for (int e = 0; e < t.symbol_count() && !leaves; ++e) leaves = r.scc_of[t.next(s, e)] != c;
        if (!leaves) r.final_components.push_back(c);
    }
    r.final_period = 1;
    for (int c : r.final_components) {
        int p = component_period(t, r.scc_list[c], r.scc_of, c);
        r.component_periods.push_back(p);
        r.final_period = std::lcm(r.final_period, p);
    }
    r.finally_connected = r.final_components.size() == 1;
    r.finally_aperiodic = r.final_period == 1;
    r.reset_sequence = find_reset(t);

    bool integer_outputs = true;
    for (int s : r.accessible) {
        integer_outputs = integer_outputs && is_integer(t.final_output(s));
        for (int e = 0; e < t.symbol_count(); ++e) integer_outputs = integer_outputs && is_integer(t.output(s, e));
    }
    r.nondiff_preconditions = t.d() == 1 && r.reset_sequence.has_value() && integer_outputs;
    return r;
}

std::optional<std::vector<int>> find_reset(const Transducer& t) {
    const std::vector<int> states = accessible_states(t);
    const int n = t.state_count();
    std::set<int> current(states.begin(), states.end());
    std::vector<int> word;

    while (current.size() > 1) {
        int a = *current.begin();
        int b = *std::next(current.begin());
        // Shortest merging word for the pair (a, b) in the pair automaton.
        std::vector<int> parent(static_cast<std::size_t>(n) * n, -2), via(static_cast<std::size_t>(n) * n, -1);
        auto key = [n](int x, int y) { return x < y ? x * n + y : y * n + x; };
        std::queue<int> bfs;
        parent[key(a, b)] = -1;
        bfs.push(key(a, b));
        int hit = -1;
        while (!bfs.empty() && hit < 0) {
            int k = bfs.front();
            bfs.pop();
            int x = k / n, y = k % n;
            for (int e = 0; e < t.symbol_count(); ++e) {
                int nx = t.next(x, e), ny = t.next(y, e);
                int nk = key(nx, ny);
                if (parent[nk] != -2) continue;
                parent[nk] = k;
                via[nk] = e;
                if (nx == ny) {
                    hit = nk;
                    break;
                }
                bfs.push(nk);
            }
        }
        if (hit < 0) return std::nullopt;
        std::vector<int> piece;
        for (int k = hit; parent[k] != -1; k = parent[k]) piece.push_back(via[k]);
        std::reverse(piece.begin(), piece.end());
        std::set<int> image;
        for (int s : current) image.insert(run(t, s, piece));
        current = std::move(image);
        word.insert(word.end(), piece.begin(), piece.end());
    }
    if (!is_reset_word(t, word)) return std::nullopt;
    return word;
}

bool is_reset_word(const Transducer& t, const std::vector<int>& word) {
    std::set<int> ends;
    for (int s : accessible_states(t)) ends.insert(run(t, s, word));
    return ends.size() == 1;
}

}  // namespace digitflux
