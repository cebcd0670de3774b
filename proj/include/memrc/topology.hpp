#pragma once

// Random memristive network topologies: K-regular multigraph-free graphs with
// a driven input terminal, a ground terminal and differential readout pairs.

#include "memrc/error.hpp"
#include "memrc/seed.hpp"
#include "memrc/text.hpp"

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace memrc {

struct Edge {
    std::size_t id = 0;
    std::size_t a = 0;  ///< branch voltage is v[a] - v[b]
    std::size_t b = 0;

    friend bool operator==(const Edge&, const Edge&) = default;
};

struct ReadoutPair {
    std::size_t p = 0;
    std::size_t q = 0;

    friend bool operator==(const ReadoutPair&, const ReadoutPair&) = default;
};

struct NetworkTopology {
    std::size_t node_count = 0;
    std::vector<Edge> edges;
    std::size_t input_node = 0;
    std::size_t ground_node = 0;
    std::vector<ReadoutPair> readout_pairs;

    [[nodiscard]] std::size_t edge_count() const noexcept { return edges.size(); }

    [[nodiscard]] std::vector<std::size_t> degrees() const {
        std::vector<std::size_t> deg(node_count, 0);
        for (const auto& e : edges) {
            ++deg[e.a];
            ++deg[e.b];
        }
        return deg;
    }

    friend bool operator==(const NetworkTopology&, const NetworkTopology&) = default;
};

/// Nodes reachable from `start` (BFS), as a membership mask.
[[nodiscard]] inline std::vector<bool> reachable_from(const NetworkTopology& topo, std::size_t start) {
    std::vector<std::vector<std::size_t>> adj(topo.node_count);
    for (const auto& e : topo.edges) {
        adj[e.a].push_back(e.b);
        adj[e.b].push_back(e.a);
    }
    std::vector<bool> seen(topo.node_count, false);
    std::vector<std::size_t> frontier{start};
    seen[start] = true;
    while (!frontier.empty()) {
        const auto n = frontier.back();
        frontier.pop_back();
        for (const auto m : adj[n]) {
            if (!seen[m]) {
                seen[m] = true;
                frontier.push_back(m);
            }
        }
    }
    return seen;
}

[[nodiscard]] inline bool is_connected(const NetworkTopology& topo) {
    if (topo.node_count == 0) return true;
    const auto seen = reachable_from(topo, 0);
    return std::all_of(seen.begin(), seen.end(), [](bool s) { return s; });
}

/// Structural checks. Connectivity is only required when `require_connected`.
inline void validate_topology(const NetworkTopology& topo, bool require_connected = true,
                              bool allow_multi_edges = false) {
    const auto n = topo.node_count;
    if (n < 2) throw InvalidArgument("topology needs at least 2 nodes");
    if (topo.input_node >= n || topo.ground_node >= n) {
        throw InvalidArgument("terminal node index out of range");
    }
    if (topo.input_node == topo.ground_node) {
        throw InvalidArgument("input and ground must be distinct nodes");
    }
    std::set<std::pair<std::size_t, std::size_t>> seen;
    for (std::size_t i = 0; i < topo.edges.size(); ++i) {
        const auto& e = topo.edges[i];
        if (e.id != i) throw InvalidArgument("edge ids must be 0..E-1 in order");
        if (e.a >= n || e.b >= n) throw InvalidArgument("edge endpoint out of range");
        if (e.a == e.b) throw InvalidArgument("self-loop edge " + std::to_string(i));
        const auto key = std::minmax(e.a, e.b);
        if (!seen.insert(key).second && !allow_multi_edges) {
            throw InvalidArgument("duplicate edge between " + std::to_string(key.first) + " and " +
                                  std::to_string(key.second));
        }
    }
    for (const auto& r : topo.readout_pairs) {
        if (r.p >= n || r.q >= n) throw InvalidArgument("readout node out of range");
        if (r.p == r.q) throw InvalidArgument("readout pair needs two distinct nodes");
    }
    if (require_connected) {
        const auto seen_nodes = reachable_from(topo, topo.input_node);
        if (!seen_nodes[topo.ground_node]) throw InvalidArgument("ground not reachable from input");
        for (const auto& r : topo.readout_pairs) {
            if (!seen_nodes[r.p] || !seen_nodes[r.q]) {
                throw InvalidArgument("readout node not reachable from input");
            }
        }
    }
}

namespace detail {

/// Random stub matching. Returns false when it paints itself into a corner.
inline bool match_stubs(std::vector<std::size_t> stubs, bool allow_multi, Rng& rng,
                        std::vector<Edge>& out) {
    out.clear();
    std::set<std::pair<std::size_t, std::size_t>> used;
    // Fisher-Yates with our own index draw so the result is library independent.
    for (std::size_t i = stubs.size(); i > 1; --i) {
        std::swap(stubs[i - 1], stubs[uniform_index(rng, i)]);
    }
    std::size_t i = 0;
    while (i < stubs.size()) {
        const std::size_t a = stubs[i];
        bool placed = false;
        for (int tries = 0; tries < 64 && !placed; ++tries) {
            const std::size_t j = i + 1 + uniform_index(rng, stubs.size() - i - 1);
            const std::size_t b = stubs[j];
            if (a == b) continue;
            const auto key = std::minmax(a, b);
            if (!allow_multi && used.count(key) != 0) continue;
            used.insert(key);
            std::swap(stubs[i + 1], stubs[j]);
            out.push_back(Edge{out.size(), a, b});
            placed = true;
        }
        if (!placed) return false;
        i += 2;
    }
    return true;
}

}  // namespace detail

/// Random graph where every node has `k_degree` incident devices (one node gets
/// k_degree + 1 when n_nodes * k_degree is odd), regenerated until connected.
///
/// Terminals: input and ground are distinct random nodes. Readout nodes are drawn
/// without replacement from the remaining nodes while enough remain, so all pairs
/// are distinct and, where possible, disjoint from each other and from the terminals.
[[nodiscard]] inline NetworkTopology generate_topology(std::size_t n_nodes, std::size_t k_degree,
                                                       std::size_t n_readout_pairs,
                                                       std::uint64_t rng_seed,
                                                       bool allow_multi_edges = false) {
    if (n_nodes < 3) throw InvalidArgument("generate_topology: n_nodes must be >= 3");
    if (k_degree < 1 || k_degree >= n_nodes) {
        throw InvalidArgument("generate_topology: need 1 <= k_degree < n_nodes");
    }
    if (n_readout_pairs < 1) throw InvalidArgument("generate_topology: need >= 1 readout pair");
    const std::size_t max_pairs = (n_nodes - 1) * (n_nodes - 2) / 2;
    if (n_readout_pairs > max_pairs) {
        throw InvalidArgument("generate_topology: more readout pairs than distinct node pairs");
    }

    constexpr int max_attempts = 1000;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        Rng rng(derive_seed(rng_seed, {static_cast<std::uint64_t>(attempt)}));

        std::vector<std::size_t> stubs;
        stubs.reserve(n_nodes * k_degree + 1);
        for (std::size_t n = 0; n < n_nodes; ++n) {
            for (std::size_t k = 0; k < k_degree; ++k) stubs.push_back(n);
        }
        if (stubs.size() % 2 == 1) stubs.push_back(uniform_index(rng, n_nodes));

        NetworkTopology topo;
        topo.node_count = n_nodes;
        if (!detail::match_stubs(std::move(stubs), allow_multi_edges, rng, topo.edges)) continue;
        if (!is_connected(topo)) continue;

        topo.input_node = uniform_index(rng, n_nodes);
        topo.ground_node = uniform_index(rng, n_nodes - 1);
        if (topo.ground_node >= topo.input_node) ++topo.ground_node;

        // Readout candidates exclude ground always and input when there is room.
        std::vector<std::size_t> candidates;
        for (std::size_t n = 0; n < n_nodes; ++n) {
            if (n != topo.ground_node && (n != topo.input_node || n_nodes < 4)) {
                candidates.push_back(n);
            }
        }
        if (candidates.size() * (candidates.size() - 1) / 2 < n_readout_pairs) {
            candidates.push_back(topo.input_node);
        }
        std::set<std::pair<std::size_t, std::size_t>> chosen;
        std::vector<std::size_t> pool;
        while (topo.readout_pairs.size() < n_readout_pairs) {
            if (pool.size() < 2) pool = candidates;
            const auto take = [&] {
                const auto idx = uniform_index(rng, pool.size());
                const auto node = pool[idx];
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(idx));
                return node;
            };
            const auto p = take();
            const auto q = take();
            if (chosen.insert(std::minmax(p, q)).second) {
                topo.readout_pairs.push_back(ReadoutPair{p, q});
            }
        }
        return topo;
    }
    throw GenerationError("generate_topology: no connected graph after 1000 attempts (n=" +
                          std::to_string(n_nodes) + ", k=" + std::to_string(k_degree) + ")");
}

// ---------------------------------------------------------------------------
// Text format:
//   nodes=<n> input=<i> ground=<g>
//   edge <id> <a> <b>
//   readout <p> <q>
// ---------------------------------------------------------------------------

inline void write_topology(std::ostream& out, const NetworkTopology& topo) {
    out << "nodes=" << topo.node_count << " input=" << topo.input_node
        << " ground=" << topo.ground_node << '\n';
    for (const auto& e : topo.edges) out << "edge " << e.id << ' ' << e.a << ' ' << e.b << '\n';
    for (const auto& r : topo.readout_pairs) out << "readout " << r.p << ' ' << r.q << '\n';
}

namespace detail {

inline std::size_t parse_index(std::string_view s) {
    const auto v = text::parse_int(s);
    if (v < 0) throw InvalidArgument("negative index in topology");
    return static_cast<std::size_t>(v);
}

inline std::size_t parse_header_field(std::string_view tok, std::string_view key) {
    if (tok.size() <= key.size() + 1 || tok.substr(0, key.size()) != key || tok[key.size()] != '=') {
        throw InvalidArgument("topology header: expected '" + std::string(key) + "=<n>'");
    }
    return parse_index(tok.substr(key.size() + 1));
}

}  // namespace detail

/// Reads one topology. Stops at EOF or at the first line it does not own
/// (anything other than `edge` / `readout` after the header), leaving that line in `pending`.
[[nodiscard]] inline NetworkTopology read_topology(std::istream& in, std::string* pending = nullptr) {
    NetworkTopology topo;
    std::string line;
    bool have_header = false;
    if (pending != nullptr && !pending->empty()) {
        line = *pending;
        pending->clear();
    } else if (!std::getline(in, line)) {
        throw InvalidArgument("topology: empty input");
    }
    do {
        const auto body = text::trim(line);
        if (body.empty() || body.front() == '#') continue;
        const auto toks = text::tokens(body);
        if (!have_header) {
            if (toks.size() != 3) throw InvalidArgument("topology header: expected 3 fields");
            topo.node_count = detail::parse_header_field(toks[0], "nodes");
            topo.input_node = detail::parse_header_field(toks[1], "input");
            topo.ground_node = detail::parse_header_field(toks[2], "ground");
            have_header = true;
        } else if (toks[0] == "edge") {
            if (toks.size() != 4) throw InvalidArgument("topology: bad edge line");
            topo.edges.push_back(Edge{detail::parse_index(toks[1]), detail::parse_index(toks[2]),
                                      detail::parse_index(toks[3])});
        } else if (toks[0] == "readout") {
            if (toks.size() != 3) throw InvalidArgument("topology: bad readout line");
            topo.readout_pairs.push_back(
                ReadoutPair{detail::parse_index(toks[1]), detail::parse_index(toks[2])});
        } else {
            if (pending == nullptr) throw InvalidArgument("topology: unexpected line '" + line + "'");
            *pending = line;
            break;
        }
    } while (std::getline(in, line));
    if (!have_header) throw InvalidArgument("topology: missing header");
    validate_topology(topo, false, true);
    return topo;
}

}  // namespace memrc
