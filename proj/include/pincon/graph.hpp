#pragma once

#include <algorithm>
#include <cstdint>
#include <cstring>
#include <numeric>
#include <queue>
#include <string>
#include <utility>
#include <vector>

#include "pincon/errors.hpp"
#include "pincon/matrix.hpp"

namespace pincon {

/// Weighted directed graph on vertices 0..n-1. weights(i, j) > 0 means
/// influence flows from j to i (an edge j -> i). The diagonal is not part
/// of the graph and is zeroed on construction.
struct WeightedDigraph {
    int n = 0;
    Matrix weights;                  // nonnegative off-diagonal, zero diagonal
    bool hadDiagonalEntries = false; // input carried diagonal data; it was dropped

    /// Builds from a dense weight matrix. Diagonal entries are zeroed and
    /// flagged; negative off-diagonal entries are rejected.
    static WeightedDigraph fromWeights(Matrix w) {
        if (!w.square() || w.rows() < 1)
            throw DomainError("WeightedDigraph: weight matrix must be square, n >= 1");
        WeightedDigraph g;
        g.n = w.rows();
        for (int i = 0; i < g.n; ++i) {
            if (w(i, i) != 0.0) {
                g.hadDiagonalEntries = true;
                w(i, i) = 0.0;
            }
            for (int j = 0; j < g.n; ++j) {
                if (i != j && w(i, j) < 0.0)
                    throw DomainError("WeightedDigraph: negative weight at (" +
                                      std::to_string(i + 1) + "," + std::to_string(j + 1) + ")");
            }
        }
        g.weights = std::move(w);
        return g;
    }

    struct Edge {
        int from = 0; // influencing vertex (0-based)
        int to = 0;   // influenced vertex (0-based)
        double weight = 1.0;
    };

    /// Builds from an edge list with "from -> to" influence semantics,
    /// i.e. weights(to, from) = weight. Self-loops and nonpositive
    /// weights are rejected.
    static WeightedDigraph fromEdges(int n, const std::vector<Edge>& edges) {
        if (n < 1) throw DomainError("WeightedDigraph: n must be >= 1");
        Matrix w(n, n);
        for (const Edge& e : edges) {
            if (e.from < 0 || e.from >= n || e.to < 0 || e.to >= n)
                throw DomainError("WeightedDigraph: edge endpoint out of range");
            if (e.from == e.to)
                throw DomainError("WeightedDigraph: self-loop at vertex " +
                                  std::to_string(e.from + 1));
            if (e.weight <= 0.0)
                throw DomainError("WeightedDigraph: edge weight must be positive");
            w(e.to, e.from) += e.weight;
        }
        WeightedDigraph g;
        g.n = n;
        g.weights = std::move(w);
        return g;
    }
};

enum class Connectivity { StronglyConnected, SpanningTree, NoRoot };

inline const char* to_string(Connectivity c) {
    switch (c) {
        case Connectivity::StronglyConnected: return "StronglyConnected";
        case Connectivity::SpanningTree: return "SpanningTree";
        case Connectivity::NoRoot: return "NoRoot";
    }
    return "?";
}

/// Strongly connected components in influence order: components are listed
/// in a topological order of the condensation (sources first), ties broken
/// by smallest original vertex index; vertices inside a component keep
/// their original relative order.
struct SccDecomposition {
    std::vector<std::vector<int>> components;
    std::vector<std::pair<int, int>> condensationEdges; // (fromComponent, toComponent)
    std::vector<int> sourceComponents;

    [[nodiscard]] Connectivity classification() const {
        if (components.size() == 1) return Connectivity::StronglyConnected;
        return sourceComponents.size() == 1 ? Connectivity::SpanningTree
                                            : Connectivity::NoRoot;
    }
};

/// Graph Laplacian with connectivity metadata.
///
/// `entries` keeps the vertex order it was built with; `permutation` is
/// the reordering (new index -> entry index) that puts `entries` into
/// lower block-triangular form with the root component first, and
/// `blockSizes` are the diagonal block sizes under that reordering.
struct Laplacian {
    Matrix entries;
    Connectivity classification = Connectivity::NoRoot;
    std::vector<int> permutation;
    std::vector<int> blockSizes;

    [[nodiscard]] int n() const { return entries.rows(); }

    [[nodiscard]] bool identityPermutation() const {
        for (std::size_t i = 0; i < permutation.size(); ++i)
            if (permutation[i] != static_cast<int>(i)) return false;
        return true;
    }

    /// Vertices of the root block, in entry indexing.
    [[nodiscard]] std::vector<int> rootVertices() const {
        const int p = blockSizes.empty() ? n() : blockSizes.front();
        return {permutation.begin(), permutation.begin() + p};
    }
};

inline SccDecomposition scc_decompose(const WeightedDigraph& g) {
    const int n = g.n;
    // Influence adjacency: j -> i when weights(i, j) > 0.
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (i != j && g.weights(i, j) > 0.0) adj[j].push_back(i);

    // Iterative Tarjan; vertices and neighbors visited in increasing order
    // so the emission order is deterministic.
    std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
    std::vector<char> onStack(n, 0);
    std::vector<std::vector<int>> components;
    int nextIndex = 0;

    struct Frame { int v; std::size_t edge; };
    std::vector<Frame> call;
    for (int start = 0; start < n; ++start) {
        if (index[start] != -1) continue;
        call.push_back({start, 0});
        index[start] = low[start] = nextIndex++;
        stack.push_back(start);
        onStack[start] = 1;
        while (!call.empty()) {
            Frame& f = call.back();
            if (f.edge < adj[f.v].size()) {
                const int w = adj[f.v][f.edge++];
                if (index[w] == -1) {
                    index[w] = low[w] = nextIndex++;
                    stack.push_back(w);
                    onStack[w] = 1;
                    call.push_back({w, 0});
                } else if (onStack[w]) {
                    low[f.v] = std::min(low[f.v], index[w]);
                }
            } else {
                if (low[f.v] == index[f.v]) {
                    std::vector<int> component;
                    int w;
                    do {
                        w = stack.back();
                        stack.pop_back();
                        onStack[w] = 0;
                        comp[w] = static_cast<int>(components.size());
                        component.push_back(w);
                    } while (w != f.v);
                    std::sort(component.begin(), component.end());
                    components.push_back(std::move(component));
                }
                const int v = f.v;
                call.pop_back();
                if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
            }
        }
    }

    // Condensation edges (deduplicated) and in-degrees.
    const int m = static_cast<int>(components.size());
    std::vector<std::pair<int, int>> cedges;
    for (int j = 0; j < n; ++j)
        for (int i : adj[j])
            if (comp[j] != comp[i]) cedges.emplace_back(comp[j], comp[i]);
    std::sort(cedges.begin(), cedges.end());
    cedges.erase(std::unique(cedges.begin(), cedges.end()), cedges.end());

    std::vector<std::vector<int>> cadj(m);
    std::vector<int> indeg(m, 0);
    for (auto [from, to] : cedges) {
        cadj[from].push_back(to);
        ++indeg[to];
    }

    // Deterministic topological order: Kahn's algorithm with a min-heap
    // keyed by the smallest original vertex of each component.
    auto cmp = [&](int a, int b) { return components[a].front() > components[b].front(); };
    std::priority_queue<int, std::vector<int>, decltype(cmp)> ready(cmp);
    for (int c = 0; c < m; ++c)
        if (indeg[c] == 0) ready.push(c);
    std::vector<int> order;
    while (!ready.empty()) {
        const int c = ready.top();
        ready.pop();
        order.push_back(c);
        for (int d : cadj[c])
            if (--indeg[d] == 0) ready.push(d);
    }

    std::vector<int> newId(m);
    for (int pos = 0; pos < m; ++pos) newId[order[pos]] = pos;

    SccDecomposition out;
    out.components.reserve(m);
    for (int c : order) out.components.push_back(std::move(components[c]));
    for (auto [from, to] : cedges) out.condensationEdges.emplace_back(newId[from], newId[to]);
    std::sort(out.condensationEdges.begin(), out.condensationEdges.end());
    std::vector<int> indeg2(m, 0);
    for (auto [from, to] : out.condensationEdges) ++indeg2[to];
    for (int c = 0; c < m; ++c)
        if (indeg2[c] == 0) out.sourceComponents.push_back(c);
    return out;
}

inline Laplacian build_laplacian(const WeightedDigraph& g) {
    const int n = g.n;
    Laplacian lap;
    lap.entries = Matrix(n, n);
    for (int i = 0; i < n; ++i) {
        double diag = 0.0;
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            const double a = g.weights(i, j);
            lap.entries(i, j) = -a;
            diag += a;
        }
        lap.entries(i, i) = diag;
    }
    const SccDecomposition scc = scc_decompose(g);
    lap.classification = scc.classification();
    lap.permutation.reserve(n);
    for (const auto& component : scc.components) {
        lap.blockSizes.push_back(static_cast<int>(component.size()));
        lap.permutation.insert(lap.permutation.end(), component.begin(), component.end());
    }
    return lap;
}

/// Applies the stored permutation, yielding a Laplacian whose entries are
/// in lower block-triangular order (root block first) and whose own
/// permutation is the identity.
inline Laplacian reorder_block_form(const Laplacian& lap) {
    if (lap.classification == Connectivity::NoRoot)
        throw NoRootError("reorder_block_form: graph has no root component");
    const int n = lap.n();
    Laplacian out;
    out.classification = lap.classification;
    out.blockSizes = lap.blockSizes;
    out.entries = Matrix(n, n);
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            out.entries(a, b) = lap.entries(lap.permutation[a], lap.permutation[b]);
    out.permutation.resize(n);
    std::iota(out.permutation.begin(), out.permutation.end(), 0);
    return out;
}

/// FNV-1a over n and the raw IEEE-754 bits of the weight matrix,
/// row-major. Stable across runs; used for provenance stamps.
inline std::uint64_t graph_hash(const WeightedDigraph& g) {
    std::uint64_t h = 1469598103934665603ULL;
    auto mix = [&h](std::uint64_t v) {
        for (int b = 0; b < 8; ++b) {
            h ^= (v >> (8 * b)) & 0xffULL;
            h *= 1099511628211ULL;
        }
    };
    mix(static_cast<std::uint64_t>(g.n));
    for (int i = 0; i < g.n; ++i)
        for (int j = 0; j < g.n; ++j) {
            double w = g.weights(i, j);
            if (w == 0.0) w = 0.0; // normalize -0
            std::uint64_t bits;
            std::memcpy(&bits, &w, sizeof bits);
            mix(bits);
        }
    return h;
}

} // namespace pincon
