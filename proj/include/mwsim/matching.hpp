#pragma once

#include <span>
#include <vector>

namespace mwsim {

struct WeightedEdge {
    int u = 0;
    int v = 0;
    double weight = 0.0;
};

/// Maximum-weight matching on a general undirected graph (Edmonds' blossom
/// algorithm with dual variables, O(V^3)). Returns mate[v] for every vertex,
/// -1 when unmatched. Edges with non-positive weight never improve the
/// objective and may be left unmatched. Deterministic for a given edge order.
std::vector<int> max_weight_matching(int vertex_count, std::span<const WeightedEdge> edges);

}  // namespace mwsim
