#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "kmac/common.hpp"
#include "kmac/rng.hpp"

namespace kmac {

enum class GraphKind { Knn, Mst };
enum class TieRule { ByIndex, SeededRandom };

// Simple symmetric geometric graph on the rows of a DataMatrix.
// Convention: (i,j) is an edge iff the raw construction produced i->j or
// j->i; adjacency lists are the symmetric closure, sorted, self-loop free.
struct GeoGraph {
    GraphKind kind = GraphKind::Knn;
    std::size_t k = 1;                   // Knn only
    TieRule tie_rule = TieRule::ByIndex; // Knn only
    std::uint64_t tie_seed = 0;
    std::size_t n = 0;
    std::vector<std::vector<std::uint32_t>> adjacency;
    std::vector<std::uint32_t> degrees;
    std::shared_ptr<const DataMatrix> points;  // the rows the graph was built on

    std::size_t min_degree() const;
    std::size_t max_degree() const;
    // Undirected edge list (i < j).
    std::vector<std::pair<std::uint32_t, std::uint32_t>> undirected_edges() const;
};

struct GraphDiagnostics {
    std::size_t min_degree = 0;            // empirical r_n
    std::size_t max_degree = 0;            // empirical t_n
    double mean_edge_length = 0.0;         // over undirected edges
    double common_neighbor_total = 0.0;    // equals the g2 statistic
};

struct GraphStats {
    double g1 = 0.0;  // mean reciprocal degree
    double g2 = 0.0;  // common-neighbor sum  n^-1 sum_{i,j} T(i,j)/(d_i d_j)
    double g3 = 0.0;  // edge sum             n^-1 sum_{(i,j) in E} 1/(d_i d_j)
};

// Directed k-NN edges under Euclidean distance, then symmetrized.  Exact:
// kd-tree for d <= 16, brute force above; both agree on distinct-distance
// inputs.  Ties at the k-th distance break by index or by a seeded hash.
GeoGraph build_knn(const DataMatrix& x, std::size_t k, TieRule tie_rule = TieRule::ByIndex,
                   std::uint64_t seed = 0);

// Euclidean MST via dense Prim (guarded to n <= 20000).
GeoGraph build_mst(const DataMatrix& x);

std::size_t common_neighbors(const GeoGraph& g, std::size_t i, std::size_t j);

GraphStats graph_stats(const GeoGraph& g);

GraphDiagnostics assumption_report(const GeoGraph& g);

// Locality probe: replace one vertex by a row resampled from the data,
// rebuild, count the symmetric difference of undirected edge sets.
// Returns the max count over `probes` trials.
std::size_t locality_probe(const GeoGraph& g, std::size_t probes, std::uint64_t seed);

// Spec grammar: "knn:k=5", "knn:k=1,tie=random,seed=7", "mst".
struct GraphSpec {
    GraphKind kind = GraphKind::Knn;
    std::size_t k = 1;
    TieRule tie_rule = TieRule::ByIndex;
    std::uint64_t seed = 0;

    std::string to_string() const;
};

GraphSpec parse_graph_spec(const std::string& s);
GeoGraph build_graph(const GraphSpec& spec, const DataMatrix& x);

// Edge list CSV "i,j,length".
std::string dump_edges_csv(const GeoGraph& g);

}  // namespace kmac
