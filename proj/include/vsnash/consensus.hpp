#pragma once

#include "vsnash/counters.hpp"
#include "vsnash/types.hpp"

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace vsnash {

using Edge = std::pair<Index, Index>;

/// Undirected connected graph with a symmetric doubly-stochastic weight matrix.
class CommGraph {
 public:
  /// Validates symmetry, unit row sums, nonnegativity, the sparsity pattern
  /// against `edges` and connectivity.
  CommGraph(Index nodes, std::vector<Edge> edges, Matrix weights);

  Index nodes() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Matrix& weights() const { return A_; }
  std::vector<Index> neighbors(Index i) const;

 private:
  Index n_;
  std::vector<Edge> edges_;
  Matrix A_;
};

/// Whether the undirected graph is connected (breadth-first traversal).
bool is_connected(Index nodes, const std::vector<Edge>& edges);

/// a_ij = 1 / (1 + max(deg_i, deg_j)) on edges, a_ii = 1 - sum_{j != i} a_ij.
CommGraph build_metropolis_weights(const std::vector<Edge>& edges, Index nodes);

/// Complete graph with A = 11^T / N.
CommGraph uniform_complete_graph(Index nodes);

std::vector<Edge> complete_edges(Index nodes);
std::vector<Edge> ring_edges(Index nodes);
std::vector<Edge> path_edges(Index nodes);
std::vector<Edge> grid_edges(Index rows, Index cols);
/// G(N, p), redrawn until connected (at most `max_tries` draws).
std::vector<Edge> erdos_renyi_edges(Index nodes, double p, std::uint64_t seed, int max_tries = 1000);

/// Certificate |[A^k]_ij - 1/N| <= theta beta^k.
struct MixingParams {
  double theta = 1.0;
  double beta = 0.0;
};

/// beta = ||A - 11^T/N||_2, the second-largest eigenvalue modulus of a symmetric
/// doubly-stochastic A, with theta = 1. Values below 1e-13 are reported as 0.
/// Throws NoGeometricMixing when beta >= 1.
MixingParams mixing_params(const CommGraph& g);
MixingParams mixing_params(const Matrix& weights);

/// Applies tau synchronous averaging rounds to the node values (one row per
/// node). Adds tau to counter.comm_rounds.
Matrix consensus_apply(const CommGraph& g, const Eigen::Ref<const Matrix>& values,
                       std::uint64_t tau, SampleCounter* counter = nullptr);

/// Phi(k, s) = A^{tau_k} A^{tau_{k-1}} ... A^{tau_s}.
Matrix transition_matrix(const CommGraph& g, std::uint64_t k, std::uint64_t s,
                         const std::function<std::uint64_t(std::uint64_t)>& tau);

}  // namespace vsnash
