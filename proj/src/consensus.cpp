#include "vsnash/consensus.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace vsnash {

namespace {

std::vector<Edge> normalize_edges(Index n, const std::vector<Edge>& edges) {
  std::set<Edge> seen;
  for (auto [u, v] : edges) {
    require(u >= 0 && u < n && v >= 0 && v < n, "edge endpoint out of range");
    require(u != v, "self-loops are not allowed in the edge list");
    seen.insert({std::min(u, v), std::max(u, v)});
  }
  return {seen.begin(), seen.end()};
}

}  // namespace

bool is_connected(Index n, const std::vector<Edge>& edges) {
  if (n <= 0) return false;
  std::vector<std::vector<Index>> adj(static_cast<std::size_t>(n));
  for (auto [u, v] : edges) {
    adj[static_cast<std::size_t>(u)].push_back(v);
    adj[static_cast<std::size_t>(v)].push_back(u);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::queue<Index> frontier;
  frontier.push(0);
  seen[0] = true;
  Index count = 1;
  while (!frontier.empty()) {
    const Index u = frontier.front();
    frontier.pop();
    for (Index v : adj[static_cast<std::size_t>(u)]) {
      if (!seen[static_cast<std::size_t>(v)]) {
        seen[static_cast<std::size_t>(v)] = true;
        ++count;
        frontier.push(v);
      }
    }
  }
  return count == n;
}

CommGraph::CommGraph(Index nodes, std::vector<Edge> edges, Matrix weights)
    : n_(nodes), edges_(normalize_edges(nodes, edges)), A_(std::move(weights)) {
  require(n_ >= 1, "graph needs at least one node");
  require(A_.rows() == n_ && A_.cols() == n_, "weight matrix must be N x N");
  if (!is_connected(n_, edges_))
    throw Error(ErrorCategory::Disconnected, "communication graph is not connected");
  constexpr double tol = 1e-12;
  if (!A_.allFinite() || (A_.array() < 0.0).any())
    throw Error(ErrorCategory::InvalidParameter, "weights must be finite and nonnegative");
  if ((A_ - A_.transpose()).cwiseAbs().maxCoeff() > tol)
    throw Error(ErrorCategory::InvalidParameter, "weight matrix must be symmetric");
  if ((A_.rowwise().sum().array() - 1.0).abs().maxCoeff() > tol)
    throw Error(ErrorCategory::InvalidParameter, "weight matrix rows must sum to one");
  Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> adj =
      Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>::Constant(n_, n_, false);
  for (auto [u, v] : edges_) adj(u, v) = adj(v, u) = true;
  for (Index i = 0; i < n_; ++i)
    for (Index j = 0; j < n_; ++j)
      if (i != j && (A_(i, j) > 0.0) != adj(i, j))
        throw Error(ErrorCategory::InvalidParameter,
                    "a_ij must be positive exactly on the graph's edges");
}

std::vector<Index> CommGraph::neighbors(Index i) const {
  std::vector<Index> out;
  for (auto [u, v] : edges_) {
    if (u == i) out.push_back(v);
    if (v == i) out.push_back(u);
  }
  std::sort(out.begin(), out.end());
  return out;
}

CommGraph build_metropolis_weights(const std::vector<Edge>& edges, Index nodes) {
  const std::vector<Edge> es = normalize_edges(nodes, edges);
  if (!is_connected(nodes, es))
    throw Error(ErrorCategory::Disconnected, "communication graph is not connected");
  std::vector<Index> deg(static_cast<std::size_t>(nodes), 0);
  for (auto [u, v] : es) {
    ++deg[static_cast<std::size_t>(u)];
    ++deg[static_cast<std::size_t>(v)];
  }
  Matrix A = Matrix::Zero(nodes, nodes);
  for (auto [u, v] : es) {
    const double w =
        1.0 / (1.0 + static_cast<double>(std::max(deg[static_cast<std::size_t>(u)],
                                                  deg[static_cast<std::size_t>(v)])));
    A(u, v) = A(v, u) = w;
  }
  for (Index i = 0; i < nodes; ++i) A(i, i) = 1.0 - (A.row(i).sum() - A(i, i));
  return CommGraph(nodes, es, std::move(A));
}

CommGraph uniform_complete_graph(Index nodes) {
  return CommGraph(nodes, complete_edges(nodes),
                   Matrix::Constant(nodes, nodes, 1.0 / static_cast<double>(nodes)));
}

std::vector<Edge> complete_edges(Index n) {
  std::vector<Edge> es;
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) es.emplace_back(i, j);
  return es;
}

std::vector<Edge> ring_edges(Index n) {
  require(n >= 3, "ring needs at least 3 nodes");
  std::vector<Edge> es;
  for (Index i = 0; i < n; ++i) es.emplace_back(i, (i + 1) % n);
  return es;
}

std::vector<Edge> path_edges(Index n) {
  require(n >= 1, "path needs at least 1 node");
  std::vector<Edge> es;
  for (Index i = 0; i + 1 < n; ++i) es.emplace_back(i, i + 1);
  return es;
}

std::vector<Edge> grid_edges(Index rows, Index cols) {
  require(rows >= 1 && cols >= 1, "grid needs positive dimensions");
  std::vector<Edge> es;
  for (Index r = 0; r < rows; ++r)
    for (Index c = 0; c < cols; ++c) {
      const Index id = r * cols + c;
      if (c + 1 < cols) es.emplace_back(id, id + 1);
      if (r + 1 < rows) es.emplace_back(id, id + cols);
    }
  return es;
}

std::vector<Edge> erdos_renyi_edges(Index n, double p, std::uint64_t seed, int max_tries) {
  if (!(p > 0.0 && p <= 1.0)) throw Error(ErrorCategory::InvalidParameter, "p must lie in (0, 1]");
  std::mt19937_64 eng(seed);
  std::bernoulli_distribution coin(p);
  for (int t = 0; t < max_tries; ++t) {
    std::vector<Edge> es;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (coin(eng)) es.emplace_back(i, j);
    if (is_connected(n, es)) return es;
  }
  throw Error(ErrorCategory::Disconnected, "could not draw a connected Erdos-Renyi graph");
}

MixingParams mixing_params(const Matrix& A) {
  require(A.rows() == A.cols() && A.rows() > 0, "weight matrix must be square");
  const Index n = A.rows();
  const Matrix centered = A - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const Matrix sym = 0.5 * (centered + centered.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym, Eigen::EigenvaluesOnly);
  double beta = es.eigenvalues().cwiseAbs().maxCoeff();
  if (beta < 1e-13) beta = 0.0;
  if (!(beta < 1.0 - 1e-12)) {
    std::ostringstream os;
    os << "weight matrix does not mix geometrically (beta = " << beta << ")";
    throw Error(ErrorCategory::NoGeometricMixing, os.str());
  }
  return {1.0, beta};
}

MixingParams mixing_params(const CommGraph& g) { return mixing_params(g.weights()); }

Matrix consensus_apply(const CommGraph& g, const Eigen::Ref<const Matrix>& values,
                       std::uint64_t tau, SampleCounter* counter) {
  require(values.rows() == g.nodes(), "one row of values per node required");
  Matrix v = values;
  for (std::uint64_t r = 0; r < tau; ++r) v = g.weights() * v;
  if (counter) counter->comm_rounds += tau;
  return v;
}

Matrix transition_matrix(const CommGraph& g, std::uint64_t k, std::uint64_t s,
                         const std::function<std::uint64_t(std::uint64_t)>& tau) {
  require(s <= k, "transition matrix needs s <= k");
  const Index n = g.nodes();
  Matrix phi = Matrix::Identity(n, n);
  // Phi(k, s) = A(k) ... A(s): build from the right.
  for (std::uint64_t p = s; p <= k; ++p) {
    Matrix step = Matrix::Identity(n, n);
    for (std::uint64_t r = 0; r < tau(p); ++r) step = g.weights() * step;
    phi = step * phi;
  }
  return phi;
}

}  // namespace vsnash
