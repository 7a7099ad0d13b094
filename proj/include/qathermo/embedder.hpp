#pragma once

// Chain-free ring embeddings: a simple cycle of exactly the requested odd
// length in a hardware connectivity graph, one qubit per spin.

#include <chrono>
#include <cstdint>
#include <istream>
#include <optional>
#include <string>
#include <vector>

namespace qathermo {

using NodeId = std::int64_t;

class HardwareGraph {
 public:
  HardwareGraph() = default;
  /// Builds from an edge list; duplicate edges (in either orientation) are
  /// merged. Throws Errc::domain on self-loops.
  explicit HardwareGraph(const std::vector<std::pair<NodeId, NodeId>>& edges);

  std::size_t node_count() const noexcept { return ids_.size(); }
  std::size_t edge_count() const noexcept { return edge_count_; }
  const std::vector<NodeId>& nodes() const noexcept { return ids_; }

  bool contains(NodeId id) const;
  bool adjacent(NodeId a, NodeId b) const;

  /// Dense index view used by the search: ids are sorted, neighbor lists
  /// hold indices into nodes() and are sorted.
  std::optional<std::size_t> index_of(NodeId id) const;
  const std::vector<std::uint32_t>& neighbors(std::size_t index) const { return adjacency_[index]; }

  /// True when the graph admits a proper 2-coloring (no odd cycle anywhere).
  bool is_bipartite() const;

 private:
  std::vector<NodeId> ids_;
  std::vector<std::vector<std::uint32_t>> adjacency_;
  std::size_t edge_count_ = 0;
};

/// Edge-list text: whitespace-separated integer pairs, one edge per line,
/// '#' starts a comment. Throws Errc::parse (with line number) on malformed
/// lines, Errc::domain on self-loops, and Errc::parse for a dangling endpoint
/// (a line with a single node id).
HardwareGraph parse_graph(std::istream& in, const std::string& source_name = "<stream>");
HardwareGraph load_graph(const std::string& path);

struct RingEmbedding {
  std::vector<NodeId> cycle;
};

struct EmbeddingSearchOptions {
  std::uint64_t seed = 0;
  /// Wall-clock limit. Unset means the search runs until the expansion budget.
  std::optional<std::chrono::duration<double>> timeout = std::chrono::duration<double>(10.0);
  /// Total node expansions across restarts; 0 means unbounded. With no
  /// timeout this makes the search fully deterministic.
  std::uint64_t max_expansions = 0;
  /// Expansions allowed per restart before picking a new start node; 0 picks
  /// a default proportional to the ring length.
  std::uint64_t expansions_per_restart = 0;
};

/// Randomized depth-first search for a simple cycle of `length` nodes.
/// Throws Errc::bipartite when the graph has no odd cycle at all, and
/// Errc::not_found when the budget runs out (which does not prove that no
/// such cycle exists).
RingEmbedding find_ring_embedding(const HardwareGraph& graph, int length, const EmbeddingSearchOptions& options = {});

enum class EmbeddingViolation { none, even_length, wrong_length, unknown_node, repeated_node, not_adjacent };

struct EmbeddingReport {
  bool ok = true;
  EmbeddingViolation violation = EmbeddingViolation::none;
  std::string message;

  explicit operator bool() const { return ok; }
};

/// Checks that `embedding` is a simple odd cycle of `length` nodes of `graph`,
/// reporting the first violation found.
EmbeddingReport verify_embedding(const HardwareGraph& graph, const RingEmbedding& embedding, int length);

}  // namespace qathermo
