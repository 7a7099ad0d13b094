#include "qathermo/embedder.hpp"

#include <algorithm>
#include <charconv>
#include <deque>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "qathermo/error.hpp"
#include "qathermo/sampler.hpp"

namespace qathermo {

HardwareGraph::HardwareGraph(const std::vector<std::pair<NodeId, NodeId>>& edges) {
  for (const auto& [a, b] : edges) {
    if (a == b) fail(Errc::domain, "self-loop on node " + std::to_string(a));
    ids_.push_back(a);
    ids_.push_back(b);
  }
  std::sort(ids_.begin(), ids_.end());
  ids_.erase(std::unique(ids_.begin(), ids_.end()), ids_.end());

  adjacency_.resize(ids_.size());
  for (const auto& [a, b] : edges) {
    const auto ia = static_cast<std::uint32_t>(*index_of(a));
    const auto ib = static_cast<std::uint32_t>(*index_of(b));
    adjacency_[ia].push_back(ib);
    adjacency_[ib].push_back(ia);
  }
  for (auto& nbrs : adjacency_) {
    std::sort(nbrs.begin(), nbrs.end());
    nbrs.erase(std::unique(nbrs.begin(), nbrs.end()), nbrs.end());
    edge_count_ += nbrs.size();
  }
  edge_count_ /= 2;
}

std::optional<std::size_t> HardwareGraph::index_of(NodeId id) const {
  const auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) return std::nullopt;
  return static_cast<std::size_t>(it - ids_.begin());
}

bool HardwareGraph::contains(NodeId id) const { return index_of(id).has_value(); }

bool HardwareGraph::adjacent(NodeId a, NodeId b) const {
  const auto ia = index_of(a);
  const auto ib = index_of(b);
  if (!ia || !ib) return false;
  const auto& nbrs = adjacency_[*ia];
  return std::binary_search(nbrs.begin(), nbrs.end(), static_cast<std::uint32_t>(*ib));
}

bool HardwareGraph::is_bipartite() const {
  std::vector<int> color(ids_.size(), -1);
  std::deque<std::size_t> queue;
  for (std::size_t root = 0; root < ids_.size(); ++root) {
    if (color[root] >= 0) continue;
    color[root] = 0;
    queue.push_back(root);
    while (!queue.empty()) {
      const std::size_t v = queue.front();
      queue.pop_front();
      for (std::uint32_t u : adjacency_[v]) {
        if (color[u] < 0) {
          color[u] = 1 - color[v];
          queue.push_back(u);
        } else if (color[u] == color[v]) {
          return false;
        }
      }
    }
  }
  return true;
}

HardwareGraph parse_graph(std::istream& in, const std::string& source_name) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.resize(hash);
    std::istringstream tokens(raw);
    std::vector<NodeId> ids;
    std::string tok;
    while (tokens >> tok) {
      NodeId v = 0;
      const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size())
        fail(Errc::parse, source_name + ":" + std::to_string(line_no) + ": '" + tok + "' is not an integer node id");
      ids.push_back(v);
    }
    if (ids.empty()) continue;
    if (ids.size() == 1)
      fail(Errc::parse, source_name + ":" + std::to_string(line_no) + ": dangling node " + std::to_string(ids[0]) +
                            " (edge needs two endpoints)");
    if (ids.size() > 2) fail(Errc::parse, source_name + ":" + std::to_string(line_no) + ": expected exactly two node ids");
    if (ids[0] == ids[1])
      fail(Errc::domain, source_name + ":" + std::to_string(line_no) + ": self-loop on node " + std::to_string(ids[0]));
    edges.emplace_back(ids[0], ids[1]);
  }
  return HardwareGraph(edges);
}

HardwareGraph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io, "cannot open graph " + path);
  return parse_graph(in, path);
}

namespace {

using Clock = std::chrono::steady_clock;

std::vector<int> bfs_distances(const HardwareGraph& g, std::size_t source) {
  std::vector<int> dist(g.node_count(), -1);
  std::deque<std::size_t> queue{source};
  dist[source] = 0;
  while (!queue.empty()) {
    const std::size_t v = queue.front();
    queue.pop_front();
    for (std::uint32_t u : g.neighbors(v)) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

bool adjacent_index(const HardwareGraph& g, std::size_t a, std::size_t b) {
  const auto& nbrs = g.neighbors(a);
  return std::binary_search(nbrs.begin(), nbrs.end(), static_cast<std::uint32_t>(b));
}

enum class Outcome { found, exhausted, timed_out };

/// One restart: depth-first extension from `start`, visiting neighbors with
/// the fewest unvisited neighbors first (random tie-break). A branch is cut
/// when the next node cannot be extended or lies too far from `start` to
/// close the ring in the remaining steps.
class CycleSearch {
 public:
  CycleSearch(const HardwareGraph& g, int length, Rng& rng) : g_(g), length_(length), rng_(rng) {}

  Outcome run(std::size_t start, std::uint64_t budget, std::uint64_t& expansions,
              const std::optional<Clock::time_point>& deadline) {
    start_ = start;
    dist_ = bfs_distances(g_, start);
    visited_.assign(g_.node_count(), false);
    path_.assign(1, start);
    visited_[start] = true;
    frames_.clear();
    frames_.push_back({candidates(start), 0});

    std::uint64_t local = 0;
    while (!frames_.empty()) {
      Frame& top = frames_.back();
      if (top.next == top.options.size()) {
        frames_.pop_back();
        visited_[path_.back()] = false;
        path_.pop_back();
        continue;
      }
      const std::uint32_t v = top.options[top.next++];
      if (visited_[v]) continue;
      const int placed = static_cast<int>(path_.size()) + 1;
      if (dist_[v] < 0 || dist_[v] > length_ - placed + 1) continue;

      ++expansions;
      if (++local > budget) return Outcome::exhausted;
      if (deadline && (expansions & 0xfff) == 0 && Clock::now() > *deadline) return Outcome::timed_out;

      path_.push_back(v);
      visited_[v] = true;
      if (placed == length_) return Outcome::found;
      frames_.push_back({candidates(v), 0});
    }
    return Outcome::exhausted;
  }

  const std::vector<std::size_t>& path() const { return path_; }

 private:
  struct Frame {
    std::vector<std::uint32_t> options;
    std::size_t next;
  };

  int free_degree(std::uint32_t v) const {
    int d = 0;
    for (std::uint32_t u : g_.neighbors(v)) d += !visited_[u];
    return d;
  }

  std::vector<std::uint32_t> candidates(std::size_t from) {
    const bool closing = static_cast<int>(path_.size()) + 1 == length_;
    struct Keyed {
      int degree;
      std::uint64_t tie;
      std::uint32_t node;
    };
    std::vector<Keyed> keyed;
    for (std::uint32_t u : g_.neighbors(from)) {
      if (visited_[u]) continue;
      if (closing) {
        if (adjacent_index(g_, u, start_)) keyed.push_back({0, rng_.next(), u});
        continue;
      }
      const int d = free_degree(u);
      // u itself will be visited; it needs a way onward.
      if (d == 0) continue;
      keyed.push_back({d, rng_.next(), u});
    }
    std::sort(keyed.begin(), keyed.end(), [](const Keyed& a, const Keyed& b) {
      return a.degree != b.degree ? a.degree < b.degree : a.tie < b.tie;
    });
    std::vector<std::uint32_t> out;
    out.reserve(keyed.size());
    for (const auto& k : keyed) out.push_back(k.node);
    return out;
  }

  const HardwareGraph& g_;
  int length_;
  Rng& rng_;
  std::size_t start_ = 0;
  std::vector<int> dist_;
  std::vector<bool> visited_;
  std::vector<std::size_t> path_;
  std::vector<Frame> frames_;
};

}  // namespace

RingEmbedding find_ring_embedding(const HardwareGraph& graph, int length, const EmbeddingSearchOptions& options) {
  if (length % 2 == 0) fail(Errc::parity, "ring length must be odd, got " + std::to_string(length));
  if (length < 3 || static_cast<std::size_t>(length) > graph.node_count())
    fail(Errc::range, "ring length " + std::to_string(length) + " outside [3, " + std::to_string(graph.node_count()) + "]");
  if (graph.is_bipartite())
    fail(Errc::bipartite, "graph is bipartite, so it contains no odd cycle of any length");

  std::vector<std::size_t> starts;
  for (std::size_t i = 0; i < graph.node_count(); ++i)
    if (graph.neighbors(i).size() >= 2) starts.push_back(i);

  const std::uint64_t per_restart = options.expansions_per_restart
                                        ? options.expansions_per_restart
                                        : std::max<std::uint64_t>(20000, 200ull * static_cast<std::uint64_t>(length));
  std::optional<Clock::time_point> deadline;
  if (options.timeout)
    deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(*options.timeout);

  Rng rng(options.seed);
  CycleSearch search(graph, length, rng);
  std::uint64_t expansions = 0;
  for (;;) {
    const std::size_t start = starts[rng.below(starts.size())];
    std::uint64_t budget = per_restart;
    if (options.max_expansions) {
      if (expansions >= options.max_expansions) break;
      budget = std::min(budget, options.max_expansions - expansions);
    }
    const Outcome outcome = search.run(start, budget, expansions, deadline);
    if (outcome == Outcome::found) {
      RingEmbedding out;
      for (std::size_t i : search.path()) out.cycle.push_back(graph.nodes()[i]);
      return out;
    }
    if (outcome == Outcome::timed_out) break;
    if (deadline && Clock::now() > *deadline) break;
  }
  fail(Errc::not_found, "no cycle of length " + std::to_string(length) + " found after " + std::to_string(expansions) +
                            " expansions (this does not prove that none exists)");
}

EmbeddingReport verify_embedding(const HardwareGraph& graph, const RingEmbedding& embedding, int length) {
  const auto& c = embedding.cycle;
  const auto bad = [](EmbeddingViolation v, std::string msg) { return EmbeddingReport{false, v, std::move(msg)}; };

  if (length % 2 == 0 || c.size() % 2 == 0)
    return bad(EmbeddingViolation::even_length, "ring length must be odd (requested " + std::to_string(length) +
                                                    ", cycle has " + std::to_string(c.size()) + " nodes)");
  if (c.size() != static_cast<std::size_t>(length) || c.size() < 3)
    return bad(EmbeddingViolation::wrong_length,
               "cycle has " + std::to_string(c.size()) + " nodes, expected " + std::to_string(length));
  std::unordered_set<NodeId> seen;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (!graph.contains(c[i]))
      return bad(EmbeddingViolation::unknown_node, "node " + std::to_string(c[i]) + " is not in the graph");
    if (!seen.insert(c[i]).second)
      return bad(EmbeddingViolation::repeated_node,
                 "node " + std::to_string(c[i]) + " appears more than once (position " + std::to_string(i) + ")");
  }
  for (std::size_t i = 0; i < c.size(); ++i) {
    const NodeId a = c[i];
    const NodeId b = c[(i + 1) % c.size()];
    if (!graph.adjacent(a, b))
      return bad(EmbeddingViolation::not_adjacent,
                 "nodes " + std::to_string(a) + " and " + std::to_string(b) + " are not adjacent");
  }
  return {};
}

}  // namespace qathermo
