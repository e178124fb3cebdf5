#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rcquad/exact.hpp"
#include "rcquad/lattice.hpp"
#include "rcquad/measure.hpp"

namespace rcquad {

enum class EventKind { H, V, Hc, Vc, OneArm, BridgeA, StripE, Custom };

std::string to_string(EventKind k);
EventKind event_kind_from_string(const std::string& s);

// Declarative event. `rect` is the target rectangle for H/V/Hc/Vc and the
// connection domain for Custom; the other kinds derive their geometry from
// (n, j, i).
struct CrossingEvent {
  EventKind kind = EventKind::H;
  Rect rect;
  int n = 0;
  int j = 0;
  int i = 0;
  Rect source;  // Custom only
  Rect target;  // Custom only

  bool increasing() const { return kind != EventKind::Hc && kind != EventKind::Vc; }
  // Smallest rectangle containing every vertex the event looks at.
  Rect extent() const;
  std::string label() const;
};

CrossingEvent horizontal_crossing(const Rect& r);
CrossingEvent vertical_crossing(const Rect& r);
CrossingEvent one_arm(int n);
CrossingEvent bridge_event_Aj(int n, int j);
CrossingEvent strip_event_Ei(int n, int i);
CrossingEvent custom_connection(const Rect& source, const Rect& target, const Rect& domain);

// Geometry of the bridging event: k = ceil(n/50), R_0 = [-17k,18k]x[0,n], S_j = [jk,(j+1)k]x{0}.
struct BridgeGeometry {
  int k = 1;
  Rect r_j, r_j4, s_j, s_j2, s_j4;
};
BridgeGeometry bridge_geometry(int n, int j);
// R_i^- and R_i^+ for n_i = 2^i n.
std::pair<Rect, Rect> strip_rects(int n, int i);

std::string rect_label(const Rect& r);  // "[a,b]x[c,d]"
nlohmann::json rect_to_json(const Rect& r);
// {a, b, c, d} or [a, b, c, d]; throws GeometryError.
Rect rect_from_json(const nlohmann::json& j);

nlohmann::json to_json(const CrossingEvent& ev);
CrossingEvent event_from_json(const nlohmann::json& j);

// One "source connected to target inside a domain" requirement, evaluated on a
// view graph: the region itself, or its dual where a dual edge is open iff the
// primal edge is closed.
struct Connection {
  std::shared_ptr<const Graph> view;
  std::shared_ptr<const std::vector<EdgeId>> view_to_host;  // null for the primal view
  bool dual = false;
  std::vector<VertexId> sources;
  std::vector<std::uint8_t> is_target;      // per view vertex
  std::vector<std::uint8_t> edge_allowed;   // per view edge
  // Optional distance-like levels (per view vertex, -1 outside the domain);
  // sources sit at level 0 and targets at max_level.
  std::vector<std::int32_t> level;
  std::int32_t max_level = 0;

  bool edge_open(const Configuration& host_cfg, EdgeId view_edge) const {
    const EdgeId h = view_to_host ? (*view_to_host)[view_edge] : view_edge;
    return host_cfg[h] != dual;
  }
};

// Breadth-first search helper with reusable marks.
class ConnectionSearch {
 public:
  bool connected(const Connection& c, const Configuration& cfg, EdgeId skip = kNoEdge);
  // Highest level reached from the sources (-1 if no source).
  std::int32_t reach(const Connection& c, const Configuration& cfg, EdgeId skip = kNoEdge);
  static constexpr EdgeId kNoEdge = 0xffffffffu;

 private:
  void prepare(std::size_t n);
  std::vector<std::uint32_t> mark_;
  std::vector<VertexId> queue_;
  std::uint32_t stamp_ = 0;
};

// Event compiled against one host region. Holds scratch space, so each thread
// should own its copy.
class CompiledEvent {
 public:
  CompiledEvent() = default;
  CompiledEvent(const CrossingEvent& ev, const Region& host);

  bool operator()(const Configuration& cfg) const;
  const CrossingEvent& event() const { return event_; }
  const std::vector<Connection>& connections() const { return connections_; }
  bool negated() const { return negated_; }

  // The event rewritten as a single increasing connection (complements go to the
  // dual view), when such a form exists.
  std::optional<Connection> positive_connection() const;

  EventPredicate predicate() const;

 private:
  CrossingEvent event_;
  std::vector<Connection> connections_;
  std::optional<Connection> positive_;
  bool negated_ = false;
  mutable ConnectionSearch search_;
};

bool is_crossed(const Configuration& cfg, const Region& host, const CrossingEvent& ev);

struct CrossingPath {
  std::vector<VertexId> vertices;
  std::vector<EdgeId> edges;
};

// Left-most open path inside `rect` from the bottom vertices with x in
// [source_lo, source_hi] to the top side of `rect`. Square lattice only.
std::optional<CrossingPath> leftmost_vertical_crossing(const Configuration& cfg, const Region& region, const Rect& rect,
                                                       int source_lo, int source_hi);

// Shortest open path of a primal connection from a source to a target;
// nullopt for dual views or when the sources are not joined to a target.
std::optional<CrossingPath> connection_witness(const Connection& c, const Configuration& cfg);

// Checks that consecutive vertices are joined by the listed open edges.
bool is_valid_path(const CrossingPath& path, const Region& region, const Configuration& cfg);

}  // namespace rcquad
