#include "ndac/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>
#include <unordered_map>

namespace ndac {

std::size_t Contour::vertex_count() const noexcept {
  std::size_t n = 0;
  for (const auto& l : loops) n += l.points.size();
  for (const auto& c : chains) n += c.points.size();
  return n;
}

namespace {

inline double cross(double ax, double ay, double bx, double by) { return ax * by - ay * bx; }

struct Segment {
  std::int64_t from;
  std::int64_t to;
};

// Nearest image of p to q on a torus; identity otherwise.
Point near_image(const Grid2D& g, const Point& q, const Point& p) {
  if (g.bc != Boundary::periodic) return p;
  double ddx, ddy;
  g.displacement(q.x, q.y, p.x, p.y, ddx, ddy);
  return {q.x + ddx, q.y + ddy};
}

// Centre of the bounding box; periodic images are taken relative to it.
Point anchor(const Polyline& line) {
  double x0 = line.points.front().x, x1 = x0, y0 = line.points.front().y, y1 = y0;
  for (const auto& p : line.points) {
    x0 = std::min(x0, p.x);
    x1 = std::max(x1, p.x);
    y0 = std::min(y0, p.y);
    y1 = std::max(y1, p.y);
  }
  return {0.5 * (x0 + x1), 0.5 * (y0 + y1)};
}

struct SegmentDistance {
  double dist2;
  double t;  // position along the segment in [0, 1]
  double side;  // cross product sign: > 0 when the point is left of the segment
};

inline SegmentDistance point_segment(const Point& p, const Point& a, const Point& b) {
  const double ex = b.x - a.x;
  const double ey = b.y - a.y;
  const double px = p.x - a.x;
  const double py = p.y - a.y;
  const double len2 = ex * ex + ey * ey;
  double t = len2 > 0.0 ? (px * ex + py * ey) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = px - t * ex;
  const double qy = py - t * ey;
  return {qx * qx + qy * qy, t, cross(ex, ey, px, py)};
}

// Winding number of a closed loop around p (Sunday's crossing rule).
int winding(const std::vector<Point>& loop, const Point& p) {
  int w = 0;
  const std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& a = loop[k];
    const Point& b = loop[(k + 1) % n];
    if (a.y <= p.y) {
      if (b.y > p.y && cross(b.x - a.x, b.y - a.y, p.x - a.x, p.y - a.y) > 0.0) ++w;
    } else if (b.y <= p.y && cross(b.x - a.x, b.y - a.y, p.x - a.x, p.y - a.y) < 0.0) {
      --w;
    }
  }
  return w;
}

template <typename Fn>
void for_each_segment(const Polyline& line, Fn&& fn) {
  const std::size_t n = line.points.size();
  if (n < 2) return;
  const std::size_t count = line.closed ? n : n - 1;
  for (std::size_t k = 0; k < count; ++k) fn(line.points[k], line.points[(k + 1) % n]);
}

}  // namespace

Contour extract_contour(const SimState& state, double level) {
  const Grid2D& g = state.grid;
  Contour out;
  out.level = level;
  const auto [mn, mx] = std::minmax_element(state.u.begin(), state.u.end());
  if (!(level > *mn && level < *mx)) return out;

  const bool periodic = g.bc == Boundary::periodic;
  const int nx = g.nx;
  const int ny = g.ny;
  const int ci_end = periodic ? nx : nx - 1;
  const int cj_end = periodic ? ny : ny - 1;

  std::unordered_map<std::int64_t, Point> crossing;
  std::vector<Segment> segments;

  auto node_value = [&](int i, int j) { return state.u[g.index(i % nx, j % ny)]; };
  auto node_point = [&](int i, int j) { return Point{g.x(i), g.y(j)}; };
  auto hkey = [&](int i, int j) { return 2 * (static_cast<std::int64_t>(j % ny) * nx + i % nx); };
  auto vkey = [&](int i, int j) { return hkey(i, j) + 1; };

  for (int j = 0; j < cj_end; ++j) {
    for (int i = 0; i < ci_end; ++i) {
      const int ci[4] = {i, i + 1, i + 1, i};
      const int cj[4] = {j, j, j + 1, j + 1};
      double v[4];
      bool low[4];
      int nlow = 0;
      for (int k = 0; k < 4; ++k) {
        v[k] = node_value(ci[k], cj[k]);
        low[k] = v[k] < level;
        nlow += low[k];
      }
      if (nlow == 0 || nlow == 4) continue;

      // Edge e joins corners ea[e] and eb[e].
      static constexpr int ea[4] = {0, 1, 3, 0};
      static constexpr int eb[4] = {1, 2, 2, 3};
      const std::int64_t key[4] = {hkey(i, j), vkey(i + 1, j), hkey(i, j + 1), vkey(i, j)};
      Point pt[4];
      for (int e = 0; e < 4; ++e) {
        const int a = ea[e];
        const int b = eb[e];
        if (low[a] == low[b]) continue;
        const double t = (level - v[a]) / (v[b] - v[a]);
        const Point pa = node_point(ci[a], cj[a]);
        const Point pb = node_point(ci[b], cj[b]);
        pt[e] = {pa.x + t * (pb.x - pa.x), pa.y + t * (pb.y - pa.y)};
        crossing.emplace(key[e], pt[e]);
      }

      auto add = [&](int e0, int e1) {
        // Orient so the low corner of e0 lies to the left.
        const Point& low_corner =
            low[ea[e0]] ? node_point(ci[ea[e0]], cj[ea[e0]]) : node_point(ci[eb[e0]], cj[eb[e0]]);
        const double s = cross(pt[e1].x - pt[e0].x, pt[e1].y - pt[e0].y, low_corner.x - pt[e0].x,
                               low_corner.y - pt[e0].y);
        if (s >= 0.0)
          segments.push_back({key[e0], key[e1]});
        else
          segments.push_back({key[e1], key[e0]});
      };
      // Corner k touches edges corner_edges[k].
      static constexpr int corner_edges[4][2] = {{0, 3}, {0, 1}, {1, 2}, {2, 3}};

      if (nlow == 2 && low[0] == low[2]) {
        const double avg = 0.25 * (v[0] + v[1] + v[2] + v[3]);
        const bool cut_low = !(avg < level);
        for (int k = 0; k < 4; ++k)
          if (low[k] == cut_low) add(corner_edges[k][0], corner_edges[k][1]);
      } else {
        int crossed[2];
        int c = 0;
        for (int e = 0; e < 4; ++e)
          if (low[ea[e]] != low[eb[e]]) crossed[c++] = e;
        add(crossed[0], crossed[1]);
      }
    }
  }

  std::unordered_map<std::int64_t, std::size_t> outgoing;
  std::unordered_map<std::int64_t, std::size_t> incoming;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    outgoing[segments[s].from] = s;
    incoming[segments[s].to] = s;
  }
  std::vector<char> used(segments.size(), 0);
  const double lx = g.x1 - g.x0;
  const double ly = g.y1 - g.y0;

  auto trace = [&](std::size_t start, bool closed) {
    Polyline line;
    line.closed = closed;
    auto push = [&](Point p) {
      if (periodic && !line.points.empty()) {
        const Point& q = line.points.back();
        p.x += lx * std::round((q.x - p.x) / lx);
        p.y += ly * std::round((q.y - p.y) / ly);
      }
      line.points.push_back(p);
    };
    push(crossing.at(segments[start].from));
    std::size_t s = start;
    while (true) {
      used[s] = 1;
      const std::int64_t end = segments[s].to;
      auto it = outgoing.find(end);
      if (it == outgoing.end()) {
        push(crossing.at(end));
        break;
      }
      if (it->second == start) break;
      push(crossing.at(end));
      s = it->second;
    }
    return line;
  };

  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s] && !incoming.count(segments[s].from)) out.chains.push_back(trace(s, false));
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) out.loops.push_back(trace(s, true));
  }
  return out;
}

Contour contour_from_polyline(const std::vector<Point>& points, double level) {
  Contour c;
  c.level = level;
  c.loops.push_back({points, true});
  return c;
}

double signed_area(const std::vector<Point>& loop) {
  double a = 0.0;
  const std::size_t n = loop.size();
  for (std::size_t k = 0; k < n; ++k) {
    const Point& p = loop[k];
    const Point& q = loop[(k + 1) % n];
    a += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a;
}

double perimeter(const Polyline& line) {
  double len = 0.0;
  for_each_segment(line, [&](const Point& a, const Point& b) { len += std::hypot(b.x - a.x, b.y - a.y); });
  return len;
}

double distance_to_contour(const Contour& contour, const Grid2D& grid, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  auto visit = [&](const Polyline& line) {
    if (line.points.empty()) return;
    const Point p = near_image(grid, anchor(line), {x, y});
    for_each_segment(line, [&](const Point& a, const Point& b) {
      best = std::min(best, point_segment(p, a, b).dist2);
    });
  };
  for (const auto& l : contour.loops) visit(l);
  for (const auto& c : contour.chains) visit(c);
  return std::sqrt(best);
}

SignedDistanceField signed_distance(const Contour& contour, const Grid2D& grid, double clamp) {
  if (contour.empty()) throw std::invalid_argument("signed_distance: empty contour");
  SignedDistanceField field;
  field.grid = grid;
  field.clamp = clamp;
  field.d.assign(grid.size(), 0.0);
  field.signed_by_side = !contour.chains.empty();

  double net_area = 0.0;
  for (const auto& l : contour.loops) net_area += signed_area(l.points);
  const double exterior_sign = net_area >= 0.0 ? 1.0 : -1.0;

  std::vector<const Polyline*> lines;
  for (const auto& l : contour.loops) lines.push_back(&l);
  for (const auto& c : contour.chains) lines.push_back(&c);
  std::vector<Point> anchors;
  for (const Polyline* l : lines) anchors.push_back(anchor(*l));

#pragma omp parallel for schedule(dynamic, 4)
  for (int j = 0; j < grid.ny; ++j) {
    for (int i = 0; i < grid.nx; ++i) {
      const Point p0{grid.x(i), grid.y(j)};
      double best = std::numeric_limits<double>::infinity();
      double best_side = 0.0;
      int w = 0;
      for (std::size_t li = 0; li < lines.size(); ++li) {
        const Polyline* line = lines[li];
        const Point p = near_image(grid, anchors[li], p0);
        for_each_segment(*line, [&](const Point& a, const Point& b) {
          const SegmentDistance sd = point_segment(p, a, b);
          if (sd.dist2 < best) {
            best = sd.dist2;
            best_side = sd.side;
          }
        });
        if (line->closed) w += winding(line->points, p);
      }
      double sign;
      if (field.signed_by_side)
        sign = best_side > 0.0 ? -1.0 : 1.0;
      else
        sign = w > 0 ? -1.0 : (w < 0 ? 1.0 : exterior_sign);
      field.d[grid.index(i, j)] = sign * std::min(std::sqrt(best), clamp);
    }
  }
  return field;
}

double interface_width(const SimState& state, const BistableModel& model, double eta,
                       const Contour& contour) {
  const double lo = model.alpha_minus() + eta;
  const double hi = model.alpha_plus() - eta;
  double width = 0.0;
  const Grid2D& g = state.grid;
  for (int j = 0; j < g.ny; ++j) {
    for (int i = 0; i < g.nx; ++i) {
      const double v = state.at(i, j);
      if (v > lo && v < hi && !contour.empty())
        width = std::max(width, distance_to_contour(contour, g, g.x(i), g.y(j)));
    }
  }
  return width;
}

double interface_width(const SimState& state, const BistableModel& model, double eta) {
  return interface_width(state, model, eta, extract_contour(state, model.alpha()));
}

double cross_section(const SimState& state, const Contour& contour, const StandingWave& wave,
                     double epsilon, double clamp) {
  if (contour.empty()) return 0.0;
  const SignedDistanceField sdf = signed_distance(contour, state.grid, clamp);
  double sup = 0.0;
  for (std::size_t k = 0; k < state.u.size(); ++k) {
    const double d = sdf.d[k];
    if (std::abs(d) <= clamp) sup = std::max(sup, std::abs(state.u[k] - wave.value(d / epsilon)));
  }
  return sup;
}

GraphCheck is_graph_over(const Contour& contour, const Contour& reference, double angle_tol) {
  auto single = [](const Contour& c) { return c.loops.size() == 1 && c.chains.empty(); };
  if (!single(contour) || !single(reference))
    throw std::invalid_argument("is_graph_over: both contours must be a single closed loop");
  const auto& ref = reference.loops.front().points;
  const auto& pts = contour.loops.front().points;
  const std::size_t m = ref.size();
  if (m < 3 || pts.size() < 3) throw std::invalid_argument("is_graph_over: degenerate loop");

  std::vector<double> arc(m + 1, 0.0);
  for (std::size_t k = 0; k < m; ++k) {
    const Point& a = ref[k];
    const Point& b = ref[(k + 1) % m];
    arc[k + 1] = arc[k] + std::hypot(b.x - a.x, b.y - a.y);
  }
  const double total = arc[m];

  GraphCheck out;
  std::vector<double> s(pts.size());
  for (std::size_t q = 0; q < pts.size(); ++q) {
    double best = std::numeric_limits<double>::infinity();
    double best_s = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
      const SegmentDistance sd = point_segment(pts[q], ref[k], ref[(k + 1) % m]);
      if (sd.dist2 < best) {
        best = sd.dist2;
        best_s = arc[k] + sd.t * (arc[k + 1] - arc[k]);
      }
    }
    s[q] = best_s;
    out.max_normal_offset = std::max(out.max_normal_offset, std::sqrt(best));
  }

  std::vector<double> steps(pts.size());
  double sum = 0.0;
  for (std::size_t q = 0; q < pts.size(); ++q) {
    double ds = s[(q + 1) % pts.size()] - s[q];
    ds -= total * std::round(ds / total);
    steps[q] = ds;
    sum += ds;
  }
  const double dir = sum >= 0.0 ? 1.0 : -1.0;
  const double slack = angle_tol * total / (2.0 * M_PI);
  bool ok = std::abs(std::abs(sum) - total) <= 1e-6 * total;
  for (double ds : steps) ok = ok && dir * ds >= -slack;
  out.is_graph = ok;
  return out;
}

void write_contour_csv(const std::string& path, const Contour& contour) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os.precision(17);
  os << "loop_id,x,y\n";
  int id = 0;
  for (const auto* group : {&contour.loops, &contour.chains}) {
    for (const auto& line : *group) {
      for (const auto& p : line.points) os << id << ',' << p.x << ',' << p.y << '\n';
      ++id;
    }
  }
}

}  // namespace ndac
