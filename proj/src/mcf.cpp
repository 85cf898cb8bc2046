#include "ndac/mcf.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include "ndac/errors.hpp"

namespace ndac {

double circle_radius(const CircleLaw& law, double t) {
  if (t < 0.0) throw std::domain_error("circle_radius: negative time");
  if (t >= law.extinction_time()) throw std::domain_error("circle_radius: interface extinct");
  return std::sqrt(law.r0 * law.r0 - 2.0 * law.lambda0 * t);
}

std::vector<Point> circle_polygon(const CircleLaw& law, double t, int n) {
  const double r = circle_radius(law, t);
  std::vector<Point> pts(n);
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * M_PI * k / n;
    pts[k] = {law.cx + r * std::cos(th), law.cy + r * std::sin(th)};
  }
  return pts;
}

double Front::area() const { return signed_area(points); }

double Front::length() const { return perimeter({points, true}); }

double Front::isoperimetric_ratio() const {
  const double l = length();
  return 4.0 * M_PI * area() / (l * l);
}

namespace {

// Second derivatives of the periodic cubic spline through (s_k, y_k) with period `period`.
// Cyclic tridiagonal system solved by the Sherman-Morrison correction.
std::vector<double> periodic_spline_moments(const std::vector<double>& s, const std::vector<double>& y,
                                            double period) {
  const std::size_t n = s.size();
  std::vector<double> h(n), a(n), b(n), c(n), r(n);
  for (std::size_t k = 0; k < n; ++k) h[k] = (k + 1 < n ? s[k + 1] : s[0] + period) - s[k];
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t km = (k + n - 1) % n;
    const std::size_t kp = (k + 1) % n;
    a[k] = h[km];
    b[k] = 2.0 * (h[km] + h[k]);
    c[k] = h[k];
    r[k] = 6.0 * ((y[kp] - y[k]) / h[k] - (y[k] - y[km]) / h[km]);
  }
  // Corner entries: a[0] couples to x[n-1], c[n-1] couples to x[0].
  const double gamma = -b[0];
  std::vector<double> bb(b), u(n, 0.0);
  bb[0] = b[0] - gamma;
  bb[n - 1] = b[n - 1] - a[0] * c[n - 1] / gamma;
  u[0] = gamma;
  u[n - 1] = c[n - 1];

  auto tridiag = [&](std::vector<double> rhs) {
    std::vector<double> cp(n), x(n);
    double beta = bb[0];
    x[0] = rhs[0] / beta;
    for (std::size_t k = 1; k < n; ++k) {
      cp[k] = c[k - 1] / beta;
      beta = bb[k] - a[k] * cp[k];
      x[k] = (rhs[k] - a[k] * x[k - 1]) / beta;
    }
    for (std::size_t k = n - 1; k-- > 0;) x[k] -= cp[k + 1] * x[k + 1];
    return x;
  };
  std::vector<double> x = tridiag(r);
  const std::vector<double> z = tridiag(u);
  const double fact = (x[0] + a[0] * x[n - 1] / gamma) / (1.0 + z[0] + a[0] * z[n - 1] / gamma);
  for (std::size_t k = 0; k < n; ++k) x[k] -= fact * z[k];
  return x;
}

bool segments_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2) {
  auto orient = [](const Point& a, const Point& b, const Point& c) {
    return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  };
  const double d1 = orient(q1, q2, p1);
  const double d2 = orient(q1, q2, p2);
  const double d3 = orient(p1, p2, q1);
  const double d4 = orient(p1, p2, q2);
  return ((d1 > 0) != (d2 > 0)) && ((d3 > 0) != (d4 > 0)) && d1 != 0 && d2 != 0 && d3 != 0 && d4 != 0;
}

bool self_intersects(const std::vector<Point>& pts) {
  const std::size_t n = pts.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Point& a = pts[i];
    const Point& b = pts[(i + 1) % n];
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;
      if (segments_cross(a, b, pts[j], pts[(j + 1) % n])) return true;
    }
  }
  return false;
}

std::vector<Point> densify(const Polyline& line, double h) {
  std::vector<Point> out;
  const std::size_t n = line.points.size();
  if (n == 1) return line.points;
  const std::size_t count = line.closed ? n : n - 1;
  for (std::size_t k = 0; k < count; ++k) {
    const Point& a = line.points[k];
    const Point& b = line.points[(k + 1) % n];
    const int m = std::max(1, static_cast<int>(std::ceil(std::hypot(b.x - a.x, b.y - a.y) / h)));
    for (int q = 0; q < m; ++q) {
      const double t = static_cast<double>(q) / m;
      out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
  }
  if (!line.closed) out.push_back(line.points.back());
  return out;
}

// Uniform bucket grid over segments for nearest-segment queries.
class SegmentIndex {
public:
  explicit SegmentIndex(const Contour& c) {
    for (const auto* group : {&c.loops, &c.chains}) {
      for (const auto& l : *group) {
        const std::size_t n = l.points.size();
        if (n == 1) segs_.push_back({l.points[0], l.points[0]});
        const std::size_t count = l.closed ? n : n - 1;
        for (std::size_t k = 0; k < count && n > 1; ++k) segs_.push_back({l.points[k], l.points[(k + 1) % n]});
      }
    }
    x0_ = y0_ = std::numeric_limits<double>::infinity();
    double x1 = -x0_, y1 = -y0_, len = 0.0;
    for (const auto& [a, b] : segs_) {
      x0_ = std::min({x0_, a.x, b.x});
      y0_ = std::min({y0_, a.y, b.y});
      x1 = std::max({x1, a.x, b.x});
      y1 = std::max({y1, a.y, b.y});
      len += std::hypot(b.x - a.x, b.y - a.y);
    }
    const double extent = std::max(x1 - x0_, y1 - y0_);
    cell_ = std::max({len / std::max<std::size_t>(segs_.size(), 1), extent / 512.0, 1e-12});
    nx_ = static_cast<int>((x1 - x0_) / cell_) + 1;
    ny_ = static_cast<int>((y1 - y0_) / cell_) + 1;
    buckets_.resize(static_cast<std::size_t>(nx_) * ny_);
    for (std::size_t s = 0; s < segs_.size(); ++s) {
      const auto& [a, b] = segs_[s];
      const int i0 = cx(std::min(a.x, b.x)), i1 = cx(std::max(a.x, b.x));
      const int j0 = cy(std::min(a.y, b.y)), j1 = cy(std::max(a.y, b.y));
      for (int j = j0; j <= j1; ++j)
        for (int i = i0; i <= i1; ++i) buckets_[static_cast<std::size_t>(j) * nx_ + i].push_back(s);
    }
  }

  double distance(const Point& p) const {
    const int pi = cx(p.x), pj = cy(p.y);
    // Distance from p to the bucket box it was clamped into.
    const double ox = std::max({0.0, x0_ - p.x, p.x - (x0_ + nx_ * cell_)});
    const double oy = std::max({0.0, y0_ - p.y, p.y - (y0_ + ny_ * cell_)});
    const double outside = std::hypot(ox, oy);
    double best = std::numeric_limits<double>::infinity();
    const int rmax = std::max(nx_, ny_);
    for (int r = 0; r <= rmax; ++r) {
      for (int j = pj - r; j <= pj + r; ++j) {
        if (j < 0 || j >= ny_) continue;
        const bool edge_row = j == pj - r || j == pj + r;
        for (int i = pi - r; i <= pi + r; i += edge_row ? 1 : 2 * r) {
          if (i >= 0 && i < nx_)
            for (std::size_t s : buckets_[static_cast<std::size_t>(j) * nx_ + i]) best = std::min(best, seg(p, s));
          if (r == 0) break;
        }
      }
      // Unvisited buckets are at least r cells away from p's bucket.
      if (best <= outside + r * cell_) break;
    }
    return best;
  }

private:
  int cx(double x) const { return std::clamp(static_cast<int>((x - x0_) / cell_), 0, nx_ - 1); }
  int cy(double y) const { return std::clamp(static_cast<int>((y - y0_) / cell_), 0, ny_ - 1); }
  double seg(const Point& p, std::size_t s) const {
    const auto& [a, b] = segs_[s];
    const double ex = b.x - a.x, ey = b.y - a.y;
    const double len2 = ex * ex + ey * ey;
    double t = len2 > 0 ? ((p.x - a.x) * ex + (p.y - a.y) * ey) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p.x - a.x - t * ex, p.y - a.y - t * ey);
  }

  std::vector<std::pair<Point, Point>> segs_;
  std::vector<std::vector<std::size_t>> buckets_;
  double x0_ = 0, y0_ = 0, cell_ = 1;
  int nx_ = 1, ny_ = 1;
};

double one_sided(const std::vector<Point>& dense, const Contour& target) {
  const SegmentIndex index(target);
  double worst = 0.0;
  for (const auto& p : dense) worst = std::max(worst, index.distance(p));
  return worst;
}

double mean_segment(const Contour& c) {
  double len = 0.0;
  std::size_t segs = 0;
  for (const auto* group : {&c.loops, &c.chains}) {
    for (const auto& l : *group) {
      len += perimeter(l);
      segs += l.closed ? l.points.size() : l.points.size() - 1;
    }
  }
  return segs ? len / segs : 0.0;
}

}  // namespace

Front make_circle_front(double cx, double cy, double radius, double spacing) {
  const int n = std::max(8, static_cast<int>(std::round(2.0 * M_PI * radius / spacing)));
  Front f;
  f.spacing = spacing;
  f.points = circle_polygon({cx, cy, radius, 0.0}, 0.0, n);
  return f;
}

Front make_ellipse_front(double cx, double cy, double a, double b, double spacing) {
  Front f;
  f.spacing = spacing;
  const int n = 4096;
  for (int k = 0; k < n; ++k) {
    const double th = 2.0 * M_PI * k / n;
    f.points.push_back({cx + a * std::cos(th), cy + b * std::sin(th)});
  }
  return resample(f, spacing);
}

Front resample(const Front& front, double spacing) {
  const std::size_t n = front.points.size();
  if (n < 3) throw std::invalid_argument("resample: front needs at least 3 points");
  std::vector<Point> pts = front.points;
  if (signed_area(pts) < 0.0) std::reverse(pts.begin(), pts.end());

  std::vector<double> s(n, 0.0), x(n), y(n);
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = pts[k].x;
    y[k] = pts[k].y;
    if (k > 0) s[k] = s[k - 1] + std::hypot(x[k] - x[k - 1], y[k] - y[k - 1]);
  }
  const double total = s[n - 1] + std::hypot(x[0] - x[n - 1], y[0] - y[n - 1]);
  const std::vector<double> mx = periodic_spline_moments(s, x, total);
  const std::vector<double> my = periodic_spline_moments(s, y, total);

  const int m = static_cast<int>(std::round(total / spacing));
  Front out;
  out.spacing = spacing;
  if (m < 3) return out;
  out.points.resize(m);
  std::size_t k = 0;
  for (int q = 0; q < m; ++q) {
    const double t = total * q / m;
    while (k + 1 < n && s[k + 1] <= t) ++k;
    const std::size_t kp = (k + 1) % n;
    const double h = (k + 1 < n ? s[k + 1] : total) - s[k];
    const double A = ((k + 1 < n ? s[k + 1] : total) - t) / h;
    const double B = 1.0 - A;
    const double c = (A * A * A - A) * h * h / 6.0;
    const double d = (B * B * B - B) * h * h / 6.0;
    out.points[q] = {A * x[k] + B * x[kp] + c * mx[k] + d * mx[kp],
                     A * y[k] + B * y[kp] + c * my[k] + d * my[kp]};
  }
  return out;
}

FrontTrajectory evolve_front(const Front& front, double lambda0, double dt, double t_end,
                             int record_every) {
  if (!(front.spacing > 0.0)) throw std::invalid_argument("evolve_front: spacing must be positive");
  if (!(dt > 0.0)) throw std::invalid_argument("evolve_front: dt must be positive");
  if (lambda0 < 0.0) throw std::invalid_argument("evolve_front: lambda0 must be non-negative");
  if (lambda0 > 0.0 && dt > 0.25 * front.spacing * front.spacing / lambda0)
    throw std::invalid_argument("evolve_front: dt exceeds 0.25 spacing^2 / lambda0");
  if (self_intersects(front.points)) throw NumericalError("evolve_front: initial front self-intersects");

  FrontTrajectory traj;
  Front cur = front;
  if (signed_area(cur.points) < 0.0) std::reverse(cur.points.begin(), cur.points.end());
  double t = 0.0;
  traj.frames.push_back({t, cur});
  if (lambda0 == 0.0) {
    traj.frames.push_back({t_end, cur});
    return traj;
  }

  const double tol = 1e-12 * t_end;
  long step = 0;
  std::vector<Point> next;
  while (t < t_end - tol) {
    const double h = std::min(dt, t_end - t);
    const std::size_t n = cur.points.size();
    next.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Point& p0 = cur.points[(i + n - 1) % n];
      const Point& p1 = cur.points[i];
      const Point& p2 = cur.points[(i + 1) % n];
      const double ax = p1.x - p0.x, ay = p1.y - p0.y;
      const double bx = p2.x - p1.x, by = p2.y - p1.y;
      const double cx = p2.x - p0.x, cy = p2.y - p0.y;
      const double lc = std::hypot(cx, cy);
      const double kappa = 2.0 * (ax * by - ay * bx) / (std::hypot(ax, ay) * std::hypot(bx, by) * lc);
      const double shift = lambda0 * kappa * h / lc;
      next[i] = {p1.x - cy * shift, p1.y + cx * shift};
    }
    t += h;
    ++step;
    if (self_intersects(next)) throw NumericalError("evolve_front: self-intersection (topology change)");
    cur = resample({next, cur.spacing}, cur.spacing);
    if (cur.points.size() < 8) {
      traj.collapsed = true;
      break;
    }
    if (record_every > 0 && step % record_every == 0 && t < t_end - tol) traj.frames.push_back({t, cur});
  }
  if (!traj.collapsed) traj.frames.push_back({t, cur});
  return traj;
}

double front_distance(const Contour& a, const Contour& b, double resolution) {
  if (a.empty() || b.empty()) throw std::invalid_argument("front_distance: empty input");
  const double h = resolution > 0.0 ? resolution : 0.1 * std::min(mean_segment(a), mean_segment(b));
  auto dense = [h](const Contour& c) {
    std::vector<Point> pts;
    for (const auto* group : {&c.loops, &c.chains})
      for (const auto& l : *group) {
        const auto d = densify(l, h);
        pts.insert(pts.end(), d.begin(), d.end());
      }
    return pts;
  };
  return std::max(one_sided(dense(a), b), one_sided(dense(b), a));
}

double front_distance(const Front& a, const Front& b, double resolution) {
  return front_distance(contour_from_polyline(a.points), contour_from_polyline(b.points), resolution);
}

void write_trajectory_csv(const std::string& path, const FrontTrajectory& traj) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot write '" + path + "'");
  os.precision(17);
  os << "frame,t,x,y\n";
  for (std::size_t f = 0; f < traj.frames.size(); ++f)
    for (const auto& p : traj.frames[f].front.points)
      os << f << ',' << traj.frames[f].time << ',' << p.x << ',' << p.y << '\n';
}

}  // namespace ndac
