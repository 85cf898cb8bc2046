#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ndac/model.hpp"
#include "ndac/pde.hpp"
#include "ndac/profiles.hpp"

namespace ndac {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

struct Polyline {
  std::vector<Point> points;
  bool closed = true;
};

/// Level set {u = level} as polylines. Closed loops run counterclockwise around
/// the region u < level; chains end on a Neumann boundary. On a torus the points
/// of a loop are unwrapped so consecutive points are always close.
struct Contour {
  std::vector<Polyline> loops;
  std::vector<Polyline> chains;
  double level = 0.0;

  bool empty() const noexcept { return loops.empty() && chains.empty(); }
  std::size_t vertex_count() const noexcept;
};

/// Marching squares on the cell centres with linear interpolation along edges.
/// Saddle cells connect the corners on the side of the cell average.
Contour extract_contour(const SimState& state, double level);

/// Loop of a closed polyline, for use as a reference interface.
Contour contour_from_polyline(const std::vector<Point>& points, double level = 0.0);

double signed_area(const std::vector<Point>& loop);
double perimeter(const Polyline& line);

/// Distance from (x, y) to the nearest segment of the contour (torus-aware).
double distance_to_contour(const Contour& contour, const Grid2D& grid, double x, double y);

struct SignedDistanceField {
  Grid2D grid;
  std::vector<double> d;
  double clamp = std::numeric_limits<double>::infinity();
  /// Set when chains were present and the sign came from the side of the nearest segment.
  bool signed_by_side = false;

  double at(int i, int j) const noexcept { return d[grid.index(i, j)]; }
};

/// Brute-force point-to-segment distance at every cell centre, negative inside
/// the region u < level (by winding number), clamped to [-clamp, clamp].
SignedDistanceField signed_distance(const Contour& contour, const Grid2D& grid,
                                    double clamp = std::numeric_limits<double>::infinity());

/// Largest distance from the alpha-contour of any cell with u in (alpha_- + eta, alpha_+ - eta).
double interface_width(const SimState& state, const BistableModel& model, double eta);
double interface_width(const SimState& state, const BistableModel& model, double eta,
                       const Contour& contour);

/// sup |u - U0(d / eps)| over cells with |d| <= clamp, d the signed distance to `contour`.
/// An empty contour gives 0.
double cross_section(const SimState& state, const Contour& contour, const StandingWave& wave,
                     double epsilon, double clamp = std::numeric_limits<double>::infinity());

struct GraphCheck {
  bool is_graph = false;
  double max_normal_offset = 0.0;
};

/// Projects every vertex of `contour` to its nearest point on `reference` and checks
/// that the projection runs once around the reference without folding back.
/// Both inputs must be single closed loops.
GraphCheck is_graph_over(const Contour& contour, const Contour& reference,
                         double angle_tol = 1e-3);

/// CSV with header loop_id,x,y (chains follow the loops).
void write_contour_csv(const std::string& path, const Contour& contour);

}  // namespace ndac
