#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ndac/geometry.hpp"

namespace ndac {

/// Circle shrinking under V_n = -lambda0 kappa: R(t) = sqrt(r0^2 - 2 lambda0 t).
struct CircleLaw {
  double cx = 0.5, cy = 0.5;
  double r0 = 0.25;
  double lambda0 = 1.0;

  double extinction_time() const noexcept {
    return lambda0 > 0.0 ? r0 * r0 / (2.0 * lambda0) : std::numeric_limits<double>::infinity();
  }
};

/// Throws std::domain_error for t < 0 or t >= extinction_time.
double circle_radius(const CircleLaw& law, double t);

/// Counterclockwise polygonal approximation of the law at time t.
std::vector<Point> circle_polygon(const CircleLaw& law, double t, int n);

/// Closed counterclockwise front resampled to a target spacing.
struct Front {
  std::vector<Point> points;
  double spacing = 0.0;

  double area() const;
  double length() const;
  /// 4 pi A / L^2, equal to 1 only for a circle.
  double isoperimetric_ratio() const;
};

Front make_circle_front(double cx, double cy, double radius, double spacing);
Front make_ellipse_front(double cx, double cy, double a, double b, double spacing);

/// Redistributes points at uniform arclength along the periodic cubic spline through them.
Front resample(const Front& front, double spacing);

struct FrontFrame {
  double time;
  Front front;
};

struct FrontTrajectory {
  std::vector<FrontFrame> frames;
  /// Set when the front shrank below 8 vertices before t_end.
  bool collapsed = false;
};

/// Explicit curvature flow: curvature from the circle through each vertex and its
/// neighbours, normal displacement lambda0 kappa dt inward, spline resampling after
/// every step. Requires dt <= 0.25 spacing^2 / lambda0. Throws NumericalError on a
/// self-intersection.
FrontTrajectory evolve_front(const Front& front, double lambda0, double dt, double t_end,
                             int record_every = 1);

/// Symmetric Hausdorff distance between two polylines after densifying both to
/// segments no longer than `resolution` (default: a tenth of the mean segment length).
double front_distance(const Contour& a, const Contour& b, double resolution = 0.0);
double front_distance(const Front& a, const Front& b, double resolution = 0.0);

/// CSV with header frame,t,x,y.
void write_trajectory_csv(const std::string& path, const FrontTrajectory& traj);

}  // namespace ndac
