#pragma once

// Standalone SVG 1.1 figures on a fixed 800 x 600 canvas. Output bytes
// are a pure function of the input.

#include <span>
#include <string>
#include <vector>

#include "specnoise/limit_theory.hpp"

namespace specnoise {

inline constexpr int kCanvasWidth = 800;
inline constexpr int kCanvasHeight = 600;

struct PlotLabels {
  std::string title;
  std::string x_label;
  std::string y_label;
};

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  int group = 0;  // 0: circle, 1: square, otherwise triangle
};

struct PlotEllipse {
  Ellipse shape;
  bool dashed = false;  // dashed: empirical, solid: theoretical
  int group = 0;
};

/// Scatter plot with level-curve ellipses. Equal scale on both axes, so each
/// data ellipse is drawn as one <ellipse> element. Throws InvalidInput on an
/// empty point set or non-finite coordinates.
std::string render_svg(std::span<const PlotPoint> points, std::span<const PlotEllipse> ellipses,
                       const PlotLabels& labels);

struct CurvePoint {
  double x = 0.0;
  double mean = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  double reference = 0.0;
};

/// Means with vertical interval bars and a solid reference curve.
std::string render_curve_svg(std::span<const CurvePoint> points, const PlotLabels& labels);

struct DensityCurves {
  std::vector<double> x;
  std::vector<double> empirical;    // dashed
  std::vector<double> theoretical;  // solid
};

std::string render_density_svg(const DensityCurves& curves, const PlotLabels& labels);

}  // namespace specnoise
