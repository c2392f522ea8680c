#include "specnoise/svg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <numbers>
#include <sstream>

#include "specnoise/error.hpp"

namespace specnoise {

namespace {

constexpr double kLeft = 80.0;
constexpr double kRight = 770.0;
constexpr double kTop = 50.0;
constexpr double kBottom = 540.0;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.4g", std::abs(v) < 1e-12 ? 0.0 : v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

const char* color(int group) {
  switch (group) {
    case 0: return "#1f77b4";
    case 1: return "#d62728";
    default: return "#2ca02c";
  }
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  void add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  void pad() {
    if (!(hi > lo)) {
      lo -= 1.0;
      hi += 1.0;
    }
    const double margin = 0.05 * (hi - lo);
    lo -= margin;
    hi += margin;
  }
};

struct Frame {
  Range x, y;
  double px(double v) const { return kLeft + (v - x.lo) / (x.hi - x.lo) * (kRight - kLeft); }
  double py(double v) const { return kBottom - (v - y.lo) / (y.hi - y.lo) * (kBottom - kTop); }
};

std::vector<double> nice_ticks(double lo, double hi) {
  const double raw = (hi - lo) / 5.0;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double step = (f < 1.5 ? 1.0 : f < 3.5 ? 2.0 : f < 7.5 ? 5.0 : 10.0) * mag;
  std::vector<double> ticks;
  for (double t = std::ceil(lo / step) * step; t <= hi + 1e-9 * step; t += step) ticks.push_back(t);
  return ticks;
}

void open_document(std::ostringstream& os, const PlotLabels& labels) {
  os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
     << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << kCanvasWidth << "\" height=\""
     << kCanvasHeight << "\" viewBox=\"0 0 " << kCanvasWidth << ' ' << kCanvasHeight << "\">\n"
     << "<title>" << escape(labels.title) << "</title>\n"
     << "<g font-family=\"sans-serif\" font-size=\"12\">\n";
}

void draw_axes(std::ostringstream& os, const Frame& f, const PlotLabels& labels) {
  os << "<g class=\"axes\" stroke=\"#000000\" stroke-width=\"1\">\n"
     << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(kRight) << "\" y2=\""
     << fmt(kBottom) << "\"/>\n"
     << "<line x1=\"" << fmt(kLeft) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
     << fmt(kTop) << "\"/>\n";
  for (double t : nice_ticks(f.x.lo, f.x.hi)) {
    const double px = f.px(t);
    os << "<line x1=\"" << fmt(px) << "\" y1=\"" << fmt(kBottom) << "\" x2=\"" << fmt(px) << "\" y2=\""
       << fmt(kBottom + 5) << "\"/>\n"
       << "<text stroke=\"none\" x=\"" << fmt(px) << "\" y=\"" << fmt(kBottom + 20)
       << "\" text-anchor=\"middle\">" << tick_label(t) << "</text>\n";
  }
  for (double t : nice_ticks(f.y.lo, f.y.hi)) {
    const double py = f.py(t);
    os << "<line x1=\"" << fmt(kLeft - 5) << "\" y1=\"" << fmt(py) << "\" x2=\"" << fmt(kLeft) << "\" y2=\""
       << fmt(py) << "\"/>\n"
       << "<text stroke=\"none\" x=\"" << fmt(kLeft - 8) << "\" y=\"" << fmt(py + 4)
       << "\" text-anchor=\"end\">" << tick_label(t) << "</text>\n";
  }
  os << "</g>\n"
     << "<text x=\"" << fmt(0.5 * (kLeft + kRight)) << "\" y=\"25\" text-anchor=\"middle\" font-size=\"16\">"
     << escape(labels.title) << "</text>\n"
     << "<text x=\"" << fmt(0.5 * (kLeft + kRight)) << "\" y=\"585\" text-anchor=\"middle\">"
     << escape(labels.x_label) << "</text>\n"
     << "<text x=\"20\" y=\"" << fmt(0.5 * (kTop + kBottom)) << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
     << fmt(0.5 * (kTop + kBottom)) << ")\">" << escape(labels.y_label) << "</text>\n";
}

void close_document(std::ostringstream& os) { os << "</g>\n</svg>\n"; }

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw InvalidInput(std::string("render: non-finite ") + what);
}

std::string polyline(const Frame& f, std::span<const double> xs, std::span<const double> ys) {
  std::string pts;
  for (size_t i = 0; i < xs.size(); ++i) {
    if (i) pts += ' ';
    pts += fmt(f.px(xs[i])) + "," + fmt(f.py(ys[i]));
  }
  return pts;
}

}  // namespace

std::string render_svg(std::span<const PlotPoint> points, std::span<const PlotEllipse> ellipses,
                       const PlotLabels& labels) {
  if (points.empty()) throw InvalidInput("render_svg: empty point set");
  Frame f;
  for (const auto& p : points) {
    require_finite(p.x, "point");
    require_finite(p.y, "point");
    f.x.add(p.x);
    f.y.add(p.y);
  }
  for (const auto& e : ellipses) {
    const auto& s = e.shape;
    require_finite(s.semi_major, "ellipse");
    require_finite(s.semi_minor, "ellipse");
    require_finite(s.angle, "ellipse");
    const double c = std::cos(s.angle), sn = std::sin(s.angle);
    const double hx = std::hypot(s.semi_major * c, s.semi_minor * sn);
    const double hy = std::hypot(s.semi_major * sn, s.semi_minor * c);
    f.x.add(s.center(0) - hx);
    f.x.add(s.center(0) + hx);
    f.y.add(s.center(1) - hy);
    f.y.add(s.center(1) + hy);
  }
  f.x.pad();
  f.y.pad();
  // Equal scale on both axes.
  const double scale = std::min((kRight - kLeft) / (f.x.hi - f.x.lo), (kBottom - kTop) / (f.y.hi - f.y.lo));
  const double half_x = 0.5 * (kRight - kLeft) / scale;
  const double half_y = 0.5 * (kBottom - kTop) / scale;
  const double mid_x = 0.5 * (f.x.lo + f.x.hi);
  const double mid_y = 0.5 * (f.y.lo + f.y.hi);
  f.x = Range{mid_x - half_x, mid_x + half_x};
  f.y = Range{mid_y - half_y, mid_y + half_y};

  std::ostringstream os;
  open_document(os, labels);
  draw_axes(os, f, labels);

  os << "<g class=\"points\" fill-opacity=\"0.6\">\n";
  for (const auto& p : points) {
    const double x = f.px(p.x), y = f.py(p.y);
    const char* c = color(p.group);
    if (p.group == 0) {
      os << "<circle class=\"marker\" cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"3\" fill=\"" << c
         << "\"/>\n";
    } else if (p.group == 1) {
      os << "<rect class=\"marker\" x=\"" << fmt(x - 3) << "\" y=\"" << fmt(y - 3)
         << "\" width=\"6\" height=\"6\" fill=\"" << c << "\"/>\n";
    } else {
      os << "<path class=\"marker\" d=\"M " << fmt(x) << ' ' << fmt(y - 4) << " L " << fmt(x + 3.5) << ' '
         << fmt(y + 3) << " L " << fmt(x - 3.5) << ' ' << fmt(y + 3) << " Z\" fill=\"" << c << "\"/>\n";
    }
  }
  os << "</g>\n<g class=\"ellipses\" fill=\"none\" stroke-width=\"2\">\n";
  for (const auto& e : ellipses) {
    const double cx = f.px(e.shape.center(0)), cy = f.py(e.shape.center(1));
    // y is flipped on screen, so the rotation changes sign.
    const double deg = -e.shape.angle * 180.0 / std::numbers::pi;
    os << "<ellipse class=\"ellipse\" cx=\"" << fmt(cx) << "\" cy=\"" << fmt(cy) << "\" rx=\""
       << fmt(e.shape.semi_major * scale) << "\" ry=\"" << fmt(e.shape.semi_minor * scale) << "\" transform=\"rotate("
       << fmt(deg) << ' ' << fmt(cx) << ' ' << fmt(cy) << ")\" stroke=\"" << color(e.group) << '"'
       << (e.dashed ? " stroke-dasharray=\"8,5\"" : "") << "/>\n";
  }
  os << "</g>\n";
  close_document(os);
  return os.str();
}

std::string render_curve_svg(std::span<const CurvePoint> points, const PlotLabels& labels) {
  if (points.empty()) throw InvalidInput("render_curve_svg: empty point set");
  Frame f;
  for (const auto& p : points) {
    for (double v : {p.x, p.mean, p.lo, p.hi, p.reference}) require_finite(v, "curve value");
    f.x.add(p.x);
    f.y.add(p.lo);
    f.y.add(p.hi);
    f.y.add(p.mean);
    f.y.add(p.reference);
  }
  f.x.pad();
  f.y.pad();

  std::ostringstream os;
  open_document(os, labels);
  draw_axes(os, f, labels);

  std::vector<double> xs, refs;
  for (const auto& p : points) {
    xs.push_back(p.x);
    refs.push_back(p.reference);
  }
  os << "<polyline class=\"reference\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\" points=\""
     << polyline(f, xs, refs) << "\"/>\n<g class=\"intervals\" stroke=\"#1f77b4\" stroke-width=\"1.5\">\n";
  for (const auto& p : points) {
    const double x = f.px(p.x);
    os << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(f.py(p.lo)) << "\" x2=\"" << fmt(x) << "\" y2=\""
       << fmt(f.py(p.hi)) << "\"/>\n"
       << "<line x1=\"" << fmt(x - 6) << "\" y1=\"" << fmt(f.py(p.lo)) << "\" x2=\"" << fmt(x + 6) << "\" y2=\""
       << fmt(f.py(p.lo)) << "\"/>\n"
       << "<line x1=\"" << fmt(x - 6) << "\" y1=\"" << fmt(f.py(p.hi)) << "\" x2=\"" << fmt(x + 6) << "\" y2=\""
       << fmt(f.py(p.hi)) << "\"/>\n";
  }
  os << "</g>\n<g class=\"points\" fill=\"#1f77b4\">\n";
  for (const auto& p : points) {
    os << "<circle class=\"marker\" cx=\"" << fmt(f.px(p.x)) << "\" cy=\"" << fmt(f.py(p.mean)) << "\" r=\"4\"/>\n";
  }
  os << "</g>\n";
  close_document(os);
  return os.str();
}

std::string render_density_svg(const DensityCurves& curves, const PlotLabels& labels) {
  if (curves.x.empty() || curves.x.size() != curves.empirical.size() ||
      curves.x.size() != curves.theoretical.size()) {
    throw InvalidInput("render_density_svg: curves must be non-empty and equally sized");
  }
  Frame f;
  for (size_t i = 0; i < curves.x.size(); ++i) {
    require_finite(curves.x[i], "density abscissa");
    require_finite(curves.empirical[i], "density");
    require_finite(curves.theoretical[i], "density");
    f.x.add(curves.x[i]);
    f.y.add(curves.empirical[i]);
    f.y.add(curves.theoretical[i]);
  }
  f.y.add(0.0);
  f.x.pad();
  f.y.pad();

  std::ostringstream os;
  open_document(os, labels);
  draw_axes(os, f, labels);
  os << "<polyline class=\"empirical\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" "
        "stroke-dasharray=\"8,5\" points=\""
     << polyline(f, curves.x, curves.empirical) << "\"/>\n"
     << "<polyline class=\"theoretical\" fill=\"none\" stroke=\"#000000\" stroke-width=\"2\" points=\""
     << polyline(f, curves.x, curves.theoretical) << "\"/>\n";
  close_document(os);
  return os.str();
}

}  // namespace specnoise
