#include "gpprobe/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "gpprobe/table.h"

namespace gpprobe::svg {

std::string Rgb::Hex() const {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "#%02x%02x%02x", r, g, b);
  return buf;
}

Rgb Diverging(double t) {
  if (std::isnan(t)) t = 0.0;
  t = std::clamp(t, -1.0, 1.0);
  // Endpoints: #2166ac (blue) and #b2182b (red), white in the middle.
  const Rgb lo{33, 102, 172};
  const Rgb hi{178, 24, 43};
  const Rgb& end = t < 0 ? lo : hi;
  const double a = std::abs(t);
  const auto mix = [a](int from, int to) {
    return static_cast<int>(std::lround(from + (to - from) * a));
  };
  return {mix(255, end.r), mix(255, end.g), mix(255, end.b)};
}

std::string Num(double v) { return FormatTruncated(v, 4); }

std::string Escape(std::string_view text) {
  std::string out;
  for (char c : text) {
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

Document::Document(double width, double height) : width_(width), height_(height) {}

namespace {
std::string ClassAttr(std::string_view c) {
  return c.empty() ? std::string() : " class=\"" + std::string(c) + "\"";
}
}  // namespace

void Document::Rect(double x, double y, double w, double h, const std::string& fill,
                    std::string_view css_class, std::string_view title) {
  body_ += "<rect" + ClassAttr(css_class) + " x=\"" + Num(x) + "\" y=\"" + Num(y) +
           "\" width=\"" + Num(w) + "\" height=\"" + Num(h) + "\" fill=\"" + fill + "\"";
  if (title.empty()) {
    body_ += "/>\n";
  } else {
    body_ += "><title>" + Escape(title) + "</title></rect>\n";
  }
  ++elements_;
}

void Document::Line(double x1, double y1, double x2, double y2, const std::string& stroke,
                    double width, bool dashed) {
  body_ += "<line x1=\"" + Num(x1) + "\" y1=\"" + Num(y1) + "\" x2=\"" + Num(x2) +
           "\" y2=\"" + Num(y2) + "\" stroke=\"" + stroke + "\" stroke-width=\"" +
           Num(width) + "\"" + (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
  ++elements_;
}

void Document::Polyline(const std::vector<std::pair<double, double>>& points,
                        const std::string& stroke, double width, bool dashed,
                        std::string_view css_class) {
  std::string pts;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (i) pts += ' ';
    pts += Num(points[i].first) + "," + Num(points[i].second);
  }
  body_ += "<polyline" + ClassAttr(css_class) + " points=\"" + pts +
           "\" fill=\"none\" stroke=\"" + stroke + "\" stroke-width=\"" + Num(width) + "\"" +
           (dashed ? " stroke-dasharray=\"6 4\"" : "") + "/>\n";
  ++elements_;
}

void Document::Circle(double cx, double cy, double r, const std::string& fill) {
  body_ += "<circle cx=\"" + Num(cx) + "\" cy=\"" + Num(cy) + "\" r=\"" + Num(r) +
           "\" fill=\"" + fill + "\"/>\n";
  ++elements_;
}

void Document::Text(double x, double y, std::string_view text, std::string_view anchor,
                    double size, std::string_view css_class) {
  body_ += "<text" + ClassAttr(css_class) + " x=\"" + Num(x) + "\" y=\"" + Num(y) +
           "\" font-size=\"" + Num(size) + "\" text-anchor=\"" + std::string(anchor) +
           "\" font-family=\"sans-serif\">" + Escape(text) + "</text>\n";
  ++elements_;
}

std::string Document::str() const {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " + Num(width_) + " " +
         Num(height_) + "\" width=\"" + Num(width_) + "\" height=\"" + Num(height_) +
         "\">\n" + body_ + "</svg>\n";
}

}  // namespace gpprobe::svg
