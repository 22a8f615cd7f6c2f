#pragma once

// Minimal deterministic SVG writer. Coordinates are printed with at most
// four decimals, so identical inputs give identical bytes.

#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gpprobe::svg {

struct Rgb {
  int r = 0, g = 0, b = 0;
  std::string Hex() const;
  bool operator==(const Rgb&) const = default;
};

// Blue (-1) to white (0) to red (+1); `t` is clamped to [-1, 1].
Rgb Diverging(double t);

class Document {
 public:
  Document(double width = 800, double height = 500);

  void Rect(double x, double y, double w, double h, const std::string& fill,
            std::string_view css_class = {}, std::string_view title = {});
  void Line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double width = 1.0, bool dashed = false);
  void Polyline(const std::vector<std::pair<double, double>>& points,
                const std::string& stroke, double width = 2.0, bool dashed = false,
                std::string_view css_class = {});
  void Circle(double cx, double cy, double r, const std::string& fill);
  void Text(double x, double y, std::string_view text, std::string_view anchor = "start",
            double size = 12.0, std::string_view css_class = {});

  // Number of drawing elements emitted so far (excludes the root <svg>).
  int element_count() const { return elements_; }
  std::string str() const;

 private:
  double width_;
  double height_;
  std::string body_;
  int elements_ = 0;
};

std::string Num(double v);
std::string Escape(std::string_view text);

}  // namespace gpprobe::svg
