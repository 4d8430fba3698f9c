#ifndef SEROREC_SVG_HPP
#define SEROREC_SVG_HPP

#include <sstream>
#include <string>

namespace serorec {

// Minimal deterministic SVG assembly; coordinates rendered with fixed
// precision so identical input yields identical bytes.
class SvgWriter {
 public:
  SvgWriter(int width, int height);

  void line(double x1, double y1, double x2, double y2, const std::string& stroke,
            double stroke_width = 1.0);
  void circle(double cx, double cy, double r, const std::string& fill);
  void rect(double x, double y, double w, double h, const std::string& fill);
  // anchor: "start" | "middle" | "end"
  void text(double x, double y, const std::string& content, const std::string& anchor,
            int font_size, const std::string& fill = "#222222");

  std::string finish() const;

 private:
  int width_, height_;
  std::ostringstream body_;
};

std::string svg_escape(const std::string& s);

}  // namespace serorec

#endif
