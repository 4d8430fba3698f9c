#include "serorec/svg.hpp"

#include <cstdio>

namespace serorec {

namespace {

std::string f2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.2f", v);
  return buf;
}

}  // namespace

std::string svg_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

SvgWriter::SvgWriter(int width, int height) : width_(width), height_(height) {}

void SvgWriter::line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     double stroke_width) {
  body_ << "<line x1=\"" << f2(x1) << "\" y1=\"" << f2(y1) << "\" x2=\"" << f2(x2)
        << "\" y2=\"" << f2(y2) << "\" stroke=\"" << stroke << "\" stroke-width=\""
        << f2(stroke_width) << "\"/>\n";
}

void SvgWriter::circle(double cx, double cy, double r, const std::string& fill) {
  body_ << "<circle cx=\"" << f2(cx) << "\" cy=\"" << f2(cy) << "\" r=\"" << f2(r)
        << "\" fill=\"" << fill << "\"/>\n";
}

void SvgWriter::rect(double x, double y, double w, double h, const std::string& fill) {
  body_ << "<rect x=\"" << f2(x) << "\" y=\"" << f2(y) << "\" width=\"" << f2(w)
        << "\" height=\"" << f2(h) << "\" fill=\"" << fill << "\"/>\n";
}

void SvgWriter::text(double x, double y, const std::string& content, const std::string& anchor,
                     int font_size, const std::string& fill) {
  body_ << "<text x=\"" << f2(x) << "\" y=\"" << f2(y) << "\" text-anchor=\"" << anchor
        << "\" font-family=\"sans-serif\" font-size=\"" << font_size << "\" fill=\"" << fill
        << "\">" << svg_escape(content) << "</text>\n";
}

std::string SvgWriter::finish() const {
  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width_ << "\" height=\""
      << height_ << "\" viewBox=\"0 0 " << width_ << " " << height_ << "\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << width_ << "\" height=\"" << height_
      << "\" fill=\"#ffffff\"/>\n"
      << body_.str() << "</svg>\n";
  return out.str();
}

}  // namespace serorec
