#pragma once

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <vector>

namespace fowler {

// Minimal deterministic line chart writer. Fixed viewBox, no timestamps,
// fixed number formatting, so identical data gives identical bytes.
struct PlotSeries {
  std::vector<double> x, y;
  std::string stroke = "#000000";
  bool dotted = false;
  std::string label;
};

class SvgChart {
 public:
  SvgChart(std::string title, std::string x_label, std::string y_label)
      : title_(std::move(title)), x_label_(std::move(x_label)), y_label_(std::move(y_label)) {}

  void add(PlotSeries s) {
    if (s.x.size() != s.y.size() || s.x.empty()) throw std::invalid_argument("svg: malformed series");
    series_.push_back(std::move(s));
  }

  std::string render() const {
    if (series_.empty()) throw std::runtime_error("svg: nothing to draw");
    double xmin = series_[0].x[0], xmax = xmin, ymin = series_[0].y[0], ymax = ymin;
    for (const PlotSeries& s : series_)
      for (size_t i = 0; i < s.x.size(); ++i) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    if (xmax == xmin) xmax = xmin + 1.0;
    if (ymax == ymin) ymax = ymin + 1.0;
    const double pad_y = 0.05 * (ymax - ymin);
    ymin -= pad_y;
    ymax += pad_y;

    const double W = 800, H = 500, ml = 70, mr = 20, mt = 40, mb = 50;
    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (W - ml - mr); };
    auto py = [&](double y) { return H - mb - (y - ymin) / (ymax - ymin) * (H - mt - mb); };

    std::string out;
    char buf[256];
    out += "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 800 500\">\n";
    out += "<rect width=\"800\" height=\"500\" fill=\"#ffffff\"/>\n";
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"400\" y=\"24\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"16\">%s</text>\n",
                  title_.c_str());
    out += buf;

    // axes with 5 ticks per dimension
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#333333\"/>\n",
                  ml, H - mb, W - mr, H - mb);
    out += buf;
    std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"#333333\"/>\n",
                  ml, mt, ml, H - mb);
    out += buf;
    for (int i = 0; i <= 4; ++i) {
      const double xv = xmin + (xmax - xmin) * i / 4.0;
      const double yv = ymin + (ymax - ymin) * i / 4.0;
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"11\">%.4g</text>\n",
                    px(xv), H - mb + 18, xv);
      out += buf;
      std::snprintf(buf, sizeof(buf),
                    "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"11\">%.4g</text>\n",
                    ml - 6, py(yv) + 4, yv);
      out += buf;
    }
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"%.2f\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">%s</text>\n",
                  (ml + W - mr) / 2, H - 12, x_label_.c_str());
    out += buf;
    std::snprintf(buf, sizeof(buf),
                  "<text x=\"16\" y=\"%.2f\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\" "
                  "transform=\"rotate(-90 16 %.2f)\">%s</text>\n",
                  (mt + H - mb) / 2, (mt + H - mb) / 2, y_label_.c_str());
    out += buf;

    int legend_row = 0;
    for (const PlotSeries& s : series_) {
      out += "<polyline fill=\"none\" stroke=\"" + s.stroke + "\"";
      if (s.dotted) out += " stroke-dasharray=\"2,4\"";
      out += " stroke-width=\"1.5\" points=\"";
      for (size_t i = 0; i < s.x.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%s%.2f,%.2f", i ? " " : "", px(s.x[i]), py(s.y[i]));
        out += buf;
      }
      out += "\"/>\n";
      if (!s.label.empty()) {
        const double ly = mt + 16 + 18 * legend_row++;
        std::snprintf(buf, sizeof(buf), "<line x1=\"%.2f\" y1=\"%.2f\" x2=\"%.2f\" y2=\"%.2f\" stroke=\"%s\"%s stroke-width=\"1.5\"/>\n",
                      W - mr - 150, ly - 4, W - mr - 120, ly - 4, s.stroke.c_str(),
                      s.dotted ? " stroke-dasharray=\"2,4\"" : "");
        out += buf;
        std::snprintf(buf, sizeof(buf),
                      "<text x=\"%.2f\" y=\"%.2f\" font-family=\"sans-serif\" font-size=\"12\">%s</text>\n",
                      W - mr - 112, ly, s.label.c_str());
        out += buf;
      }
    }
    out += "</svg>\n";
    return out;
  }

 private:
  std::string title_, x_label_, y_label_;
  std::vector<PlotSeries> series_;
};

}  // namespace fowler
