#include "leakscope/scatter_svg.hpp"

#include "file_util.hpp"
#include "leakscope/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <map>

namespace leakscope {

namespace {

constexpr std::array<const char *, 20> kPalette = {
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#e377c2",
    "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78", "#98df8a", "#ff9896",
    "#c5b0d5", "#c49c94", "#f7b6d2", "#c7c7c7", "#dbdb8d", "#9edae5"};

constexpr double kPlotPx = 800.0;
constexpr double kLegendPx = 220.0;
constexpr double kLegendRowPx = 16.0;

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string xml_escape(const std::string &s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
    case '&':
      out += "&amp;";
      break;
    case '<':
      out += "&lt;";
      break;
    case '>':
      out += "&gt;";
      break;
    case '"':
      out += "&quot;";
      break;
    case '\'':
      out += "&apos;";
      break;
    default:
      out.push_back(c);
    }
  }
  return out;
}

} // namespace

std::string scatter_svg(const Matrix &coords, const std::vector<std::string> &labels,
                        const std::string &title) {
  if (coords.cols() != 2)
    throw ValidationError("scatter: expected n x 2 coordinates, got " +
                          std::to_string(coords.cols()) + " columns");
  if (!labels.empty() && labels.size() != coords.rows())
    throw ValidationError("scatter: " + std::to_string(labels.size()) + " labels for " +
                          std::to_string(coords.rows()) + " points");
  for (double v : coords.data())
    if (!std::isfinite(v))
      throw ValidationError("scatter: non-finite coordinate");

  double min_x = 0, max_x = 0, min_y = 0, max_y = 0;
  if (coords.rows() > 0) {
    min_x = max_x = coords(0, 0);
    min_y = max_y = coords(0, 1);
  }
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    min_x = std::min(min_x, coords(i, 0));
    max_x = std::max(max_x, coords(i, 0));
    min_y = std::min(min_y, coords(i, 1));
    max_y = std::max(max_y, coords(i, 1));
  }
  const double span_x = std::max(max_x - min_x, 1e-9);
  const double span_y = std::max(max_y - min_y, 1e-9);
  const double margin_x = 0.05 * span_x, margin_y = 0.05 * span_y;
  const double radius = 0.005 * std::max(span_x, span_y);

  // Colors by first appearance; legend in the same order.
  std::map<std::string, std::size_t> color_of;
  std::vector<std::string> legend;
  for (const auto &l : labels)
    if (color_of.emplace(l, legend.size()).second)
      legend.push_back(l);

  const double legend_w = legend.empty() ? 0.0 : kLegendPx;
  const double height =
      std::max(kPlotPx, 40.0 + kLegendRowPx * static_cast<double>(legend.size()));
  std::string out;
  out += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" +
         num(kPlotPx + legend_w) + "\" height=\"" + num(height) + "\">\n";
  if (!title.empty())
    out += "  <title>" + xml_escape(title) + "</title>\n";
  out += "  <rect x=\"0\" y=\"0\" width=\"" + num(kPlotPx + legend_w) + "\" height=\"" +
         num(height) + "\" fill=\"white\"/>\n";
  // Data space; y is negated so larger y is drawn higher.
  out += "  <svg x=\"0\" y=\"0\" width=\"" + num(kPlotPx) + "\" height=\"" + num(kPlotPx) +
         "\" viewBox=\"" + num(min_x - margin_x) + " " + num(-max_y - margin_y) + " " +
         num(span_x + 2 * margin_x) + " " + num(span_y + 2 * margin_y) +
         "\" preserveAspectRatio=\"none\">\n";
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    const char *color = labels.empty() ? kPalette[0] : kPalette[color_of[labels[i]] % kPalette.size()];
    out += "    <circle cx=\"" + num(coords(i, 0)) + "\" cy=\"" + num(-coords(i, 1)) + "\" r=\"" +
           num(radius) + "\" fill=\"" + color + "\" fill-opacity=\"0.8\"/>\n";
  }
  out += "  </svg>\n";
  if (!legend.empty()) {
    out += "  <g class=\"legend\" font-family=\"sans-serif\" font-size=\"11\">\n";
    for (std::size_t k = 0; k < legend.size(); ++k) {
      const double y = 20.0 + kLegendRowPx * static_cast<double>(k);
      out += "    <g class=\"legend-entry\"><circle cx=\"" + num(kPlotPx + 14) + "\" cy=\"" +
             num(y) + "\" r=\"5\" fill=\"" + kPalette[k % kPalette.size()] + "\"/><text x=\"" +
             num(kPlotPx + 26) + "\" y=\"" + num(y + 4) + "\">" + xml_escape(legend[k]) +
             "</text></g>\n";
    }
    out += "  </g>\n";
  }
  out += "</svg>\n";
  return out;
}

void render_scatter(const Matrix &coords, const std::vector<std::string> &labels,
                    const std::filesystem::path &output_path, const std::string &title) {
  detail::write_text(output_path, scatter_svg(coords, labels, title));
}

std::string coords_csv(const Matrix &coords, const std::vector<std::string> &ids,
                       const std::vector<std::string> &labels) {
  std::string out = "id,x,y,label\n";
  for (std::size_t i = 0; i < coords.rows(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g", coords(i, 0), coords(i, 1));
    out += detail::csv_field(i < ids.size() ? ids[i] : std::to_string(i)) + "," + buf + "," +
           (i < labels.size() ? detail::csv_field(labels[i]) : std::string()) + "\n";
  }
  return out;
}

} // namespace leakscope
