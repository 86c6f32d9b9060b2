#include "forceflow/svg.hpp"

#include "forceflow/io.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <string>

namespace forceflow::svg {

namespace {

constexpr double kSize = 600.0;
constexpr double kMargin = 30.0;

constexpr std::array<const char*, 10> kPalette = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                                  "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
                                                  "#bcbd22", "#17becf"};

std::string num(double v) {
  // Three decimals keeps files small and deterministic.
  const double r = std::round(v * 1000.0) / 1000.0;
  return io::format_double(r == 0.0 ? 0.0 : r);
}

struct Frame {
  double xmin, xmax, ymin, ymax;
  double scale;

  double px(double x) const { return kMargin + (x - xmin) * scale; }
  double py(double y) const { return kSize - kMargin - (y - ymin) * scale; }
};

Frame frame_for(double xmin, double xmax, double ymin, double ymax) {
  const double span = std::max({xmax - xmin, ymax - ymin, 1e-12});
  return {xmin, xmax, ymin, ymax, (kSize - 2 * kMargin) / span};
}

std::string header(const std::string& title) {
  return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(kSize) + "\" height=\"" +
         num(kSize) + "\" viewBox=\"0 0 " + num(kSize) + " " + num(kSize) +
         "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n<text x=\"" + num(kMargin) +
         "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" + title + "</text>\n";
}

// Piecewise-linear ramp through five viridis stops.
std::string ramp(double t) {
  static constexpr std::array<std::array<double, 3>, 5> stops = {
      {{68, 1, 84}, {59, 82, 139}, {33, 145, 140}, {94, 201, 98}, {253, 231, 37}}};
  t = std::clamp(t, 0.0, 1.0) * 4.0;
  const auto i = std::min<size_t>(3, static_cast<size_t>(t));
  const double f = t - static_cast<double>(i);
  std::string out = "rgb(";
  for (size_t c = 0; c < 3; ++c) {
    if (c) out += ',';
    out += std::to_string(
        static_cast<int>(std::lround(stops[i][c] + f * (stops[i + 1][c] - stops[i][c]))));
  }
  return out + ")";
}

}  // namespace

void scatter(const std::filesystem::path& path, const Points2& points, const Labels& categories,
             const std::string& title) {
  const Frame fr = frame_for(points.col(0).minCoeff(), points.col(0).maxCoeff(),
                             points.col(1).minCoeff(), points.col(1).maxCoeff());
  std::map<int, size_t> colour;
  for (int c : categories) colour.try_emplace(c, colour.size());
  std::string s = header(title);
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const char* fill = categories.empty()
                           ? kPalette[0]
                           : kPalette[colour[categories[static_cast<size_t>(i)]] % kPalette.size()];
    s += "<circle cx=\"" + num(fr.px(points(i, 0))) + "\" cy=\"" + num(fr.py(points(i, 1))) +
         "\" r=\"1.5\" fill=\"" + fill + "\" fill-opacity=\"0.7\"/>\n";
  }
  s += "</svg>\n";
  io::write_text(path, s);
}

void quiver(const std::filesystem::path& path, const FieldGrid& grid, const std::string& title) {
  const Frame fr = frame_for(grid.bbox.xmin, grid.bbox.xmax, grid.bbox.ymin, grid.bbox.ymax);
  const Eigen::VectorXd mag = grid.values.rowwise().norm();
  const double mmax = mag.size() ? std::max(mag.maxCoeff(), 1e-300) : 1.0;
  const double cell = std::min((grid.bbox.xmax - grid.bbox.xmin) / std::max(grid.nx, 1),
                               (grid.bbox.ymax - grid.bbox.ymin) / std::max(grid.ny, 1));
  std::string s = header(title);
  for (Eigen::Index i = 0; i < grid.positions.rows(); ++i) {
    if (!(mag(i) > 0)) continue;
    const double len = 0.45 * cell * std::sqrt(mag(i) / mmax);
    const double ux = grid.values(i, 0) / mag(i);
    const double uy = grid.values(i, 1) / mag(i);
    const double x0 = grid.positions(i, 0) - 0.5 * len * ux;
    const double y0 = grid.positions(i, 1) - 0.5 * len * uy;
    const double x1 = x0 + len * ux;
    const double y1 = y0 + len * uy;
    // Head: two short strokes at +-150 degrees from the direction.
    const double h = 0.35 * len;
    const double hx1 = x1 + h * (-0.866 * ux + 0.5 * uy);
    const double hy1 = y1 + h * (-0.5 * ux - 0.866 * uy);
    const double hx2 = x1 + h * (-0.866 * ux - 0.5 * uy);
    const double hy2 = y1 + h * (0.5 * ux - 0.866 * uy);
    s += "<path d=\"M" + num(fr.px(x0)) + " " + num(fr.py(y0)) + " L" + num(fr.px(x1)) + " " +
         num(fr.py(y1)) + " M" + num(fr.px(hx1)) + " " + num(fr.py(hy1)) + " L" + num(fr.px(x1)) +
         " " + num(fr.py(y1)) + " L" + num(fr.px(hx2)) + " " + num(fr.py(hy2)) +
         "\" stroke=\"" + ramp(mag(i) / mmax) + "\" fill=\"none\" stroke-width=\"1\"/>\n";
  }
  s += "</svg>\n";
  io::write_text(path, s);
}

}  // namespace forceflow::svg
