#include "mrx/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace mrx {

namespace {

class Svg {
 public:
  explicit Svg(double scale) : scale_(scale) {}

  std::string num(double v) const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v * scale_ + 0.0);
    return buf;
  }

  void raw(const std::string& s) { out_ += s; }

  void rect(double x, double y, double w, double h, const std::string& attrs) {
    out_ += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" + num(w) + "\" height=\"" + num(h) + "\" " +
            attrs + "/>\n";
  }

  void line(Point2 a, Point2 b, const std::string& attrs) {
    out_ += "<line x1=\"" + num(a.x) + "\" y1=\"" + num(a.y) + "\" x2=\"" + num(b.x) + "\" y2=\"" + num(b.y) + "\" " +
            attrs + "/>\n";
  }

  std::string take() { return std::move(out_); }

 private:
  double scale_;
  std::string out_;
};

// Emits one rect per horizontal run of cells accepted by `in`.
template <typename Pred>
void runs(Svg& svg, const OccupancyGrid& g, Pred in, const std::string& attrs) {
  const double res = g.resolution();
  for (int y = 0; y < g.height(); ++y) {
    int x = 0;
    while (x < g.width()) {
      if (!in(g.index(x, y))) {
        ++x;
        continue;
      }
      const int start = x;
      while (x < g.width() && in(g.index(x, y))) ++x;
      svg.rect(start * res, y * res, (x - start) * res, res, attrs);
    }
  }
}

}  // namespace

std::string region_color(int id) {
  const double hue = std::fmod(static_cast<double>(id) * 137.508, 360.0);
  const int light = 45 + 10 * (id % 3);
  char buf[48];
  std::snprintf(buf, sizeof buf, "hsl(%.1f,70%%,%d%%)", hue, light);
  return buf;
}

std::string render_svg(const OccupancyGrid& known, const Rrg* roadmap, const PlanView& plan,
                       const std::vector<RobotSim>& robots, double time, const RenderOptions& opts) {
  Svg svg(opts.pixels_per_meter);
  const double res = known.resolution();
  const double w = known.width() * res;
  const double h = known.height() * res;
  svg.raw("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
  svg.raw("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + svg.num(w) + "\" height=\"" + svg.num(h) +
          "\" viewBox=\"0 0 " + svg.num(w) + " " + svg.num(h) + "\">\n");
  svg.raw("<defs><marker id=\"arrow\" viewBox=\"0 0 10 10\" refX=\"9\" refY=\"5\" markerWidth=\"6\" "
          "markerHeight=\"6\" orient=\"auto\"><path d=\"M0,0 L10,5 L0,10 z\" fill=\"#c00000\"/></marker></defs>\n");

  svg.raw("<g id=\"occupancy\">\n");
  svg.rect(0, 0, w, h, "fill=\"#9e9e9e\"");
  runs(svg, known, [&](CellIndex i) { return known.at(i) == Cell::Free; }, "fill=\"#ffffff\"");
  runs(svg, known, [&](CellIndex i) { return known.at(i) == Cell::Obstacle; }, "fill=\"#202020\"");
  svg.raw("</g>\n");

  if (opts.regions && !plan.regions.empty()) {
    svg.raw("<g id=\"regions\" fill-opacity=\"0.6\">\n");
    std::vector<int> owner(known.size(), -1);
    for (std::size_t r = 0; r < plan.regions.size(); ++r) {
      for (CellIndex c : plan.regions[r].cells) {
        if (c >= 0 && static_cast<std::size_t>(c) < owner.size()) owner[static_cast<std::size_t>(c)] = static_cast<int>(r);
      }
    }
    for (std::size_t r = 0; r < plan.regions.size(); ++r) {
      const int id = plan.regions[r].id;
      svg.raw("<g class=\"region\" data-region=\"" + std::to_string(id) + "\" fill=\"" + region_color(id) + "\">\n");
      runs(svg, known,
           [&](CellIndex i) {
             return owner[static_cast<std::size_t>(i)] == static_cast<int>(r) && known.at(i) == Cell::Unknown;
           },
           "stroke=\"none\"");
      svg.raw("</g>\n");
    }
    svg.raw("</g>\n");
  }

  if (opts.roadmap && roadmap != nullptr && !roadmap->empty()) {
    svg.raw("<g id=\"roadmap\" stroke=\"#1565c0\" stroke-width=\"1\" stroke-opacity=\"0.5\">\n");
    for (std::size_t v = 0; v < roadmap->size(); ++v) {
      for (const auto& e : roadmap->neighbors(static_cast<int>(v))) {
        if (static_cast<std::size_t>(e.to) <= v) continue;
        svg.line(roadmap->vertex(static_cast<int>(v)), roadmap->vertex(e.to), "");
      }
    }
    svg.raw("</g>\n");
  }

  if (opts.routes && !plan.routes.empty()) {
    svg.raw("<g id=\"routes\" stroke=\"#c00000\" stroke-width=\"2\" marker-end=\"url(#arrow)\">\n");
    for (std::size_t r = 0; r < plan.routes.size(); ++r) {
      if (r >= plan.robots.size()) break;
      Point2 from = plan.robots[r];
      int step = 0;
      for (int idx : plan.routes[r]) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= plan.regions.size()) continue;
        const auto& region = plan.regions[static_cast<std::size_t>(idx)];
        const Point2 to = region.viewpoint.position;
        svg.line(from, to, "class=\"arrow\" data-robot=\"" + std::to_string(r) + "\" data-step=\"" +
                               std::to_string(step++) + "\" data-region=\"" + std::to_string(region.id) + "\"");
        from = to;
      }
    }
    svg.raw("</g>\n");
  }

  if (!robots.empty()) {
    svg.raw("<g id=\"robots\">\n");
    for (const auto& rb : robots) {
      const std::string cx = svg.num(rb.pose.x);
      const std::string cy = svg.num(rb.pose.y);
      svg.raw("<circle class=\"robot\" data-robot=\"" + std::to_string(rb.id) + "\" cx=\"" + cx + "\" cy=\"" + cy +
              "\" r=\"" + svg.num(0.4) + "\" fill=\"#ff6f00\" stroke=\"#000000\"/>\n");
      const Point2 tip{rb.pose.x + 0.8 * std::cos(rb.pose.theta), rb.pose.y + 0.8 * std::sin(rb.pose.theta)};
      svg.line(rb.pose.position(), tip, "stroke=\"#000000\" stroke-width=\"2\"");
    }
    svg.raw("</g>\n");
  }

  char buf[64];
  std::snprintf(buf, sizeof buf, "t=%.1f s", time);
  svg.raw("<text x=\"" + svg.num(0.5) + "\" y=\"" + svg.num(1.2) + "\" font-family=\"monospace\" font-size=\"" +
          svg.num(1.0) + "\" fill=\"#000000\">" + buf + "</text>\n");
  svg.raw("</svg>\n");
  return svg.take();
}

std::string render_snapshot(const World& w, const RenderOptions& opts) {
  return render_svg(w.known(), &w.rrg(), w.plan_view(), w.robots(), w.time(), opts);
}

}  // namespace mrx
