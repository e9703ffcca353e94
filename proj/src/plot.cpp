#include "skb/plot.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "container_io.hpp"

namespace skb {

namespace {

constexpr int kPanelWidth = 640;
constexpr int kPanelHeight = 150;
constexpr int kMarginLeft = 70, kMarginRight = 20, kMarginTop = 26, kMarginBottom = 14;

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

struct Panel {
  double x_lo, x_hi, y_lo, y_hi;
  int top;  // pixel offset of the panel

  double px(double x) const {
    const double span = (x_hi > x_lo) ? x_hi - x_lo : 1.0;
    return kMarginLeft + (x - x_lo) / span * (kPanelWidth - kMarginLeft - kMarginRight);
  }
  double py(double y) const {
    const double span = (y_hi > y_lo) ? y_hi - y_lo : 1.0;
    return top + kMarginTop +
           (y_hi - y) / span * (kPanelHeight - kMarginTop - kMarginBottom);
  }
};

std::string polyline(const Panel& panel, const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                     const char* stroke, bool dashed) {
  std::string points;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    points += fmt(panel.px(x[i]));
    points += ",";
    points += fmt(panel.py(y[i]));
    if (i + 1 < x.size()) points += " ";
  }
  std::string line = "  <polyline fill=\"none\" stroke=\"";
  line += stroke;
  line += "\" stroke-width=\"1.5\"";
  if (dashed) line += " stroke-dasharray=\"6 4\"";
  line += " points=\"" + points + "\"/>\n";
  return line;
}

std::string panel_frame(const Panel& panel, const std::string& title) {
  char buf[512];
  std::snprintf(buf, sizeof(buf),
                "  <rect x=\"%d\" y=\"%d\" width=\"%d\" height=\"%d\" fill=\"none\" "
                "stroke=\"#333\" stroke-width=\"0.8\"/>\n"
                "  <text x=\"%d\" y=\"%d\" font-size=\"12\" font-family=\"sans-serif\">%s</text>\n"
                "  <text x=\"%d\" y=\"%d\" font-size=\"9\" font-family=\"sans-serif\" "
                "text-anchor=\"end\">%s</text>\n"
                "  <text x=\"%d\" y=\"%d\" font-size=\"9\" font-family=\"sans-serif\" "
                "text-anchor=\"end\">%s</text>\n",
                kMarginLeft, panel.top + kMarginTop, kPanelWidth - kMarginLeft - kMarginRight,
                kPanelHeight - kMarginTop - kMarginBottom, kMarginLeft, panel.top + 16,
                title.c_str(), kMarginLeft - 6, panel.top + kMarginTop + 10,
                fmt(panel.y_hi).c_str(), kMarginLeft - 6, panel.top + kPanelHeight - kMarginBottom,
                fmt(panel.y_lo).c_str());
  return buf;
}

}  // namespace

void write_trajectory_svg(const std::filesystem::path& path,
                          const Eigen::Ref<const Eigen::VectorXd>& times,
                          const Eigen::Ref<const Eigen::MatrixXd>& generated,
                          const Eigen::Ref<const Eigen::MatrixXd>& ground_truth,
                          const std::vector<std::string>& channel_names) {
  if (generated.rows() != times.size() || ground_truth.rows() != times.size())
    throw std::invalid_argument("write_trajectory_svg: row counts do not match times");
  if (generated.cols() != ground_truth.cols())
    throw std::invalid_argument("write_trajectory_svg: channel counts differ");
  const int channels = static_cast<int>(generated.cols());
  if (static_cast<int>(channel_names.size()) != channels)
    throw std::invalid_argument("write_trajectory_svg: one name per channel required");

  const int height = channels * kPanelHeight;
  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(kPanelWidth) + "\" height=\"" + std::to_string(height) +
                    "\" viewBox=\"0 0 " + std::to_string(kPanelWidth) + " " +
                    std::to_string(height) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

  for (int c = 0; c < channels; ++c) {
    Panel panel;
    panel.top = c * kPanelHeight;
    panel.x_lo = times.minCoeff();
    panel.x_hi = times.maxCoeff();
    double lo = std::min(generated.col(c).minCoeff(), ground_truth.col(c).minCoeff());
    double hi = std::max(generated.col(c).maxCoeff(), ground_truth.col(c).maxCoeff());
    const double pad = (hi > lo) ? 0.05 * (hi - lo) : 0.5;
    panel.y_lo = lo - pad;
    panel.y_hi = hi + pad;
    svg += panel_frame(panel, channel_names[c] + "  (dashed: ground truth, solid: generated)");
    svg += polyline(panel, times, ground_truth.col(c), "#777777", true);
    svg += polyline(panel, times, generated.col(c), "#1f77b4", false);
  }
  svg += "</svg>\n";
  detail::write_file_atomic(path, svg);
}

void write_loss_curve_svg(const std::filesystem::path& path,
                          const std::vector<std::pair<long, double>>& curve) {
  if (curve.empty()) throw std::invalid_argument("write_loss_curve_svg: empty curve");
  Eigen::VectorXd x(curve.size()), y(curve.size());
  for (size_t i = 0; i < curve.size(); ++i) {
    x[static_cast<Eigen::Index>(i)] = static_cast<double>(curve[i].first);
    y[static_cast<Eigen::Index>(i)] = curve[i].second;
  }
  Panel panel;
  panel.top = 0;
  panel.x_lo = x.minCoeff();
  panel.x_hi = x.maxCoeff();
  const double lo = y.minCoeff(), hi = y.maxCoeff();
  const double pad = (hi > lo) ? 0.05 * (hi - lo) : 0.5;
  panel.y_lo = lo - pad;
  panel.y_hi = hi + pad;

  std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                    std::to_string(kPanelWidth) + "\" height=\"" + std::to_string(kPanelHeight) +
                    "\" viewBox=\"0 0 " + std::to_string(kPanelWidth) + " " +
                    std::to_string(kPanelHeight) + "\">\n";
  svg += "  <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  svg += panel_frame(panel, "training loss");
  svg += polyline(panel, x, y, "#d62728", false);
  svg += "</svg>\n";
  detail::write_file_atomic(path, svg);
}

}  // namespace skb
