#pragma once

#include <string>
#include <vector>

namespace sil {

enum class PlotKind { risk_vs_n, residual_vs_n, coherence_hist };

PlotKind parse_plot_kind(const std::string& name);

struct PlotOutput {
  std::string svg;
  std::vector<std::string> warnings;
  int points = 0;
};

// risk_vs_n / residual_vs_n read columns n, arm and excess_risk / support_residual
// from a sweep CSV (log-log axes, one series per arm, medians joined).
// coherence_hist reads an avg_correlation column. Throws std::invalid_argument
// when a required column is missing.
PlotOutput render_plot(const std::string& csv_path, PlotKind kind);

// Renders and writes the SVG; returns the warnings.
std::vector<std::string> emit_plot(const std::string& csv_path, PlotKind kind,
                                   const std::string& svg_path);

}  // namespace sil
