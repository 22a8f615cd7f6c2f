#pragma once

// Tables and figures rendered from the analysis CSVs. Rendering never
// recomputes analysis values; every number shown is read from a CSV cell.

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gpprobe/attention.h"

namespace gpprobe::report {

enum class ArtifactKind { kTrajectoryPlot, kAccuracyBar, kShiftTable, kHeatmap, kSurprisalPlot };
enum class ArtifactFormat { kSvg, kCsv, kMarkdown };

struct ReportArtifact {
  ArtifactKind kind;
  std::filesystem::path path;
  ArtifactFormat format;
};

// Percentages for comma absent (chunks 1-4, 1-5) then comma present
// (chunks 1-4, 1-5). Missing cells render as an en dash.
struct ShiftRow {
  std::string label;
  std::array<std::optional<double>, 4> cells;
};

// The two human rows (rejection rates of the misinterpretation question).
std::vector<ShiftRow> HumanShiftRows();

// Markdown table; model rows first, then the human rows. Throws when a
// value lies outside [0, 100].
std::string RenderShiftTable(const std::vector<ShiftRow>& model_rows);

struct Series {
  std::string label;
  std::vector<double> values;  // one per chunk
  bool dashed = false;
};

// Probability per chunk on a fixed [0, 1] axis.
std::string RenderTrajectoryPlot(const std::string& title, const std::vector<Series>& series);
// Mean bits per chunk; y axis from 0 to a rounded-up maximum.
std::string RenderSurprisalPlot(const std::string& title, const std::vector<Series>& series);

struct AccuracyGroup {
  std::string label;
  std::optional<double> comma_absent;   // percent
  std::optional<double> comma_present;  // percent
};

// Two-tone grouped bars, one group per model followed by the human groups.
std::string RenderAccuracyBar(const std::vector<AccuracyGroup>& models);

// Diverging heatmap, layers on y and heads on x; one <rect class="cell">
// per head. Throws on non-finite cells.
std::string RenderHeatmap(const std::string& title, const HeadMatrix& matrix);

// Number of non-cell elements RenderHeatmap emits, for any grid size.
int HeatmapChromeElements();

// Reads the analysis CSVs in each <reports_root>/<model>/ directory and
// writes the SVG/Markdown artifacts beside them, plus combined shift table
// and accuracy chart at the root. Returns artifacts in emission order.
std::vector<ReportArtifact> GenerateReports(const std::filesystem::path& reports_root);

}  // namespace gpprobe::report
