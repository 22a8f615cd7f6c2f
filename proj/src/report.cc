#include "gpprobe/report.h"

#include <algorithm>
#include <cmath>
#include <map>

#include "gpprobe/error.h"
#include "gpprobe/interpret.h"
#include "gpprobe/log.h"
#include "gpprobe/svg.h"
#include "gpprobe/table.h"

namespace gpprobe::report {

namespace fs = std::filesystem;

namespace {

constexpr double kWidth = 800;
constexpr double kHeight = 500;
constexpr double kLeft = 70;
constexpr double kRight = 600;
constexpr double kTop = 60;
constexpr double kBottom = 430;

const char* kPalette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                          "#66a61e", "#e6ab02", "#a6761d", "#666666"};

const char* Color(std::size_t i) { return kPalette[i % std::size(kPalette)]; }

constexpr const char* kEnDash = "–";

void Axes(svg::Document& doc, double y_max, int y_ticks, const std::string& y_label,
          const std::string& x_label) {
  doc.Line(kLeft, kBottom, kRight, kBottom, "#000000");
  doc.Line(kLeft, kTop, kLeft, kBottom, "#000000");
  for (int i = 0; i <= y_ticks; ++i) {
    const double v = y_max * i / y_ticks;
    const double y = kBottom - (kBottom - kTop) * i / y_ticks;
    doc.Line(kLeft - 4, y, kLeft, y, "#000000");
    doc.Text(kLeft - 8, y + 4, FormatTruncated(v, 4), "end", 11);
  }
  doc.Text(kLeft - 50, (kTop + kBottom) / 2, y_label, "middle", 12);
  doc.Text((kLeft + kRight) / 2, kBottom + 45, x_label, "middle", 12);
}

double ChunkX(int chunk_zero_based) {
  const double step = (kRight - kLeft) / 5.0;
  return kLeft + step * (chunk_zero_based + 0.5);
}

std::string LinePlot(const std::string& title, const std::vector<Series>& series,
                     double y_max, int y_ticks, const std::string& y_label) {
  if (series.empty()) throw ValidationError("plot '" + title + "': empty series");
  svg::Document doc(kWidth, kHeight);
  doc.Text(kWidth / 2, 30, title, "middle", 16);
  Axes(doc, y_max, y_ticks, y_label, "chunk");
  for (int c = 0; c < 5; ++c) {
    doc.Line(ChunkX(c), kBottom, ChunkX(c), kBottom + 4, "#000000");
    doc.Text(ChunkX(c), kBottom + 20, std::to_string(c + 1), "middle", 11);
  }
  for (std::size_t s = 0; s < series.size(); ++s) {
    const Series& se = series[s];
    if (se.values.size() != 5) {
      throw ValidationError("plot '" + title + "': series '" + se.label +
                            "' needs 5 chunk values");
    }
    std::vector<std::pair<double, double>> pts;
    for (int c = 0; c < 5; ++c) {
      const double v = se.values[c];
      if (!std::isfinite(v)) continue;
      pts.emplace_back(ChunkX(c), kBottom - (kBottom - kTop) * std::clamp(v / y_max, 0.0, 1.0));
    }
    doc.Polyline(pts, Color(s), 2.0, se.dashed, "series");
    const double ly = kTop + 20.0 * s;
    doc.Line(kRight + 20, ly, kRight + 50, ly, Color(s), 2.0, se.dashed);
    doc.Text(kRight + 56, ly + 4, se.label, "start", 11);
  }
  return doc.str();
}

}  // namespace

std::vector<ShiftRow> HumanShiftRows() {
  return {
      {std::string(kHumanQuestionAnswering.label),
       {std::nullopt, kHumanQuestionAnswering.comma_absent, std::nullopt,
        kHumanQuestionAnswering.comma_present}},
      {std::string(kHumanParaphrase.label),
       {std::nullopt, kHumanParaphrase.comma_absent, std::nullopt,
        kHumanParaphrase.comma_present}},
  };
}

std::string RenderShiftTable(const std::vector<ShiftRow>& model_rows) {
  std::string out;
  out += "| Model / Human | Comma absent: chunks 1-4 | Comma absent: chunks 1-5 | "
         "Comma present: chunks 1-4 | Comma present: chunks 1-5 |\n";
  out += "|---|---:|---:|---:|---:|\n";
  auto rows = model_rows;
  for (auto& h : HumanShiftRows()) rows.push_back(std::move(h));
  for (const ShiftRow& r : rows) {
    out += "| " + r.label + " |";
    for (const auto& cell : r.cells) {
      if (!cell) {
        out += std::string(" ") + kEnDash + " |";
        continue;
      }
      if (!(*cell >= 0.0 && *cell <= 100.0)) {
        throw ValidationError("shift table: value for '" + r.label + "' outside [0, 100]");
      }
      out += " " + FormatFixed(*cell, 2) + " |";
    }
    out += "\n";
  }
  return out;
}

std::string RenderTrajectoryPlot(const std::string& title, const std::vector<Series>& series) {
  return LinePlot(title, series, 1.0, 4, "P(yes), normalized");
}

std::string RenderSurprisalPlot(const std::string& title, const std::vector<Series>& series) {
  double top = 0.0;
  for (const auto& s : series) {
    for (double v : s.values) {
      if (std::isfinite(v)) top = std::max(top, v);
    }
  }
  top = std::max(1.0, std::ceil(top));
  return LinePlot(title, series, top, 4, "mean surprisal (bits)");
}

std::string RenderAccuracyBar(const std::vector<AccuracyGroup>& models) {
  if (models.empty()) throw ValidationError("accuracy chart: no models");
  std::vector<AccuracyGroup> groups = models;
  for (const HumanBaseline& h : {kHumanQuestionAnswering, kHumanParaphrase}) {
    groups.push_back({std::string(h.label), h.comma_absent, h.comma_present});
  }
  const std::string light = "#9ecae1";
  const std::string dark = "#08519c";
  svg::Document doc(kWidth, kHeight);
  doc.Text(kWidth / 2, 30, "Final answer accuracy (misinterpretation rejected)", "middle", 16);
  Axes(doc, 100.0, 5, "% correctly rejected", "");
  const double slot = (kRight - kLeft) / double(groups.size());
  const double bar = slot * 0.35;
  for (std::size_t g = 0; g < groups.size(); ++g) {
    const double x0 = kLeft + slot * g + slot * 0.15;
    const auto draw = [&](const std::optional<double>& v, double x, const std::string& fill) {
      if (!v) return;
      if (!(*v >= 0.0 && *v <= 100.0)) {
        throw ValidationError("accuracy chart: value outside [0, 100]");
      }
      const double h = (kBottom - kTop) * (*v / 100.0);
      doc.Rect(x, kBottom - h, bar, h, fill, "bar", groups[g].label + ": " + FormatFixed(*v, 2));
    };
    draw(groups[g].comma_absent, x0, light);
    draw(groups[g].comma_present, x0 + bar, dark);
    doc.Text(x0 + bar, kBottom + 18, groups[g].label, "middle", 10);
  }
  doc.Rect(kRight + 20, kTop, 14, 14, light);
  doc.Text(kRight + 40, kTop + 12, "comma absent", "start", 11);
  doc.Rect(kRight + 20, kTop + 22, 14, 14, dark);
  doc.Text(kRight + 40, kTop + 34, "comma present", "start", 11);
  return doc.str();
}

int HeatmapChromeElements() { return 20; }

std::string RenderHeatmap(const std::string& title, const HeadMatrix& m) {
  if (m.n_layers < 1 || m.n_heads < 1) throw ValidationError("heatmap: empty matrix");
  double lo = m.values[0];
  double hi = m.values[0];
  double limit = 0.0;
  for (double v : m.values) {
    if (!std::isfinite(v)) throw ValidationError("heatmap '" + title + "': NaN or infinite cell");
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    limit = std::max(limit, std::abs(v));
  }
  if (limit == 0.0) limit = 1.0;

  constexpr double gx0 = 80, gx1 = 620, gy0 = 60, gy1 = 440;
  const double cw = (gx1 - gx0) / m.n_heads;
  const double ch = (gy1 - gy0) / m.n_layers;
  svg::Document doc(kWidth, kHeight);
  // Chrome: 1 title + 2 axis labels + 4 range labels + 11 swatches + 2 legend texts.
  doc.Text(kWidth / 2, 30, title, "middle", 16);
  doc.Text((gx0 + gx1) / 2, gy1 + 40, "head", "middle", 12);
  doc.Text(gx0 - 45, (gy0 + gy1) / 2, "layer", "middle", 12);
  doc.Text(gx0 + cw / 2, gy1 + 16, "0", "middle", 10);
  doc.Text(gx1 - cw / 2, gy1 + 16, std::to_string(m.n_heads - 1), "middle", 10);
  doc.Text(gx0 - 6, gy0 + ch / 2 + 4, "0", "end", 10);
  doc.Text(gx0 - 6, gy1 - ch / 2 + 4, std::to_string(m.n_layers - 1), "end", 10);
  for (int l = 0; l < m.n_layers; ++l) {
    for (int h = 0; h < m.n_heads; ++h) {
      const double v = m.at(l, h);
      doc.Rect(gx0 + cw * h, gy0 + ch * l, cw, ch, svg::Diverging(v / limit).Hex(), "cell",
               "layer " + std::to_string(l) + ", head " + std::to_string(h) + ": " +
                   FormatTruncated(v, 4));
    }
  }
  for (int i = 0; i <= 10; ++i) {
    const double t = 1.0 - i / 5.0;
    doc.Rect(650, gy0 + 20 * i, 20, 20, svg::Diverging(t).Hex(), "legend");
  }
  doc.Text(676, gy0 + 14, "max " + FormatTruncated(hi, 4), "start", 11);
  doc.Text(676, gy0 + 214, "min " + FormatTruncated(lo, 4), "start", 11);
  return doc.str();
}

namespace {

bool Exists(const fs::path& p) {
  std::error_code ec;
  return fs::is_regular_file(p, ec);
}

std::vector<double> ChunkValues(const CsvTable& t, const std::string& where,
                                const std::string& variant, const std::string& column) {
  std::vector<double> v(5, std::nan(""));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.Cell(r, "variant") != variant) continue;
    const int c = ParseInt(t.Cell(r, "chunk"), where);
    if (c < 1 || c > 5) throw ValidationError(where + ": chunk out of range");
    v[c - 1] = ParseDouble(t.Cell(r, column), where);
  }
  return v;
}

bool HasVariant(const CsvTable& t, const std::string& variant) {
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    if (t.Cell(r, "variant") == variant) return true;
  }
  return false;
}

std::string VariantLabel(const std::string& v) {
  return v == "comma_absent" ? "comma absent" : "comma present";
}

}  // namespace

std::vector<ReportArtifact> GenerateReports(const fs::path& root) {
  std::error_code ec;
  if (!fs::is_directory(root, ec)) throw IoError("report directory not found: " + root.string());
  std::vector<fs::path> model_dirs;
  for (const auto& e : fs::directory_iterator(root)) {
    if (e.is_directory()) model_dirs.push_back(e.path());
  }
  std::sort(model_dirs.begin(), model_dirs.end());

  std::vector<ReportArtifact> out;
  std::vector<ShiftRow> shift_rows;
  std::vector<AccuracyGroup> accuracy_groups;
  const std::vector<std::string> variants = {"comma_absent", "comma_present"};

  for (const fs::path& dir : model_dirs) {
    const std::string model = dir.filename().string();

    if (Exists(dir / "trajectory_mean.csv")) {
      const auto t = ReadCsv(dir / "trajectory_mean.csv");
      std::vector<Series> series;
      std::optional<CsvTable> correct;
      if (Exists(dir / "trajectory_correct_mean.csv")) {
        correct = ReadCsv(dir / "trajectory_correct_mean.csv");
      }
      for (const auto& v : variants) {
        if (HasVariant(t, v)) {
          series.push_back({"Q1 misinterpretation, " + VariantLabel(v),
                            ChunkValues(t, (dir / "trajectory_mean.csv").string(), v,
                                        "mean_p_yes_norm"),
                            false});
        }
        if (correct && HasVariant(*correct, v)) {
          series.push_back({"Q2 correct, " + VariantLabel(v),
                            ChunkValues(*correct, (dir / "trajectory_correct_mean.csv").string(),
                                        v, "mean_p_yes_norm"),
                            true});
        }
      }
      const fs::path p = dir / "trajectory.svg";
      WriteTextFile(p, RenderTrajectoryPlot(model + ": semantic tracking", series));
      out.push_back({ArtifactKind::kTrajectoryPlot, p, ArtifactFormat::kSvg});
    }

    if (Exists(dir / "surprisal_mean.csv")) {
      const auto t = ReadCsv(dir / "surprisal_mean.csv");
      std::vector<Series> series;
      for (const auto& v : variants) {
        if (HasVariant(t, v)) {
          series.push_back({VariantLabel(v),
                            ChunkValues(t, (dir / "surprisal_mean.csv").string(), v, "mean_bits"),
                            false});
        }
      }
      const fs::path p = dir / "surprisal.svg";
      WriteTextFile(p, RenderSurprisalPlot(model + ": surprisal per chunk", series));
      out.push_back({ArtifactKind::kSurprisalPlot, p, ArtifactFormat::kSvg});
    }

    if (Exists(dir / "accuracy.csv")) {
      const auto t = ReadCsv(dir / "accuracy.csv");
      AccuracyGroup g{model, std::nullopt, std::nullopt};
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const double pct = ParseDouble(t.Cell(r, "accuracy_pct"), (dir / "accuracy.csv").string());
        if (t.Cell(r, "variant") == "comma_absent") g.comma_absent = pct;
        if (t.Cell(r, "variant") == "comma_present") g.comma_present = pct;
      }
      accuracy_groups.push_back(g);
      const fs::path p = dir / "accuracy.svg";
      WriteTextFile(p, RenderAccuracyBar({g}));
      out.push_back({ArtifactKind::kAccuracyBar, p, ArtifactFormat::kSvg});
    }

    if (Exists(dir / "shift.csv")) {
      const auto t = ReadCsv(dir / "shift.csv");
      ShiftRow row{model, {}};
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string where = (dir / "shift.csv").string();
        const int col = (t.Cell(r, "variant") == "comma_present" ? 2 : 0) +
                        (t.Cell(r, "stage") == "chunks_1_5" ? 1 : 0);
        row.cells[col] = ParseDouble(t.Cell(r, "percent"), where);
      }
      shift_rows.push_back(row);
      const fs::path p = dir / "shift_table.md";
      WriteTextFile(p, RenderShiftTable({row}));
      out.push_back({ArtifactKind::kShiftTable, p, ArtifactFormat::kMarkdown});
    }

    for (const std::string name : {"heatmap_comma_absent", "heatmap_comma_present",
                                   "heatmap_difference"}) {
      const fs::path csv = dir / (name + ".csv");
      if (!Exists(csv)) continue;
      const HeadMatrix m = HeadMatrixFromTable(ReadCsv(csv), csv.string());
      const fs::path p = dir / (name + ".svg");
      WriteTextFile(p, RenderHeatmap(model + ": " + name.substr(8), m));
      out.push_back({ArtifactKind::kHeatmap, p, ArtifactFormat::kSvg});
    }
  }

  if (!shift_rows.empty()) {
    const fs::path p = root / "shift_table.md";
    WriteTextFile(p, RenderShiftTable(shift_rows));
    out.push_back({ArtifactKind::kShiftTable, p, ArtifactFormat::kMarkdown});
  }
  if (!accuracy_groups.empty()) {
    const fs::path p = root / "accuracy.svg";
    WriteTextFile(p, RenderAccuracyBar(accuracy_groups));
    out.push_back({ArtifactKind::kAccuracyBar, p, ArtifactFormat::kSvg});
  }
  if (out.empty()) log::Warn("report: no analysis CSVs found under ", root.string());
  return out;
}

}  // namespace gpprobe::report
