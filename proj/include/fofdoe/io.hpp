// CSV and SVG artifact emission: designs, run curves, functional datasets,
// coefficient estimates. CSV layouts round-trip exactly through
// max-precision formatting.

#pragma once

#include "fofdoe/config.hpp"
#include "fofdoe/estimation.hpp"

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace fofdoe {

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("failed to open " + path.string() + " for writing");
  out << std::setprecision(17);
  return out;
}

inline std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("failed to open " + path.string() + " for reading");
  return in;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(trim(field));
  return fields;
}

inline Eigen::MatrixXd read_numeric_csv(const std::filesystem::path& path,
                                        bool skip_header) {
  std::ifstream in = open_input(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  if (skip_header) std::getline(in, line);
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const std::vector<std::string> fields = split_csv_line(line);
    std::vector<double> row;
    row.reserve(fields.size());
    for (const std::string& f : fields) row.push_back(std::stod(f));
    if (!rows.empty() && rows.front().size() != row.size())
      throw std::runtime_error("ragged CSV rows in " + path.string());
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error("no data rows in " + path.string());
  Eigen::MatrixXd out(rows.size(), rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r)
    for (std::size_t c = 0; c < rows[r].size(); ++c) out(r, c) = rows[r][c];
  return out;
}

}  // namespace detail

/// Design CSV: one row per run, intercept column omitted, header names the
/// factor/basis-index pairs.
inline void write_design_csv(const std::filesystem::path& path, const Design& design,
                             const DesignProblem& problem) {
  const BlockLayout layout = block_layout(problem);
  std::ofstream out = detail::open_output(path);
  for (std::size_t i = 0; i < problem.factors.size(); ++i)
    for (int k = 0; k < layout.factor_dim[i]; ++k)
      out << (i == 0 && k == 0 ? "" : ",") << "f" << i + 1 << "_c" << k + 1;
  out << "\n";
  for (int run = 0; run < design.n_runs(); ++run) {
    for (int col = 1; col < layout.gamma_cols; ++col)
      out << (col == 1 ? "" : ",") << design.gamma(run, col);
    out << "\n";
  }
}

inline Design read_design_csv(const std::filesystem::path& path,
                              const DesignProblem& problem) {
  const Eigen::MatrixXd block = detail::read_numeric_csv(path, /*skip_header=*/true);
  return make_design(problem, block);
}

/// Run curves for one factor on a uniform grid: x_n(s) = gamma_n' c(s).
/// Returned as grid_size x n_runs.
inline Eigen::MatrixXd sample_run_curves(const Design& design,
                                         const DesignProblem& problem,
                                         std::size_t factor_index, int grid_size) {
  const BlockLayout layout = block_layout(problem);
  const BasisSystem basis(problem.factors.at(factor_index).factor_basis);
  Eigen::MatrixXd vals(grid_size, basis.dimension());
  for (int i = 0; i < grid_size; ++i)
    vals.row(i) = basis.eval(static_cast<double>(i) / (grid_size - 1)).transpose();
  return vals * design.gamma
                    .middleCols(layout.factor_offset[factor_index],
                                layout.factor_dim[factor_index])
                    .transpose();
}

inline void write_curves_csv(const std::filesystem::path& path,
                             const Eigen::MatrixXd& curves) {
  std::ofstream out = detail::open_output(path);
  out << "s";
  for (Eigen::Index n = 0; n < curves.cols(); ++n) out << ",run_" << n + 1;
  out << "\n";
  for (Eigen::Index i = 0; i < curves.rows(); ++i) {
    out << static_cast<double>(i) / (curves.rows() - 1);
    for (Eigen::Index n = 0; n < curves.cols(); ++n) out << "," << curves(i, n);
    out << "\n";
  }
}

/// Minimal dependency-free SVG line plot; one polyline per column of values.
inline void write_svg_curves(const std::filesystem::path& path,
                             const Eigen::MatrixXd& curves, double y_min,
                             double y_max) {
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
  const double width = 720, height = 480, margin = 48;
  const auto x_pixel = [&](double s) { return margin + s * (width - 2 * margin); };
  const auto y_pixel = [&](double v) {
    return height - margin - (v - y_min) / (y_max - y_min) * (height - 2 * margin);
  };
  std::ofstream out = detail::open_output(path);
  out << std::setprecision(6);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width
      << " " << height << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  // frame and reference lines
  out << "<rect x=\"" << margin << "\" y=\"" << margin << "\" width=\""
      << width - 2 * margin << "\" height=\"" << height - 2 * margin
      << "\" fill=\"none\" stroke=\"black\"/>\n";
  if (y_min < 0.0 && y_max > 0.0)
    out << "<line x1=\"" << margin << "\" y1=\"" << y_pixel(0.0) << "\" x2=\""
        << width - margin << "\" y2=\"" << y_pixel(0.0)
        << "\" stroke=\"#cccccc\"/>\n";
  for (double tick : {0.0, 0.5, 1.0})
    out << "<text x=\"" << x_pixel(tick) << "\" y=\"" << height - margin + 18
        << "\" font-size=\"12\" text-anchor=\"middle\">" << tick << "</text>\n";
  for (double tick : {y_min, 0.5 * (y_min + y_max), y_max})
    out << "<text x=\"" << margin - 6 << "\" y=\"" << y_pixel(tick) + 4
        << "\" font-size=\"12\" text-anchor=\"end\">" << tick << "</text>\n";
  for (Eigen::Index n = 0; n < curves.cols(); ++n) {
    out << "<polyline fill=\"none\" stroke=\"" << kPalette[n % 8]
        << "\" stroke-width=\"1.5\" points=\"";
    for (Eigen::Index i = 0; i < curves.rows(); ++i)
      out << x_pixel(static_cast<double>(i) / (curves.rows() - 1)) << ","
          << y_pixel(curves(i, n)) << " ";
    out << "\"/>\n";
  }
  out << "</svg>\n";
}

/// Writes the design CSV plus per-factor curve CSVs (and SVGs when enabled)
/// into the output directory. Returns the emitted paths.
inline std::vector<std::filesystem::path> emit_design(const Design& design,
                                                      const DesignProblem& problem,
                                                      const OutputConfig& outputs) {
  std::filesystem::create_directories(outputs.directory);
  std::vector<std::filesystem::path> written;
  const std::filesystem::path dir(outputs.directory);

  const std::filesystem::path gamma_path = dir / "design.csv";
  write_design_csv(gamma_path, design, problem);
  written.push_back(gamma_path);

  for (std::size_t i = 0; i < problem.factors.size(); ++i) {
    const Eigen::MatrixXd curves =
        sample_run_curves(design, problem, i, outputs.curve_grid_size);
    const std::filesystem::path curve_path =
        dir / ("factor" + std::to_string(i + 1) + "_curves.csv");
    write_curves_csv(curve_path, curves);
    written.push_back(curve_path);
    if (outputs.emit_svg) {
      const std::filesystem::path svg_path =
          dir / ("factor" + std::to_string(i + 1) + "_curves.svg");
      write_svg_curves(svg_path, curves, -1.05 * problem.bound, 1.05 * problem.bound);
      written.push_back(svg_path);
    }
  }
  return written;
}

/// Dataset CSV: first row is the grid, following rows the responses.
inline void write_dataset_csv(const std::filesystem::path& path,
                              const FunctionalDataset& dataset) {
  std::ofstream out = detail::open_output(path);
  for (Eigen::Index i = 0; i < dataset.grid.size(); ++i)
    out << (i == 0 ? "" : ",") << dataset.grid(i);
  out << "\n";
  for (Eigen::Index n = 0; n < dataset.responses.rows(); ++n) {
    for (Eigen::Index i = 0; i < dataset.responses.cols(); ++i)
      out << (i == 0 ? "" : ",") << dataset.responses(n, i);
    out << "\n";
  }
}

inline FunctionalDataset read_dataset_csv(const std::filesystem::path& path) {
  const Eigen::MatrixXd all = detail::read_numeric_csv(path, /*skip_header=*/false);
  if (all.rows() < 2)
    throw std::runtime_error("dataset CSV needs a grid row and at least one response row: " +
                             path.string());
  FunctionalDataset dataset;
  dataset.grid = all.row(0).transpose();
  dataset.responses = all.bottomRows(all.rows() - 1);
  dataset.validate();
  return dataset;
}

inline void write_matrix_csv(const std::filesystem::path& path,
                             const Eigen::MatrixXd& matrix) {
  std::ofstream out = detail::open_output(path);
  for (Eigen::Index r = 0; r < matrix.rows(); ++r) {
    for (Eigen::Index c = 0; c < matrix.cols(); ++c)
      out << (c == 0 ? "" : ",") << matrix(r, c);
    out << "\n";
  }
}

inline Eigen::MatrixXd read_matrix_csv(const std::filesystem::path& path) {
  return detail::read_numeric_csv(path, /*skip_header=*/false);
}

/// Coefficient surface beta_i(s,t) sampled on a grid x grid lattice: first
/// row is the t grid (with a leading placeholder), the first column of each
/// following row is the s coordinate.
inline void write_beta_surface_csv(const std::filesystem::path& path,
                                   const CoefficientEstimate& estimate,
                                   int component, int grid_points = 101) {
  std::ofstream out = detail::open_output(path);
  out << "s\\t";
  for (int j = 0; j < grid_points; ++j)
    out << "," << static_cast<double>(j) / (grid_points - 1);
  out << "\n";
  for (int i = 0; i < grid_points; ++i) {
    const double s = static_cast<double>(i) / (grid_points - 1);
    out << s;
    for (int j = 0; j < grid_points; ++j) {
      const double t = static_cast<double>(j) / (grid_points - 1);
      out << "," << reconstruct_beta(estimate, s, t)(component);
    }
    out << "\n";
  }
}

}  // namespace fofdoe
