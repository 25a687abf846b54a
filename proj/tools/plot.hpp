#pragma once

#include <filesystem>
#include <string>
#include <vector>

// Static SVG line plots rendered from already-written CSV files. Plotting is
// a convenience view: it never feeds back into simulation results.
namespace dbosim::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

void write_svg(const std::filesystem::path& path, const std::string& title,
               const std::string& xlabel, const std::string& ylabel,
               const std::vector<Series>& series, bool log_y = false);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column_index(const std::string& name) const;
  std::vector<double> column(const std::string& name) const;
  std::vector<std::string> text_column(const std::string& name) const;
};

CsvTable read_csv(const std::filesystem::path& path);

}  // namespace dbosim::plot
