#include "addfit/csv_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include "addfit/errors.hpp"

namespace addfit {

std::string format_full(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t");
  return s.substr(a, b - a + 1);
}

}  // namespace

PanelData load_panel_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CsvError("cannot open " + path, 0);

  std::string line;
  long lineno = 0;

  // header x1..xJ,y1..yJ; leading '#' comment lines are ignored
  do {
    if (!std::getline(in, line)) throw CsvError("empty CSV: " + path, lineno);
    ++lineno;
  } while (!line.empty() && line[0] == '#');

  std::vector<std::string> header = split_csv_line(line);
  const size_t ncol = header.size();
  if (ncol < 4 || ncol % 2 != 0)
    throw CsvError("header must be x1..xJ,y1..yJ with J >= 2", lineno);
  const size_t J = ncol / 2;
  for (size_t c = 0; c < ncol; ++c) {
    std::string expect = (c < J ? "x" : "y") + std::to_string(c < J ? c + 1 : c - J + 1);
    if (trim(header[c]) != expect)
      throw CsvError("unexpected header column '" + trim(header[c]) +
                         "', expected '" + expect + "'",
                     lineno);
  }

  std::vector<std::vector<double>> data;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != ncol)
      throw CsvError("expected " + std::to_string(ncol) + " columns, got " +
                         std::to_string(cells.size()),
                     lineno);
    std::vector<double> row(ncol);
    for (size_t c = 0; c < ncol; ++c) {
      std::string cell = trim(cells[c]);
      try {
        size_t used = 0;
        row[c] = std::stod(cell, &used);
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw CsvError("cannot parse numeric value '" + cell + "'", lineno);
      }
    }
    data.push_back(std::move(row));
  }
  if (data.size() < 2) throw CsvError("CSV needs at least 2 data rows", lineno);

  PanelData panel;
  panel.x.resize(static_cast<long>(data.size()), static_cast<long>(J));
  panel.y.resize(static_cast<long>(data.size()), static_cast<long>(J));
  for (size_t g = 0; g < data.size(); ++g)
    for (size_t j = 0; j < J; ++j) {
      panel.x(static_cast<long>(g), static_cast<long>(j)) = data[g][j];
      panel.y(static_cast<long>(g), static_cast<long>(j)) = data[g][J + j];
    }
  panel.validate();
  return panel;
}

void write_panel_csv(const std::string& path, const PanelData& panel) {
  std::ofstream out(path);
  if (!out) throw CsvError("cannot write " + path, 0);
  const long J = panel.replicates();
  for (long j = 0; j < J; ++j) out << "x" << (j + 1) << ",";
  for (long j = 0; j < J; ++j) out << "y" << (j + 1) << (j + 1 < J ? "," : "\n");
  for (long g = 0; g < panel.units(); ++g) {
    for (long j = 0; j < J; ++j) out << format_full(panel.x(g, j)) << ",";
    for (long j = 0; j < J; ++j)
      out << format_full(panel.y(g, j)) << (j + 1 < J ? "," : "\n");
  }
}

}  // namespace addfit
