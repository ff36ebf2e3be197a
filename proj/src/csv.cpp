#include "penboot/csv.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace penboot {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  std::stringstream ss(line);
  while (std::getline(ss, cur, ',')) cells.push_back(trim(cur));
  if (!line.empty() && line.back() == ',') cells.push_back("");
  return cells;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, std::size_t col,
                       const std::string& what) {
  std::ostringstream os;
  os << origin << ": line " << line << ", column " << col << ": " << what;
  throw std::runtime_error(os.str());
}

double parse_cell(const std::string& cell, const std::string& origin,
                  std::size_t line, std::size_t col) {
  if (cell.empty()) fail(origin, line, col, "empty cell");
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end != cell.c_str() + cell.size() || errno == ERANGE)
    fail(origin, line, col, "not a number: '" + cell + "'");
  if (!std::isfinite(v)) fail(origin, line, col, "non-finite value: '" + cell + "'");
  return v;
}

} // namespace

RegressionProblem parse_problem(const std::string& text, const std::string& response,
                                const std::string& origin) {
  std::stringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error(origin + ": empty file");

  std::vector<std::string> header = split_line(line);
  if (header.empty()) throw std::runtime_error(origin + ": empty header row");

  std::size_t ycol = header.size();
  for (std::size_t c = 0; c < header.size(); ++c)
    if (header[c] == response) ycol = c;
  if (ycol == header.size())
    throw std::runtime_error(origin + ": response column '" + response + "' not found");

  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) continue;
    std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      std::ostringstream os;
      os << origin << ": line " << lineno << ": expected " << header.size()
         << " cells, got " << cells.size();
      throw std::runtime_error(os.str());
    }
    std::vector<double> row(cells.size());
    for (std::size_t c = 0; c < cells.size(); ++c)
      row[c] = parse_cell(cells[c], origin, lineno, c + 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::runtime_error(origin + ": no data rows");

  const int n = static_cast<int>(rows.size());
  const int p = static_cast<int>(header.size()) - 1;
  if (p < 1) throw std::runtime_error(origin + ": no predictor columns");

  RegressionProblem problem;
  problem.X.resize(n, p);
  problem.y.resize(n);
  problem.response_name = response;
  for (std::size_t c = 0; c < header.size(); ++c)
    if (c != ycol) problem.names.push_back(header[c]);
  for (int i = 0; i < n; ++i) {
    int k = 0;
    for (std::size_t c = 0; c < header.size(); ++c) {
      if (c == ycol)
        problem.y[i] = rows[i][c];
      else
        problem.X(i, k++) = rows[i][c];
    }
  }
  return problem;
}

RegressionProblem load_problem(const std::string& path, const std::string& response) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_problem(buf.str(), response, path);
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open '" + path + "' for writing");
  f.precision(17);
  for (std::size_t c = 0; c < header.size(); ++c)
    f << header[c] << (c + 1 < header.size() ? "," : "\n");
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < row.size(); ++c)
      f << row[c] << (c + 1 < row.size() ? "," : "\n");
  }
  if (!f) throw std::runtime_error("write failed for '" + path + "'");
}

} // namespace penboot
