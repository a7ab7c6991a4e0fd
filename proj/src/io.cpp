#include "sketchattn/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>
#include <tuple>
#include <vector>

#include "sketchattn/errors.hpp"

namespace sketchattn {

std::string format_g17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

const char* const kCsvHeader = "experiment,n,p,d,seed,method,kernel,metric,value";

namespace {

std::string trimmed(const std::string& s) {
  const std::size_t a = s.find_first_not_of(" \t\r");
  if (a == std::string::npos) return "";
  const std::size_t b = s.find_last_not_of(" \t\r");
  return s.substr(a, b - a + 1);
}

}  // namespace

DenseMatrix load_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("load_matrix: cannot open " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t cols = 0;
  std::size_t header_rows = 0, header_cols = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) {
      // a leading "# rows cols" comment declares the shape
      if (lineno == 1) {
        std::istringstream head(line.substr(hash + 1));
        std::size_t r = 0, c = 0;
        if (head >> r >> c) {
          have_header = true;
          header_rows = r;
          header_cols = c;
        }
      }
      line.erase(hash);
    }
    if (trimmed(line).empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    while (start <= line.size()) {
      const std::size_t comma = line.find(',', start);
      const std::size_t stop = comma == std::string::npos ? line.size() : comma;
      const std::string tok = trimmed(line.substr(start, stop - start));
      if (tok.empty()) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": empty entry");
      }
      char* end = nullptr;
      const double v = std::strtod(tok.c_str(), &end);
      if (end != tok.c_str() + tok.size()) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": bad number '" + tok + "'");
      }
      if (!std::isfinite(v)) {
        throw ParseError(path + ":" + std::to_string(lineno) + ": non-finite entry '" + tok +
                         "'");
      }
      row.push_back(v);
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (cols == 0) {
      cols = row.size();
    } else if (row.size() != cols) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected " +
                       std::to_string(cols) + " columns, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError(path + ": no data rows");
  if (have_header && (header_rows != rows.size() || header_cols != cols)) {
    throw ParseError(path + ":1: header says " + std::to_string(header_rows) + "x" +
                     std::to_string(header_cols) + " but parsed " + std::to_string(rows.size()) +
                     "x" + std::to_string(cols));
  }
  DenseMatrix m(rows.size(), cols);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double* dst = m.row_ptr(i);
    for (std::size_t j = 0; j < cols; ++j) dst[j] = rows[i][j];
  }
  return m;
}

void save_matrix(const std::string& path, const DenseMatrix& m) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_matrix: cannot open " + path);
  out << "# " << m.rows() << ' ' << m.cols() << '\n';
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* row = m.row_ptr(i);
    for (std::size_t j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_g17(row[j]);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("save_matrix: write failed for " + path);
}

namespace {

auto report_key(const ApproxReport& r) {
  return std::tie(r.experiment, r.n, r.p, r.d, r.seed, r.method, r.kernel, r.metric, r.value);
}

}  // namespace

void emit_csv(std::ostream& out, std::span<const ApproxReport> reports) {
  std::vector<ApproxReport> sorted(reports.begin(), reports.end());
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ApproxReport& a, const ApproxReport& b) {
                     return report_key(a) < report_key(b);
                   });
  out << kCsvHeader << '\n';
  for (const ApproxReport& r : sorted) {
    out << r.experiment << ',' << r.n << ',' << r.p << ',' << r.d << ',' << r.seed << ','
        << r.method << ',' << r.kernel << ',' << r.metric << ',' << format_g17(r.value) << '\n';
  }
}

void emit_csv(const std::string& path, std::span<const ApproxReport> reports) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("emit_csv: cannot open " + path);
  emit_csv(out, reports);
  if (!out) throw std::runtime_error("emit_csv: write failed for " + path);
}

}  // namespace sketchattn
