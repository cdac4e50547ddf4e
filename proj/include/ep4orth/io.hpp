#pragma once

#include "ep4orth/types.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace ep4orth::io {

enum class Format { MatrixMarket, Csv };

inline Format format_from_name(const std::string& name) {
  if (name == "mm" || name == "mtx") return Format::MatrixMarket;
  if (name == "csv") return Format::Csv;
  throw Error(ErrorCode::InvalidParameter, "unknown matrix format '" + name + "' (expected mm or csv)");
}

inline Format format_from_path(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  return ext == ".csv" ? Format::Csv : Format::MatrixMarket;
}

namespace detail {

[[noreturn]] inline void parse_fail(const std::string& path, long line, const std::string& what) {
  throw Error(ErrorCode::ParseError, path + ":" + std::to_string(line) + ": " + what);
}

inline double parse_double(const std::string& tok, const std::string& path, long line) {
  const char* begin = tok.c_str();
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(begin, &end);
  while (end != nullptr && (*end == ' ' || *end == '\t' || *end == '\r')) ++end;
  if (end == begin || *end != '\0') parse_fail(path, line, "not a number: '" + tok + "'");
  if (!std::isfinite(v)) parse_fail(path, line, "non-finite value '" + tok + "'");
  return v;
}

inline long parse_index(const std::string& tok, const std::string& path, long line) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0' || v < 0) parse_fail(path, line, "bad integer '" + tok + "'");
  return v;
}

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline std::string lower(std::string s) {
  for (char& c : s) c = char(std::tolower(static_cast<unsigned char>(c)));
  return s;
}

inline Matrix read_matrix_market(std::istream& in, const std::string& path) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) parse_fail(path, 1, "empty file");
  ++lineno;
  std::istringstream header(lower(line));
  std::string banner, object, layout, field, symmetry;
  header >> banner >> object >> layout >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix") parse_fail(path, lineno, "missing %%MatrixMarket matrix header");
  if (layout != "array" && layout != "coordinate") parse_fail(path, lineno, "unsupported layout '" + layout + "'");
  if (field != "real" && field != "double" && field != "integer") parse_fail(path, lineno, "unsupported field '" + field + "'");
  if (symmetry != "general") parse_fail(path, lineno, "unsupported symmetry '" + symmetry + "'");

  auto next_data_line = [&](std::string& out) {
    while (std::getline(in, out)) {
      ++lineno;
      const auto first = out.find_first_not_of(" \t\r");
      if (first == std::string::npos || out[first] == '%') continue;
      return true;
    }
    return false;
  };

  if (!next_data_line(line)) parse_fail(path, lineno, "missing size line");
  std::istringstream size_line(line);
  std::string tr, tc, tn;
  size_line >> tr >> tc;
  const long rows = parse_index(tr, path, lineno);
  const long cols = parse_index(tc, path, lineno);
  Matrix m = Matrix::Zero(rows, cols);
  if (layout == "array") {
    for (long j = 0; j < cols; ++j) {
      for (long i = 0; i < rows; ++i) {
        if (!next_data_line(line)) parse_fail(path, lineno, "unexpected end of data");
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        m(i, j) = parse_double(tok, path, lineno);
      }
    }
  } else {
    size_line >> tn;
    const long nnz = parse_index(tn, path, lineno);
    for (long e = 0; e < nnz; ++e) {
      if (!next_data_line(line)) parse_fail(path, lineno, "unexpected end of data");
      std::istringstream ls(line);
      std::string ti, tj, tv;
      ls >> ti >> tj >> tv;
      const long i = parse_index(ti, path, lineno);
      const long j = parse_index(tj, path, lineno);
      if (i < 1 || i > rows || j < 1 || j > cols) parse_fail(path, lineno, "index out of range");
      m(i - 1, j - 1) = parse_double(tv, path, lineno);
    }
  }
  if (next_data_line(line)) parse_fail(path, lineno, "trailing data");
  return m;
}

inline Matrix read_csv(std::istream& in, const std::string& path) {
  std::vector<std::vector<double>> rows;
  std::string line;
  long lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<double> row;
    std::stringstream ls(line);
    std::string tok;
    while (std::getline(ls, tok, ',')) {
      const auto a = tok.find_first_not_of(" \t\r");
      const auto b = tok.find_last_not_of(" \t\r");
      if (a == std::string::npos) parse_fail(path, lineno, "empty field");
      row.push_back(parse_double(tok.substr(a, b - a + 1), path, lineno));
    }
    if (!rows.empty() && row.size() != rows.front().size()) {
      throw Error(ErrorCode::DimensionMismatch, path + ":" + std::to_string(lineno) + ": ragged row");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_fail(path, lineno, "no data");
  Matrix m(Index(rows.size()), Index(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j) m(i, j) = rows[std::size_t(i)][std::size_t(j)];
  return m;
}

}  // namespace detail

inline Matrix read_matrix(const std::filesystem::path& path, Format fmt) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, path.string() + ": cannot open");
  return fmt == Format::Csv ? detail::read_csv(in, path.string()) : detail::read_matrix_market(in, path.string());
}

inline Matrix read_matrix(const std::filesystem::path& path) { return read_matrix(path, format_from_path(path)); }

inline std::string to_string(const Matrix& m, Format fmt) {
  std::string out;
  if (fmt == Format::Csv) {
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (j > 0) out += ',';
        out += detail::format_double(m(i, j));
      }
      out += '\n';
    }
    return out;
  }
  out = "%%MatrixMarket matrix array real general\n";
  out += std::to_string(m.rows()) + " " + std::to_string(m.cols()) + "\n";
  for (Index j = 0; j < m.cols(); ++j)
    for (Index i = 0; i < m.rows(); ++i) out += detail::format_double(m(i, j)) + "\n";
  return out;
}

/// Writes through a temporary file in the same directory and renames it into place.
inline void write_text_atomic(const std::filesystem::path& path, const std::string& text) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::ParseError, tmp.string() + ": cannot open for writing");
    out << text;
    if (!out.flush()) throw Error(ErrorCode::ParseError, tmp.string() + ": write failed");
  }
  std::filesystem::rename(tmp, path);
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m, Format fmt) {
  write_text_atomic(path, to_string(m, fmt));
}

inline void write_matrix(const std::filesystem::path& path, const Matrix& m) {
  write_matrix(path, m, format_from_path(path));
}

}  // namespace ep4orth::io
