#pragma once

#include <charconv>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "sketchcond/data_matrix.hpp"

namespace sketchcond {

/// csv: dense rows, label in the last column.
/// triplet: header "n d nnz" then nnz lines "row col value" (0-based), labels from a separate file.
/// libsvm: "label index:value ..." with 1-based indices.
enum class DataFormat { Csv, Triplet, Libsvm };

inline DataFormat parse_format(std::string_view s) {
  if (s == "csv") return DataFormat::Csv;
  if (s == "triplet") return DataFormat::Triplet;
  if (s == "libsvm") return DataFormat::Libsvm;
  throw PreconditionError("unknown data format '" + std::string(s) + "' (expected csv, triplet or libsvm)");
}

struct Dataset {
  DataMatrix x;   ///< raw instances
  Vector labels;  ///< empty when the format carries none
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

inline double parse_double(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  double v = 0.0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
    throw ParseError("cannot parse number '" + std::string(tok) + "'", line);
  }
  if (!std::isfinite(v)) throw ParseError("non-finite value '" + std::string(tok) + "'", line);
  return v;
}

inline long long parse_int(std::string_view tok, std::size_t line) {
  tok = trim(tok);
  long long v = 0;
  const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size()) {
    throw ParseError("cannot parse integer '" + std::string(tok) + "'", line);
  }
  return v;
}

inline std::vector<std::string_view> split_ws(std::string_view s) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && (s[i] == ' ' || s[i] == '\t' || s[i] == '\r')) ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ' && s[i] != '\t' && s[i] != '\r') ++i;
    if (i > start) out.push_back(s.substr(start, i - start));
  }
  return out;
}

inline std::ifstream open_input(const std::string& path) {
  if (!std::filesystem::exists(path)) throw PreconditionError("file not found: '" + path + "'");
  std::ifstream is(path);
  if (!is) throw PreconditionError("cannot open '" + path + "'");
  return is;
}

inline std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

}  // namespace detail

inline Dataset read_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  std::size_t width = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const std::string_view t = detail::trim(line);
    if (t.empty()) continue;
    std::vector<double> row;
    std::size_t start = 0;
    for (;;) {
      const std::size_t pos = t.find(',', start);
      row.push_back(detail::parse_double(t.substr(start, pos == std::string_view::npos ? pos : pos - start), lineno));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (row.size() < 2) throw ParseError("csv rows need at least one feature and a label", lineno);
    if (width == 0) width = row.size();
    if (row.size() != width) {
      throw ParseError("inconsistent width: expected " + std::to_string(width) + " columns, got " + std::to_string(row.size()),
                       lineno);
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw PreconditionError("empty input: csv file has no rows");
  const Index n = static_cast<Index>(rows.size());
  const Index d = static_cast<Index>(width) - 1;
  Matrix x(n, d);
  Vector y(n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < d; ++j) x(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
    y(i) = rows[static_cast<std::size_t>(i)].back();
  }
  return {DataMatrix::dense(std::move(x)), std::move(y)};
}

inline Dataset read_triplet(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  long long n = -1, d = -1, nnz = -1;
  std::vector<Eigen::Triplet<double>> trips;
  while (std::getline(is, line)) {
    ++lineno;
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    if (tok.size() != 3) throw ParseError("triplet lines need exactly three fields", lineno);
    if (n < 0) {
      n = detail::parse_int(tok[0], lineno);
      d = detail::parse_int(tok[1], lineno);
      nnz = detail::parse_int(tok[2], lineno);
      if (n < 1 || d < 1 || nnz < 0) throw ParseError("triplet header needs n >= 1, d >= 1, nnz >= 0", lineno);
      trips.reserve(static_cast<std::size_t>(nnz));
      continue;
    }
    const long long i = detail::parse_int(tok[0], lineno);
    const long long j = detail::parse_int(tok[1], lineno);
    if (i < 0 || i >= n || j < 0 || j >= d) throw ParseError("triplet index out of range", lineno);
    trips.emplace_back(static_cast<Index>(i), static_cast<Index>(j), detail::parse_double(tok[2], lineno));
  }
  if (n < 0) throw PreconditionError("empty input: triplet file has no header");
  if (static_cast<long long>(trips.size()) != nnz) {
    throw ParseError("header announced " + std::to_string(nnz) + " entries, found " + std::to_string(trips.size()), lineno);
  }
  return {DataMatrix::from_triplets(static_cast<Index>(n), static_cast<Index>(d), trips, Scaling::Raw, 0), Vector()};
}

inline Vector read_labels(std::istream& is) {
  std::vector<double> vals;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (detail::trim(line).empty()) continue;
    vals.push_back(detail::parse_double(line, lineno));
  }
  return Eigen::Map<const Vector>(vals.data(), static_cast<Index>(vals.size()));
}

inline Dataset read_libsvm(std::istream& is, Index min_dim = 0) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<double> labels;
  std::vector<Eigen::Triplet<double>> trips;
  Index d = min_dim;
  while (std::getline(is, line)) {
    ++lineno;
    const auto tok = detail::split_ws(line);
    if (tok.empty()) continue;
    const Index row = static_cast<Index>(labels.size());
    labels.push_back(detail::parse_double(tok[0], lineno));
    for (std::size_t k = 1; k < tok.size(); ++k) {
      const auto colon = tok[k].find(':');
      if (colon == std::string_view::npos) throw ParseError("expected index:value, got '" + std::string(tok[k]) + "'", lineno);
      const long long idx = detail::parse_int(tok[k].substr(0, colon), lineno);
      if (idx < 1) throw ParseError("libsvm indices are 1-based", lineno);
      trips.emplace_back(row, static_cast<Index>(idx - 1), detail::parse_double(tok[k].substr(colon + 1), lineno));
      d = std::max(d, static_cast<Index>(idx));
    }
  }
  if (labels.empty()) throw PreconditionError("empty input: libsvm file has no rows");
  if (d < 1) throw PreconditionError("empty input: libsvm file has no features");
  const Index n = static_cast<Index>(labels.size());
  return {DataMatrix::from_triplets(n, d, trips), Eigen::Map<const Vector>(labels.data(), n)};
}

/// Loads a dataset; labels_path (triplet only) supplies one label per line.
inline Dataset load_dataset(const std::string& path, DataFormat format, const std::string& labels_path = {}) {
  std::ifstream is = detail::open_input(path);
  Dataset ds = [&] {
    switch (format) {
      case DataFormat::Csv:
        return read_csv(is);
      case DataFormat::Triplet:
        return read_triplet(is);
      case DataFormat::Libsvm:
        break;
    }
    return read_libsvm(is);
  }();
  if (!labels_path.empty()) {
    std::ifstream ls = detail::open_input(labels_path);
    ds.labels = read_labels(ls);
  }
  if (ds.labels.size() != 0 && ds.labels.size() != ds.x.rows()) {
    throw PreconditionError("label count " + std::to_string(ds.labels.size()) + " does not match row count " +
                            std::to_string(ds.x.rows()));
  }
  return ds;
}

inline void write_csv(std::ostream& os, const DataMatrix& x, const Vector& labels) {
  detail::require(labels.size() == x.rows(), "csv output needs one label per row");
  const Matrix m = x.to_dense();
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) os << detail::format_double(m(i, j)) << ',';
    os << detail::format_double(labels(i)) << '\n';
  }
}

inline void write_triplet(std::ostream& os, const DataMatrix& x) {
  std::vector<Eigen::Triplet<double>> trips;
  if (x.is_sparse()) {
    const auto& s = x.sparse_values();
    for (Index i = 0; i < s.outerSize(); ++i) {
      for (SparseRowMatrix::InnerIterator it(s, i); it; ++it) trips.emplace_back(it.row(), it.col(), it.value());
    }
  } else {
    const Matrix& m = x.dense_values();
    for (Index i = 0; i < m.rows(); ++i) {
      for (Index j = 0; j < m.cols(); ++j) {
        if (m(i, j) != 0.0) trips.emplace_back(i, j, m(i, j));
      }
    }
  }
  os << x.rows() << ' ' << x.cols() << ' ' << trips.size() << '\n';
  for (const auto& t : trips) os << t.row() << ' ' << t.col() << ' ' << detail::format_double(t.value()) << '\n';
}

inline void write_libsvm(std::ostream& os, const DataMatrix& x, const Vector& labels) {
  detail::require(labels.size() == x.rows(), "libsvm output needs one label per row");
  const Matrix m = x.to_dense();
  for (Index i = 0; i < m.rows(); ++i) {
    os << detail::format_double(labels(i));
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) os << ' ' << (j + 1) << ':' << detail::format_double(m(i, j));
    }
    os << '\n';
  }
}

}  // namespace sketchcond
