#pragma once

// Matrix Market (coordinate real symmetric) and edge-list text formats.

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "sddkit/error.hpp"
#include "sddkit/graph.hpp"
#include "sddkit/sdd.hpp"

namespace sddkit::io {

namespace detail {

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

/// Splits on whitespace and parses exactly count numbers.
template <typename T>
bool parse_fields(std::string_view line, std::vector<T>& out, std::size_t count) {
  out.clear();
  const char* p = line.data();
  const char* end = p + line.size();
  while (p < end) {
    while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
    if (p == end) break;
    T value{};
    auto [next, ec] = std::from_chars(p, end, value);
    if (ec != std::errc()) return false;
    if (next < end && !std::isspace(static_cast<unsigned char>(*next))) return false;
    out.push_back(value);
    p = next;
  }
  return out.size() == count;
}

/// Shortest decimal text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, p);
}

inline std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path + "' for reading");
  return in;
}

inline std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ParseError("cannot open '" + path + "' for writing");
  return out;
}

}  // namespace detail

/// Reads a coordinate real matrix. "symmetric" files are lower-triangle
/// storage; "general" files must hold both triangles with equal values.
inline SddMatrix read_matrix_market(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw ParseError("matrix market: empty input");
  std::istringstream header(detail::lower(line));
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%matrixmarket" || object != "matrix" || format != "coordinate")
    throw ParseError("matrix market: expected '%%MatrixMarket matrix coordinate ...' header");
  if (field != "real" && field != "integer")
    throw ParseError("matrix market: field must be real, got '" + field + "'");
  if (symmetry != "symmetric" && symmetry != "general")
    throw ParseError("matrix market: symmetry must be symmetric or general, got '" +
                     symmetry + "'");

  std::size_t line_no = 1;
  std::vector<double> nums;
  std::size_t rows = 0, cols = 0, nnz = 0;
  bool have_size = false;
  std::vector<MatrixEntry> entries;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '%') continue;
    if (!have_size) {
      std::vector<std::size_t> dims;
      if (!detail::parse_fields(std::string_view(line).substr(first), dims, 3))
        throw ParseError("matrix market: bad size line " + std::to_string(line_no));
      rows = dims[0];
      cols = dims[1];
      nnz = dims[2];
      if (rows != cols) throw ParseError("matrix market: matrix is not square");
      entries.reserve(nnz);
      have_size = true;
      continue;
    }
    if (!detail::parse_fields(std::string_view(line).substr(first), nums, 3))
      throw ParseError("matrix market: bad entry on line " + std::to_string(line_no));
    const double i = nums[0], j = nums[1], v = nums[2];
    if (i < 1 || j < 1 || i > static_cast<double>(rows) || j > static_cast<double>(cols) ||
        i != std::floor(i) || j != std::floor(j))
      throw ParseError("matrix market: index out of range on line " + std::to_string(line_no));
    if (!std::isfinite(v))
      throw ParseError("matrix market: non-finite value on line " + std::to_string(line_no));
    entries.push_back({static_cast<std::size_t>(i) - 1, static_cast<std::size_t>(j) - 1, v});
  }
  if (!have_size) throw ParseError("matrix market: missing size line");
  if (entries.size() != nnz)
    throw ParseError("matrix market: expected " + std::to_string(nnz) + " entries, found " +
                     std::to_string(entries.size()));
  return symmetry == "symmetric" ? SddMatrix::from_lower(rows, std::move(entries))
                                 : SddMatrix::from_full(rows, std::move(entries));
}

inline SddMatrix load_matrix_market(const std::string& path) {
  auto in = detail::open_in(path);
  try {
    return read_matrix_market(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

/// Writes lower-triangle symmetric storage, entries sorted by (i, j) with
/// the diagonal in place.
inline void write_matrix_market(std::ostream& out, const SddMatrix& a) {
  std::vector<MatrixEntry> entries(a.lower().begin(), a.lower().end());
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a.diagonal()[i] != 0.0) entries.push_back({i, i, a.diagonal()[i]});
  std::sort(entries.begin(), entries.end(), [](const MatrixEntry& x, const MatrixEntry& y) {
    return x.i != y.i ? x.i < y.i : x.j < y.j;
  });
  out << "%%MatrixMarket matrix coordinate real symmetric\n";
  out << a.size() << ' ' << a.size() << ' ' << entries.size() << '\n';
  for (const MatrixEntry& e : entries)
    out << e.i + 1 << ' ' << e.j + 1 << ' ' << detail::format_double(e.value) << '\n';
}

inline void store_matrix_market(const SddMatrix& a, const std::string& path) {
  auto out = detail::open_out(path);
  write_matrix_market(out, a);
  if (!out) throw ParseError("failed writing '" + path + "'");
}

/// Edge list: "n m" header, then m lines "u v w" with 0-based ids.
inline WeightedGraph read_edge_list(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> nums;
  std::size_t n = 0, m = 0;
  bool have_header = false;
  std::vector<Edge> edges;
  while (std::getline(in, line)) {
    ++line_no;
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#' || line[first] == '%') continue;
    const auto body = std::string_view(line).substr(first);
    if (!have_header) {
      std::vector<std::size_t> hdr;
      if (!detail::parse_fields(body, hdr, 2))
        throw ParseError("edge list: bad header on line " + std::to_string(line_no));
      n = hdr[0];
      m = hdr[1];
      edges.reserve(m);
      have_header = true;
      continue;
    }
    if (!detail::parse_fields(body, nums, 3))
      throw ParseError("edge list: bad edge on line " + std::to_string(line_no));
    if (nums[0] < 0 || nums[1] < 0 || nums[0] >= static_cast<double>(n) ||
        nums[1] >= static_cast<double>(n) || nums[0] != std::floor(nums[0]) ||
        nums[1] != std::floor(nums[1]))
      throw ParseError("edge list: vertex out of range on line " + std::to_string(line_no));
    edges.push_back({static_cast<Vertex>(nums[0]), static_cast<Vertex>(nums[1]), nums[2]});
  }
  if (!have_header) throw ParseError("edge list: missing 'n m' header");
  if (edges.size() != m)
    throw ParseError("edge list: header promises " + std::to_string(m) + " edges, found " +
                     std::to_string(edges.size()));
  return WeightedGraph(n, std::move(edges));
}

inline WeightedGraph load_edge_list(const std::string& path) {
  auto in = detail::open_in(path);
  try {
    return read_edge_list(in);
  } catch (const ParseError& e) {
    throw ParseError(path + ": " + e.what());
  }
}

inline void write_edge_list(std::ostream& out, const WeightedGraph& g) {
  out << g.num_vertices() << ' ' << g.num_edges() << '\n';
  for (const Edge& e : g.edges())
    out << e.u << ' ' << e.v << ' ' << detail::format_double(e.w) << '\n';
}

inline void store_edge_list(const WeightedGraph& g, const std::string& path) {
  auto out = detail::open_out(path);
  write_edge_list(out, g);
  if (!out) throw ParseError("failed writing '" + path + "'");
}

}  // namespace sddkit::io
