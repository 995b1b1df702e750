// Copyright 2026 The racqp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>
#include <string_view>

#include "racqp/problem.hpp"

namespace racqp {
namespace {

std::string lower(std::string s) {
  for (auto& ch : s) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return s;
}

bool blank_or_comment(const std::string& line) {
  for (char ch : line) {
    if (ch == '%') return true;
    if (!std::isspace(static_cast<unsigned char>(ch))) return false;
  }
  return true;
}

double parse_real(const std::string& token, std::int64_t line_no) {
  char* end = nullptr;
  const double v = std::strtod(token.c_str(), &end);
  if (end == token.c_str() || *end != '\0') throw ParseError("bad numeric value '" + token + "'", line_no);
  return v;
}

std::int64_t parse_int(const std::string& token, std::int64_t line_no) {
  std::int64_t v = 0;
  const auto* first = token.data();
  const auto* last = token.data() + token.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) throw ParseError("bad integer '" + token + "'", line_no);
  return v;
}

}  // namespace

SparseMatrix parse_matrix_market(std::istream& in, MatrixMarketHeader* header_out) {
  std::string line;
  std::int64_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty Matrix Market stream", 0);
  ++line_no;

  MatrixMarketHeader header;
  {
    std::istringstream hs(line);
    std::string banner, object, format, field, symmetry;
    hs >> banner >> object >> format >> field >> symmetry;
    if (banner != "%%MatrixMarket") throw ParseError("missing %%MatrixMarket banner", line_no);
    if (lower(object) != "matrix") throw ParseError("unsupported object '" + object + "'", line_no);
    format = lower(format);
    field = lower(field);
    symmetry = lower(symmetry);
    if (format == "coordinate") {
      header.coordinate = true;
    } else if (format == "array") {
      header.coordinate = false;
    } else {
      throw ParseError("unsupported format '" + format + "'", line_no);
    }
    if (field == "pattern") {
      header.pattern = true;
      if (!header.coordinate) throw ParseError("pattern field requires coordinate format", line_no);
    } else if (field != "real" && field != "integer" && field != "double") {
      throw ParseError("unsupported field '" + field + "'", line_no);
    }
    if (symmetry == "symmetric") {
      header.symmetric = true;
    } else if (symmetry == "skew-symmetric") {
      header.skew = true;
    } else if (symmetry != "general") {
      throw ParseError("unsupported symmetry '" + symmetry + "'", line_no);
    }
  }

  // size line
  std::int64_t nrows = 0, ncols = 0, nnz = 0;
  for (;;) {
    if (!std::getline(in, line)) throw ParseError("missing size line", line_no);
    ++line_no;
    if (blank_or_comment(line)) continue;
    std::istringstream ss(line);
    std::string a, b, c;
    ss >> a >> b;
    nrows = parse_int(a, line_no);
    ncols = parse_int(b, line_no);
    if (header.coordinate) {
      if (!(ss >> c)) throw ParseError("size line needs rows, cols and nnz", line_no);
      nnz = parse_int(c, line_no);
    }
    if (nrows < 0 || ncols < 0 || nnz < 0) throw ParseError("negative dimension", line_no);
    break;
  }
  if ((header.symmetric || header.skew) && nrows != ncols) {
    throw ParseError("symmetric storage requires a square matrix", line_no);
  }

  std::vector<Eigen::Triplet<double, Index>> triplets;
  auto push = [&](std::int64_t i, std::int64_t j, double v) {
    triplets.emplace_back(static_cast<Index>(i), static_cast<Index>(j), v);
    if (i != j) {
      if (header.symmetric) triplets.emplace_back(static_cast<Index>(j), static_cast<Index>(i), v);
      if (header.skew) triplets.emplace_back(static_cast<Index>(j), static_cast<Index>(i), -v);
    }
  };

  if (header.coordinate) {
    triplets.reserve(static_cast<std::size_t>(header.symmetric ? 2 * nnz : nnz));
    std::int64_t seen = 0;
    while (seen < nnz) {
      if (!std::getline(in, line)) {
        throw ParseError("expected " + std::to_string(nnz) + " entries, found " + std::to_string(seen),
                         line_no);
      }
      ++line_no;
      if (blank_or_comment(line)) continue;
      std::istringstream ss(line);
      std::string si, sj, sv;
      ss >> si >> sj;
      const auto i = parse_int(si, line_no) - 1;
      const auto j = parse_int(sj, line_no) - 1;
      double v = 1.0;
      if (!header.pattern) {
        if (!(ss >> sv)) throw ParseError("missing value", line_no);
        v = parse_real(sv, line_no);
      }
      if (i < 0 || i >= nrows || j < 0 || j >= ncols) {
        throw ParseError("entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                             ") outside declared " + std::to_string(nrows) + "x" + std::to_string(ncols),
                         line_no);
      }
      if ((header.symmetric || header.skew) && j > i) {
        throw ParseError("symmetric storage expects lower-triangle entries", line_no);
      }
      push(i, j, v);
      ++seen;
    }
  } else {
    // column-major dense values; symmetric stores the lower triangle column by column
    for (std::int64_t j = 0; j < ncols; ++j) {
      const std::int64_t start = (header.symmetric || header.skew) ? (header.skew ? j + 1 : j) : 0;
      for (std::int64_t i = start; i < nrows; ++i) {
        do {
          if (!std::getline(in, line)) throw ParseError("array data ended early", line_no);
          ++line_no;
        } while (blank_or_comment(line));
        std::istringstream ss(line);
        std::string sv;
        ss >> sv;
        const double v = parse_real(sv, line_no);
        if (v != 0.0) push(i, j, v);
      }
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    if (!blank_or_comment(line)) throw ParseError("unexpected trailing data", line_no);
  }

  SparseMatrix m(static_cast<Index>(nrows), static_cast<Index>(ncols));
  m.setFromTriplets(triplets.begin(), triplets.end());  // duplicates are summed
  m.makeCompressed();
  if (header_out) *header_out = header;
  return m;
}

SparseMatrix load_matrix_market(const std::filesystem::path& path, MatrixMarketHeader* header) {
  std::ifstream in(path);
  if (!in) throw Error(Errc::io, "cannot open " + path.string());
  try {
    return parse_matrix_market(in, header);
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.what(), 0);
  }
}

void save_matrix_market(const SparseMatrix& m, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index j = 0; j < m.outerSize(); ++j) {
    for (SparseMatrix::InnerIterator it(m, j); it; ++it) {
      out << it.row() + 1 << ' ' << it.col() + 1 << ' ' << it.value() << '\n';
    }
  }
}

Vector load_vector_market(const std::filesystem::path& path) {
  const SparseMatrix m = load_matrix_market(path);
  if (m.cols() != 1) {
    throw Error(Errc::dimension, path.string() + ": vector file must have a single column");
  }
  return Vector(m.col(0));
}

void save_vector_market(const Vector& v, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(Errc::io, "cannot write " + path.string());
  out << "%%MatrixMarket matrix array real general\n";
  out << v.size() << " 1\n";
  out << std::setprecision(std::numeric_limits<double>::max_digits10);
  for (Index i = 0; i < v.size(); ++i) out << v[i] << '\n';
}

}  // namespace racqp
