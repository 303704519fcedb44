#include "tuckercheb/container.hpp"

#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace tuckercheb::container {

void write_double(std::ostream& os, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%a", v);
  os << buf;
}

std::string read_token(std::istream& is) {
  std::string tok;
  if (!(is >> tok)) throw std::runtime_error("container: unexpected end of input");
  return tok;
}

double read_double(std::istream& is) {
  const std::string tok = read_token(is);
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0') {
    throw std::runtime_error("container: bad number '" + tok + "'");
  }
  return v;
}

void expect(std::istream& is, std::string_view keyword) {
  const std::string tok = read_token(is);
  if (tok != keyword) {
    throw std::runtime_error("container: expected '" + std::string(keyword) +
                             "', found '" + tok + "'");
  }
}

std::uint64_t read_u64(std::istream& is) {
  const std::string tok = read_token(is);
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(tok, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos != tok.size() || tok.empty() || tok[0] == '-') {
    throw std::runtime_error("container: bad integer '" + tok + "'");
  }
  return v;
}

std::size_t read_size(std::istream& is) {
  return static_cast<std::size_t>(read_u64(is));
}

void write_matrix(std::ostream& os, std::string_view tag, const Matrix& m) {
  os << tag << ' ' << m.rows() << ' ' << m.cols() << '\n';
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i) os << ' ';
      write_double(os, m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix(std::istream& is, std::string_view tag) {
  expect(is, tag);
  const auto rows = static_cast<Eigen::Index>(read_size(is));
  const auto cols = static_cast<Eigen::Index>(read_size(is));
  Matrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = read_double(is);
  }
  return m;
}

void write_tensor(std::ostream& os, std::string_view tag, const DenseTensor& t) {
  os << tag << ' ' << t.order();
  for (std::size_t e : t.extents()) os << ' ' << e;
  os << '\n';
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (i) os << ((i % 8 == 0) ? '\n' : ' ');
    write_double(os, t[i]);
  }
  os << '\n';
}

DenseTensor read_tensor(std::istream& is, std::string_view tag) {
  expect(is, tag);
  const std::size_t order = read_size(is);
  Extents ext(order);
  for (auto& e : ext) e = read_size(is);
  DenseTensor t(ext);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = read_double(is);
  return t;
}

void write_index_set(std::ostream& os, std::string_view tag,
                     const IndexSet& s) {
  os << tag << ' ' << s.parent_extent() << ' ' << s.size();
  for (std::size_t v : s.indices()) os << ' ' << v;
  os << '\n';
}

IndexSet read_index_set(std::istream& is, std::string_view tag) {
  expect(is, tag);
  const std::size_t parent = read_size(is);
  const std::size_t count = read_size(is);
  std::vector<std::size_t> idx(count);
  for (auto& v : idx) v = read_size(is);
  return IndexSet(std::move(idx), parent);
}

}  // namespace tuckercheb::container
