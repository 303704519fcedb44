#pragma once

// Plain-text container shared by interpolant and low-rank kernel files.
// Whitespace-separated tokens; doubles are written as C99 hex floats so a
// write/read cycle reproduces every bit.

#include "tuckercheb/tensor.hpp"

#include <iosfwd>
#include <string>
#include <string_view>

namespace tuckercheb::container {

void write_double(std::ostream& os, double v);
double read_double(std::istream& is);

std::string read_token(std::istream& is);
/// Reads one token and throws std::runtime_error unless it equals `keyword`.
void expect(std::istream& is, std::string_view keyword);
std::size_t read_size(std::istream& is);
std::uint64_t read_u64(std::istream& is);

void write_matrix(std::ostream& os, std::string_view tag, const Matrix& m);
Matrix read_matrix(std::istream& is, std::string_view tag);

void write_tensor(std::ostream& os, std::string_view tag, const DenseTensor& t);
DenseTensor read_tensor(std::istream& is, std::string_view tag);

void write_index_set(std::ostream& os, std::string_view tag, const IndexSet& s);
IndexSet read_index_set(std::istream& is, std::string_view tag);

}  // namespace tuckercheb::container
