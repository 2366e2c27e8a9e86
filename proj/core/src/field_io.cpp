#include "fpb/field_io.hpp"

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>

namespace fpb {

namespace {

struct Header {
  std::int64_t n = 0;
  std::int64_t N = 0;
  double L = 0.0;
  std::int64_t m = 0;
};

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& what) {
  throw std::runtime_error(path.string() + ": " + what);
}

template <class T>
void put(std::ostream& os, T v) {
  os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& is, const std::filesystem::path& path) {
  T v{};
  if (!is.read(reinterpret_cast<char*>(&v), sizeof(T))) fail(path, "truncated header");
  return v;
}

Header header_of(const Field& u) {
  return {u.grid().dim(), u.grid().points_per_axis(), u.grid().period(), u.components()};
}

void write_header(std::ostream& os, const Header& h) {
  put(os, h.n);
  put(os, h.N);
  put(os, h.L);
  put(os, h.m);
}

Header read_header(std::istream& is, const std::filesystem::path& path) {
  Header h;
  h.n = get<std::int64_t>(is, path);
  h.N = get<std::int64_t>(is, path);
  h.L = get<double>(is, path);
  h.m = get<std::int64_t>(is, path);
  if (h.m < 1 || h.m > 64) fail(path, "invalid component count " + std::to_string(h.m));
  return h;
}

Field read_body(std::istream& is, const Header& h, const std::filesystem::path& path) {
  GridSpec grid(static_cast<int>(h.n), static_cast<int>(h.N), h.L);
  std::vector<double> values(grid.size() * h.m);
  if (!is.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(values.size() * sizeof(double)))) {
    fail(path, "truncated field data");
  }
  return Field(grid, static_cast<int>(h.m), std::move(values));
}

std::ofstream open_out(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ofstream os(path, mode);
  if (!os) fail(path, "cannot open for writing");
  return os;
}

std::ifstream open_in(const std::filesystem::path& path, std::ios::openmode mode) {
  std::ifstream is(path, mode);
  if (!is) fail(path, "cannot open for reading");
  return is;
}

std::vector<double> split_numbers(const std::string& line, const std::filesystem::path& path, std::size_t lineno) {
  std::vector<double> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(cell, &used));
      if (cell.find_first_not_of(" \t\r", used) != std::string::npos) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      fail(path, "line " + std::to_string(lineno) + ": not a number: '" + cell + "'");
    }
  }
  return out;
}

}  // namespace

void write_field_binary(const std::filesystem::path& path, const Field& u) {
  auto os = open_out(path, std::ios::binary);
  write_header(os, header_of(u));
  const auto v = u.values();
  os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  if (!os) fail(path, "write failed");
}

Field read_field_binary(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  const Header h = read_header(is, path);
  Field u = read_body(is, h, path);
  if (is.peek() != std::char_traits<char>::eof()) fail(path, "trailing bytes after field data");
  return u;
}

void write_field_csv(const std::filesystem::path& path, const Field& u) {
  auto os = open_out(path, std::ios::out);
  const Header h = header_of(u);
  os << "n,N,L,m\n" << h.n << ',' << h.N << ',' << std::setprecision(17) << h.L << ',' << h.m << '\n';
  for (std::size_t i = 0; i < u.points(); ++i) {
    for (int c = 0; c < u.components(); ++c) os << (c ? "," : "") << u(i, c);
    os << '\n';
  }
  if (!os) fail(path, "write failed");
}

Field read_field_csv(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::in);
  std::string line;
  if (!std::getline(is, line) || line.rfind("n,N,L,m", 0) != 0) fail(path, "line 1: expected header n,N,L,m");
  if (!std::getline(is, line)) fail(path, "line 2: missing header values");
  const auto hv = split_numbers(line, path, 2);
  if (hv.size() != 4) fail(path, "line 2: expected 4 header values");
  GridSpec grid(static_cast<int>(hv[0]), static_cast<int>(hv[1]), hv[2]);
  const int m = static_cast<int>(hv[3]);
  if (m < 1) fail(path, "line 2: invalid component count");
  Field u(grid, m);
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::getline(is, line)) fail(path, "line " + std::to_string(i + 3) + ": missing point row");
    const auto row = split_numbers(line, path, i + 3);
    if (row.size() != static_cast<std::size_t>(m)) {
      fail(path, "line " + std::to_string(i + 3) + ": expected " + std::to_string(m) + " values");
    }
    for (int c = 0; c < m; ++c) u(i, c) = row[c];
  }
  return u;
}

void write_field(const std::filesystem::path& path, const Field& u) {
  if (path.extension() == ".csv") {
    write_field_csv(path, u);
  } else {
    write_field_binary(path, u);
  }
}

Field read_field(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? read_field_csv(path) : read_field_binary(path);
}

void write_stacked_fields(const std::filesystem::path& path, const std::vector<Field>& fields) {
  if (fields.empty()) throw std::invalid_argument("write_stacked_fields: no fields");
  for (const Field& f : fields) {
    if (!f.same_layout(fields.front())) throw std::invalid_argument("write_stacked_fields: layout mismatch");
  }
  auto os = open_out(path, std::ios::binary);
  write_header(os, header_of(fields.front()));
  put(os, static_cast<std::int64_t>(fields.size()));
  for (const Field& f : fields) {
    const auto v = f.values();
    os.write(reinterpret_cast<const char*>(v.data()), static_cast<std::streamsize>(v.size() * sizeof(double)));
  }
  if (!os) fail(path, "write failed");
}

std::vector<Field> read_stacked_fields(const std::filesystem::path& path) {
  auto is = open_in(path, std::ios::binary);
  const Header h = read_header(is, path);
  const auto count = get<std::int64_t>(is, path);
  if (count < 1) fail(path, "invalid slice count");
  std::vector<Field> out;
  for (std::int64_t k = 0; k < count; ++k) out.push_back(read_body(is, h, path));
  if (is.peek() != std::char_traits<char>::eof()) fail(path, "trailing bytes after field data");
  return out;
}

}  // namespace fpb
