#include "tse/field_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <vector>

namespace tse {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

void write_field_csv(const DensityField& field, std::ostream& out) {
  const Grid& g = field.grid();
  out << "# " << g.nx << ',' << g.nt << ',' << format_double(g.x0) << ','
      << format_double(g.x1) << ',' << format_double(g.t0) << ','
      << format_double(g.t1) << '\n';
  for (int n = 0; n < g.t_nodes(); ++n) {
    auto r = field.row(n);
    for (int i = 0; i < g.x_nodes(); ++i) {
      if (i) out << ',';
      out << format_double(r[i]);
    }
    out << '\n';
  }
}

void write_field_csv(const DensityField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_field_csv(field, out);
  if (!out) throw std::runtime_error("write failed: " + path);
}

static std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      fields.push_back(line.substr(start));
      break;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return fields;
}

static double parse_number(const std::string& s, const std::string& where) {
  // strtod accepts leading spaces and "nan"/"inf" spellings, which field data
  // legitimately contains for missing cells.
  const char* begin = s.c_str();
  char* end = nullptr;
  const double v = std::strtod(begin, &end);
  while (end && *end == ' ') ++end;
  if (end == begin || (end && *end != '\0'))
    throw std::runtime_error(where + ": non-numeric cell '" + s + "'");
  return v;
}

DensityField read_field_csv(std::istream& in, const std::string& name) {
  std::string line;
  if (!std::getline(in, line))
    throw std::runtime_error(name + ": empty file");
  if (line.empty() || line[0] != '#')
    throw std::runtime_error(name + ": missing '# nx,nt,x0,x1,t0,t1' header");
  auto header = split_csv(line.substr(1));
  if (header.size() != 6)
    throw std::runtime_error(name + ": header must carry 6 comma-separated values");
  const int nx = static_cast<int>(parse_number(header[0], name + " header"));
  const int nt = static_cast<int>(parse_number(header[1], name + " header"));
  const double x0 = parse_number(header[2], name + " header");
  const double x1 = parse_number(header[3], name + " header");
  const double t0 = parse_number(header[4], name + " header");
  const double t1 = parse_number(header[5], name + " header");
  Grid grid(x0, x1, t0, t1, nx, nt);

  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(grid.t_nodes()) * grid.x_nodes());
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() && rows == grid.t_nodes()) break;  // trailing newline
    ++rows;
    auto cells = split_csv(line);
    if (static_cast<int>(cells.size()) != grid.x_nodes())
      throw std::runtime_error(name + ": row " + std::to_string(rows) + " has " +
                               std::to_string(cells.size()) + " columns, header says " +
                               std::to_string(grid.x_nodes()));
    for (auto& c : cells)
      values.push_back(parse_number(c, name + " row " + std::to_string(rows)));
  }
  if (rows != grid.t_nodes())
    throw std::runtime_error(name + ": expected " + std::to_string(grid.t_nodes()) +
                             " rows, found " + std::to_string(rows));
  return DensityField(grid, std::move(values));
}

DensityField read_field_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_field_csv(in, path);
}

}  // namespace tse
