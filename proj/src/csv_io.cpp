#include "ymlens/csv_io.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace ymlens {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

void AtomicFile::write() {
  namespace fs = std::filesystem;
  const fs::path target(path_);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot open for writing: " + tmp.string());
    out << buffer_;
    if (!out) throw DataError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string csv_join(const std::vector<std::string>& cells) {
  std::string out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out += ',';
    out += cells[i];
  }
  return out;
}

namespace {

std::vector<std::string> lens_header(int n, int d) {
  std::vector<std::string> cols;
  auto block = [&](const std::string& prefix, int count) {
    for (int i = 0; i < count; ++i) cols.push_back(prefix + "_" + std::to_string(i));
  };
  block("entry_z", n);
  block("entry_v", n);
  block("entry_xi", d);
  block("exit_z", n);
  block("exit_v", n);
  block("exit_xi", d);
  cols.push_back("travel_time");
  cols.push_back("trapped");
  cols.push_back("glancing");
  cols.push_back("status");
  return cols;
}

void append_vec(std::vector<std::string>& cells, const Vec& v) {
  for (int i = 0; i < v.size(); ++i) cells.push_back(format_double(v[i]));
}

std::string sanitize(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '\n') c = ';';
  return out;
}

}  // namespace

void write_lens_table(const std::string& path, const LensTableFile& table) {
  AtomicFile file(path);
  file.comment("ymlens-lens-table", "v" + std::to_string(table.schema_version));
  file.comment("config_hash", table.config_hash);
  file.comment("n", std::to_string(table.n));
  file.comment("d", std::to_string(table.d));
  file.comment("rows", std::to_string(table.rows.size()));
  file.line(csv_join(lens_header(table.n, table.d)));
  for (const LensDatum& row : table.rows) {
    std::vector<std::string> cells;
    append_vec(cells, row.entry.z);
    append_vec(cells, row.entry.v);
    append_vec(cells, row.entry.xi);
    if (row.ok()) {
      append_vec(cells, row.exit.z);
      append_vec(cells, row.exit.v);
      append_vec(cells, row.exit.xi);
    } else {
      for (int i = 0; i < 2 * table.n + table.d; ++i) cells.push_back("nan");
    }
    cells.push_back(format_double(row.travel_time));
    cells.push_back(row.trapped ? "1" : "0");
    cells.push_back(row.glancing ? "1" : "0");
    cells.push_back(row.ok() ? "ok" : sanitize(row.error));
    file.line(csv_join(cells));
  }
  file.write();
}

LensTableFile read_lens_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open lens table: " + path);
  LensTableFile table;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream meta(line.substr(1));
      std::string key, value;
      meta >> key >> value;
      if (key == "config_hash") table.config_hash = value;
      if (key == "n") table.n = std::stoi(value);
      if (key == "d") table.d = std::stoi(value);
      continue;
    }
    if (!header_seen) {
      header_seen = true;  // column header
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream row_in(line);
    std::string cell;
    while (std::getline(row_in, cell, ',')) cells.push_back(cell);
    const int n = table.n, d = table.d;
    const std::size_t expected = 2 * (2 * n + d) + 4;
    if (cells.size() != expected) throw DataError("lens table row has wrong arity");

    LensDatum row;
    auto take_vec = [&](int offset, int count) {
      Vec v(count);
      for (int i = 0; i < count; ++i) v[i] = std::stod(cells[offset + i]);
      return v;
    };
    int at = 0;
    row.entry.z = take_vec(at, n);
    at += n;
    row.entry.v = take_vec(at, n);
    at += n;
    row.entry.xi = take_vec(at, d);
    at += d;
    row.exit.z = take_vec(at, n);
    at += n;
    row.exit.v = take_vec(at, n);
    at += n;
    row.exit.xi = take_vec(at, d);
    at += d;
    row.travel_time = std::stod(cells[at++]);
    row.trapped = cells[at++] == "1";
    row.glancing = cells[at++] == "1";
    if (cells[at] != "ok") row.error = cells[at];
    table.rows.push_back(std::move(row));
  }
  if (!header_seen) throw DataError("lens table has no header row");
  return table;
}

}  // namespace ymlens
