#include "qwalk/table.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace schema {

const TableSchema& polarization() {
  static const TableSchema s{"polarization", {"t", "dP", "stderr", "staggered_sign"}};
  return s;
}
const TableSchema& distribution() {
  static const TableSchema s{"distribution", {"t", "q", "sigma_out", "P", "stderr"}};
  return s;
}
const TableSchema& spectrum() {
  static const TableSchema s{"spectrum", {"index", "eigenphase"}};
  return s;
}
const TableSchema& dos() {
  static const TableSchema s{"dos", {"bin_center", "density", "stderr"}};
  return s;
}
const TableSchema& analytic() {
  static const TableSchema s{"analytic", {"t_or_eta", "q", "alignment", "value"}};
  return s;
}

}  // namespace schema

namespace {

void append_cell(std::string& out, const Cell& cell) {
  char buf[40];
  if (const auto* i = std::get_if<std::int64_t>(&cell)) {
    std::snprintf(buf, sizeof buf, "%lld", static_cast<long long>(*i));
    out += buf;
  } else if (const auto* d = std::get_if<double>(&cell)) {
    std::snprintf(buf, sizeof buf, "%.17g", *d);
    out += buf;
  } else {
    out += std::get<std::string>(cell);
  }
}

}  // namespace

std::string format_table(const std::vector<Row>& rows, const TableSchema& schema,
                         const Metadata& metadata) {
  std::string out;
  for (const auto& [key, value] : metadata) out += "# " + key + ": " + value + "\n";
  for (std::size_t c = 0; c < schema.columns.size(); ++c) {
    if (c) out += ",";
    out += schema.columns[c];
  }
  out += "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != schema.columns.size()) {
      throw PreconditionError("row " + std::to_string(r) + " has " +
                              std::to_string(rows[r].size()) + " cells, schema '" + schema.name +
                              "' has " + std::to_string(schema.columns.size()));
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      if (c) out += ",";
      append_cell(out, rows[r][c]);
    }
    out += "\n";
  }
  return out;
}

void write_file_atomic(const std::string& path, const std::string& text) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) fs::create_directories(target.parent_path(), ec);
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + tmp.string() + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.flush();
    if (!out) throw Error("write to '" + tmp.string() + "' failed");
  }
  fs::rename(tmp, target, ec);
  if (ec) throw Error("cannot rename '" + tmp.string() + "': " + ec.message());
}

void write_table(const std::vector<Row>& rows, const TableSchema& schema,
                 const std::string& path, const Metadata& metadata) {
  write_file_atomic(path, format_table(rows, schema, metadata));
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int TableData::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::string TableData::meta(const std::string& key) const {
  for (const auto& [k, v] : metadata) {
    if (k == key) return v;
  }
  return {};
}

TableData read_table(const std::string& path) {
  TableData data;
  std::istringstream in(read_file(path));
  std::string line;
  bool header_seen = false;
  auto split = [](const std::string& s) {
    std::vector<std::string> cells;
    std::stringstream ss(s);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    return cells;
  };
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0 && !header_seen) {
      const auto colon = line.find(": ");
      if (colon == std::string::npos) continue;
      data.metadata.emplace_back(line.substr(2, colon - 2), line.substr(colon + 2));
    } else if (!header_seen) {
      data.columns = split(line);
      header_seen = true;
    } else if (!line.empty()) {
      data.rows.push_back(split(line));
    }
  }
  if (!header_seen) throw Error("'" + path + "' has no header row");
  return data;
}

}  // namespace qwalk
