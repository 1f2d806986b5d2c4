#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace qwalk {

using Cell = std::variant<std::int64_t, double, std::string>;
using Row = std::vector<Cell>;
using Metadata = std::vector<std::pair<std::string, std::string>>;

struct TableSchema {
  std::string name;
  std::vector<std::string> columns;
};

namespace schema {
const TableSchema& polarization();   // t,dP,stderr,staggered_sign
const TableSchema& distribution();   // t,q,sigma_out,P,stderr
const TableSchema& spectrum();       // index,eigenphase
const TableSchema& dos();            // bin_center,density,stderr
const TableSchema& analytic();       // t_or_eta,q,alignment,value
}  // namespace schema

// "# key: value" lines, the header row, then one line per row. Doubles use 17
// significant digits; lines end in LF. Throws PreconditionError when a row
// does not match the schema width.
std::string format_table(const std::vector<Row>& rows, const TableSchema& schema,
                         const Metadata& metadata = {});

// Writes through a temporary file and a rename. Throws Error on I/O failure.
void write_table(const std::vector<Row>& rows, const TableSchema& schema,
                 const std::string& path, const Metadata& metadata = {});

struct TableData {
  Metadata metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const;  // -1 when absent
  std::string meta(const std::string& key) const;  // empty when absent
};

TableData read_table(const std::string& path);

// Writes text through a temporary file and a rename.
void write_file_atomic(const std::string& path, const std::string& text);

std::string read_file(const std::string& path);

}  // namespace qwalk
