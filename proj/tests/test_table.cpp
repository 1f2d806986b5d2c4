#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "qwalk/errors.hpp"
#include "qwalk/table.hpp"

using namespace qwalk;

TEST_SUITE("table") {

TEST_CASE("schemas") {
  auto header = [](const TableSchema& s) {
    std::string h;
    for (const auto& c : s.columns) h += (h.empty() ? "" : ",") + c;
    return h;
  };
  CHECK(header(schema::polarization()) == "t,dP,stderr,staggered_sign");
  CHECK(header(schema::distribution()) == "t,q,sigma_out,P,stderr");
  CHECK(header(schema::spectrum()) == "index,eigenphase");
  CHECK(header(schema::dos()) == "bin_center,density,stderr");
  CHECK(header(schema::analytic()) == "t_or_eta,q,alignment,value");
}

TEST_CASE("formatting") {
  const std::vector<Row> rows{{std::int64_t{0}, 1.0, 0.0, std::int64_t{1}},
                              {std::int64_t{1}, -0.1, 1e-300, std::int64_t{-1}}};
  const std::string text = format_table(rows, schema::polarization(), {{"seed", "7"}});
  CHECK(text ==
        "# seed: 7\n"
        "t,dP,stderr,staggered_sign\n"
        "0,1,0,1\n"
        "1,-0.10000000000000001,1e-300,-1\n");
  CHECK(text.find('\r') == std::string::npos);
  CHECK(format_table(rows, schema::polarization(), {{"seed", "7"}}) == text);
  CHECK(format_table({}, schema::spectrum()) == "index,eigenphase\n");
  CHECK_THROWS_AS(format_table({{std::int64_t{1}}}, schema::spectrum()), PreconditionError);
  CHECK(format_table({{std::string("x"), 2.5}}, schema::spectrum()) == "index,eigenphase\nx,2.5\n");
}

TEST_CASE("write, read and round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "qwalk_table_test" / "nested";
  std::filesystem::remove_all(dir.parent_path());
  const std::string path = (dir / "spectrum.csv").string();
  std::vector<Row> rows;
  std::vector<double> values;
  for (int i = 0; i < 50; ++i) {
    const double v = std::sin(i * 1.2345) * std::pow(10.0, i % 7 - 3) + M_PI / (i + 1);
    values.push_back(v);
    rows.push_back({std::int64_t{i}, v});
  }
  write_table(rows, schema::spectrum(), path, {{"config_hash", "abc"}, {"note", "a: b"}});
  const TableData t = read_table(path);
  CHECK(t.meta("config_hash") == "abc");
  CHECK(t.meta("note") == "a: b");
  CHECK(t.meta("absent").empty());
  CHECK(t.column("eigenphase") == 1);
  CHECK(t.column("zzz") == -1);
  REQUIRE(t.rows.size() == 50);
  for (int i = 0; i < 50; ++i) {
    CHECK(std::stoll(t.rows[i][0]) == i);
    CHECK(std::strtod(t.rows[i][1].c_str(), nullptr) == values[i]);
  }
  CHECK(read_file(path) == format_table(rows, schema::spectrum(), {{"config_hash", "abc"}, {"note", "a: b"}}));
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    CHECK(entry.path().filename() == "spectrum.csv");
  }
  CHECK_THROWS_AS(read_file((dir / "missing.csv").string()), Error);
  std::filesystem::remove_all(dir.parent_path());
}

}  // TEST_SUITE
