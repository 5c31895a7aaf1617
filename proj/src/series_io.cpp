#include "nbinar/series_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "nbinar/errors.hpp"

namespace nbinar {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) cells.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool parse_count(const std::string& text, Count& out) {
  const char* first = text.data();
  const char* last = first + text.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc() && ptr == last;
}

std::ofstream open_out(const std::string& path) {
  std::ofstream os(path);
  if (!os) throw IoError("cannot open '" + path + "' for writing");
  return os;
}

}  // namespace

std::string format_probability(double value) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.15g", value);
  return buf;
}

void write_series(std::ostream& os, const Series& series) {
  for (Count v : series.values) os << v << '\n';
}

void write_series(const std::string& path, const Series& series) {
  std::ofstream os = open_out(path);
  write_series(os, series);
  if (!os) throw IoError("failed writing '" + path + "'");
}

Series read_series(std::istream& is) {
  Series out;
  std::string line;
  std::size_t line_no = 0;
  int column = -1;  // CSV column index once a header is seen
  bool first_content = true;
  while (std::getline(is, line)) {
    ++line_no;
    const std::string text = trim(line);
    if (text.empty()) continue;
    if (first_content) {
      first_content = false;
      Count probe = 0;
      if (!parse_count(text, probe)) {
        const auto header = split_csv(text);
        for (std::size_t c = 0; c < header.size(); ++c) {
          if (header[c] == "x") column = static_cast<int>(c);
        }
        if (column < 0) throw IoError("series header has no column named 'x'");
        continue;
      }
    }
    std::string cell = text;
    if (column >= 0) {
      const auto cells = split_csv(text);
      if (static_cast<std::size_t>(column) >= cells.size()) {
        throw IoError("line " + std::to_string(line_no) + ": missing column 'x'");
      }
      cell = cells[static_cast<std::size_t>(column)];
    }
    Count v = 0;
    if (!parse_count(cell, v) || v < 0) {
      throw IoError("line " + std::to_string(line_no) + ": expected a non-negative integer, got '" + cell + "'");
    }
    out.values.push_back(v);
  }
  return out;
}

Series read_series(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw IoError("cannot open '" + path + "' for reading");
  return read_series(is);
}

std::string meta_path_for(const std::string& series_path) { return series_path + ".meta.json"; }

void write_series_meta(const std::string& path, const SeriesMeta& meta, std::size_t length) {
  nlohmann::ordered_json doc;
  doc["seed"] = meta.seed;
  doc["alpha"] = meta.params.alpha;
  doc["mu"] = meta.params.mu;
  doc["r"] = meta.params.r;
  doc["n"] = length;
  doc["mode"] = meta.mode;
  std::ofstream os = open_out(path);
  os << doc.dump(2) << '\n';
  if (!os) throw IoError("failed writing '" + path + "'");
}

void write_table_csv(std::ostream& os, const TransitionTable& table) {
  os << "state";
  for (Count j = 0; j <= table.max_state; ++j) os << ',' << j;
  os << ",tail_mass\n";
  for (Count i = 0; i <= table.max_state; ++i) {
    os << i;
    for (Count j = 0; j <= table.max_state; ++j) os << ',' << format_probability(table.at(i, j));
    os << ',' << format_probability(table.tail_mass[static_cast<std::size_t>(i)]) << '\n';
  }
}

void write_table_csv(const std::string& path, const TransitionTable& table) {
  std::ofstream os = open_out(path);
  write_table_csv(os, table);
  if (!os) throw IoError("failed writing '" + path + "'");
}

TransitionTable read_table_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw IoError("empty transition table");
  const auto header = split_csv(trim(line));
  if (header.size() < 3 || header.front() != "state" || header.back() != "tail_mass") {
    throw IoError("malformed transition table header");
  }
  TransitionTable table;
  table.max_state = static_cast<Count>(header.size()) - 3;
  const std::size_t dim = table.dim();
  table.probs.reserve(dim * dim);
  while (std::getline(is, line)) {
    const std::string text = trim(line);
    if (text.empty()) continue;
    const auto cells = split_csv(text);
    if (cells.size() != header.size()) throw IoError("transition table row has the wrong width");
    for (std::size_t c = 1; c + 1 < cells.size(); ++c) table.probs.push_back(std::stod(cells[c]));
    table.tail_mass.push_back(std::stod(cells.back()));
  }
  if (table.tail_mass.size() != dim) throw IoError("transition table is not square");
  return table;
}

}  // namespace nbinar
