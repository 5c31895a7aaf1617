#ifndef NBINAR_SERIES_IO_HPP
#define NBINAR_SERIES_IO_HPP

#include <iosfwd>
#include <string>

#include "nbinar/process.hpp"

namespace nbinar {

// Plain-text series: one non-negative integer per line.
void write_series(std::ostream& os, const Series& series);
void write_series(const std::string& path, const Series& series);

// Accepts either one integer per line, or CSV whose header names a column `x`.
// Blank lines are skipped. Throws IoError on unreadable or malformed input.
Series read_series(std::istream& is);
Series read_series(const std::string& path);

// Sidecar metadata document, `<series path>.meta.json`.
std::string meta_path_for(const std::string& series_path);
void write_series_meta(const std::string& path, const SeriesMeta& meta, std::size_t length);

// CSV with a header row of destination states and a trailing tail_mass column.
void write_table_csv(std::ostream& os, const TransitionTable& table);
void write_table_csv(const std::string& path, const TransitionTable& table);
TransitionTable read_table_csv(std::istream& is);

// Probabilities are printed with 15 significant digits.
std::string format_probability(double value);

}  // namespace nbinar

#endif  // NBINAR_SERIES_IO_HPP
