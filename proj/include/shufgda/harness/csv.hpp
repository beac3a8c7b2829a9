#ifndef SHUFGDA_HARNESS_CSV_HPP
#define SHUFGDA_HARNESS_CSV_HPP

// Trajectory CSV: header row, then one row per record.
//   epoch,oracle_calls,seed,algorithm,<metric columns>
// Metric columns are those set in at least one record, in Column order.
// Missing values are empty cells; reals use 17 significant digits.

#include "shufgda/errors.hpp"
#include "shufgda/harness/text.hpp"
#include "shufgda/trajectory.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace shufgda::harness {

inline constexpr std::string_view kCsvPrefix = "epoch,oracle_calls,seed,algorithm";

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch;
  }
  return q + '"';
}

// Splits one CSV line honouring double-quoted fields.
inline std::vector<std::string> csv_fields(const std::string& line, std::size_t line_no,
                                           const std::string& source) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t k = 0; k < line.size(); ++k) {
    const char ch = line[k];
    if (quoted) {
      if (ch == '"') {
        if (k + 1 < line.size() && line[k + 1] == '"') {
          cur += '"';
          ++k;
        } else {
          quoted = false;
        }
      } else {
        cur += ch;
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      out.push_back(std::move(cur));
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  if (quoted) throw ParseError(source, line_no, line.size(), "unterminated quoted field");
  out.push_back(std::move(cur));
  return out;
}

}  // namespace detail

/// Metric columns set in at least one record.
inline std::vector<Column> present_columns(const std::vector<TrajectoryRecord>& records) {
  std::vector<Column> cols;
  for (std::size_t k = 0; k < kColumnCount; ++k)
    for (const auto& r : records)
      if (r.values[k]) {
        cols.push_back(static_cast<Column>(k));
        break;
      }
  return cols;
}

inline void write_csv(const std::vector<TrajectoryRecord>& records, std::ostream& out) {
  if (records.empty()) throw InvalidArgument("no records to write");
  const auto cols = present_columns(records);
  out << kCsvPrefix;
  for (Column c : cols) out << ',' << column_name(c);
  out << '\n';
  for (const auto& r : records) {
    out << r.epoch << ',' << r.oracle_calls << ',' << r.seed << ',' << detail::csv_quote(r.algorithm);
    for (Column c : cols) {
      out << ',';
      if (const auto v = r.get(c)) out << format_double17(*v);
    }
    out << '\n';
  }
}

inline std::string to_csv(const std::vector<TrajectoryRecord>& records) {
  std::ostringstream ss;
  write_csv(records, ss);
  return ss.str();
}

/// Writes to `path`; IO problems raise Error.
inline void write_csv(const std::vector<TrajectoryRecord>& records, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_csv(records, out);
  out.flush();
  if (!out) throw Error("write to '" + path + "' failed");
}

inline std::vector<TrajectoryRecord> read_csv(std::istream& in,
                                              const std::string& source = "<csv>") {
  std::string line;
  if (!std::getline(in, line)) throw ParseError(source, 1, 1, "empty file");
  const auto header = detail::csv_fields(line, 1, source);
  if (header.size() < 4 || header[0] != "epoch" || header[1] != "oracle_calls" ||
      header[2] != "seed" || header[3] != "algorithm")
    throw ParseError(source, 1, 1, "header must start with " + std::string(kCsvPrefix));
  std::vector<Column> cols;
  for (std::size_t k = 4; k < header.size(); ++k) {
    const auto c = column_from_name(header[k]);
    if (!c) throw ParseError(source, 1, 1, "unknown column '" + header[k] + "'");
    cols.push_back(*c);
  }

  std::vector<TrajectoryRecord> records;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto f = detail::csv_fields(line, line_no, source);
    if (f.size() != header.size())
      throw ParseError(source, line_no, 1,
                       "expected " + std::to_string(header.size()) + " fields, got " +
                           std::to_string(f.size()));
    TrajectoryRecord r;
    const auto epoch = to_integer<std::int64_t>(f[0]);
    const auto calls = to_integer<std::int64_t>(f[1]);
    const auto seed = to_integer<std::uint64_t>(f[2]);
    if (!epoch || !calls || !seed) throw ParseError(source, line_no, 1, "bad integer field");
    r.epoch = *epoch;
    r.oracle_calls = *calls;
    r.seed = *seed;
    r.algorithm = f[3];
    for (std::size_t k = 0; k < cols.size(); ++k) {
      const std::string& cell = f[4 + k];
      if (cell.empty()) continue;
      const auto v = to_double(cell);
      if (!v) throw ParseError(source, line_no, 1, "bad number '" + cell + "'");
      r.set(cols[k], *v);
    }
    records.push_back(std::move(r));
  }
  return records;
}

inline std::vector<TrajectoryRecord> read_csv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_csv(in, path);
}

/// Generic table writer for summaries (cells are written verbatim, quoted when needed).
inline void write_table(const std::vector<std::string>& header,
                        const std::vector<std::vector<std::string>>& rows, std::ostream& out) {
  for (std::size_t k = 0; k < header.size(); ++k) out << (k ? "," : "") << detail::csv_quote(header[k]);
  out << '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size()) throw InternalError("summary row width mismatch");
    for (std::size_t k = 0; k < row.size(); ++k) out << (k ? "," : "") << detail::csv_quote(row[k]);
    out << '\n';
  }
}

inline void write_table_file(const std::vector<std::string>& header,
                             const std::vector<std::vector<std::string>>& rows,
                             const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  write_table(header, rows, out);
  if (!out) throw Error("write to '" + path + "' failed");
}

}  // namespace shufgda::harness

#endif  // SHUFGDA_HARNESS_CSV_HPP
