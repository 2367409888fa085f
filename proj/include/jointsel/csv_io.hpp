#pragma once

// Dataset CSV:
//
//   id,f_1,...,f_d,label,time_days
//   s1,0.12,...,-1,NA
//
// label is -1 or 1; time_days is a decimal number of days or the literal NA.

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/text_format.hpp"

namespace jointsel {

namespace detail {

inline std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

}  // namespace detail

/// Parses and validates a dataset. `source` names the input in error messages;
/// errors carry the 1-based line number as their index.
inline Dataset read_csv(std::istream& in, const std::string& source) {
  auto fail = [&](std::size_t line, const std::string& what) -> Error {
    return Error(ErrorCode::kParseError, source + " line " + std::to_string(line) + ": " + what,
                 line);
  };

  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw fail(1, "missing header row");
  ++line_no;
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = detail::split_commas(line);
  if (header.size() < 3 || detail::trim(header.front()) != "id" ||
      detail::trim(header[header.size() - 2]) != "label" ||
      detail::trim(header.back()) != "time_days")
    throw fail(1, "header must be id,<features...>,label,time_days");
  const std::size_t d = header.size() - 3;

  Dataset ds;
  for (std::size_t j = 0; j < d; ++j) ds.feature_names.emplace_back(detail::trim(header[j + 1]));

  std::vector<double> values;
  std::vector<int> labels;
  std::vector<double> times;
  std::vector<std::size_t> sample_lines;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_commas(line);
    if (fields.size() != header.size())
      throw fail(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                              std::to_string(fields.size()));
    ds.ids.emplace_back(detail::trim(fields[0]));
    for (std::size_t j = 0; j < d; ++j) {
      const auto v = detail::parse_real(fields[j + 1]);
      if (!v)
        throw fail(line_no, "column " + std::string(detail::trim(header[j + 1])) +
                                ": not a number: '" + std::string(fields[j + 1]) + "'");
      values.push_back(*v);
    }
    const auto label = detail::parse_integer(fields[d + 1]);
    if (!label) throw fail(line_no, "label is not an integer: '" + std::string(fields[d + 1]) + "'");
    if (*label != -1 && *label != 1)
      throw Error(ErrorCode::kInvalidLabel,
                  source + " line " + std::to_string(line_no) + ": label " +
                      std::to_string(*label) + " is not -1 or 1",
                  line_no);
    labels.push_back(static_cast<int>(*label));
    const auto time_field = detail::trim(fields[d + 2]);
    if (time_field == "NA") {
      times.push_back(0.0);
      ds.time_present.push_back(false);
    } else {
      const auto t = detail::parse_real(time_field);
      if (!t) throw fail(line_no, "time_days is neither a number nor NA: '" + std::string(time_field) + "'");
      times.push_back(*t);
      ds.time_present.push_back(true);
    }
    sample_lines.push_back(line_no);
  }

  const auto n = static_cast<Eigen::Index>(labels.size());
  ds.features.resize(static_cast<Eigen::Index>(d), n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (std::size_t j = 0; j < d; ++j)
      ds.features(static_cast<Eigen::Index>(j), i) = values[static_cast<std::size_t>(i) * d + j];
  ds.labels = Eigen::Map<const LabelVector>(labels.data(), n);
  ds.times = Eigen::Map<const Vector>(times.data(), n);

  try {
    return validate_dataset(std::move(ds));
  } catch (const Error& e) {
    if (e.index() && *e.index() < sample_lines.size()) {
      const std::size_t at = sample_lines[*e.index()];
      throw Error(e.code(), source + " line " + std::to_string(at) + ": " + e.what(), at);
    }
    throw Error(e.code(), source + ": " + e.what(), e.index());
  }
}

inline Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_csv(in, path.string());
}

/// Writes with shortest round-trip number formatting, so read_csv gives back
/// the same values bit for bit.
inline void write_csv(const Dataset& ds, std::ostream& out) {
  const std::size_t d = ds.n_features();
  const std::size_t n = ds.n_samples();
  out << "id";
  for (std::size_t j = 0; j < d; ++j)
    out << ',' << (j < ds.feature_names.size() ? ds.feature_names[j] : "f_" + std::to_string(j + 1));
  out << ",label,time_days\n";
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = static_cast<Eigen::Index>(i);
    out << (i < ds.ids.size() ? ds.ids[i] : std::to_string(i + 1));
    for (std::size_t j = 0; j < d; ++j)
      out << ',' << detail::format_real(ds.features(static_cast<Eigen::Index>(j), c));
    out << ',' << ds.labels[c] << ',';
    if (ds.time_present[i]) out << detail::format_real(ds.times[c]);
    else out << "NA";
    out << '\n';
  }
}

inline void save_csv(const Dataset& ds, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_csv(ds, out);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

}  // namespace jointsel
