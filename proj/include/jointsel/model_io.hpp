#pragma once

// Versioned key-value model file. Every real is written as a hexadecimal float
// so a save/load cycle reproduces the model bit for bit.
//
//   schema jointsel-model-v1
//   input_dim 30
//   intercept 0
//   n_samples 100
//   gamma 0x1.8p-2
//   w <model_dim hex floats>
//   ...
//   feature_names 30
//   <one name per line>
//   end

#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "jointsel/dataset.hpp"
#include "jointsel/error.hpp"
#include "jointsel/text_format.hpp"

namespace jointsel {

inline constexpr const char* kModelSchema = "jointsel-model-v1";

namespace detail {

inline void write_vector(std::ostream& out, const char* key, const Vector& v) {
  out << key;
  for (Eigen::Index i = 0; i < v.size(); ++i) out << ' ' << format_hex(v[i]);
  out << '\n';
}

}  // namespace detail

inline void write_model(const ModelState& model, std::ostream& out) {
  const auto& s = model.standardization;
  out << "schema " << kModelSchema << '\n';
  out << "input_dim " << s.input_dim() << '\n';
  out << "intercept " << (s.intercept ? 1 : 0) << '\n';
  out << "n_samples " << model.alpha.size() << '\n';
  out << "gamma " << detail::format_hex(model.gamma) << '\n';
  detail::write_vector(out, "w", model.w);
  detail::write_vector(out, "v", model.v);
  detail::write_vector(out, "d_diag", model.d_diag);
  detail::write_vector(out, "alpha", model.alpha);
  detail::write_vector(out, "beta", model.beta);
  detail::write_vector(out, "mean", s.mean);
  detail::write_vector(out, "scale", s.scale);
  out << "objective_trace " << model.objective_trace.size();
  for (double x : model.objective_trace) out << ' ' << detail::format_hex(x);
  out << '\n';
  out << "feature_names " << model.feature_names.size() << '\n';
  for (const auto& name : model.feature_names) out << name << '\n';
  out << "end\n";
}

inline ModelState read_model(std::istream& in, const std::string& source) {
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) {
    return Error(ErrorCode::kParseError, source + " line " + std::to_string(line_no) + ": " + what,
                 line_no);
  };
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) {
      ++line_no;
      throw fail("unexpected end of file");
    }
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };

  // key -> tokens after the key
  auto read_entry = [&](const char* key) {
    std::istringstream fields(next_line());
    std::string k;
    fields >> k;
    if (k != key) throw fail(std::string("expected '") + key + "', found '" + k + "'");
    std::vector<std::string> tokens;
    for (std::string t; fields >> t;) tokens.push_back(t);
    return tokens;
  };
  auto as_count = [&](const std::string& token) {
    const auto v = detail::parse_integer(token);
    if (!v || *v < 0) throw fail("bad count '" + token + "'");
    return static_cast<std::size_t>(*v);
  };
  auto as_real = [&](const std::string& token) {
    const auto v = detail::parse_real(token);
    if (!v) throw fail("bad number '" + token + "'");
    return *v;
  };
  auto read_scalar_count = [&](const char* key) {
    const auto t = read_entry(key);
    if (t.size() != 1) throw fail(std::string(key) + " takes one value");
    return as_count(t[0]);
  };
  auto read_vector = [&](const char* key, std::size_t expected) {
    const auto t = read_entry(key);
    if (t.size() != expected)
      throw fail(std::string(key) + " has " + std::to_string(t.size()) + " values, expected " +
                 std::to_string(expected));
    Vector v(static_cast<Eigen::Index>(expected));
    for (std::size_t i = 0; i < expected; ++i) v[static_cast<Eigen::Index>(i)] = as_real(t[i]);
    return v;
  };

  {
    const auto t = read_entry("schema");
    if (t.size() != 1) throw fail("schema takes one value");
    if (t[0] != kModelSchema)
      throw Error(ErrorCode::kVersionMismatch,
                  source + ": model schema '" + t[0] + "' is not supported (expected " +
                      kModelSchema + ")");
  }

  ModelState m;
  const std::size_t d = read_scalar_count("input_dim");
  const std::size_t intercept = read_scalar_count("intercept");
  if (intercept > 1) throw fail("intercept must be 0 or 1");
  const std::size_t n = read_scalar_count("n_samples");
  const std::size_t dim = d + intercept;
  {
    const auto t = read_entry("gamma");
    if (t.size() != 1) throw fail("gamma takes one value");
    m.gamma = as_real(t[0]);
  }
  m.w = read_vector("w", dim);
  m.v = read_vector("v", dim);
  m.d_diag = read_vector("d_diag", dim);
  m.alpha = read_vector("alpha", n);
  m.beta = read_vector("beta", n);
  m.standardization.mean = read_vector("mean", d);
  m.standardization.scale = read_vector("scale", d);
  m.standardization.intercept = intercept == 1;
  {
    const auto t = read_entry("objective_trace");
    if (t.empty()) throw fail("objective_trace needs a count");
    const std::size_t count = as_count(t[0]);
    if (t.size() != count + 1) throw fail("objective_trace count does not match its values");
    for (std::size_t i = 1; i < t.size(); ++i) m.objective_trace.push_back(as_real(t[i]));
  }
  const std::size_t names = read_scalar_count("feature_names");
  for (std::size_t i = 0; i < names; ++i) m.feature_names.push_back(next_line());
  if (read_entry("end").size() != 0) throw fail("trailing tokens after 'end'");
  return m;
}

inline void save_model(const ModelState& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_model(model, out);
  if (!out) throw Error(ErrorCode::kIoError, "write failed for " + path.string());
}

inline ModelState load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return read_model(in, path.string());
}

}  // namespace jointsel
