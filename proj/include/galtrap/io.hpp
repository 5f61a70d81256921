#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "galtrap/errors.hpp"
#include "galtrap/field.hpp"
#include "galtrap/mode.hpp"

namespace galtrap {

using json = nlohmann::json;

/// Shortest decimal text that parses back to the same double.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
    throw ParameterError("malformed number '" + std::string(s) + "'");
  return v;
}

inline json mode_to_json(const Mode& k) {
  json a = json::array();
  for (int i = 0; i < k.dim; ++i) a.push_back(k.c[i]);
  return a;
}

inline Mode mode_from_json(const json& j, int dim) {
  if (!j.is_array()) throw ParameterError("mode must be an integer array");
  std::vector<int> c;
  for (const auto& x : j) {
    if (!x.is_number_integer()) throw ParameterError("mode components must be integers");
    c.push_back(x.get<int>());
  }
  return Mode::of(dim, c);
}

/// {"dimension": d, "modes": [[[k...], [re...], [im...]], ...]}
inline json field_to_json(const SpectralField& u) {
  json modes = json::array();
  for (std::size_t i = 0; i < u.size(); ++i) {
    json re = json::array(), im = json::array();
    for (int d = 0; d < u.dim(); ++d) {
      re.push_back(u[i][d].real());
      im.push_back(u[i][d].imag());
    }
    modes.push_back(json::array({mode_to_json(u.modes()[i]), re, im}));
  }
  return json{{"dimension", u.dim()}, {"modes", modes}};
}

namespace detail {

/// Builds a field from raw (mode, coefficient) entries, completing or
/// rejecting missing conjugates and checking both invariants.
inline SpectralField assemble_field(int dim, const std::map<Mode, CVec>& raw, bool symmetrize) {
  std::map<Mode, CVec> entries = raw;
  for (const auto& [k, v] : raw) {
    if (entries.count(-k)) continue;
    if (!symmetrize) throw InvariantError("missing conjugate mode " + (-k).str() + " of k=" + k.str());
    entries[-k] = conj(v);
  }
  std::vector<Mode> modes;
  for (const auto& [k, v] : entries) modes.push_back(k);
  auto set = ModeSet::from_modes(dim, modes);
  SpectralField u(set);
  for (std::size_t i = 0; i < set->size(); ++i) u[i] = entries.at((*set)[i]);
  u.check_invariants();
  return u;
}

}  // namespace detail

inline SpectralField field_from_json(const json& j, bool symmetrize = false) {
  if (!j.is_object() || !j.contains("dimension") || !j.contains("modes"))
    throw ParameterError("field JSON needs 'dimension' and 'modes'");
  const int dim = j.at("dimension").get<int>();
  if (dim != 2 && dim != 3) throw ParameterError("field dimension must be 2 or 3");
  std::map<Mode, CVec> raw;
  for (const auto& e : j.at("modes")) {
    if (!e.is_array() || e.size() != 3) throw ParameterError("each mode entry is [[k...], [re...], [im...]]");
    const Mode k = mode_from_json(e[0], dim);
    if (k.is_zero()) throw ParameterError("the zero mode cannot be stored");
    if (e[1].size() != static_cast<std::size_t>(dim) || e[2].size() != static_cast<std::size_t>(dim))
      throw ParameterError("coefficient at k=" + k.str() + " has the wrong number of components");
    CVec v{};
    for (int d = 0; d < dim; ++d) v[d] = cplx(e[1][d].get<double>(), e[2][d].get<double>());
    if (!raw.emplace(k, v).second) throw ParameterError("mode " + k.str() + " listed twice");
  }
  return detail::assemble_field(dim, raw, symmetrize);
}

/// Flat CSV: one row per (mode, component): k1,k2[,k3],component,re,im.
inline std::string field_to_csv(const SpectralField& u) {
  std::ostringstream os;
  for (int d = 0; d < u.dim(); ++d) os << "k" << (d + 1) << ",";
  os << "component,re,im\n";
  for (std::size_t i = 0; i < u.size(); ++i)
    for (int c = 0; c < u.dim(); ++c) {
      for (int d = 0; d < u.dim(); ++d) os << u.modes()[i].c[d] << ",";
      os << c << "," << format_double(u[i][c].real()) << "," << format_double(u[i][c].imag()) << "\n";
    }
  return os.str();
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

inline SpectralField field_from_csv(const std::string& text, bool symmetrize = false) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw ParameterError("empty field CSV");
  const auto header = split_csv_line(line);
  const int dim = static_cast<int>(header.size()) - 3;
  if ((dim != 2 && dim != 3) || header[static_cast<std::size_t>(dim)] != "component")
    throw ParameterError("field CSV header must be k1,k2[,k3],component,re,im");
  std::map<Mode, CVec> raw;
  int row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    const auto cols = split_csv_line(line);
    if (cols.size() != header.size()) throw ParameterError("field CSV row " + std::to_string(row) + " has wrong width");
    std::vector<int> c(static_cast<std::size_t>(dim));
    for (int d = 0; d < dim; ++d) c[static_cast<std::size_t>(d)] = static_cast<int>(parse_double(cols[static_cast<std::size_t>(d)]));
    const Mode k = Mode::of(dim, c);
    if (k.is_zero()) throw ParameterError("the zero mode cannot be stored");
    const int comp = static_cast<int>(parse_double(cols[static_cast<std::size_t>(dim)]));
    if (comp < 0 || comp >= dim) throw ParameterError("component index out of range at row " + std::to_string(row));
    raw[k][static_cast<std::size_t>(comp)] =
        cplx(parse_double(cols[static_cast<std::size_t>(dim + 1)]), parse_double(cols[static_cast<std::size_t>(dim + 2)]));
  }
  return detail::assemble_field(dim, raw, symmetrize);
}

inline std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out << text;
}

/// Reads a field from .json or .csv (by extension).
inline SpectralField load_field_file(const std::string& path, bool symmetrize = false) {
  const std::string text = read_text(path);
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv") return field_from_csv(text, symmetrize);
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParameterError("malformed field JSON '" + path + "': " + e.what());
  }
  return field_from_json(j, symmetrize);
}

inline void save_field_file(const std::string& path, const SpectralField& u) {
  if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
    write_text(path, field_to_csv(u));
  else
    write_text(path, field_to_json(u).dump(1) + "\n");
}

}  // namespace galtrap
