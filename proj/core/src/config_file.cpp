#include "phigpr/config_file.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "phigpr/errors.hpp"

namespace phigpr {
namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_ws(const std::string& s) {
  std::vector<std::string> out;
  std::istringstream in(s);
  std::string tok;
  while (in >> tok) out.push_back(tok);
  return out;
}

double parse_double_token(const std::string& tok, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  double v = std::strtod(tok.c_str(), &end);
  if (end != tok.c_str() + tok.size() || errno == ERANGE)
    throw ConfigError(where + ": not a number: '" + tok + "'");
  return v;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path);
}

ConfigFile ConfigFile::parse_string(const std::string& text, const std::string& origin) {
  ConfigFile cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string current;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      current = trim(line.substr(1, line.size() - 2));
      if (current.empty()) throw ConfigError(where + ": empty section name");
      cfg.obtain_section(current);
      continue;
    }
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected 'key = value'");
    if (current.empty()) throw ConfigError(where + ": key outside of any [section]");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError(where + ": empty key");
    auto& sec = cfg.obtain_section(current);
    for (const auto& e : sec.entries)
      if (e.key == key) throw ConfigError(where + ": duplicate key '" + key + "'");
    sec.entries.push_back({key, value});
  }
  return cfg;
}

const ConfigFile::Section* ConfigFile::find_section(const std::string& name) const {
  for (const auto& s : sections_)
    if (s.name == name) return &s;
  return nullptr;
}

ConfigFile::Section& ConfigFile::obtain_section(const std::string& name) {
  for (auto& s : sections_)
    if (s.name == name) return s;
  sections_.push_back({name, {}});
  return sections_.back();
}

bool ConfigFile::has_section(const std::string& section) const { return find_section(section) != nullptr; }

bool ConfigFile::has(const std::string& section, const std::string& key) const {
  const Section* s = find_section(section);
  if (!s) return false;
  return std::any_of(s->entries.begin(), s->entries.end(), [&](const Entry& e) { return e.key == key; });
}

const std::string& ConfigFile::require(const std::string& section, const std::string& key) const {
  const Section* s = find_section(section);
  if (!s) throw ConfigError(origin_ + ": missing section [" + section + "]");
  for (const auto& e : s->entries)
    if (e.key == key) return e.value;
  throw ConfigError(origin_ + ": missing key '" + key + "' in [" + section + "]");
}

const std::string& ConfigFile::raw(const std::string& section, const std::string& key) const {
  return require(section, key);
}

double ConfigFile::get_double(const std::string& section, const std::string& key) const {
  return parse_double_token(require(section, key), origin_ + " [" + section + "] " + key);
}

double ConfigFile::get_double(const std::string& section, const std::string& key, double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key) const {
  const std::string& v = require(section, key);
  std::int64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(origin_ + " [" + section + "] " + key + ": not an integer: '" + v + "'");
  return out;
}

std::int64_t ConfigFile::get_int(const std::string& section, const std::string& key, std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t ConfigFile::get_uint(const std::string& section, const std::string& key) const {
  const std::string& v = require(section, key);
  std::uint64_t out = 0;
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size())
    throw ConfigError(origin_ + " [" + section + "] " + key + ": not an unsigned integer: '" + v + "'");
  return out;
}

std::uint64_t ConfigFile::get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const {
  return has(section, key) ? get_uint(section, key) : fallback;
}

bool ConfigFile::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string& v = require(section, key);
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + " [" + section + "] " + key + ": not a boolean: '" + v + "'");
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
  return require(section, key);
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
  return has(section, key) ? require(section, key) : fallback;
}

Eigen::VectorXd ConfigFile::get_vector(const std::string& section, const std::string& key) const {
  std::string where = origin_ + " [" + section + "] " + key;
  auto toks = split_ws(require(section, key));
  Eigen::VectorXd out(static_cast<Eigen::Index>(toks.size()));
  for (std::size_t i = 0; i < toks.size(); ++i) out[static_cast<Eigen::Index>(i)] = parse_double_token(toks[i], where);
  return out;
}

Eigen::MatrixXd ConfigFile::get_matrix(const std::string& section, const std::string& key) const {
  std::string where = origin_ + " [" + section + "] " + key;
  const std::string& v = require(section, key);
  std::vector<std::vector<double>> rows;
  std::string row_text;
  std::istringstream in(v);
  auto flush_row = [&](const std::string& text) {
    auto toks = split_ws(text);
    if (toks.empty()) throw ConfigError(where + ": empty matrix row");
    std::vector<double> row;
    row.reserve(toks.size());
    for (const auto& t : toks) row.push_back(parse_double_token(t, where));
    rows.push_back(std::move(row));
  };
  while (std::getline(in, row_text, ';')) flush_row(row_text);
  if (rows.empty()) throw ConfigError(where + ": empty matrix");
  std::size_t ncol = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != ncol) throw ConfigError(where + ": ragged matrix rows");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(ncol));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < ncol; ++j)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

std::vector<std::string> ConfigFile::get_words(const std::string& section, const std::string& key) const {
  return split_ws(require(section, key));
}

void ConfigFile::set_raw(const std::string& section, const std::string& key, const std::string& value) {
  auto& sec = obtain_section(section);
  for (auto& e : sec.entries) {
    if (e.key == key) {
      e.value = value;
      return;
    }
  }
  sec.entries.push_back({key, value});
}

std::string ConfigFile::format_double(double value) {
  // Shortest round-trip decimal.
  for (int prec = 1; prec <= 17; ++prec) {
    std::ostringstream os;
    os.precision(prec);
    os << value;
    std::string s = os.str();
    if (std::strtod(s.c_str(), nullptr) == value) return s;
  }
  return std::to_string(value);
}

void ConfigFile::set_double(const std::string& section, const std::string& key, double value) {
  set_raw(section, key, format_double(value));
}

void ConfigFile::set_int(const std::string& section, const std::string& key, std::int64_t value) {
  set_raw(section, key, std::to_string(value));
}

void ConfigFile::set_uint(const std::string& section, const std::string& key, std::uint64_t value) {
  set_raw(section, key, std::to_string(value));
}

void ConfigFile::set_bool(const std::string& section, const std::string& key, bool value) {
  set_raw(section, key, value ? "true" : "false");
}

void ConfigFile::set_vector(const std::string& section, const std::string& key, const Eigen::VectorXd& value) {
  std::string s;
  for (Eigen::Index i = 0; i < value.size(); ++i) {
    if (i) s += ' ';
    s += format_double(value[i]);
  }
  set_raw(section, key, s);
}

void ConfigFile::set_matrix(const std::string& section, const std::string& key, const Eigen::MatrixXd& value) {
  std::string s;
  for (Eigen::Index i = 0; i < value.rows(); ++i) {
    if (i) s += " ; ";
    for (Eigen::Index j = 0; j < value.cols(); ++j) {
      if (j) s += ' ';
      s += format_double(value(i, j));
    }
  }
  set_raw(section, key, s);
}

void ConfigFile::set_words(const std::string& section, const std::string& key,
                           const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  set_raw(section, key, s);
}

std::vector<std::string> ConfigFile::sections() const {
  std::vector<std::string> out;
  out.reserve(sections_.size());
  for (const auto& s : sections_) out.push_back(s.name);
  return out;
}

std::vector<std::string> ConfigFile::keys(const std::string& section) const {
  const Section* s = find_section(section);
  if (!s) throw ConfigError(origin_ + ": missing section [" + section + "]");
  std::vector<std::string> out;
  out.reserve(s->entries.size());
  for (const auto& e : s->entries) out.push_back(e.key);
  return out;
}

std::string ConfigFile::to_string() const {
  std::string out;
  for (std::size_t si = 0; si < sections_.size(); ++si) {
    if (si) out += '\n';
    out += '[' + sections_[si].name + "]\n";
    for (const auto& e : sections_[si].entries) out += e.key + " = " + e.value + '\n';
  }
  return out;
}

void ConfigFile::write_file(const std::string& path) const {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw ConfigError("cannot write config file: " + path);
  out << to_string();
  if (!out) throw ConfigError("write failed: " + path);
}

}  // namespace phigpr
