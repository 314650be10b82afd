#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace phigpr {

/// Sectioned key-value text format used for grid constants, experiment
/// configs, fitted model dumps and run records.
///
///   # comment
///   [section]
///   scalar   = 1.25
///   vector   = 0.1 0.2 0.3
///   matrix   = 1 2 ; 3 4        (';' separates rows)
///   words    = phi-gpr arima
///
/// Keys are unique per section; sections and keys keep insertion order so a
/// written file round-trips byte for byte.
class ConfigFile {
public:
  static ConfigFile parse_file(const std::string& path);
  static ConfigFile parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has_section(const std::string& section) const;
  bool has(const std::string& section, const std::string& key) const;

  const std::string& raw(const std::string& section, const std::string& key) const;

  double get_double(const std::string& section, const std::string& key) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::int64_t get_int(const std::string& section, const std::string& key) const;
  std::int64_t get_int(const std::string& section, const std::string& key, std::int64_t fallback) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key) const;
  std::uint64_t get_uint(const std::string& section, const std::string& key, std::uint64_t fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::string get_string(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  Eigen::VectorXd get_vector(const std::string& section, const std::string& key) const;
  Eigen::MatrixXd get_matrix(const std::string& section, const std::string& key) const;
  std::vector<std::string> get_words(const std::string& section, const std::string& key) const;

  void set_raw(const std::string& section, const std::string& key, const std::string& value);
  void set_double(const std::string& section, const std::string& key, double value);
  void set_int(const std::string& section, const std::string& key, std::int64_t value);
  void set_uint(const std::string& section, const std::string& key, std::uint64_t value);
  void set_bool(const std::string& section, const std::string& key, bool value);
  void set_vector(const std::string& section, const std::string& key, const Eigen::VectorXd& value);
  void set_matrix(const std::string& section, const std::string& key, const Eigen::MatrixXd& value);
  void set_words(const std::string& section, const std::string& key, const std::vector<std::string>& words);

  std::vector<std::string> sections() const;
  std::vector<std::string> keys(const std::string& section) const;

  std::string to_string() const;
  void write_file(const std::string& path) const;

  /// Shortest decimal form that parses back to the same double.
  static std::string format_double(double value);

private:
  struct Entry {
    std::string key;
    std::string value;
  };
  struct Section {
    std::string name;
    std::vector<Entry> entries;
  };
  std::vector<Section> sections_;
  std::string origin_ = "<empty>";

  const Section* find_section(const std::string& name) const;
  Section& obtain_section(const std::string& name);
  const std::string& require(const std::string& section, const std::string& key) const;
};

}  // namespace phigpr
