#pragma once

// Structured output emission and flat key=value config files. CSV files use
// '.' decimals, LF endings, a '#'-prefixed resolved-config block, then the
// header row; floats carry 17 significant digits so parsing reproduces them
// bit-exactly.

#include <map>
#include <string>
#include <vector>

namespace phidro {

std::string fmt17(double v);

class CsvWriter {
 public:
  CsvWriter(std::string path, std::vector<std::string> columns,
            const std::map<std::string, std::string>& config = {});
  void row(const std::vector<double>& values);
  void raw_row(const std::vector<std::string>& cells);
  // Writes the accumulated bytes; file content is deterministic.
  void close();
  ~CsvWriter();

 private:
  std::string path_;
  std::string buffer_;
  std::size_t n_cols_;
  bool closed_ = false;
};

// key = value lines; '#' comments; later keys override earlier ones.
std::map<std::string, std::string> read_config_file(const std::string& path);

// Typed lookups over a merged config map; throws ParameterError naming the
// key on missing/invalid values.
class ConfigView {
 public:
  explicit ConfigView(std::map<std::string, std::string> kv)
      : kv_(std::move(kv)) {}

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int(const std::string& key, long long fallback) const;
  void override_with(const std::map<std::string, std::string>& flags);
  // Throws on keys outside the allowed set.
  void reject_unknown(const std::vector<std::string>& known) const;
  const std::map<std::string, std::string>& map() const { return kv_; }

 private:
  std::map<std::string, std::string> kv_;
};

std::vector<double> parse_double_list(const std::string& text);

// Writes text to path atomically enough for our purposes (single write),
// binary mode so line endings stay LF everywhere.
void write_file(const std::string& path, const std::string& content);

}  // namespace phidro
