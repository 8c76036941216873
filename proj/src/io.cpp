#include "phidro/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

#include "phidro/errors.hpp"

namespace phidro {

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

CsvWriter::CsvWriter(std::string path, std::vector<std::string> columns,
                     const std::map<std::string, std::string>& config)
    : path_(std::move(path)), n_cols_(columns.size()) {
  for (const auto& [k, v] : config) buffer_ += "# " + k + " = " + v + "\n";
  for (std::size_t i = 0; i < columns.size(); ++i) {
    buffer_ += columns[i];
    buffer_ += i + 1 < columns.size() ? ',' : '\n';
  }
}

void CsvWriter::row(const std::vector<double>& values) {
  if (values.size() != n_cols_)
    throw ParameterError("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < values.size(); ++i) {
    buffer_ += fmt17(values[i]);
    buffer_ += i + 1 < values.size() ? ',' : '\n';
  }
}

void CsvWriter::raw_row(const std::vector<std::string>& cells) {
  if (cells.size() != n_cols_)
    throw ParameterError("csv row width mismatch in " + path_);
  for (std::size_t i = 0; i < cells.size(); ++i) {
    buffer_ += cells[i];
    buffer_ += i + 1 < cells.size() ? ',' : '\n';
  }
}

void CsvWriter::close() {
  if (closed_) return;
  closed_ = true;
  write_file(path_, buffer_);
}

CsvWriter::~CsvWriter() {
  try {
    close();
  } catch (...) {
  }
}

std::map<std::string, std::string> read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open config file '" + path + "'");
  std::map<std::string, std::string> kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ParameterError("config line " + std::to_string(lineno) +
                           " is not 'key = value'");
    auto trim = [](std::string s) {
      auto b = s.find_first_not_of(" \t\r");
      auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ParameterError("config line " + std::to_string(lineno) +
                           " has an empty key");
    kv[key] = value;
  }
  return kv;
}

std::string ConfigView::get_string(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end())
    throw ParameterError("missing required config key '" + key + "'");
  return it->second;
}

std::string ConfigView::get_string(const std::string& key,
                                   const std::string& fallback) const {
  auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double ConfigView::get_double(const std::string& key) const {
  std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "' is not a number: " + s);
  }
}

double ConfigView::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long ConfigView::get_int(const std::string& key) const {
  std::string s = get_string(key);
  try {
    std::size_t pos = 0;
    long long v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ParameterError("config key '" + key + "' is not an integer: " + s);
  }
}

long long ConfigView::get_int(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

void ConfigView::override_with(const std::map<std::string, std::string>& flags) {
  for (const auto& [k, v] : flags) kv_[k] = v;
}

void ConfigView::reject_unknown(const std::vector<std::string>& known) const {
  for (const auto& [k, v] : kv_) {
    bool ok = false;
    for (const auto& name : known)
      if (k == name) {
        ok = true;
        break;
      }
    if (!ok) throw ParameterError("unknown config key '" + k + "'");
  }
}

std::vector<double> parse_double_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    try {
      std::size_t pos = 0;
      out.push_back(std::stod(cell, &pos));
      if (pos != cell.size()) throw std::invalid_argument(cell);
    } catch (const std::exception&) {
      throw ParameterError("bad number '" + cell + "' in list");
    }
  }
  if (out.empty()) throw ParameterError("empty number list");
  return out;
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write '" + path + "'");
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw ParameterError("short write to '" + path + "'");
}

}  // namespace phidro
