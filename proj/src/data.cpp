#include "phidro/data.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "phidro/errors.hpp"
#include "phidro/rng.hpp"

namespace phidro {

Dataset make_blobs(std::size_t n, const std::vector<double>& center_pos,
                   const std::vector<double>& center_neg, double std_pos,
                   double std_neg, std::uint64_t seed) {
  if (center_pos.size() != center_neg.size() || center_pos.empty())
    throw ParameterError("blob centers need matching nonzero dimension");
  Rng rng(seed);
  Dataset data;
  data.reserve(n);
  std::size_t d = center_pos.size();
  std::size_t n_neg = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    bool neg = i < n_neg;
    DataPoint p;
    p.y = neg ? -1.0 : 1.0;
    p.x.resize(d);
    const auto& c = neg ? center_neg : center_pos;
    double s = neg ? std_neg : std_pos;
    for (std::size_t k = 0; k < d; ++k) p.x[k] = c[k] + s * rng.next_gaussian();
    data.push_back(std::move(p));
  }
  return data;
}

Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed) {
  Rng rng(seed);
  Dataset data;
  data.reserve(n);
  std::size_t n_neg = n / 2;
  for (std::size_t i = 0; i < n; ++i) {
    bool neg = i < n_neg;
    double t = std::numbers::pi * rng.next_double();
    DataPoint p;
    p.y = neg ? -1.0 : 1.0;
    if (neg)
      p.x = {1.0 - std::cos(t), 0.5 - std::sin(t)};
    else
      p.x = {std::cos(t), std::sin(t)};
    p.x[0] += noise * rng.next_gaussian();
    p.x[1] += noise * rng.next_gaussian();
    data.push_back(std::move(p));
  }
  return data;
}

Dataset load_csv_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParameterError("cannot open dataset '" + path + "'");
  Dataset data;
  std::string line;
  std::size_t dim = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    std::stringstream ss(line);
    std::string cell;
    std::vector<double> row;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw ParameterError("bad number '" + cell + "' in " + path);
      }
    }
    if (row.size() < 2)
      throw ParameterError("dataset rows need at least one feature + label");
    if (dim == 0) dim = row.size();
    if (row.size() != dim)
      throw ParameterError("ragged dataset row in " + path);
    DataPoint p;
    p.y = row.back();
    row.pop_back();
    p.x = std::move(row);
    data.push_back(std::move(p));
  }
  if (data.empty()) throw ParameterError("dataset '" + path + "' is empty");
  return data;
}

void save_csv_dataset(const Dataset& data, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write dataset '" + path + "'");
  char buf[64];
  for (const auto& p : data) {
    for (double v : p.x) {
      std::snprintf(buf, sizeof buf, "%.17g", v);
      out << buf << ',';
    }
    std::snprintf(buf, sizeof buf, "%.17g", p.y);
    out << buf << '\n';
  }
}

}  // namespace phidro
