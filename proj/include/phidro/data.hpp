#pragma once

// Synthetic dataset generators and the CSV dataset format (one row per
// sample, label in the last column).

#include <string>

#include "phidro/model.hpp"

namespace phidro {

// Two Gaussian blobs with labels -1 / +1; n points total, split evenly
// (the +1 class gets the extra point when n is odd).
Dataset make_blobs(std::size_t n, const std::vector<double>& center_pos,
                   const std::vector<double>& center_neg, double std_pos,
                   double std_neg, std::uint64_t seed);

// Classic interleaved half-circles in 2-D with labels -1 / +1.
Dataset make_two_moons(std::size_t n, double noise, std::uint64_t seed);

Dataset load_csv_dataset(const std::string& path);
void save_csv_dataset(const Dataset& data, const std::string& path);

}  // namespace phidro
