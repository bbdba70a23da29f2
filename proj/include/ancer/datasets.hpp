#pragma once

#include <cstdint>
#include <filesystem>

#include "ancer/dataset.hpp"

namespace ancer {

// Two-class radial toy set: label 0 uniform on the disk ||x|| < 1, label 1
// uniform on the annulus 1.4 < ||x|| < 2.4, labels alternate, then Gaussian
// coordinate noise of standard deviation `noise` is added.
Dataset generate_radial_dataset(std::size_t count, double noise, std::uint64_t seed);

// One sample per line, comma separated, label in the last column. Blank lines
// and lines starting with '#' are skipped.
Dataset load_csv(const std::filesystem::path& path);
void save_csv(const Dataset& data, const std::filesystem::path& path);

// IDX image/label pair (magic 0x00000803 / 0x00000801, big endian); pixel
// bytes are scaled to [0, 1] and images flattened row-major.
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

}  // namespace ancer
