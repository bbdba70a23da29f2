#include "ancer/datasets.hpp"

#include <cmath>
#include <fstream>
#include <numbers>
#include <string>

#include "ancer/errors.hpp"
#include "ancer/rng.hpp"
#include "ancer/textio.hpp"

namespace ancer {

Dataset generate_radial_dataset(std::size_t count, double noise, std::uint64_t seed) {
  if (count < 2) throw InvalidInputError("radial dataset needs at least two samples");
  if (!(noise >= 0.0)) throw InvalidInputError("noise must be non-negative");
  constexpr double kInner = 1.0;
  constexpr double kOuterLow = 1.4;
  constexpr double kOuterHigh = 2.4;
  RngStream rng(seed, 0);
  Dataset data;
  data.inputs.reserve(count);
  data.labels.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t label = i % 2;
    const double u = rng.uniform01();
    const double radius = label == 0
                              ? kInner * std::sqrt(u)
                              : std::sqrt(kOuterLow * kOuterLow + u * (kOuterHigh * kOuterHigh - kOuterLow * kOuterLow));
    const double angle = 2.0 * std::numbers::pi * rng.uniform01();
    std::vector<double> x{radius * std::cos(angle), radius * std::sin(angle)};
    if (noise > 0.0)
      for (double& v : x) v += noise * rng.normal();
    data.inputs.push_back(std::move(x));
    data.labels.push_back(label);
  }
  return data;
}

Dataset load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  Dataset data;
  std::string raw;
  std::size_t line_no = 0;
  std::size_t width = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = textio::trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto fields = textio::split(line, ',');
    if (fields.size() < 2) throw ParseError("a row needs at least one feature and a label", line_no);
    if (width == 0) width = fields.size();
    if (fields.size() != width)
      throw ParseError("ragged row: " + std::to_string(fields.size()) + " fields, expected " + std::to_string(width), line_no);
    std::vector<double> x;
    x.reserve(width - 1);
    for (std::size_t f = 0; f + 1 < width; ++f) x.push_back(textio::parse_double(fields[f], line_no));
    data.inputs.push_back(std::move(x));
    data.labels.push_back(textio::parse_size(fields.back(), line_no));
  }
  return data;
}

void save_csv(const Dataset& data, const std::filesystem::path& path) {
  validate(data);
  std::ofstream out(path);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (double v : data.inputs[i]) out << textio::format_double(v) << ',';
    out << data.labels[i] << '\n';
  }
}

namespace {

std::uint32_t read_be32(std::ifstream& in, const std::filesystem::path& path, std::size_t offset) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4))
    throw ParseError("'" + path.string() + "': truncated header at byte offset " + std::to_string(offset));
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

}  // namespace

Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  std::ifstream img(images, std::ios::binary);
  if (!img) throw ParseError("cannot open '" + images.string() + "'");
  std::ifstream lab(labels, std::ios::binary);
  if (!lab) throw ParseError("cannot open '" + labels.string() + "'");

  if (const auto magic = read_be32(img, images, 0); magic != 0x00000803)
    throw FormatError("'" + images.string() + "': bad image magic at byte offset 0");
  const std::uint32_t count = read_be32(img, images, 4);
  const std::uint32_t rows = read_be32(img, images, 8);
  const std::uint32_t cols = read_be32(img, images, 12);

  if (const auto magic = read_be32(lab, labels, 0); magic != 0x00000801)
    throw FormatError("'" + labels.string() + "': bad label magic at byte offset 0");
  const std::uint32_t label_count = read_be32(lab, labels, 4);
  if (label_count != count)
    throw ParseError("image count " + std::to_string(count) + " does not match label count " +
                     std::to_string(label_count));

  const std::size_t pixels = std::size_t{rows} * cols;
  Dataset data;
  data.inputs.reserve(count);
  data.labels.reserve(count);
  std::vector<unsigned char> buf(pixels);
  for (std::uint32_t i = 0; i < count; ++i) {
    if (!img.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(pixels)))
      throw ParseError("'" + images.string() + "': truncated image data at byte offset " +
                       std::to_string(16 + std::size_t{i} * pixels));
    std::vector<double> x(pixels);
    for (std::size_t p = 0; p < pixels; ++p) x[p] = buf[p] / 255.0;
    char label = 0;
    if (!lab.get(label))
      throw ParseError("'" + labels.string() + "': truncated label data at byte offset " + std::to_string(8 + i));
    data.inputs.push_back(std::move(x));
    data.labels.push_back(static_cast<unsigned char>(label));
  }
  return data;
}

}  // namespace ancer
