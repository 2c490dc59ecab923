#include "visemelab/features.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "visemelab/error.hpp"

namespace visemelab {

FeatureSequence::FeatureSequence(std::size_t dimension, std::vector<double> data)
    : dimension_(dimension), data_(std::move(data)) {
  if (dimension_ == 0 && !data_.empty()) throw Error("feature dimension must be positive");
  if (dimension_ && data_.size() % dimension_ != 0) {
    throw Error("feature data is not a whole number of frames");
  }
}

void FeatureSequence::push_frame(std::span<const double> values) {
  if (dimension_ == 0) dimension_ = values.size();
  if (values.size() != dimension_ || dimension_ == 0) {
    throw Error("frame dimension mismatch");
  }
  data_.insert(data_.end(), values.begin(), values.end());
}

std::string write_features_csv(const FeatureSequence& seq) {
  std::ostringstream out;
  out << std::setprecision(17);
  for (std::size_t t = 0; t < seq.frames(); ++t) {
    auto f = seq.frame(t);
    for (std::size_t d = 0; d < f.size(); ++d) {
      if (d) out << ',';
      out << f[d];
    }
    out << '\n';
  }
  return out.str();
}

FeatureSequence parse_features_csv(std::string_view text) {
  FeatureSequence seq;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  std::vector<double> frame;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    frame.clear();
    std::istringstream cells(line);
    for (std::string cell; std::getline(cells, cell, ',');) {
      double v = 0;
      const char* b = cell.data();
      while (*b == ' ') ++b;
      auto [ptr, ec] = std::from_chars(b, cell.data() + cell.size(), v);
      if (ec != std::errc() || ptr == b) {
        throw ParseError("line " + std::to_string(line_no) + ": bad value '" + cell + "'");
      }
      frame.push_back(v);
    }
    if (seq.dimension() && frame.size() != seq.dimension()) {
      throw ParseError("line " + std::to_string(line_no) + ": expected " +
                       std::to_string(seq.dimension()) + " values");
    }
    seq.push_frame(frame);
  }
  if (seq.empty()) throw ParseError("feature file has no frames");
  return seq;
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "binary feature IO assumes a little-endian host");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

std::uint32_t get_u32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v;
  std::memcpy(&v, bytes.data() + offset, 4);
  return v;
}

}  // namespace

std::string write_features_binary(const FeatureSequence& seq) {
  std::string out = "VLF1";
  put_u32(out, static_cast<std::uint32_t>(seq.frames()));
  put_u32(out, static_cast<std::uint32_t>(seq.dimension()));
  put_u32(out, 0);
  for (double v : seq.data()) {
    const float f = static_cast<float>(v);
    char b[4];
    std::memcpy(b, &f, 4);
    out.append(b, 4);
  }
  return out;
}

FeatureSequence parse_features_binary(std::string_view bytes) {
  if (bytes.size() < 16 || bytes.substr(0, 4) != "VLF1") {
    throw ParseError("not a VLF1 feature file");
  }
  const std::size_t frames = get_u32(bytes, 4);
  const std::size_t dim = get_u32(bytes, 8);
  if (frames == 0 || dim == 0) throw ParseError("empty VLF1 feature file");
  if (bytes.size() != 16 + 4 * frames * dim) {
    throw ParseError("VLF1 size does not match its header");
  }
  std::vector<double> data(frames * dim);
  for (std::size_t k = 0; k < data.size(); ++k) {
    float f;
    std::memcpy(&f, bytes.data() + 16 + 4 * k, 4);
    data[k] = f;
  }
  return FeatureSequence(dim, std::move(data));
}

FeatureSequence load_features(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open features '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  return csv ? parse_features_csv(buf.str()) : parse_features_binary(buf.str());
}

void save_features(const std::string& path, const FeatureSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write features '" + path + "'");
  const bool csv = path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
  out << (csv ? write_features_csv(seq) : write_features_binary(seq));
}

}  // namespace visemelab
