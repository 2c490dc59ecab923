#ifndef VISEMELAB_FEATURES_HPP_
#define VISEMELAB_FEATURES_HPP_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace visemelab {

// Row-major frames of uniform dimension.
class FeatureSequence {
 public:
  FeatureSequence() = default;
  FeatureSequence(std::size_t dimension, std::vector<double> data);

  std::size_t dimension() const { return dimension_; }
  std::size_t frames() const { return dimension_ ? data_.size() / dimension_ : 0; }
  bool empty() const { return data_.empty(); }

  std::span<const double> frame(std::size_t t) const {
    return {data_.data() + t * dimension_, dimension_};
  }
  void push_frame(std::span<const double> values);
  const std::vector<double>& data() const { return data_; }

  friend bool operator==(const FeatureSequence&, const FeatureSequence&) = default;

 private:
  std::size_t dimension_ = 0;
  std::vector<double> data_;
};

// One frame per line, comma separated.
std::string write_features_csv(const FeatureSequence& seq);
FeatureSequence parse_features_csv(std::string_view text);

// "VLF1" | u32 frames | u32 dimension | u32 reserved, then float32 values,
// all little-endian.
std::string write_features_binary(const FeatureSequence& seq);
FeatureSequence parse_features_binary(std::string_view bytes);

// Picks the format from the extension (.csv, otherwise binary).
FeatureSequence load_features(const std::string& path);
void save_features(const std::string& path, const FeatureSequence& seq);

}  // namespace visemelab

#endif  // VISEMELAB_FEATURES_HPP_
