#pragma once

#include <Eigen/Core>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace superf {

enum class SegmentKind {
  kFourierBasis,
  kMlpWeight,
  kMlpBias,
  kAlignment,
  kSpectral,
  kTransformWeight,
  kTransformBias,
  kOther,
};

const char* to_string(SegmentKind kind);

/// Named (offset, length) range of the flat parameter vector, viewed as a
/// column-major rows x cols matrix.
struct Segment {
  std::string name;
  std::size_t offset = 0;
  int rows = 0;
  int cols = 0;
  SegmentKind kind = SegmentKind::kOther;
  bool trainable = true;

  std::size_t length() const { return static_cast<std::size_t>(rows) * cols; }
  bool is_weight_matrix() const {
    return kind == SegmentKind::kMlpWeight || kind == SegmentKind::kTransformWeight;
  }
};

/// Flat parameter vector with named segments. Segments are appended in
/// order, so they are disjoint and cover the vector exactly.
class ParamStore {
 public:
  using SegmentId = std::size_t;
  using MatrixMap = Eigen::Map<Eigen::MatrixXd>;
  using ConstMatrixMap = Eigen::Map<const Eigen::MatrixXd>;

  SegmentId add(std::string name, int rows, int cols, SegmentKind kind, bool trainable,
                double fill = 0.0);

  SegmentId find(const std::string& name) const;
  bool contains(const std::string& name) const;

  const Segment& segment(SegmentId id) const { return segments_.at(id); }
  const std::vector<Segment>& segments() const { return segments_; }
  std::size_t num_segments() const { return segments_.size(); }

  void set_trainable(SegmentId id, bool trainable) { segments_.at(id).trainable = trainable; }

  MatrixMap matrix(SegmentId id);
  ConstMatrixMap matrix(SegmentId id) const;
  std::span<double> values(SegmentId id);
  std::span<const double> values(SegmentId id) const;

  std::vector<double>& flat() { return values_; }
  const std::vector<double>& flat() const { return values_; }
  std::size_t size() const { return values_.size(); }
  std::size_t trainable_count() const;

 private:
  std::vector<double> values_;
  std::vector<Segment> segments_;
};

/// Raised when a numerical quantity (loss, gradient) is not finite.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace superf
