#include "superf/params.hpp"

namespace superf {

const char* to_string(SegmentKind kind) {
  switch (kind) {
    case SegmentKind::kFourierBasis: return "fourier_basis";
    case SegmentKind::kMlpWeight: return "mlp_weight";
    case SegmentKind::kMlpBias: return "mlp_bias";
    case SegmentKind::kAlignment: return "alignment";
    case SegmentKind::kSpectral: return "spectral";
    case SegmentKind::kTransformWeight: return "transform_weight";
    case SegmentKind::kTransformBias: return "transform_bias";
    case SegmentKind::kOther: return "other";
  }
  return "other";
}

ParamStore::SegmentId ParamStore::add(std::string name, int rows, int cols, SegmentKind kind,
                                      bool trainable, double fill) {
  if (rows <= 0 || cols <= 0) throw std::invalid_argument("segment " + name + " is empty");
  if (contains(name)) throw std::invalid_argument("duplicate segment " + name);
  Segment seg;
  seg.name = std::move(name);
  seg.offset = values_.size();
  seg.rows = rows;
  seg.cols = cols;
  seg.kind = kind;
  seg.trainable = trainable;
  values_.resize(values_.size() + seg.length(), fill);
  segments_.push_back(std::move(seg));
  return segments_.size() - 1;
}

ParamStore::SegmentId ParamStore::find(const std::string& name) const {
  for (std::size_t i = 0; i < segments_.size(); ++i) {
    if (segments_[i].name == name) return i;
  }
  throw std::out_of_range("no parameter segment named " + name);
}

bool ParamStore::contains(const std::string& name) const {
  for (const Segment& s : segments_) {
    if (s.name == name) return true;
  }
  return false;
}

ParamStore::MatrixMap ParamStore::matrix(SegmentId id) {
  const Segment& s = segments_.at(id);
  return MatrixMap(values_.data() + s.offset, s.rows, s.cols);
}

ParamStore::ConstMatrixMap ParamStore::matrix(SegmentId id) const {
  const Segment& s = segments_.at(id);
  return ConstMatrixMap(values_.data() + s.offset, s.rows, s.cols);
}

std::span<double> ParamStore::values(SegmentId id) {
  const Segment& s = segments_.at(id);
  return {values_.data() + s.offset, s.length()};
}

std::span<const double> ParamStore::values(SegmentId id) const {
  const Segment& s = segments_.at(id);
  return {values_.data() + s.offset, s.length()};
}

std::size_t ParamStore::trainable_count() const {
  std::size_t n = 0;
  for (const Segment& s : segments_) {
    if (s.trainable) n += s.length();
  }
  return n;
}

}  // namespace superf
