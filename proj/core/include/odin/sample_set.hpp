#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace odin {

//! A fixed-dimension point cloud stored row-major: n points, dim coordinates
//! each. All coordinates must be finite; construction enforces this.
class SampleSet
{
public:
  SampleSet() = default;

  //! Takes ownership of row-major data (n*dim values).
  SampleSet(std::vector<double> data, std::size_t n, std::size_t dim);

  std::size_t n() const { return n_; }
  std::size_t dim() const { return dim_; }

  double at(std::size_t i, std::size_t k) const { return data_[i * dim_ + k]; }
  const double* row(std::size_t i) const { return data_.data() + i * dim_; }
  const std::vector<double>& data() const { return data_; }

  //! True if every coordinate lies in [lo, hi].
  bool within_box(double lo, double hi) const;

  //! Fails (throws std::invalid_argument) if any coordinate is outside
  //! [lo, hi]; used for densities declared on a bounding box.
  void require_box(double lo, double hi) const;

private:
  std::vector<double> data_;
  std::size_t n_ = 0;
  std::size_t dim_ = 0;
};

//! Reads one point per line, dim comma-separated numeric columns. A first
//! line containing any non-numeric field is treated as a header and skipped.
SampleSet read_sample_csv(const std::string& path);

//! Writes one point per row with full round-trip precision ("%.17g").
void write_sample_csv(const SampleSet& s, const std::string& path);

}  // namespace odin
