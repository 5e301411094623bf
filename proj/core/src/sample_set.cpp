#include "odin/sample_set.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace odin {

SampleSet::SampleSet(std::vector<double> data, std::size_t n, std::size_t dim)
    : data_(std::move(data)), n_(n), dim_(dim)
{
  if (n_ < 1 || dim_ < 1) throw std::invalid_argument("SampleSet: need n >= 1 and dim >= 1");
  if (data_.size() != n_ * dim_)
    throw std::invalid_argument("SampleSet: data size " + std::to_string(data_.size()) +
                                " does not match n*dim = " + std::to_string(n_ * dim_));
  for (double v : data_)
    if (!std::isfinite(v)) throw std::invalid_argument("SampleSet: non-finite coordinate");
}

bool SampleSet::within_box(double lo, double hi) const
{
  for (double v : data_)
    if (v < lo || v > hi) return false;
  return true;
}

void SampleSet::require_box(double lo, double hi) const
{
  if (!within_box(lo, hi))
    throw std::invalid_argument("SampleSet: coordinate outside declared box [" +
                                std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

namespace {

bool parse_row(const std::string& line, std::vector<double>& out)
{
  out.clear();
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) {
    try {
      std::size_t pos = 0;
      double v = std::stod(field, &pos);
      while (pos < field.size() && std::isspace(static_cast<unsigned char>(field[pos]))) ++pos;
      if (pos != field.size()) return false;
      out.push_back(v);
    } catch (const std::exception&) {
      return false;
    }
  }
  return !out.empty();
}

}  // namespace

SampleSet read_sample_csv(const std::string& path)
{
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open sample CSV: " + path);

  std::vector<double> data;
  std::vector<double> row;
  std::size_t n = 0, dim = 0;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!parse_row(line, row)) {
      if (first) {
        first = false;  // header line
        continue;
      }
      throw std::runtime_error("non-numeric row in sample CSV: " + path);
    }
    first = false;
    if (dim == 0) dim = row.size();
    if (row.size() != dim) throw std::runtime_error("ragged row in sample CSV: " + path);
    data.insert(data.end(), row.begin(), row.end());
    ++n;
  }
  if (n == 0) throw std::runtime_error("empty sample CSV: " + path);
  return SampleSet(std::move(data), n, dim);
}

void write_sample_csv(const SampleSet& s, const std::string& path)
{
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write sample CSV: " + path);
  char buf[64];
  for (std::size_t i = 0; i < s.n(); ++i) {
    for (std::size_t k = 0; k < s.dim(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", s.at(i, k));
      out << buf << (k + 1 < s.dim() ? "," : "\n");
    }
  }
}

}  // namespace odin
