#include "fracfv/error.hpp"
#include "fracfv/harness.hpp"

#include <cmath>
#include <limits>

namespace fracfv {

L2Error l2_error(const Vector& field, const Vector& reference, const Vector& weights, const std::vector<int>& subset) {
  if (field.size() != reference.size() || weights.size() != reference.size()) {
    throw UsageError("l2_error: field, reference and weights differ in size");
  }
  double diff = 0.0;
  double ref = 0.0;
  auto accumulate = [&](int i) {
    const double d = field[i] - reference[i];
    diff += weights[i] * d * d;
    ref += weights[i] * reference[i] * reference[i];
  };
  if (subset.empty()) {
    for (int i = 0; i < field.size(); ++i) accumulate(i);
  } else {
    for (int i : subset) {
      if (i < 0 || i >= field.size()) throw UsageError("l2_error: subset index out of range");
      accumulate(i);
    }
  }
  L2Error out;
  if (ref == 0.0) {
    out.value = std::sqrt(diff);
    out.absolute = true;
  } else {
    out.value = std::sqrt(diff / ref);
  }
  return out;
}

std::vector<int> injection_map(const std::vector<Vec3>& coarse_centres, const std::vector<Vec3>& fine_centres) {
  if (coarse_centres.empty() && !fine_centres.empty()) throw UsageError("injection_map: no coarse cells");
  std::vector<int> map(fine_centres.size(), -1);
  for (std::size_t f = 0; f < fine_centres.size(); ++f) {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < coarse_centres.size(); ++c) {
      const double d = (coarse_centres[c] - fine_centres[f]).squaredNorm();
      if (d < best) {
        best = d;
        map[f] = static_cast<int>(c);
      }
    }
  }
  return map;
}

Vector inject(const Vector& coarse, const std::vector<int>& map) {
  Vector fine(static_cast<int>(map.size()));
  for (std::size_t f = 0; f < map.size(); ++f) fine[static_cast<int>(f)] = coarse[map[f]];
  return fine;
}

Vector restrict_average(const Vector& fine, const Vector& fine_volumes, const std::vector<int>& map, int coarse_size) {
  Vector sum = Vector::Zero(coarse_size);
  Vector vol = Vector::Zero(coarse_size);
  for (std::size_t f = 0; f < map.size(); ++f) {
    const int i = static_cast<int>(f);
    sum[map[f]] += fine_volumes[i] * fine[i];
    vol[map[f]] += fine_volumes[i];
  }
  Vector out(coarse_size);
  for (int c = 0; c < coarse_size; ++c) out[c] = vol[c] > 0.0 ? sum[c] / vol[c] : std::numeric_limits<double>::quiet_NaN();
  return out;
}

}  // namespace fracfv
