#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "facelve/random.hpp"

namespace facelve {

inline constexpr std::size_t kDefaultLatentDim = 512;

/// A point in the generator's input space. Immutable once built: every
/// component is finite and there is at least one.
class LatentVector {
 public:
  explicit LatentVector(std::vector<double> components);
  LatentVector(std::initializer_list<double> components);

  static LatentVector zeros(std::size_t dim);

  std::size_t dim() const noexcept { return components_.size(); }
  std::span<const double> values() const noexcept { return components_; }
  double operator[](std::size_t i) const { return components_[i]; }
  const std::vector<double>& to_vector() const noexcept { return components_; }

  friend bool operator==(const LatentVector&, const LatentVector&) = default;

 private:
  std::vector<double> components_;
};

double dot(const LatentVector& a, const LatentVector& b);
double norm(const LatentVector& v);
double distance(const LatentVector& a, const LatentVector& b);

LatentVector operator+(const LatentVector& a, const LatentVector& b);
LatentVector operator-(const LatentVector& a, const LatentVector& b);
LatentVector operator*(double s, const LatentVector& v);

/// a + s * direction, in one pass.
LatentVector axpy(const LatentVector& a, double s, const LatentVector& direction);

/// Unit vector along v; throws DegenerateAxis when ‖v‖ is zero.
LatentVector normalized(const LatentVector& v);

void require_same_dim(const LatentVector& a, const LatentVector& b);

LatentVector sample_standard(RandomStream& rng, std::size_t dim);

/// Componentwise mean, summed left to right.
LatentVector average(std::span<const LatentVector> vectors);

/// Σ wᵢvᵢ / Σ wᵢ. Weights must be non-negative with a positive sum.
LatentVector weighted_average(std::span<const LatentVector> vectors,
                              std::span<const double> weights);

/// (1 - t)a + tb. Endpoints t = 0 and t = 1 return exact copies.
LatentVector interpolate(const LatentVector& a, const LatentVector& b, double t);

LatentVector add_gaussian_noise(const LatentVector& v, double sigma, RandomStream& rng);

}  // namespace facelve
