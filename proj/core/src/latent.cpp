#include "facelve/latent.hpp"

#include <cmath>
#include <string>

#include "facelve/error.hpp"

namespace facelve {

LatentVector::LatentVector(std::vector<double> components)
    : components_(std::move(components)) {
  if (components_.empty()) {
    throw Error(ErrorCode::InvalidDimension, "latent vector must have at least one component");
  }
  for (double c : components_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorCode::Validation, "latent vector component is not finite");
    }
  }
}

LatentVector::LatentVector(std::initializer_list<double> components)
    : LatentVector(std::vector<double>(components)) {}

LatentVector LatentVector::zeros(std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidDimension, "dimension must be positive");
  return LatentVector(std::vector<double>(dim, 0.0));
}

void require_same_dim(const LatentVector& a, const LatentVector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::DimensionMismatch,
                "dimension mismatch: " + std::to_string(a.dim()) + " vs " +
                    std::to_string(b.dim()));
  }
}

double dot(const LatentVector& a, const LatentVector& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const LatentVector& v) { return std::sqrt(dot(v, v)); }

double distance(const LatentVector& a, const LatentVector& b) {
  require_same_dim(a, b);
  double s = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    const double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

LatentVector operator+(const LatentVector& a, const LatentVector& b) {
  return axpy(a, 1.0, b);
}

LatentVector operator-(const LatentVector& a, const LatentVector& b) {
  return axpy(a, -1.0, b);
}

LatentVector operator*(double s, const LatentVector& v) {
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x *= s;
  return LatentVector(std::move(out));
}

LatentVector axpy(const LatentVector& a, double s, const LatentVector& direction) {
  require_same_dim(a, direction);
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + s * direction[i];
  return LatentVector(std::move(out));
}

LatentVector normalized(const LatentVector& v) {
  const double n = norm(v);
  if (n == 0.0) throw Error(ErrorCode::DegenerateAxis, "cannot normalize a zero vector");
  return (1.0 / n) * v;
}

LatentVector sample_standard(RandomStream& rng, std::size_t dim) {
  if (dim == 0) throw Error(ErrorCode::InvalidDimension, "dimension must be positive");
  std::vector<double> out(dim);
  for (double& x : out) x = rng.normal();
  return LatentVector(std::move(out));
}

LatentVector average(std::span<const LatentVector> vectors) {
  if (vectors.empty()) throw Error(ErrorCode::EmptySelection, "average of an empty selection");
  const std::size_t dim = vectors.front().dim();
  std::vector<double> sum(dim, 0.0);
  for (const LatentVector& v : vectors) {
    require_same_dim(vectors.front(), v);
    for (std::size_t i = 0; i < dim; ++i) sum[i] += v[i];
  }
  const double n = static_cast<double>(vectors.size());
  for (double& x : sum) x /= n;
  return LatentVector(std::move(sum));
}

LatentVector weighted_average(std::span<const LatentVector> vectors,
                              std::span<const double> weights) {
  if (vectors.size() != weights.size()) {
    throw Error(ErrorCode::DimensionMismatch, "weights and vectors differ in length");
  }
  if (vectors.empty()) throw Error(ErrorCode::EmptySelection, "average of an empty selection");
  double total = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0) || !std::isfinite(w)) {
      throw Error(ErrorCode::OutOfRange, "weights must be finite and non-negative");
    }
    total += w;
  }
  if (total <= 0.0) throw Error(ErrorCode::DegenerateWeights, "weights sum to zero");

  const std::size_t dim = vectors.front().dim();
  std::vector<double> sum(dim, 0.0);
  for (std::size_t k = 0; k < vectors.size(); ++k) {
    require_same_dim(vectors.front(), vectors[k]);
    for (std::size_t i = 0; i < dim; ++i) sum[i] += weights[k] * vectors[k][i];
  }
  for (double& x : sum) x /= total;
  return LatentVector(std::move(sum));
}

LatentVector interpolate(const LatentVector& a, const LatentVector& b, double t) {
  require_same_dim(a, b);
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorCode::OutOfRange, "t must lie in [0, 1]");
  if (t == 0.0) return a;
  if (t == 1.0) return b;
  std::vector<double> out(a.dim());
  for (std::size_t i = 0; i < a.dim(); ++i) out[i] = (1.0 - t) * a[i] + t * b[i];
  return LatentVector(std::move(out));
}

LatentVector add_gaussian_noise(const LatentVector& v, double sigma, RandomStream& rng) {
  if (!(sigma > 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::OutOfRange, "noise sigma must be positive");
  }
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x += sigma * rng.normal();
  return LatentVector(std::move(out));
}

}  // namespace facelve
