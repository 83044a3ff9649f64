#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facelve/latent.hpp"

namespace facelve {

/// Residual norm below which an axis counts as lying in a span.
inline constexpr double kDegenerateResidual = 1e-6;
/// Smart locks pull in every axis with |cosine| strictly above this.
inline constexpr double kSmartLockThreshold = 0.5;

/// A named unit direction along which one facial attribute varies.
struct FeatureAxis {
  std::string name;
  LatentVector direction;
  /// Sample count used in fitting; 0 for ground-truth or imported axes.
  std::size_t fitted_from = 0;

  /// Normalizes `direction`.
  static FeatureAxis make(std::string name, const LatentVector& direction,
                          std::size_t fitted_from = 0);
};

struct LabeledSample {
  LatentVector latent;
  int label = 0;  // 0 or 1
};

/// Normalized mean difference between the label-1 and label-0 latents.
/// The direction points toward the label-1 class.
FeatureAxis fit_axis(std::string name, std::span<const LabeledSample> samples);

double cosine_similarity(const FeatureAxis& a, const FeatureAxis& b);

/// Ordered Gram-Schmidt over `directions`, dropping any whose residual falls
/// below kDegenerateResidual. Each vector is projected twice so the basis is
/// orthonormal to working precision.
std::vector<LatentVector> orthonormal_basis(std::span<const LatentVector> directions);

/// Removes the component of `direction` in the span of `basis` (which must be
/// orthonormal) and renormalizes. Throws DegenerateAxis if nothing is left.
LatentVector orthogonalize(const LatentVector& direction, std::span<const LatentVector> basis);

/// Orthogonalizes `axis` against `locked_axes`. The locked directions must
/// already be mutually orthonormal; see orthonormal_basis.
FeatureAxis orthogonalize(const FeatureAxis& axis, std::span<const FeatureAxis> locked_axes);

/// Fitted axes plus lock state. Values are immutable: with_locks returns a
/// new registry with every effective direction recomputed.
class AxisRegistry {
 public:
  AxisRegistry() = default;
  explicit AxisRegistry(std::vector<FeatureAxis> axes);

  std::size_t dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return axes_.size(); }
  const std::vector<FeatureAxis>& axes() const noexcept { return axes_; }
  std::vector<std::string> names() const;

  bool contains(std::string_view name) const;
  std::size_t index_of(std::string_view name) const;
  const FeatureAxis& axis(std::string_view name) const;

  double similarity(std::size_t i, std::size_t j) const { return similarity_[i * axes_.size() + j]; }
  double similarity(std::string_view a, std::string_view b) const;

  /// Locked names in acquisition order.
  const std::vector<std::string>& locked() const noexcept { return locked_; }
  bool is_locked(std::string_view name) const;

  /// Unlocked axis whose orthogonalized direction vanished under the locks.
  bool is_degenerate(std::string_view name) const;
  /// Orthogonalized direction of an unlocked, non-degenerate axis.
  std::optional<LatentVector> effective(std::string_view name) const;
  /// Names of unlocked non-degenerate axes, in registry order.
  std::vector<std::string> available() const;
  /// Orthonormal basis of the locked span.
  const std::vector<LatentVector>& locked_basis() const noexcept { return locked_basis_; }

  /// New registry locking exactly `names`. Names already locked keep their
  /// acquisition order; new ones are appended in the order given.
  AxisRegistry with_locks(std::span<const std::string> names) const;

 private:
  void recompute_effective();

  std::size_t dim_ = 0;
  std::vector<FeatureAxis> axes_;
  std::vector<double> similarity_;
  std::vector<std::string> locked_;
  std::vector<LatentVector> locked_basis_;
  // Parallel to axes_; nullopt for locked or degenerate axes.
  std::vector<std::optional<LatentVector>> effective_;
  std::vector<bool> degenerate_;
};

inline AxisRegistry set_locks(const AxisRegistry& registry, std::span<const std::string> names) {
  return registry.with_locks(names);
}

/// The feature itself plus every axis with |cosine| > 0.5 to it. Direct
/// neighbours only, returned in registry order.
std::vector<std::string> smart_lock_set(const AxisRegistry& registry, std::string_view feature);

/// Versioned JSON axis file: {version, dim, axes: [{name, direction}]}.
std::string axes_to_json(std::span<const FeatureAxis> axes);
std::vector<FeatureAxis> axes_from_json(std::string_view text);
void save_axes(const std::string& path, std::span<const FeatureAxis> axes);
std::vector<FeatureAxis> load_axes(const std::string& path);

}  // namespace facelve
