#include "facelve/axis_registry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "facelve/error.hpp"
#include "json_io.hpp"

namespace facelve {

namespace {

constexpr int kAxisFileVersion = 1;
constexpr double kImportNormTolerance = 1e-6;
constexpr double kUnitTolerance = 1e-9;

// Subtracts the projection onto each basis vector, twice. A second pass of
// classical Gram-Schmidt brings the residual to working precision.
std::vector<double> residual(const LatentVector& direction, std::span<const LatentVector> basis) {
  std::vector<double> r(direction.values().begin(), direction.values().end());
  for (int pass = 0; pass < 2; ++pass) {
    for (const LatentVector& b : basis) {
      require_same_dim(direction, b);
      double proj = 0.0;
      for (std::size_t i = 0; i < r.size(); ++i) proj += r[i] * b[i];
      for (std::size_t i = 0; i < r.size(); ++i) r[i] -= proj * b[i];
    }
  }
  return r;
}

double vector_norm(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

FeatureAxis FeatureAxis::make(std::string name, const LatentVector& direction,
                              std::size_t fitted_from) {
  return FeatureAxis{std::move(name), normalized(direction), fitted_from};
}

FeatureAxis fit_axis(std::string name, std::span<const LabeledSample> samples) {
  if (samples.empty()) throw Error(ErrorCode::InsufficientClasses, "no samples");
  const std::size_t dim = samples.front().latent.dim();
  std::vector<double> sum1(dim, 0.0), sum0(dim, 0.0);
  std::size_t n1 = 0, n0 = 0;
  for (const LabeledSample& s : samples) {
    require_same_dim(samples.front().latent, s.latent);
    if (s.label != 0 && s.label != 1) {
      throw Error(ErrorCode::Validation, "labels must be 0 or 1");
    }
    auto& sum = s.label == 1 ? sum1 : sum0;
    (s.label == 1 ? n1 : n0) += 1;
    for (std::size_t i = 0; i < dim; ++i) sum[i] += s.latent[i];
  }
  if (n1 == 0 || n0 == 0) {
    throw Error(ErrorCode::InsufficientClasses, "both label classes are required");
  }
  std::vector<double> diff(dim);
  for (std::size_t i = 0; i < dim; ++i) {
    diff[i] = sum1[i] / static_cast<double>(n1) - sum0[i] / static_cast<double>(n0);
  }
  return FeatureAxis::make(std::move(name), LatentVector(std::move(diff)), samples.size());
}

double cosine_similarity(const FeatureAxis& a, const FeatureAxis& b) {
  return std::clamp(dot(a.direction, b.direction), -1.0, 1.0);
}

std::vector<LatentVector> orthonormal_basis(std::span<const LatentVector> directions) {
  std::vector<LatentVector> basis;
  for (const LatentVector& d : directions) {
    std::vector<double> r = residual(d, basis);
    const double n = vector_norm(r);
    if (n < kDegenerateResidual) continue;
    for (double& x : r) x /= n;
    basis.emplace_back(std::move(r));
  }
  return basis;
}

LatentVector orthogonalize(const LatentVector& direction, std::span<const LatentVector> basis) {
  if (basis.empty()) return direction;
  std::vector<double> r = residual(direction, basis);
  const double n = vector_norm(r);
  if (n < kDegenerateResidual) {
    throw Error(ErrorCode::DegenerateAxis, "axis lies in the span of the locked axes");
  }
  for (double& x : r) x /= n;
  return LatentVector(std::move(r));
}

FeatureAxis orthogonalize(const FeatureAxis& axis, std::span<const FeatureAxis> locked_axes) {
  std::vector<LatentVector> basis;
  basis.reserve(locked_axes.size());
  for (const FeatureAxis& a : locked_axes) basis.push_back(a.direction);
  try {
    return FeatureAxis{axis.name, orthogonalize(axis.direction, basis), axis.fitted_from};
  } catch (const Error& e) {
    throw Error(e.code(), "feature '" + axis.name + "' unavailable: " + e.what(), axis.name);
  }
}

AxisRegistry::AxisRegistry(std::vector<FeatureAxis> axes) : axes_(std::move(axes)) {
  std::set<std::string> seen;
  for (const FeatureAxis& a : axes_) {
    if (!seen.insert(a.name).second) {
      throw Error(ErrorCode::DuplicateAxis, "duplicate axis name '" + a.name + "'", a.name);
    }
    if (dim_ == 0) dim_ = a.direction.dim();
    if (a.direction.dim() != dim_) {
      throw Error(ErrorCode::DimensionMismatch, "axis '" + a.name + "' has the wrong dimension",
                  a.name);
    }
    if (std::abs(norm(a.direction) - 1.0) > kUnitTolerance) {
      throw Error(ErrorCode::Validation, "axis '" + a.name + "' is not unit length", a.name);
    }
  }
  const std::size_t n = axes_.size();
  similarity_.assign(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    similarity_[i * n + i] = 1.0;
    for (std::size_t j = i + 1; j < n; ++j) {
      const double s = cosine_similarity(axes_[i], axes_[j]);
      similarity_[i * n + j] = s;
      similarity_[j * n + i] = s;
    }
  }
  recompute_effective();
}

std::vector<std::string> AxisRegistry::names() const {
  std::vector<std::string> out;
  out.reserve(axes_.size());
  for (const FeatureAxis& a : axes_) out.push_back(a.name);
  return out;
}

bool AxisRegistry::contains(std::string_view name) const {
  return std::any_of(axes_.begin(), axes_.end(),
                     [&](const FeatureAxis& a) { return a.name == name; });
}

std::size_t AxisRegistry::index_of(std::string_view name) const {
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (axes_[i].name == name) return i;
  }
  throw Error(ErrorCode::UnknownAxis, "unknown feature '" + std::string(name) + "'",
              std::string(name));
}

const FeatureAxis& AxisRegistry::axis(std::string_view name) const {
  return axes_[index_of(name)];
}

double AxisRegistry::similarity(std::string_view a, std::string_view b) const {
  return similarity(index_of(a), index_of(b));
}

bool AxisRegistry::is_locked(std::string_view name) const {
  index_of(name);
  return std::find(locked_.begin(), locked_.end(), name) != locked_.end();
}

bool AxisRegistry::is_degenerate(std::string_view name) const {
  return degenerate_[index_of(name)];
}

std::optional<LatentVector> AxisRegistry::effective(std::string_view name) const {
  return effective_[index_of(name)];
}

std::vector<std::string> AxisRegistry::available() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (effective_[i]) out.push_back(axes_[i].name);
  }
  return out;
}

AxisRegistry AxisRegistry::with_locks(std::span<const std::string> names) const {
  for (const std::string& n : names) index_of(n);
  auto requested = [&](const std::string& n) {
    return std::find(names.begin(), names.end(), n) != names.end();
  };
  std::vector<std::string> order;
  for (const std::string& n : locked_) {
    if (requested(n)) order.push_back(n);
  }
  for (const std::string& n : names) {
    if (std::find(order.begin(), order.end(), n) == order.end()) order.push_back(n);
  }
  AxisRegistry next = *this;
  next.locked_ = std::move(order);
  next.recompute_effective();
  return next;
}

void AxisRegistry::recompute_effective() {
  std::vector<LatentVector> locked_dirs;
  for (const std::string& n : locked_) locked_dirs.push_back(axes_[index_of(n)].direction);
  locked_basis_ = orthonormal_basis(locked_dirs);

  effective_.assign(axes_.size(), std::nullopt);
  degenerate_.assign(axes_.size(), false);
  for (std::size_t i = 0; i < axes_.size(); ++i) {
    if (std::find(locked_.begin(), locked_.end(), axes_[i].name) != locked_.end()) continue;
    try {
      effective_[i] = orthogonalize(axes_[i].direction, locked_basis_);
    } catch (const Error& e) {
      if (e.code() != ErrorCode::DegenerateAxis) throw;
      degenerate_[i] = true;
    }
  }
}

std::vector<std::string> smart_lock_set(const AxisRegistry& registry, std::string_view feature) {
  const std::size_t f = registry.index_of(feature);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < registry.size(); ++i) {
    if (i == f || std::abs(registry.similarity(f, i)) > kSmartLockThreshold) {
      out.push_back(registry.axes()[i].name);
    }
  }
  return out;
}

std::string axes_to_json(std::span<const FeatureAxis> axes) {
  using detail::json;
  json doc;
  doc["version"] = kAxisFileVersion;
  doc["dim"] = axes.empty() ? 0 : axes.front().direction.dim();
  json list = json::array();
  for (const FeatureAxis& a : axes) {
    json entry;
    entry["name"] = a.name;
    entry["direction"] = detail::latent_to_json(a.direction);
    if (a.fitted_from != 0) entry["fitted_from"] = a.fitted_from;
    list.push_back(std::move(entry));
  }
  doc["axes"] = std::move(list);
  return doc.dump(2);
}

std::vector<FeatureAxis> axes_from_json(std::string_view text) {
  const detail::json doc = detail::parse_document(text);
  return detail::guarded([&] {
    const int version = doc.at("version").get<int>();
    if (version != kAxisFileVersion) {
      throw Error(ErrorCode::UnsupportedVersion,
                  "unsupported axis file version " + std::to_string(version));
    }
    const std::size_t dim = doc.at("dim").get<std::size_t>();
    std::vector<FeatureAxis> axes;
    for (const auto& entry : doc.at("axes")) {
      std::string name = entry.at("name").get<std::string>();
      LatentVector dir = detail::latent_from_json(entry.at("direction"));
      if (dir.dim() != dim) {
        throw Error(ErrorCode::DimensionMismatch, "axis '" + name + "' does not match dim", name);
      }
      if (std::abs(norm(dir) - 1.0) > kImportNormTolerance) {
        throw Error(ErrorCode::Validation, "axis '" + name + "' is not unit length", name);
      }
      const std::size_t fitted = entry.value("fitted_from", std::size_t{0});
      axes.push_back(FeatureAxis::make(std::move(name), dir, fitted));
    }
    return axes;
  });
}

void save_axes(const std::string& path, std::span<const FeatureAxis> axes) {
  detail::write_file_atomic(path, axes_to_json(axes));
}

std::vector<FeatureAxis> load_axes(const std::string& path) {
  return axes_from_json(detail::read_file(path));
}

}  // namespace facelve
