#include "facelve/evolution.hpp"

#include <algorithm>
#include <cmath>

#include "facelve/error.hpp"

namespace facelve {

namespace {

constexpr double kStepScale = 20.0;
constexpr double kFeatureWeight = 0.8;
constexpr double kMaxDivisor = 8.0;

std::size_t resolve_dim(const AxisRegistry& registry, std::size_t dim) {
  if (dim == 0) dim = registry.dim();
  if (dim == 0) throw Error(ErrorCode::InvalidDimension, "latent dimension is not configured");
  if (registry.size() > 0 && registry.dim() != dim) {
    throw Error(ErrorCode::DimensionMismatch, "axis registry does not match the latent dimension");
  }
  return dim;
}

LatentVector startup_sample(const StartupProfile& profile, const AxisRegistry& registry,
                            RandomStream& rng, const EngineConfig& config, std::size_t dim) {
  LatentVector z = sample_standard(rng, dim);
  if (profile.gender != Gender::Unspecified) {
    const double c = profile.gender == Gender::Male ? config.profile_shift : -config.profile_shift;
    z = axpy(z, c, registry.axis("gender").direction);
  }
  if (profile.age != Age::Unspecified) {
    const double c = profile.age == Age::Old ? config.profile_shift : -config.profile_shift;
    z = axpy(z, c, registry.axis("age").direction);
  }
  return z;
}

void require_profile_axes(const StartupProfile& profile, const AxisRegistry& registry) {
  if (profile.gender != Gender::Unspecified && !registry.contains("gender")) {
    throw Error(ErrorCode::Configuration, "profile needs a 'gender' axis", "gender");
  }
  if (profile.age != Age::Unspecified && !registry.contains("age")) {
    throw Error(ErrorCode::Configuration, "profile needs an 'age' axis", "age");
  }
}

std::vector<LatentVector> available_directions(const AxisRegistry& registry) {
  std::vector<LatentVector> out;
  for (const std::string& name : registry.available()) out.push_back(*registry.effective(name));
  return out;
}

}  // namespace

std::string_view to_string(SlotStatus s) noexcept {
  switch (s) {
    case SlotStatus::Free: return "free";
    case SlotStatus::Selected: return "selected";
    case SlotStatus::Locked: return "locked";
  }
  return "free";
}

std::string_view to_string(MutationMode m) noexcept {
  switch (m) {
    case MutationMode::RandomChanges: return "random_changes";
    case MutationMode::OneUnlockedFeature: return "one_unlocked_feature";
    case MutationMode::EveryUnlockedFeature: return "every_unlocked_feature";
  }
  return "random_changes";
}

std::string_view to_string(Gender g) noexcept {
  switch (g) {
    case Gender::Unspecified: return "unspecified";
    case Gender::Male: return "male";
    case Gender::Female: return "female";
  }
  return "unspecified";
}

std::string_view to_string(Age a) noexcept {
  switch (a) {
    case Age::Unspecified: return "unspecified";
    case Age::Young: return "young";
    case Age::Old: return "old";
  }
  return "unspecified";
}

std::string_view to_string(EditDirection d) noexcept { return d == EditDirection::Plus ? "+" : "-"; }

SlotStatus slot_status_from_string(std::string_view text) {
  if (text == "free") return SlotStatus::Free;
  if (text == "selected") return SlotStatus::Selected;
  if (text == "locked") return SlotStatus::Locked;
  throw Error(ErrorCode::Validation, "unknown slot status '" + std::string(text) + "'", "status");
}

MutationMode mutation_mode_from_string(std::string_view text) {
  if (text == "random_changes" || text == "RandomChanges") return MutationMode::RandomChanges;
  if (text == "one_unlocked_feature" || text == "OneUnlockedFeature") {
    return MutationMode::OneUnlockedFeature;
  }
  if (text == "every_unlocked_feature" || text == "EveryUnlockedFeature") {
    return MutationMode::EveryUnlockedFeature;
  }
  throw Error(ErrorCode::Validation, "unknown mutation mode '" + std::string(text) + "'", "mode");
}

Gender gender_from_string(std::string_view text) {
  if (text == "unspecified") return Gender::Unspecified;
  if (text == "male") return Gender::Male;
  if (text == "female") return Gender::Female;
  throw Error(ErrorCode::Validation, "invalid gender '" + std::string(text) + "'", "gender");
}

Age age_from_string(std::string_view text) {
  if (text == "unspecified") return Age::Unspecified;
  if (text == "young") return Age::Young;
  if (text == "old") return Age::Old;
  throw Error(ErrorCode::Validation, "invalid age '" + std::string(text) + "'", "age");
}

EditDirection edit_direction_from_string(std::string_view text) {
  if (text == "+" || text == "plus") return EditDirection::Plus;
  if (text == "-" || text == "minus") return EditDirection::Minus;
  throw Error(ErrorCode::Validation, "direction must be '+' or '-'", "direction");
}

void validate_amount(double amount) {
  if (!(amount > 0.0 && amount <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "amount must lie in (0, 1]", "amount");
  }
}

StepDistribution eq1_parameters(MutationMode mode, double amount, std::size_t unlocked_count) {
  validate_amount(amount);
  double divisor = 1.0;
  switch (mode) {
    case MutationMode::RandomChanges:
      throw Error(ErrorCode::Validation, "random changes do not use feature step sizes", "mode");
    case MutationMode::OneUnlockedFeature:
      break;
    case MutationMode::EveryUnlockedFeature:
      if (unlocked_count == 0) {
        throw Error(ErrorCode::NoUnlockedFeatures, "every feature is locked");
      }
      divisor = std::min(std::max(1.0, kFeatureWeight * static_cast<double>(unlocked_count)),
                         kMaxDivisor);
      break;
  }
  const double mu = kStepScale * amount / divisor;
  return {mu, mu / 3.0};
}

Population initialize_population(const StartupProfile& profile, const AxisRegistry& registry,
                                 RandomStream& rng, const EngineConfig& config, std::size_t dim) {
  dim = resolve_dim(registry, dim);
  require_profile_axes(profile, registry);
  Population pop;
  pop.slots.reserve(config.population_size);
  for (std::size_t i = 0; i < config.population_size; ++i) {
    pop.slots.push_back({startup_sample(profile, registry, rng, config, dim), SlotStatus::Free});
  }
  return pop;
}

LatentVector mutate(const LatentVector& parent, const MutationSettings& settings,
                    const AxisRegistry& registry, RandomStream& rng, const EngineConfig& config) {
  validate_amount(settings.amount);
  if (settings.mode == MutationMode::RandomChanges) {
    return add_gaussian_noise(parent, config.random_sigma_per_amount * settings.amount, rng);
  }

  const std::vector<LatentVector> axes = available_directions(registry);
  if (axes.empty()) throw Error(ErrorCode::NoUnlockedFeatures, "no unlocked feature is available");
  const StepDistribution step = eq1_parameters(settings.mode, settings.amount, axes.size());
  auto displacement = [&] {
    const double magnitude = std::max(0.0, rng.normal(step.mu, step.sigma));
    return rng.sign() * config.axis_step_scale * magnitude;
  };

  if (settings.mode == MutationMode::OneUnlockedFeature) {
    const std::size_t pick = rng.uniform_index(axes.size());
    return axpy(parent, displacement(), axes[pick]);
  }
  LatentVector child = parent;
  for (const LatentVector& axis : axes) child = axpy(child, displacement(), axis);
  return child;
}

Population step_generation(const Population& population, const MutationSettings& settings,
                           const AxisRegistry& registry, RandomStream& rng,
                           const EngineConfig& config) {
  validate_amount(settings.amount);
  if (settings.mode != MutationMode::RandomChanges && registry.available().empty()) {
    throw Error(ErrorCode::NoUnlockedFeatures, "no unlocked feature is available");
  }
  std::vector<LatentVector> parents;
  std::vector<std::size_t> free_slots;
  for (std::size_t i = 0; i < population.slots.size(); ++i) {
    switch (population.slots[i].status) {
      case SlotStatus::Selected: parents.push_back(population.slots[i].latent); break;
      case SlotStatus::Free: free_slots.push_back(i); break;
      case SlotStatus::Locked: break;
    }
  }

  Population next = population;
  next.generation = population.generation + 1;
  for (Individual& ind : next.slots) {
    if (ind.status == SlotStatus::Selected) ind.status = SlotStatus::Free;
  }

  auto remaining = std::span<const std::size_t>(free_slots);
  if (!parents.empty() && !remaining.empty()) {
    next.slots[remaining.front()].latent = average(parents);
    remaining = remaining.subspan(1);
  }
  for (std::size_t slot : remaining) {
    const LatentVector& parent =
        parents.empty() ? population.slots[slot].latent : parents[rng.uniform_index(parents.size())];
    next.slots[slot].latent = mutate(parent, settings, registry, rng, config);
  }
  return next;
}

Population randomize_free(const Population& population, const StartupProfile& profile,
                          const AxisRegistry& registry, RandomStream& rng,
                          const EngineConfig& config) {
  Population next = population;
  bool any_free = false;
  for (const Individual& ind : population.slots) any_free |= ind.status == SlotStatus::Free;
  if (!any_free) return next;

  require_profile_axes(profile, registry);
  const std::size_t dim = population.slots.front().latent.dim();
  for (Individual& ind : next.slots) {
    if (ind.status == SlotStatus::Free) {
      ind.latent = startup_sample(profile, registry, rng, config, dim);
    }
  }
  return next;
}

LatentVector edit_feature(const LatentVector& latent, std::string_view feature,
                          EditDirection direction, double step_amount,
                          const AxisRegistry& registry, const EngineConfig& config) {
  if (!(step_amount > 0.0) || !std::isfinite(step_amount)) {
    throw Error(ErrorCode::OutOfRange, "edit step must be positive", "step");
  }
  if (registry.is_locked(feature)) {
    throw Error(ErrorCode::LockedFeature, "feature '" + std::string(feature) + "' is locked",
                std::string(feature));
  }
  const std::optional<LatentVector> axis = registry.effective(feature);
  if (!axis) {
    throw Error(ErrorCode::FeatureUnavailable,
                "feature '" + std::string(feature) + "' is unavailable while these locks are held",
                std::string(feature));
  }
  const double sign = direction == EditDirection::Plus ? 1.0 : -1.0;
  return axpy(latent, sign * config.axis_step_scale * kStepScale * step_amount, *axis);
}

}  // namespace facelve
