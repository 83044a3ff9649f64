#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facelve/axis_registry.hpp"
#include "facelve/latent.hpp"
#include "facelve/random.hpp"

namespace facelve {

/// Slots shown per generation (a 3 × 3 grid).
inline constexpr std::size_t kPopulationSize = 9;

enum class SlotStatus { Free, Selected, Locked };

enum class MutationMode { RandomChanges, OneUnlockedFeature, EveryUnlockedFeature };

enum class Gender { Unspecified, Male, Female };
enum class Age { Unspecified, Young, Old };

std::string_view to_string(SlotStatus s) noexcept;
std::string_view to_string(MutationMode m) noexcept;
std::string_view to_string(Gender g) noexcept;
std::string_view to_string(Age a) noexcept;
SlotStatus slot_status_from_string(std::string_view text);
MutationMode mutation_mode_from_string(std::string_view text);
Gender gender_from_string(std::string_view text);
Age age_from_string(std::string_view text);

struct Individual {
  LatentVector latent;
  SlotStatus status = SlotStatus::Free;

  friend bool operator==(const Individual&, const Individual&) = default;
};

struct Population {
  std::vector<Individual> slots;
  std::size_t generation = 0;

  friend bool operator==(const Population&, const Population&) = default;
};

struct MutationSettings {
  MutationMode mode = MutationMode::RandomChanges;
  /// The slider value, in (0, 1].
  double amount = 0.5;
};

struct StartupProfile {
  Gender gender = Gender::Unspecified;
  Age age = Age::Unspecified;

  friend bool operator==(const StartupProfile&, const StartupProfile&) = default;
};

/// Tuning constants for the interactive loop.
struct EngineConfig {
  std::size_t population_size = kPopulationSize;
  /// Latent units moved per unit of step magnitude along a feature axis.
  double axis_step_scale = 0.05;
  /// Per-component noise sigma of RandomChanges at amount 1.
  double random_sigma_per_amount = 0.4;
  /// Offset along the gender/age axis applied by start-up profiles.
  double profile_shift = 2.0;

  friend bool operator==(const EngineConfig&, const EngineConfig&) = default;
};

/// Feature-mode step distribution: magnitude ~ N(mu, sigma).
struct StepDistribution {
  double mu = 0.0;
  double sigma = 0.0;
};

/// mu = 20 · amount / F, sigma = mu / 3, with F = 1 for a single feature and
/// F = min(max(1, 0.8 · unlocked), 8) when every unlocked feature moves.
StepDistribution eq1_parameters(MutationMode mode, double amount, std::size_t unlocked_count);

void validate_amount(double amount);

Population initialize_population(const StartupProfile& profile, const AxisRegistry& registry,
                                 RandomStream& rng, const EngineConfig& config = {},
                                 std::size_t dim = 0);

LatentVector mutate(const LatentVector& parent, const MutationSettings& settings,
                    const AxisRegistry& registry, RandomStream& rng,
                    const EngineConfig& config = {});

/// One breeding round. Locked and Selected slots carry over unchanged; the
/// first Free slot receives the average of the Selected latents and the other
/// Free slots receive mutants of uniformly chosen Selected parents (or of
/// themselves when nothing is selected). Selected slots come back Free.
Population step_generation(const Population& population, const MutationSettings& settings,
                           const AxisRegistry& registry, RandomStream& rng,
                           const EngineConfig& config = {});

/// Replaces every Free slot with a fresh start-up sample.
Population randomize_free(const Population& population, const StartupProfile& profile,
                          const AxisRegistry& registry, RandomStream& rng,
                          const EngineConfig& config = {});

enum class EditDirection { Plus, Minus };

EditDirection edit_direction_from_string(std::string_view text);
std::string_view to_string(EditDirection d) noexcept;

/// latent ± κ · 20 · step · effective_axis(feature).
LatentVector edit_feature(const LatentVector& latent, std::string_view feature,
                          EditDirection direction, double step_amount,
                          const AxisRegistry& registry, const EngineConfig& config = {});

}  // namespace facelve
