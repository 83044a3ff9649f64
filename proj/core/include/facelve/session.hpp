#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "facelve/axis_registry.hpp"
#include "facelve/evolution.hpp"
#include "facelve/generator.hpp"
#include "facelve/image.hpp"
#include "facelve/latent.hpp"
#include "facelve/random.hpp"

namespace facelve {

enum class WitnessType { Active, Passive, Inactive };
enum class SessionStatus { Open, Finished };

std::string_view to_string(WitnessType w) noexcept;
std::string_view to_string(SessionStatus s) noexcept;
WitnessType witness_type_from_string(std::string_view text);

// User actions. Each one is logged and replayable from the session seed.

/// Breed the next generation with the given slot statuses (others are Free).
struct StepAction {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> locked;
  MutationSettings settings;
};

/// Re-roll the Free slots with the given slot statuses.
struct RandomizeAction {
  std::vector<std::size_t> selected;
  std::vector<std::size_t> locked;
};

/// Replace the feature lock set. Order is lock acquisition order.
struct LocksAction {
  std::vector<std::string> locked;
};

/// Move one slot along one feature and overwrite it. `locks`, when present,
/// replaces the lock set first.
struct EditAction {
  std::size_t slot = 0;
  std::string feature;
  EditDirection direction = EditDirection::Plus;
  double step = 0.1;
  std::optional<std::vector<std::string>> locks;
};

struct SavePresetAction {
  std::string name;
  std::size_t slot = 0;
};

struct LoadPresetAction {
  std::string name;
  std::size_t slot = 0;
};

/// Close the session, exporting the given slots.
struct FinishAction {
  std::vector<std::size_t> selected;
  std::size_t frames_per_segment = 12;
};

using Action = std::variant<StepAction, RandomizeAction, LocksAction, EditAction,
                            SavePresetAction, LoadPresetAction, FinishAction>;

struct ExportRecord {
  std::vector<LatentVector> selected;
  std::size_t frames_per_segment = 1;
  /// Average of the selected latents; the session's merged still.
  LatentVector composite;
};

/// Everything fixed at session creation.
struct SessionConfig {
  std::string id;
  std::uint64_t seed = 0;
  StartupProfile profile;
  GeneratorDescriptor generator;
  EngineConfig engine;
  std::vector<FeatureAxis> axes;
  WitnessType witness = WitnessType::Active;
  /// Hidden target, recorded only by scripted evaluation sessions.
  std::optional<LatentVector> eval_target;
};

/// A seeded, append-only log of user actions together with the population
/// after each one. Replaying the log from the seed reproduces every population
/// bit for bit.
class Session {
 public:
  static Session create(SessionConfig config);

  const SessionConfig& config() const noexcept { return config_; }
  const std::string& id() const noexcept { return config_.id; }
  std::size_t dim() const noexcept { return config_.generator.dim; }
  SessionStatus status() const noexcept { return status_; }

  /// Current population: history().back().
  const Population& population() const noexcept { return history_.back(); }
  /// history()[0] is the initial population; history()[i + 1] follows actions()[i].
  const std::vector<Population>& history() const noexcept { return history_; }
  const std::vector<Action>& actions() const noexcept { return actions_; }

  const AxisRegistry& registry() const noexcept { return registry_; }
  const RandomStream& rng() const noexcept { return rng_; }
  const MutationSettings& settings() const noexcept { return settings_; }
  const std::map<std::string, LatentVector>& presets() const noexcept { return presets_; }
  const std::vector<ExportRecord>& exports() const noexcept { return exports_; }

  /// Latest finished composite, if the session has been finished.
  std::optional<LatentVector> composite() const;

  /// Applies and logs `action`. On error the session is unchanged.
  void apply(const Action& action);

  /// Rebuilds the session from its config and action log.
  Session replay() const;

  friend bool operator==(const Session& a, const Session& b);

 private:
  friend Session session_from_json(std::string_view text);
  Session() = default;

  SessionConfig config_;
  SessionStatus status_ = SessionStatus::Open;
  RandomStream rng_;
  AxisRegistry registry_;
  MutationSettings settings_;
  std::vector<Action> actions_;
  std::vector<Population> history_;
  std::map<std::string, LatentVector> presets_;
  std::vector<ExportRecord> exports_;
};

std::string session_to_json(const Session& session);
/// Throws Parse (with byte offset) or UnsupportedVersion; never returns a
/// partially built session.
Session session_from_json(std::string_view text);
void save_session(const std::string& path, const Session& session);
Session load_session(const std::string& path);

struct ExportBundle {
  std::vector<LatentVector> selected;
  std::size_t frames_per_segment = 1;
  std::vector<LatentVector> frame_latents;
  std::vector<ImageBuffer> frames;
  ImageBuffer merged;
};

/// Piecewise-linear animation through `selected` in order, with shared
/// keyframes rendered once; the merged still renders the average latent. A
/// single latent yields a one-frame still.
ExportBundle export_animation(std::span<const LatentVector> selected,
                              std::size_t frames_per_segment, const Generator& generator);

/// Frame latents only (no rendering).
std::vector<LatentVector> animation_latents(std::span<const LatentVector> selected,
                                            std::size_t frames_per_segment);

/// Writes frame_0000.png … and merged.png into `directory`.
void write_export(const ExportBundle& bundle, const std::string& directory);

enum class MergeWeighting { Simple, Weighted };

MergeWeighting merge_weighting_from_string(std::string_view text);

struct WitnessWeights {
  double active = 3.0;
  double passive = 2.0;
  double inactive = 1.0;

  double of(WitnessType w) const noexcept;
};

struct WitnessComposite {
  LatentVector latent;
  WitnessType witness = WitnessType::Active;
};

LatentVector merge_witness_sessions(std::span<const WitnessComposite> composites,
                                    MergeWeighting weighting, const WitnessWeights& weights = {});

}  // namespace facelve
