#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "facelve/evolution.hpp"
#include "facelve/latent.hpp"
#include "facelve/random.hpp"
#include "facelve/session.hpp"

namespace facelve {

inline constexpr std::size_t kLineupVariants = 4;
inline constexpr std::size_t kLineupCandidates = kLineupVariants + 1;

struct LineupConfig {
  /// Draws per variant before giving up with ScreeningFailure.
  std::size_t max_attempts = 100;
  /// Reject variants closer than this fraction of the expected distance σ√D.
  double relative_screen = 0.5;
  /// Absolute distance floor; variants nearer than this are indistinguishable.
  double min_distance = 1.0;
};

/// A target plus four noisy variants, shown in a recorded shuffled order.
struct Lineup {
  LatentVector target;
  std::vector<LatentVector> variants;
  /// order[k] is the source of candidate k: 0 is the target, i > 0 is variants[i - 1].
  std::vector<std::size_t> order;
  std::optional<LatentVector> composite;

  std::size_t target_position() const;
  std::vector<LatentVector> candidates() const;
};

Lineup generate_lineup(const LatentVector& target, double noise_sigma, RandomStream& rng,
                       const LineupConfig& config = {});

/// The latent-distance evaluator: index of the candidate closest to `composite`.
std::size_t rank_one_by_distance(const Lineup& lineup, const LatentVector& composite);

struct Vote {
  std::size_t chosen = 0;
  std::size_t target = 0;

  bool correct() const noexcept { return chosen == target; }
};

/// 100 × (#votes naming the target) / (#votes).
double recognition_rate(std::span<const Vote> votes);
double recognition_rate(std::size_t rank_one, std::size_t total);

struct SimilaritySummary {
  double mean = 0.0;
  /// Bins [0,10), [10,20), …, [90,100].
  std::array<std::size_t, 10> histogram{};
};

SimilaritySummary similarity_summary(std::span<const double> scores);

enum class PolicyKind { Greedy, Random };

std::string_view to_string(PolicyKind kind) noexcept;
PolicyKind policy_kind_from_string(std::string_view text);

/// A scripted stand-in for a human constructor.
struct ScriptedConstructorPolicy {
  PolicyKind kind = PolicyKind::Greedy;
  std::size_t generations = 30;
  /// Greedy: lock the incumbent best every N generations (0 = never).
  std::size_t lock_every = 1;
  /// Greedy: slider = gain · best_distance / (noise per amount · D), clamped to [0.01, 1].
  double step_gain = 2.0;
  /// Random baseline: fixed slider value.
  double random_amount = 0.5;
  MutationMode mode = MutationMode::RandomChanges;
};

struct ScriptedRun {
  LatentVector composite;
  /// trace[0] is the initial best distance; trace[g] follows generation g.
  std::vector<double> trace;
  Session session;
};

/// Drives a session toward `hidden_target`. The greedy policy sees only each
/// slot's distance to the target; the random policy sees nothing.
ScriptedRun run_scripted_session(const ScriptedConstructorPolicy& policy,
                                 const LatentVector& hidden_target, SessionConfig config,
                                 RandomStream& policy_rng);

/// Synthetic-backend session config used by the batch experiments.
SessionConfig synthetic_session_config(std::size_t dim, std::uint64_t session_seed,
                                       std::uint64_t generator_seed = 0);

struct ConvergenceConfig {
  std::size_t seeds = 50;
  std::uint64_t base_seed = 1;
  std::size_t dim = 16;
  ScriptedConstructorPolicy policy;
};

struct SeedRun {
  std::uint64_t seed = 0;
  LatentVector target;
  LatentVector composite;
  std::vector<double> trace;

  double reduction() const { return 1.0 - trace.back() / trace.front(); }
};

struct ConvergenceReport {
  ConvergenceConfig config;
  std::vector<SeedRun> runs;

  double median_reduction() const;
};

ConvergenceReport run_convergence(const ConvergenceConfig& config);
/// One row per seed and generation.
std::string convergence_csv(const ConvergenceReport& report);
std::string convergence_summary_json(const ConvergenceReport& report);

struct RecognitionReport {
  std::vector<Vote> votes;
  double rate = 0.0;
};

/// Converged scripted composites judged against per-seed lineups.
RecognitionReport run_recognition(const ConvergenceConfig& config, double lineup_sigma,
                                  const LineupConfig& lineup = {});

double median(std::vector<double> values);

}  // namespace facelve
