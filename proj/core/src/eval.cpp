#include "facelve/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "facelve/error.hpp"
#include "facelve/generator.hpp"
#include "json_io.hpp"

namespace facelve {

namespace {

constexpr std::uint64_t kLineupSeedSalt = 0x9e3779b97f4a7c15ULL;

std::vector<double> slot_distances(const Population& pop, const LatentVector& target) {
  std::vector<double> d;
  d.reserve(pop.slots.size());
  for (const Individual& ind : pop.slots) d.push_back(distance(ind.latent, target));
  return d;
}

std::vector<std::size_t> ranked(const std::vector<double>& d) {
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });
  return order;
}

}  // namespace

std::size_t Lineup::target_position() const {
  const auto it = std::find(order.begin(), order.end(), 0);
  return static_cast<std::size_t>(it - order.begin());
}

std::vector<LatentVector> Lineup::candidates() const {
  std::vector<LatentVector> out;
  out.reserve(order.size());
  for (std::size_t source : order) out.push_back(source == 0 ? target : variants[source - 1]);
  return out;
}

Lineup generate_lineup(const LatentVector& target, double noise_sigma, RandomStream& rng,
                       const LineupConfig& config) {
  if (!(noise_sigma > 0.0) || !std::isfinite(noise_sigma)) {
    throw Error(ErrorCode::OutOfRange, "lineup sigma must be positive", "sigma");
  }
  const double expected = noise_sigma * std::sqrt(static_cast<double>(target.dim()));
  const double floor = std::max(config.relative_screen * expected, config.min_distance);

  Lineup lineup{target, {}, {}, std::nullopt};
  for (std::size_t v = 0; v < kLineupVariants; ++v) {
    bool accepted = false;
    for (std::size_t attempt = 0; attempt < config.max_attempts && !accepted; ++attempt) {
      LatentVector candidate = add_gaussian_noise(target, noise_sigma, rng);
      if (distance(candidate, target) >= floor) {
        lineup.variants.push_back(std::move(candidate));
        accepted = true;
      }
    }
    if (!accepted) {
      throw Error(ErrorCode::ScreeningFailure,
                  "no sufficiently different variant after " +
                      std::to_string(config.max_attempts) + " attempts");
    }
  }
  lineup.order.resize(kLineupCandidates);
  std::iota(lineup.order.begin(), lineup.order.end(), 0);
  for (std::size_t i = kLineupCandidates - 1; i > 0; --i) {
    std::swap(lineup.order[i], lineup.order[rng.uniform_index(i + 1)]);
  }
  return lineup;
}

std::size_t rank_one_by_distance(const Lineup& lineup, const LatentVector& composite) {
  const std::vector<LatentVector> candidates = lineup.candidates();
  std::vector<double> d;
  for (const LatentVector& c : candidates) d.push_back(distance(c, composite));
  return ranked(d).front();
}

double recognition_rate(std::size_t rank_one, std::size_t total) {
  if (total == 0) throw Error(ErrorCode::EmptySelection, "recognition rate of zero votes");
  if (rank_one > total) throw Error(ErrorCode::Validation, "more correct votes than votes");
  return 100.0 * static_cast<double>(rank_one) / static_cast<double>(total);
}

double recognition_rate(std::span<const Vote> votes) {
  const auto correct = std::count_if(votes.begin(), votes.end(),
                                     [](const Vote& v) { return v.correct(); });
  return recognition_rate(static_cast<std::size_t>(correct), votes.size());
}

SimilaritySummary similarity_summary(std::span<const double> scores) {
  if (scores.empty()) throw Error(ErrorCode::EmptySelection, "no similarity scores");
  SimilaritySummary summary;
  double sum = 0.0;
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 100.0)) {
      throw Error(ErrorCode::Validation, "similarity scores must lie in [0, 100]", "scores");
    }
    sum += s;
    summary.histogram[std::min<std::size_t>(9, static_cast<std::size_t>(s / 10.0))] += 1;
  }
  summary.mean = sum / static_cast<double>(scores.size());
  return summary;
}

std::string_view to_string(PolicyKind kind) noexcept {
  return kind == PolicyKind::Greedy ? "greedy" : "random";
}

PolicyKind policy_kind_from_string(std::string_view text) {
  if (text == "greedy") return PolicyKind::Greedy;
  if (text == "random") return PolicyKind::Random;
  throw Error(ErrorCode::Validation, "policy must be 'greedy' or 'random'", "policy");
}

ScriptedRun run_scripted_session(const ScriptedConstructorPolicy& policy,
                                 const LatentVector& hidden_target, SessionConfig config,
                                 RandomStream& policy_rng) {
  if (policy.generations == 0) {
    throw Error(ErrorCode::Validation, "generation budget must be at least 1", "generations");
  }
  config.eval_target = hidden_target;
  Session session = Session::create(std::move(config));
  const double dim = static_cast<double>(session.dim());
  const double noise_per_amount = session.config().engine.random_sigma_per_amount;

  std::vector<double> trace;
  {
    const std::vector<double> d = slot_distances(session.population(), hidden_target);
    trace.push_back(*std::min_element(d.begin(), d.end()));
  }

  for (std::size_t g = 0; g < policy.generations; ++g) {
    StepAction step;
    step.settings.mode = policy.mode;
    const std::size_t slots = session.population().slots.size();
    if (policy.kind == PolicyKind::Greedy) {
      const std::vector<double> d = slot_distances(session.population(), hidden_target);
      const std::vector<std::size_t> order = ranked(d);
      const bool lock_now = policy.lock_every != 0 && g % policy.lock_every == 0;
      if (lock_now) {
        step.locked = {order[0]};
        step.selected = {order[1], order[2]};
      } else {
        step.selected = {order[0], order[1]};
      }
      step.settings.amount =
          std::clamp(policy.step_gain * d[order[0]] / (noise_per_amount * dim), 0.01, 1.0);
    } else {
      const std::size_t a = policy_rng.uniform_index(slots);
      std::size_t b = policy_rng.uniform_index(slots - 1);
      if (b >= a) ++b;
      step.selected = {a, b};
      step.settings.amount = policy.random_amount;
    }
    session.apply(step);
    const std::vector<double> d = slot_distances(session.population(), hidden_target);
    trace.push_back(*std::min_element(d.begin(), d.end()));
  }

  std::size_t pick = 0;
  if (policy.kind == PolicyKind::Greedy) {
    pick = ranked(slot_distances(session.population(), hidden_target)).front();
  } else {
    pick = policy_rng.uniform_index(session.population().slots.size());
  }
  LatentVector composite = session.population().slots[pick].latent;
  session.apply(FinishAction{{pick}, 1});
  return {std::move(composite), std::move(trace), std::move(session)};
}

SessionConfig synthetic_session_config(std::size_t dim, std::uint64_t session_seed,
                                       std::uint64_t generator_seed) {
  SessionConfig config;
  config.seed = session_seed;
  config.id = "scripted-" + std::to_string(session_seed);
  config.generator.kind = GeneratorKind::Synthetic;
  config.generator.dim = dim;
  config.generator.seed = generator_seed;
  config.axes = SyntheticGenerator(config.generator).attribute_axes();
  return config;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error(ErrorCode::EmptySelection, "median of nothing");
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double ConvergenceReport::median_reduction() const {
  std::vector<double> r;
  for (const SeedRun& run : runs) r.push_back(run.reduction());
  return median(std::move(r));
}

ConvergenceReport run_convergence(const ConvergenceConfig& config) {
  if (config.seeds == 0) throw Error(ErrorCode::Validation, "need at least one seed", "seeds");
  ConvergenceReport report{config, {}};
  for (std::size_t s = 0; s < config.seeds; ++s) {
    const std::uint64_t seed = config.base_seed + s;
    RandomStream rng(seed);
    LatentVector target = sample_standard(rng, config.dim);
    const std::uint64_t session_seed = rng.next_u64();
    RandomStream policy_rng(rng.next_u64());
    ScriptedRun run = run_scripted_session(config.policy, target,
                                           synthetic_session_config(config.dim, session_seed),
                                           policy_rng);
    report.runs.push_back({seed, std::move(target), std::move(run.composite), std::move(run.trace)});
  }
  return report;
}

std::string convergence_csv(const ConvergenceReport& report) {
  std::ostringstream out;
  out.precision(17);
  out << "policy,seed,generation,best_distance\n";
  for (const SeedRun& run : report.runs) {
    for (std::size_t g = 0; g < run.trace.size(); ++g) {
      out << to_string(report.config.policy.kind) << ',' << run.seed << ',' << g << ','
          << run.trace[g] << '\n';
    }
  }
  return out.str();
}

std::string convergence_summary_json(const ConvergenceReport& report) {
  std::vector<double> initial, final, reductions;
  for (const SeedRun& run : report.runs) {
    initial.push_back(run.trace.front());
    final.push_back(run.trace.back());
    reductions.push_back(run.reduction());
  }
  detail::json doc = {
      {"policy", to_string(report.config.policy.kind)},
      {"seeds", report.config.seeds},
      {"generations", report.config.policy.generations},
      {"dim", report.config.dim},
      {"median_initial_distance", median(initial)},
      {"median_final_distance", median(final)},
      {"median_reduction", median(reductions)},
  };
  return doc.dump(2);
}

RecognitionReport run_recognition(const ConvergenceConfig& config, double lineup_sigma,
                                  const LineupConfig& lineup_config) {
  const ConvergenceReport convergence = run_convergence(config);
  RecognitionReport report;
  for (const SeedRun& run : convergence.runs) {
    RandomStream rng(run.seed ^ kLineupSeedSalt);
    Lineup lineup = generate_lineup(run.target, lineup_sigma, rng, lineup_config);
    lineup.composite = run.composite;
    report.votes.push_back({rank_one_by_distance(lineup, run.composite), lineup.target_position()});
  }
  report.rate = recognition_rate(report.votes);
  return report;
}

}  // namespace facelve
