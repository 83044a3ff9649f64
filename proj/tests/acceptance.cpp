// Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <Eigen/Dense>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "facelve/axis_registry.hpp"
#include "facelve/eval.hpp"
#include "facelve/evolution.hpp"
#include "facelve/generator.hpp"
#include "facelve/session.hpp"

using namespace facelve;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

struct Criterion {
  std::string name;
  double budget_s;
  std::function<Outcome()> run;
};

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

double truncated_mean(double mu, double sigma) {
  const double a = mu / sigma;
  const double cdf = 0.5 * std::erfc(-a / std::numbers::sqrt2);
  const double pdf = std::exp(-0.5 * a * a) / std::sqrt(2.0 * std::numbers::pi);
  return mu * cdf + sigma * pdf;
}

std::vector<std::string> all_but(const AxisRegistry& r, const std::string& keep) {
  std::vector<std::string> out;
  for (const std::string& n : r.names()) {
    if (n != keep) out.push_back(n);
  }
  return out;
}

Eigen::VectorXd to_eigen(const LatentVector& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.values().data(), static_cast<Eigen::Index>(v.dim()));
}

std::optional<Eigen::VectorXd> qr_effective(const Eigen::VectorXd& axis,
                                            const std::vector<Eigen::VectorXd>& locked) {
  Eigen::VectorXd r = axis;
  if (!locked.empty()) {
    Eigen::MatrixXd m(axis.size(), static_cast<Eigen::Index>(locked.size()));
    for (std::size_t j = 0; j < locked.size(); ++j) m.col(static_cast<Eigen::Index>(j)) = locked[j];
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(m);
    qr.setThreshold(1e-10);
    const Eigen::MatrixXd q = Eigen::MatrixXd(qr.householderQ()).leftCols(qr.rank());
    r = axis - q * (q.transpose() * axis);
  }
  if (r.norm() < 1e-6) return std::nullopt;
  return r.normalized();
}

std::vector<FeatureAxis> mixed_axes(RandomStream& rng, std::size_t count, std::size_t dim) {
  const LatentVector c1 = sample_standard(rng, dim), c2 = sample_standard(rng, dim);
  std::vector<FeatureAxis> axes;
  for (std::size_t i = 0; i < count; ++i) {
    LatentVector d = sample_standard(rng, dim);
    if (i % 2 == 1) d = d + (2.0 * rng.normal()) * c1 + (2.0 * rng.normal()) * c2;
    axes.push_back(FeatureAxis::make("f" + std::to_string(i), d));
  }
  return axes;
}

Outcome step_size_conformance() {
  Outcome o;
  const double amounts[] = {0.05, 0.3, 0.5, 1.0};
  // (unlocked count, expected divisor)
  const std::pair<std::size_t, double> cases[] = {{1, 1.0},  {2, 1.6}, {5, 4.0},
                                                  {10, 8.0}, {11, 8.0}, {40, 8.0}};
  for (double a : amounts) {
    const StepDistribution one = eq1_parameters(MutationMode::OneUnlockedFeature, a, 7);
    o.pass &= one.mu == 20.0 * a && one.sigma == one.mu / 3.0;
    for (const auto& [n, f] : cases) {
      const StepDistribution s = eq1_parameters(MutationMode::EveryUnlockedFeature, a, n);
      o.pass &= std::abs(s.mu - 20.0 * a / f) <= 1e-12 * s.mu && s.sigma == s.mu / 3.0;
    }
  }
  if (!o.pass) o.detail = "closed form mismatch; ";

  GeneratorDescriptor d;
  d.dim = 16;
  const AxisRegistry base(SyntheticGenerator(d).attribute_axes());
  const AxisRegistry r = set_locks(base, all_but(base, "glasses"));
  const LatentVector axis = *r.effective("glasses");
  const EngineConfig config;
  RandomStream rng(1);
  const LatentVector z = LatentVector::zeros(16);
  double sum = 0.0;
  constexpr int kDraws = 100000;
  for (int i = 0; i < kDraws; ++i) {
    sum += std::abs(dot(mutate(z, {MutationMode::OneUnlockedFeature, 1.0}, r, rng, config), axis));
  }
  const double mean = sum / kDraws / config.axis_step_scale;
  const double expected = truncated_mean(20.0, 20.0 / 3.0);
  const double rel = std::abs(mean - expected) / expected;
  o.pass &= rel <= 0.02;
  o.detail += fmt("sampled mean %.4f vs %.4f (rel err %.4f)", mean, expected, rel);
  return o;
}

Outcome lock_correctness() {
  Outcome o;
  RandomStream rng(2);
  const AxisRegistry base(mixed_axes(rng, 40, 512));
  double worst = 0.0;
  for (int set = 0; set < 200; ++set) {
    std::vector<std::string> locks;
    const double p = rng.uniform();
    for (const std::string& n : base.names()) {
      if (rng.uniform() < p) locks.push_back(n);
    }
    const AxisRegistry r = set_locks(base, locks);
    for (const std::string& n : r.available()) {
      const LatentVector e = *r.effective(n);
      for (const std::string& l : locks) {
        worst = std::max(worst, std::abs(dot(e, base.axis(l).direction)));
      }
    }
  }
  o.pass = worst <= 1e-9;

  double oracle_gap = 0.0;
  int compared = 0;
  bool presence_ok = true;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t dim = 2 + rng.uniform_index(7);
    const AxisRegistry small(mixed_axes(rng, 1 + rng.uniform_index(6), dim));
    std::vector<std::string> locks;
    for (const std::string& n : small.names()) {
      if (rng.uniform() < 0.4) locks.push_back(n);
    }
    const AxisRegistry r = set_locks(small, locks);
    std::vector<Eigen::VectorXd> locked;
    for (const std::string& l : locks) locked.push_back(to_eigen(small.axis(l).direction));
    for (const FeatureAxis& a : small.axes()) {
      if (r.is_locked(a.name)) continue;
      const auto want = qr_effective(to_eigen(a.direction), locked);
      const auto got = r.effective(a.name);
      if (want.has_value() != got.has_value()) {
        presence_ok = false;
        continue;
      }
      if (!got) continue;
      oracle_gap = std::max(oracle_gap, (to_eigen(*got) - *want).cwiseAbs().maxCoeff());
      ++compared;
    }
  }
  o.pass &= presence_ok && oracle_gap <= 1e-9;
  o.detail = fmt("max |dot| %.2e over 200 sets; QR oracle gap %.2e", worst, oracle_gap) +
             " over " + std::to_string(compared) + " axes";
  return o;
}

Outcome oracle_leakage() {
  GeneratorDescriptor d;
  const SyntheticGenerator gen(d);
  const auto truth = gen.ground_truth_axes();
  constexpr auto target = static_cast<std::size_t>(FaceParam::BeardDensity);

  // Clean axes for every other parameter; the target axis leans on all of them.
  std::vector<FeatureAxis> axes;
  LatentVector entangled = truth[target].direction;
  for (std::size_t p = 0; p < kFaceParamCount; ++p) {
    if (p == target) continue;
    axes.push_back(truth[p]);
    entangled = axpy(entangled, 0.3, truth[p].direction);
  }
  axes.push_back(FeatureAxis::make(truth[target].name, entangled));
  const AxisRegistry base(axes);
  const AxisRegistry locked = set_locks(base, all_but(base, truth[target].name));
  const AxisRegistry control(std::vector<FeatureAxis>{axes.back()});

  RandomStream rng(3);
  std::vector<double> target_change;
  double worst_locked = 0.0;
  int control_leaks = 0;
  constexpr int kRuns = 1000;
  const MutationSettings settings{MutationMode::OneUnlockedFeature, 1.0};
  for (int i = 0; i < kRuns; ++i) {
    const LatentVector z = sample_standard(rng, d.dim);
    const auto before = gen.params(z);
    const auto after = gen.params(mutate(z, settings, locked, rng));
    const auto raw = gen.params(mutate(z, settings, control, rng));
    target_change.push_back(std::abs(after.values[target] - before.values[target]));
    bool leaked = false;
    for (std::size_t p = 0; p < kFaceParamCount; ++p) {
      if (p == target) continue;
      worst_locked = std::max(worst_locked, std::abs(after.values[p] - before.values[p]));
      leaked |= std::abs(raw.values[p] - before.values[p]) > 0.01;
    }
    control_leaks += leaked;
  }
  const double med = median(target_change);
  const double leak_share = static_cast<double>(control_leaks) / kRuns;
  Outcome o;
  o.pass = med >= 0.05 && worst_locked <= 0.01 && leak_share >= 0.30;
  o.detail = fmt("median target change %.4f, max locked change %.2e, control leak share %.3f", med,
                 worst_locked, leak_share);
  return o;
}

Outcome axis_recovery() {
  GeneratorDescriptor d;
  d.dim = 64;
  const SyntheticGenerator gen(d);
  const auto truth = gen.ground_truth_axes();
  RandomStream rng(4);
  std::vector<LatentVector> latents;
  std::vector<SyntheticFaceParams> params;
  for (int i = 0; i < 2000; ++i) {
    latents.push_back(sample_standard(rng, d.dim));
    params.push_back(gen.params(latents.back()));
  }
  double worst = 1.0;
  for (std::size_t p = 0; p < kFaceParamCount; ++p) {
    std::vector<LabeledSample> samples;
    for (std::size_t i = 0; i < latents.size(); ++i) {
      samples.push_back({latents[i], params[i].values[p] > 0.5 ? 1 : 0});
    }
    const FeatureAxis fitted = fit_axis(std::string(kFaceParamNames[p]), samples);
    worst = std::min(worst, std::abs(cosine_similarity(fitted, truth[p])));
  }
  return {worst >= 0.95, fmt("min |cos| %.4f over 8 axes (D=64, 2000 samples)", worst)};
}

Outcome convergence() {
  ConvergenceConfig greedy;
  ConvergenceConfig random = greedy;
  random.policy.kind = PolicyKind::Random;
  const double g = run_convergence(greedy).median_reduction();
  const double r = run_convergence(random).median_reduction();
  return {g >= 0.5 && r < 0.1,
          fmt("median reduction greedy %.3f, random %.3f (D=16, 50 seeds, 30 generations)", g, r)};
}

Outcome recognition() {
  const RecognitionReport report = run_recognition(ConvergenceConfig{}, 3.0);
  const double anchor = recognition_rate(21, 28);
  return {report.votes.size() == 50 && report.rate >= 75.0 && anchor == 75.0,
          fmt("rank-1 rate %.1f%% over %.0f trials; recognition_rate(21, 28) = %.1f", report.rate,
              static_cast<double>(report.votes.size()), anchor)};
}

Session scripted_session(std::uint64_t seed) {
  SessionConfig c = synthetic_session_config(kDefaultLatentDim, seed);
  c.generator.width = c.generator.height = 64;
  c.profile = {Gender::Female, Age::Old};
  Session s = Session::create(c);
  const MutationMode modes[] = {MutationMode::RandomChanges, MutationMode::OneUnlockedFeature,
                                MutationMode::EveryUnlockedFeature};
  for (std::size_t g = 0; g < 20; ++g) {
    if (g == 8) s.apply(LocksAction{smart_lock_set(s.registry(), "gender")});
    s.apply(StepAction{{g % 7, (g * 3 + 2) % 7}, {8}, {modes[g % 3], 0.2 + 0.04 * g}});
  }
  s.apply(EditAction{3, "eye_size", EditDirection::Minus, 0.4, std::nullopt});
  s.apply(FinishAction{{3, 8}, 6});
  return s;
}

Outcome determinism() {
  const Session a = scripted_session(5), b = scripted_session(5);
  const std::string ja = session_to_json(a), jb = session_to_json(b);
  bool identical = a == b && ja == jb;
  for (std::size_t i = 0; i < a.history().size() && identical; ++i) {
    for (std::size_t k = 0; k < a.history()[i].slots.size(); ++k) {
      const auto& x = a.history()[i].slots[k].latent.values();
      const auto& y = b.history()[i].slots[k].latent.values();
      identical &= std::equal(x.begin(), x.end(), y.begin(), y.end(), [](double p, double q) {
        return std::bit_cast<std::uint64_t>(p) == std::bit_cast<std::uint64_t>(q);
      });
    }
  }

  const auto path = std::filesystem::temp_directory_path() / "facelve_acceptance_session.json";
  save_session(path.string(), a);
  const Session loaded = load_session(path.string());
  std::filesystem::remove(path);
  const bool round_trip = loaded == a && session_to_json(loaded) == ja && loaded.replay() == a;
  const bool distinct = ja != session_to_json(scripted_session(6));
  return {identical && round_trip && distinct,
          std::string("two runs ") + (identical ? "bit-identical" : "DIFFER") + ", save/load " +
              (round_trip ? "preserves state" : "LOSES state") + ", " +
              std::to_string(a.actions().size()) + " actions"};
}

Outcome smart_lock_brute_force() {
  RandomStream rng(8);
  int mismatches = 0;
  std::size_t group_sizes = 0;
  for (int m = 0; m < 100; ++m) {
    const std::size_t count = 3 + rng.uniform_index(14);
    const std::size_t dim = 4 + rng.uniform_index(60);
    const AxisRegistry r(mixed_axes(rng, count, dim));
    for (const FeatureAxis& f : r.axes()) {
      std::vector<std::string> expected;
      for (const FeatureAxis& g : r.axes()) {
        const double cos = dot(f.direction, g.direction) / (norm(f.direction) * norm(g.direction));
        if (&f == &g || std::abs(cos) > 0.5) expected.push_back(g.name);
      }
      const std::vector<std::string> got = smart_lock_set(r, f.name);
      mismatches += got != expected;
      group_sizes += got.size();
    }
  }
  return {mismatches == 0, std::to_string(mismatches) + " mismatches over 100 matrices (" +
                               std::to_string(group_sizes) + " group members)"};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"step-size formula and sampled magnitudes", 5, step_size_conformance},
      {"lock orthogonality", 10, lock_correctness},
      {"oracle leakage under locks", 30, oracle_leakage},
      {"axis recovery", 10, axis_recovery},
      {"convergence analogue", 120, convergence},
      {"recognition analogue", 120, recognition},
      {"determinism and persistence", 60, determinism},
      {"smart-lock brute force", 10, smart_lock_brute_force},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("threw: ") + e.what()};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) {
      o.pass = false;
      o.detail += fmt(" [over budget %.0f s]", c.budget_s);
    }
    failed += !o.pass;
    std::printf("%s  %-42s %7.2fs  %s\n", o.pass ? "PASS" : "FAIL", c.name.c_str(), secs,
                o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed,
              criteria.size());
  return failed == 0 ? 0 : 1;
}
