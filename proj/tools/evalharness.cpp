// evalharness: scripted convergence runs and lineup recognition checks.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "facelve/error.hpp"
#include "facelve/eval.hpp"
#include "facelve/session.hpp"

namespace {

using namespace facelve;
using nlohmann::json;

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw Error(ErrorCode::Io, "cannot write " + path);
}

std::string summary_path(const std::string& report) {
  const auto dot = report.rfind('.');
  const auto slash = report.rfind('/');
  const bool has_ext = dot != std::string::npos && (slash == std::string::npos || dot > slash);
  return (has_ext ? report.substr(0, dot) : report) + ".summary.json";
}

int convergence(const ConvergenceConfig& config, const std::string& report) {
  const ConvergenceReport result = run_convergence(config);
  const std::string summary = convergence_summary_json(result);
  if (!report.empty()) {
    write_text(report, convergence_csv(result));
    write_text(summary_path(report), summary);
  }
  std::cout << summary << '\n';
  return 0;
}

LatentVector read_latent(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot read " + path);
  try {
    const json doc = json::parse(in);
    return LatentVector(doc.is_object() ? doc.at("latent").get<std::vector<double>>()
                                        : doc.get<std::vector<double>>());
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, path + ": " + e.what());
  }
}

int lineup(const std::string& session_file, const std::string& target_file, double sigma,
           std::uint64_t seed) {
  const Session session = load_session(session_file);
  const auto composite = session.composite();
  if (!composite) throw Error(ErrorCode::Validation, "session is not finished", "session");
  std::optional<LatentVector> target = session.config().eval_target;
  if (!target_file.empty()) target = read_latent(target_file);
  if (!target) {
    throw Error(ErrorCode::Validation, "session records no target; pass --target", "target");
  }
  RandomStream rng(seed);
  Lineup l = generate_lineup(*target, sigma, rng);
  l.composite = composite;
  const Vote vote{rank_one_by_distance(l, *composite), l.target_position()};
  const json out = {{"session_id", session.id()},
                    {"sigma", sigma},
                    {"order", l.order},
                    {"target_position", vote.target},
                    {"rank_one", vote.chosen},
                    {"correct", vote.correct()},
                    {"recognition_rate", recognition_rate(std::span<const Vote>(&vote, 1))}};
  std::cout << out.dump(2) << '\n';
  return 0;
}

int scripted(const ScriptedConstructorPolicy& policy, std::size_t dim, std::uint64_t seed,
             const std::string& out) {
  RandomStream rng(seed);
  const LatentVector target = sample_standard(rng, dim);
  const std::uint64_t session_seed = rng.next_u64();
  RandomStream policy_rng(rng.next_u64());
  SessionConfig config = synthetic_session_config(dim, session_seed);
  config.id = "scripted-" + std::to_string(seed);
  const ScriptedRun run = run_scripted_session(policy, target, std::move(config), policy_rng);
  save_session(out, run.session);
  std::printf("initial %.6f final %.6f\n", run.trace.front(), run.trace.back());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Evaluation harness: scripted constructors and lineups"};
  app.require_subcommand(1);

  ConvergenceConfig conv;
  std::string policy_name = "greedy";
  std::string report;
  auto* conv_cmd = app.add_subcommand("convergence", "Batch scripted sessions toward hidden targets");
  conv_cmd->add_option("--seeds", conv.seeds, "number of seeds")->check(CLI::PositiveNumber);
  conv_cmd->add_option("--generations", conv.policy.generations, "generation budget")
      ->check(CLI::PositiveNumber);
  conv_cmd->add_option("--policy", policy_name, "greedy or random")
      ->check(CLI::IsMember({"greedy", "random"}));
  conv_cmd->add_option("--report", report, "CSV report; the JSON summary goes next to it");
  conv_cmd->add_option("--dim", conv.dim, "latent dimension")->check(CLI::Range(10, 1 << 16));
  conv_cmd->add_option("--base-seed", conv.base_seed, "first seed");
  conv_cmd->add_option("--lock-every", conv.policy.lock_every, "lock the best every N generations");
  conv_cmd->add_option("--step-gain", conv.policy.step_gain, "greedy slider gain");

  std::string session_file;
  std::string target_file;
  double sigma = 3.0;
  std::uint64_t lineup_seed = 1;
  auto* lineup_cmd = app.add_subcommand("lineup", "Judge a finished session against a lineup");
  lineup_cmd->add_option("--session", session_file, "finished session file")->required();
  lineup_cmd->add_option("--sigma", sigma, "variant noise sigma")->check(CLI::PositiveNumber);
  lineup_cmd->add_option("--target", target_file, "target latent (JSON array)");
  lineup_cmd->add_option("--seed", lineup_seed, "lineup seed");

  ScriptedConstructorPolicy one;
  std::string one_policy = "greedy";
  std::size_t one_dim = 16;
  std::uint64_t one_seed = 1;
  std::string one_out;
  auto* one_cmd = app.add_subcommand("scripted", "Run one scripted session and save it");
  one_cmd->add_option("--policy", one_policy, "greedy or random")
      ->check(CLI::IsMember({"greedy", "random"}));
  one_cmd->add_option("--generations", one.generations, "generation budget")
      ->check(CLI::PositiveNumber);
  one_cmd->add_option("--dim", one_dim, "latent dimension")->check(CLI::Range(10, 1 << 16));
  one_cmd->add_option("--seed", one_seed, "seed");
  one_cmd->add_option("--out", one_out, "session file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*conv_cmd) {
      conv.policy.kind = policy_kind_from_string(policy_name);
      return convergence(conv, report);
    }
    if (*lineup_cmd) return lineup(session_file, target_file, sigma, lineup_seed);
    if (*one_cmd) {
      one.kind = policy_kind_from_string(one_policy);
      return scripted(one, one_dim, one_seed, one_out);
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  }
  return 0;
}
