#include "facelve/session.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <set>

#include "facelve/error.hpp"
#include "json_io.hpp"

namespace facelve {

namespace {

constexpr int kSessionFileVersion = 1;

using detail::json;

void check_slot(std::size_t slot, const Population& pop) {
  if (slot >= pop.slots.size()) {
    throw Error(ErrorCode::Validation, "slot index " + std::to_string(slot) + " out of range",
                "slot");
  }
}

Population with_statuses(const Population& pop, std::span<const std::size_t> selected,
                         std::span<const std::size_t> locked) {
  Population out = pop;
  for (Individual& ind : out.slots) ind.status = SlotStatus::Free;
  std::set<std::size_t> seen;
  for (std::size_t i : selected) {
    check_slot(i, pop);
    out.slots[i].status = SlotStatus::Selected;
    seen.insert(i);
  }
  for (std::size_t i : locked) {
    check_slot(i, pop);
    if (seen.count(i) != 0) {
      throw Error(ErrorCode::Validation, "slot " + std::to_string(i) + " is both selected and locked",
                  "locked");
    }
    out.slots[i].status = SlotStatus::Locked;
  }
  return out;
}

bool same_axes(const std::vector<FeatureAxis>& a, const std::vector<FeatureAxis>& b) {
  return std::equal(a.begin(), a.end(), b.begin(), b.end(),
                    [](const FeatureAxis& x, const FeatureAxis& y) {
                      return x.name == y.name && x.direction == y.direction &&
                             x.fitted_from == y.fitted_from;
                    });
}

// --- JSON encoding ------------------------------------------------------------

json to_json(const MutationSettings& s) {
  return {{"mode", to_string(s.mode)}, {"amount", s.amount}};
}

MutationSettings settings_from_json(const json& j) {
  return {mutation_mode_from_string(j.at("mode").get<std::string>()), j.at("amount").get<double>()};
}

json action_to_json(const Action& action) {
  return std::visit(
      [](const auto& a) -> json {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, StepAction>) {
          return {{"type", "step"}, {"selected", a.selected}, {"locked", a.locked},
                  {"settings", to_json(a.settings)}};
        } else if constexpr (std::is_same_v<T, RandomizeAction>) {
          return {{"type", "randomize"}, {"selected", a.selected}, {"locked", a.locked}};
        } else if constexpr (std::is_same_v<T, LocksAction>) {
          return {{"type", "locks"}, {"locked", a.locked}};
        } else if constexpr (std::is_same_v<T, EditAction>) {
          json j = {{"type", "edit"},           {"slot", a.slot},
                    {"feature", a.feature},     {"direction", to_string(a.direction)},
                    {"step", a.step}};
          if (a.locks) j["locks"] = *a.locks;
          return j;
        } else if constexpr (std::is_same_v<T, SavePresetAction>) {
          return {{"type", "save_preset"}, {"name", a.name}, {"slot", a.slot}};
        } else if constexpr (std::is_same_v<T, LoadPresetAction>) {
          return {{"type", "load_preset"}, {"name", a.name}, {"slot", a.slot}};
        } else {
          return {{"type", "finish"}, {"selected", a.selected},
                  {"frames_per_segment", a.frames_per_segment}};
        }
      },
      action);
}

Action action_from_json(const json& j) {
  const std::string type = j.at("type").get<std::string>();
  if (type == "step") {
    return StepAction{j.at("selected").get<std::vector<std::size_t>>(),
                      j.at("locked").get<std::vector<std::size_t>>(),
                      settings_from_json(j.at("settings"))};
  }
  if (type == "randomize") {
    return RandomizeAction{j.at("selected").get<std::vector<std::size_t>>(),
                           j.at("locked").get<std::vector<std::size_t>>()};
  }
  if (type == "locks") return LocksAction{j.at("locked").get<std::vector<std::string>>()};
  if (type == "edit") {
    EditAction a;
    a.slot = j.at("slot").get<std::size_t>();
    a.feature = j.at("feature").get<std::string>();
    a.direction = edit_direction_from_string(j.at("direction").get<std::string>());
    a.step = j.at("step").get<double>();
    if (j.contains("locks")) a.locks = j.at("locks").get<std::vector<std::string>>();
    return a;
  }
  if (type == "save_preset") {
    return SavePresetAction{j.at("name").get<std::string>(), j.at("slot").get<std::size_t>()};
  }
  if (type == "load_preset") {
    return LoadPresetAction{j.at("name").get<std::string>(), j.at("slot").get<std::size_t>()};
  }
  if (type == "finish") {
    return FinishAction{j.at("selected").get<std::vector<std::size_t>>(),
                        j.at("frames_per_segment").get<std::size_t>()};
  }
  throw Error(ErrorCode::Parse, "unknown action type '" + type + "'");
}

json population_to_json(const Population& pop) {
  json slots = json::array();
  for (const Individual& ind : pop.slots) {
    slots.push_back({{"status", to_string(ind.status)}, {"latent", detail::latent_to_json(ind.latent)}});
  }
  return {{"generation", pop.generation}, {"slots", std::move(slots)}};
}

Population population_from_json(const json& j) {
  Population pop;
  pop.generation = j.at("generation").get<std::size_t>();
  for (const json& s : j.at("slots")) {
    pop.slots.push_back({detail::latent_from_json(s.at("latent")),
                         slot_status_from_string(s.at("status").get<std::string>())});
  }
  return pop;
}

json axes_to_json_value(const std::vector<FeatureAxis>& axes) {
  json list = json::array();
  for (const FeatureAxis& a : axes) {
    list.push_back({{"name", a.name},
                    {"direction", detail::latent_to_json(a.direction)},
                    {"fitted_from", a.fitted_from}});
  }
  return list;
}

std::vector<FeatureAxis> axes_from_json_value(const json& j) {
  std::vector<FeatureAxis> axes;
  for (const json& a : j) {
    axes.push_back(FeatureAxis{a.at("name").get<std::string>(),
                               detail::latent_from_json(a.at("direction")),
                               a.at("fitted_from").get<std::size_t>()});
  }
  return axes;
}

}  // namespace

namespace detail {

json descriptor_to_json(const GeneratorDescriptor& d) {
  return {{"kind", to_string(d.kind)}, {"dim", d.dim},       {"width", d.width},
          {"height", d.height},        {"seed", d.seed},     {"model", d.model},
          {"timeout_ms", d.timeout_ms}, {"retries", d.retries}};
}

GeneratorDescriptor descriptor_from_json(const json& j, const GeneratorDescriptor& defaults) {
  GeneratorDescriptor d = defaults;
  if (j.contains("kind")) d.kind = generator_kind_from_string(j.at("kind").get<std::string>());
  d.dim = j.value("dim", d.dim);
  d.width = j.value("width", d.width);
  d.height = j.value("height", d.height);
  d.seed = j.value("seed", d.seed);
  d.model = j.value("model", d.model);
  d.timeout_ms = j.value("timeout_ms", d.timeout_ms);
  d.retries = j.value("retries", d.retries);
  return d;
}

}  // namespace detail

std::string_view to_string(WitnessType w) noexcept {
  switch (w) {
    case WitnessType::Active: return "active";
    case WitnessType::Passive: return "passive";
    case WitnessType::Inactive: return "inactive";
  }
  return "active";
}

std::string_view to_string(SessionStatus s) noexcept {
  return s == SessionStatus::Open ? "open" : "finished";
}

WitnessType witness_type_from_string(std::string_view text) {
  if (text == "active" || text == "Active") return WitnessType::Active;
  if (text == "passive" || text == "Passive") return WitnessType::Passive;
  if (text == "inactive" || text == "Inactive") return WitnessType::Inactive;
  throw Error(ErrorCode::Validation, "unknown witness type '" + std::string(text) + "'",
              "witness_type");
}

Session Session::create(SessionConfig config) {
  if (config.generator.dim == 0) {
    throw Error(ErrorCode::InvalidDimension, "session dimension must be positive", "dim");
  }
  Session s;
  s.registry_ = AxisRegistry(config.axes);
  if (s.registry_.size() > 0 && s.registry_.dim() != config.generator.dim) {
    throw Error(ErrorCode::DimensionMismatch, "axes do not match the generator dimension", "axes");
  }
  s.config_ = std::move(config);
  s.rng_ = RandomStream(s.config_.seed);
  s.history_.push_back(initialize_population(s.config_.profile, s.registry_, s.rng_,
                                             s.config_.engine, s.config_.generator.dim));
  return s;
}

std::optional<LatentVector> Session::composite() const {
  if (exports_.empty()) return std::nullopt;
  return exports_.back().composite;
}

void Session::apply(const Action& action) {
  if (status_ == SessionStatus::Finished) {
    throw Error(ErrorCode::SessionFinished, "session " + config_.id + " is finished");
  }
  // Work on copies; commit only once everything succeeded.
  RandomStream rng = rng_;
  AxisRegistry registry = registry_;
  MutationSettings settings = settings_;
  SessionStatus status = status_;
  std::map<std::string, LatentVector> presets = presets_;
  std::vector<ExportRecord> exports = exports_;
  const Population& current = population();
  Population next = current;

  std::visit(
      [&](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, StepAction>) {
          validate_amount(a.settings.amount);
          settings = a.settings;
          next = step_generation(with_statuses(current, a.selected, a.locked), a.settings,
                                 registry, rng, config_.engine);
        } else if constexpr (std::is_same_v<T, RandomizeAction>) {
          next = randomize_free(with_statuses(current, a.selected, a.locked), config_.profile,
                                registry, rng, config_.engine);
        } else if constexpr (std::is_same_v<T, LocksAction>) {
          registry = registry.with_locks(a.locked);
        } else if constexpr (std::is_same_v<T, EditAction>) {
          check_slot(a.slot, current);
          if (a.locks) registry = registry.with_locks(*a.locks);
          next.slots[a.slot].latent = edit_feature(current.slots[a.slot].latent, a.feature,
                                                   a.direction, a.step, registry, config_.engine);
        } else if constexpr (std::is_same_v<T, SavePresetAction>) {
          check_slot(a.slot, current);
          if (a.name.empty()) throw Error(ErrorCode::Validation, "preset name is empty", "name");
          presets.insert_or_assign(a.name, current.slots[a.slot].latent);
        } else if constexpr (std::is_same_v<T, LoadPresetAction>) {
          check_slot(a.slot, current);
          const auto it = presets.find(a.name);
          if (it == presets.end()) {
            throw Error(ErrorCode::NotFound, "no preset named '" + a.name + "'", "name");
          }
          next.slots[a.slot].latent = it->second;
        } else {
          if (a.selected.empty()) {
            throw Error(ErrorCode::EmptySelection, "finish needs at least one selected slot",
                        "selected");
          }
          std::vector<LatentVector> chosen;
          for (std::size_t i : a.selected) {
            check_slot(i, current);
            chosen.push_back(current.slots[i].latent);
          }
          if (chosen.size() >= 2 && a.frames_per_segment < 2) {
            throw Error(ErrorCode::Validation, "animations need at least 2 frames per segment",
                        "frames");
          }
          if (a.frames_per_segment == 0) {
            throw Error(ErrorCode::Validation, "frames must be positive", "frames");
          }
          LatentVector merged = average(chosen);
          exports.push_back({std::move(chosen), a.frames_per_segment, std::move(merged)});
          status = SessionStatus::Finished;
        }
      },
      action);

  rng_ = rng;
  registry_ = std::move(registry);
  settings_ = settings;
  status_ = status;
  presets_ = std::move(presets);
  exports_ = std::move(exports);
  actions_.push_back(action);
  history_.push_back(std::move(next));
}

Session Session::replay() const {
  Session s = Session::create(config_);
  for (const Action& a : actions_) s.apply(a);
  return s;
}

bool operator==(const Session& a, const Session& b) {
  auto exports_equal = [](const ExportRecord& x, const ExportRecord& y) {
    return x.selected == y.selected && x.frames_per_segment == y.frames_per_segment &&
           x.composite == y.composite;
  };
  return a.config_.id == b.config_.id && a.config_.seed == b.config_.seed &&
         a.config_.profile == b.config_.profile && a.config_.generator == b.config_.generator &&
         a.config_.engine == b.config_.engine && same_axes(a.config_.axes, b.config_.axes) &&
         a.config_.witness == b.config_.witness && a.config_.eval_target == b.config_.eval_target &&
         a.status_ == b.status_ && a.rng_ == b.rng_ &&
         a.registry_.locked() == b.registry_.locked() &&
         a.settings_.mode == b.settings_.mode && a.settings_.amount == b.settings_.amount &&
         a.history_ == b.history_ && a.presets_ == b.presets_ &&
         std::equal(a.exports_.begin(), a.exports_.end(), b.exports_.begin(), b.exports_.end(),
                    exports_equal) &&
         session_to_json(a) == session_to_json(b);
}

std::string session_to_json(const Session& s) {
  const SessionConfig& c = s.config();
  json doc;
  doc["version"] = kSessionFileVersion;
  doc["id"] = c.id;
  doc["seed"] = c.seed;
  doc["dim"] = c.generator.dim;
  doc["status"] = to_string(s.status());
  doc["witness_type"] = to_string(c.witness);
  doc["profile"] = {{"gender", to_string(c.profile.gender)}, {"age", to_string(c.profile.age)}};
  doc["generator"] = detail::descriptor_to_json(c.generator);
  doc["engine"] = {{"population_size", c.engine.population_size},
                   {"axis_step_scale", c.engine.axis_step_scale},
                   {"random_sigma_per_amount", c.engine.random_sigma_per_amount},
                   {"profile_shift", c.engine.profile_shift}};
  doc["axes"] = axes_to_json_value(c.axes);
  if (c.eval_target) doc["eval_target"] = detail::latent_to_json(*c.eval_target);
  doc["rng"] = {{"seed", s.rng().seed()}, {"position", s.rng().position()}};
  doc["locks"] = s.registry().locked();
  doc["settings"] = to_json(s.settings());

  json actions = json::array();
  for (const Action& a : s.actions()) actions.push_back(action_to_json(a));
  doc["actions"] = std::move(actions);

  json history = json::array();
  for (const Population& p : s.history()) history.push_back(population_to_json(p));
  doc["history"] = std::move(history);

  json presets = json::object();
  for (const auto& [name, latent] : s.presets()) presets[name] = detail::latent_to_json(latent);
  doc["presets"] = std::move(presets);

  json exports = json::array();
  for (const ExportRecord& e : s.exports()) {
    json selected = json::array();
    for (const LatentVector& v : e.selected) selected.push_back(detail::latent_to_json(v));
    exports.push_back({{"selected", std::move(selected)},
                       {"frames_per_segment", e.frames_per_segment},
                       {"composite", detail::latent_to_json(e.composite)}});
  }
  doc["exports"] = std::move(exports);
  return doc.dump(1);
}

Session session_from_json(std::string_view text) {
  const json doc = detail::parse_document(text);
  return detail::guarded([&] {
    if (!doc.is_object()) throw Error(ErrorCode::Parse, "session document must be an object");
    const int version = doc.at("version").get<int>();
    if (version != kSessionFileVersion) {
      throw Error(ErrorCode::UnsupportedVersion,
                  "unsupported session file version " + std::to_string(version));
    }
    Session s;
    SessionConfig& c = s.config_;
    c.id = doc.at("id").get<std::string>();
    c.seed = doc.at("seed").get<std::uint64_t>();
    c.witness = witness_type_from_string(doc.at("witness_type").get<std::string>());
    c.profile.gender = gender_from_string(doc.at("profile").at("gender").get<std::string>());
    c.profile.age = age_from_string(doc.at("profile").at("age").get<std::string>());
    c.generator = detail::descriptor_from_json(doc.at("generator"), {});
    if (doc.at("dim").get<std::size_t>() != c.generator.dim) {
      throw Error(ErrorCode::Parse, "session dim does not match its generator");
    }
    const json& engine = doc.at("engine");
    c.engine.population_size = engine.at("population_size").get<std::size_t>();
    c.engine.axis_step_scale = engine.at("axis_step_scale").get<double>();
    c.engine.random_sigma_per_amount = engine.at("random_sigma_per_amount").get<double>();
    c.engine.profile_shift = engine.at("profile_shift").get<double>();
    c.axes = axes_from_json_value(doc.at("axes"));
    if (doc.contains("eval_target")) c.eval_target = detail::latent_from_json(doc.at("eval_target"));

    s.status_ = doc.at("status").get<std::string>() == "finished" ? SessionStatus::Finished
                                                                  : SessionStatus::Open;
    s.rng_ = RandomStream::restore(doc.at("rng").at("seed").get<std::uint64_t>(),
                                   doc.at("rng").at("position").get<std::uint64_t>());
    s.registry_ = AxisRegistry(c.axes).with_locks(doc.at("locks").get<std::vector<std::string>>());
    s.settings_ = settings_from_json(doc.at("settings"));
    for (const json& a : doc.at("actions")) s.actions_.push_back(action_from_json(a));
    for (const json& p : doc.at("history")) s.history_.push_back(population_from_json(p));
    if (s.history_.size() != s.actions_.size() + 1) {
      throw Error(ErrorCode::Parse, "history length does not match the action log");
    }
    for (std::size_t i = 1; i < s.history_.size(); ++i) {
      if (s.history_[i].generation < s.history_[i - 1].generation) {
        throw Error(ErrorCode::Parse, "generation indices go backwards");
      }
    }
    for (const Population& p : s.history_) {
      for (const Individual& ind : p.slots) {
        if (ind.latent.dim() != c.generator.dim) {
          throw Error(ErrorCode::Parse, "latent dimension does not match the session");
        }
      }
    }
    for (const auto& [name, latent] : doc.at("presets").items()) {
      s.presets_.emplace(name, detail::latent_from_json(latent));
    }
    for (const json& e : doc.at("exports")) {
      ExportRecord record{{}, e.at("frames_per_segment").get<std::size_t>(),
                          detail::latent_from_json(e.at("composite"))};
      for (const json& v : e.at("selected")) record.selected.push_back(detail::latent_from_json(v));
      s.exports_.push_back(std::move(record));
    }
    // The log is the source of truth; a stored state it does not reproduce
    // has been edited or corrupted.
    if (!(s.replay() == s)) {
      throw Error(ErrorCode::Validation, "stored state does not match the replayed action log");
    }
    return s;
  });
}

void save_session(const std::string& path, const Session& session) {
  detail::write_file_atomic(path, session_to_json(session));
}

Session load_session(const std::string& path) {
  return session_from_json(detail::read_file(path));
}

std::vector<LatentVector> animation_latents(std::span<const LatentVector> selected,
                                            std::size_t frames_per_segment) {
  if (selected.empty()) throw Error(ErrorCode::EmptySelection, "nothing selected for export");
  if (selected.size() == 1) return {selected.front()};
  if (frames_per_segment < 2) {
    throw Error(ErrorCode::Validation, "animations need at least 2 frames per segment", "frames");
  }
  std::vector<LatentVector> frames;
  const double last = static_cast<double>(frames_per_segment - 1);
  for (std::size_t seg = 0; seg + 1 < selected.size(); ++seg) {
    // Later segments skip j = 0: it is the previous segment's last keyframe.
    for (std::size_t j = seg == 0 ? 0 : 1; j < frames_per_segment; ++j) {
      frames.push_back(interpolate(selected[seg], selected[seg + 1], static_cast<double>(j) / last));
    }
  }
  return frames;
}

ExportBundle export_animation(std::span<const LatentVector> selected,
                              std::size_t frames_per_segment, const Generator& generator) {
  ExportBundle bundle;
  bundle.frame_latents = animation_latents(selected, frames_per_segment);
  bundle.selected.assign(selected.begin(), selected.end());
  bundle.frames_per_segment = selected.size() == 1 ? 1 : frames_per_segment;
  bundle.frames.reserve(bundle.frame_latents.size());
  for (const LatentVector& z : bundle.frame_latents) bundle.frames.push_back(generator.generate(z));
  bundle.merged = generator.generate(average(selected));
  return bundle;
}

void write_export(const ExportBundle& bundle, const std::string& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) throw Error(ErrorCode::Io, "cannot create " + directory + ": " + ec.message());
  for (std::size_t i = 0; i < bundle.frames.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "frame_%04zu.png", i);
    write_png((std::filesystem::path(directory) / name).string(), bundle.frames[i]);
  }
  write_png((std::filesystem::path(directory) / "merged.png").string(), bundle.merged);
}

MergeWeighting merge_weighting_from_string(std::string_view text) {
  if (text == "simple") return MergeWeighting::Simple;
  if (text == "weighted") return MergeWeighting::Weighted;
  throw Error(ErrorCode::Validation, "weighting must be 'simple' or 'weighted'", "weighting");
}

double WitnessWeights::of(WitnessType w) const noexcept {
  switch (w) {
    case WitnessType::Active: return active;
    case WitnessType::Passive: return passive;
    case WitnessType::Inactive: return inactive;
  }
  return inactive;
}

LatentVector merge_witness_sessions(std::span<const WitnessComposite> composites,
                                    MergeWeighting weighting, const WitnessWeights& weights) {
  if (composites.empty()) throw Error(ErrorCode::EmptySelection, "no composites to merge");
  std::vector<LatentVector> latents;
  std::vector<double> w;
  for (const WitnessComposite& c : composites) {
    latents.push_back(c.latent);
    w.push_back(weights.of(c.witness));
  }
  if (weighting == MergeWeighting::Simple) return average(latents);
  return weighted_average(latents, w);
}

}  // namespace facelve
