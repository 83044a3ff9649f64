#include "facelve/service.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <filesystem>
#include <future>
#include <random>
#include <sstream>

#include "facelve/error.hpp"
#include "facelve/evolution.hpp"
#include "json_io.hpp"

namespace facelve {

namespace {

using detail::json;

HttpResponse json_response(int status, const json& body) {
  return {status, "application/json", body.dump()};
}

HttpResponse error_response(const Error& e) {
  json body = {{"error", to_string(e.code())}, {"message", e.what()}};
  if (!e.field().empty()) body["field"] = e.field();
  return json_response(http_status(e.code()), body);
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::string current;
  for (char c : path.substr(0, path.find('?'))) {
    if (c == '/') {
      if (!current.empty()) parts.push_back(std::move(current));
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (!current.empty()) parts.push_back(std::move(current));
  return parts;
}

std::string header(const HttpRequest& request, std::string_view name) {
  for (const auto& [key, value] : request.headers) {
    if (key.size() == name.size() &&
        std::equal(key.begin(), key.end(), name.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) ==
                 std::tolower(static_cast<unsigned char>(b));
        })) {
      return value;
    }
  }
  return {};
}

json parse_body(const std::string& body) {
  if (body.empty()) return json::object();
  json doc = detail::parse_document(body);
  if (!doc.is_object()) throw Error(ErrorCode::Validation, "request body must be a JSON object");
  return doc;
}

template <typename T>
T field(const json& body, const char* name, T fallback) {
  if (!body.contains(name) || body.at(name).is_null()) return fallback;
  try {
    return body.at(name).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::Validation, std::string("field '") + name + "' has the wrong type", name);
  }
}

std::string image_url(const std::string& key) { return "/images/" + key; }

}  // namespace

int http_status(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::NotFound: return 404;
    case ErrorCode::SessionFinished: return 409;
    case ErrorCode::NoUnlockedFeatures:
    case ErrorCode::LockedFeature:
    case ErrorCode::FeatureUnavailable:
    case ErrorCode::DegenerateAxis:
    case ErrorCode::ScreeningFailure: return 422;
    case ErrorCode::BackendUnavailable: return 503;
    case ErrorCode::Io: return 500;
    default: return 400;
  }
}

void ImageCache::add(const std::string& key, std::shared_ptr<const Generator> generator,
                     const LatentVector& latent) {
  std::lock_guard lock(mutex_);
  sources_.try_emplace(key, Source{std::move(generator), latent});
}

void ImageCache::put_png(const std::string& key, std::string png) {
  std::lock_guard lock(mutex_);
  touch(key, std::move(png));
}

bool ImageCache::contains(const std::string& key) const {
  std::lock_guard lock(mutex_);
  return sources_.count(key) != 0;
}

std::string ImageCache::png(const std::string& key) {
  Source source{nullptr, LatentVector::zeros(1)};
  {
    std::lock_guard lock(mutex_);
    if (auto it = pngs_.find(key); it != pngs_.end()) {
      lru_.splice(lru_.begin(), lru_, it->second.second);
      return it->second.first;
    }
    auto it = sources_.find(key);
    if (it == sources_.end()) throw Error(ErrorCode::NotFound, "unknown image " + key);
    source = it->second;
  }
  std::string png = encode_png(source.generator->generate(source.latent));
  put_png(key, png);
  return png;
}

void ImageCache::touch(const std::string& key, std::string png) {
  if (auto it = pngs_.find(key); it != pngs_.end()) {
    lru_.splice(lru_.begin(), lru_, it->second.second);
    return;
  }
  lru_.push_front(key);
  pngs_.emplace(key, std::make_pair(std::move(png), lru_.begin()));
  while (pngs_.size() > capacity_ && !lru_.empty()) {
    pngs_.erase(lru_.back());
    lru_.pop_back();
  }
}

void FifoMutex::lock() {
  std::unique_lock lock(mutex_);
  const std::uint64_t ticket = next_++;
  cv_.wait(lock, [&] { return serving_ == ticket; });
}

void FifoMutex::unlock() {
  {
    std::lock_guard lock(mutex_);
    ++serving_;
  }
  cv_.notify_all();
}

CompositeService::CompositeService(ServiceConfig config)
    : config_(std::move(config)), images_(config_.image_cache_capacity) {
  if (config_.axes.empty() && config_.generator.kind == GeneratorKind::Synthetic) {
    config_.axes = SyntheticGenerator(config_.generator).attribute_axes();
  }
  default_registry_ = AxisRegistry(config_.axes);

  if (!config_.data_dir.empty()) {
    std::filesystem::create_directories(config_.data_dir);
    for (const auto& file : std::filesystem::directory_iterator(config_.data_dir)) {
      if (file.path().extension() != ".json") continue;
      auto entry = std::make_shared<Entry>();
      try {
        entry->session = std::make_unique<Session>(load_session(file.path().string()));
      } catch (const Error& e) {
        std::fprintf(stderr, "skipping %s: %s\n", file.path().c_str(), e.what());
        continue;
      }
      entry->generator = make_generator(entry->session->config().generator);
      register_images(*entry, false);
      sessions_.emplace(entry->session->id(), std::move(entry));
    }
  }
}

HttpResponse CompositeService::handle(const HttpRequest& request) {
  try {
    return route(request);
  } catch (const Error& e) {
    return error_response(e);
  } catch (const std::exception& e) {
    return json_response(500, {{"error", "internal"}, {"message", e.what()}});
  }
}

HttpResponse CompositeService::route(const HttpRequest& request) {
  const std::vector<std::string> parts = split_path(request.path);
  const bool get = request.method == "GET";
  const bool post = request.method == "POST";

  if (parts.size() == 1 && parts[0] == "features" && get) return features();
  if (parts.size() == 2 && parts[0] == "images" && get) return image(parts[1]);

  const std::string key = header(request, "Idempotency-Key");
  const std::string scope = request.method + ' ' + request.path + ' ' + key;

  if ((parts.size() == 1 && parts[0] == "sessions" && post) ||
      (parts.size() == 1 && parts[0] == "merge" && post)) {
    std::lock_guard create(create_mutex_);
    if (!key.empty()) {
      std::lock_guard lock(mutex_);
      if (auto it = idempotent_.find(scope); it != idempotent_.end()) return it->second;
    }
    HttpResponse response = parts[0] == "sessions" ? create_session(request.body)
                                                   : merge(request.body);
    if (!key.empty()) {
      std::lock_guard lock(mutex_);
      idempotent_.emplace(scope, response);
    }
    return response;
  }

  if (parts.size() >= 2 && parts[0] == "sessions") {
    std::string action;
    for (std::size_t i = 2; i < parts.size(); ++i) action += (i > 2 ? "/" : "") + parts[i];
    if (get && (action.empty() || action == "debug" || action == "file")) {
      return session_route(parts[1], action, request);
    }
    if (post && !action.empty()) return session_route(parts[1], action, request);
  }
  throw Error(ErrorCode::NotFound, "no route for " + request.method + " " + request.path);
}

std::shared_ptr<CompositeService::Entry> CompositeService::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = sessions_.find(id);
  if (it == sessions_.end()) throw Error(ErrorCode::NotFound, "unknown session " + id);
  return it->second;
}

std::string CompositeService::new_session_id() {
  std::random_device device;
  std::ostringstream id;
  std::lock_guard lock(mutex_);
  id << 's' << std::hex << ++counter_ << '-' << device() << device();
  return id.str();
}

std::uint64_t CompositeService::new_seed() {
  std::random_device device;
  return (static_cast<std::uint64_t>(device()) << 32) | device();
}

void CompositeService::register_images(const Entry& entry, bool render) {
  const Session& session = *entry.session;
  const GeneratorDescriptor& descriptor = session.config().generator;
  std::vector<std::string> missing;
  for (const Individual& ind : session.population().slots) {
    const std::string key = image_key(descriptor, ind.latent);
    images_.add(key, entry.generator, ind.latent);
    if (render) missing.push_back(key);
  }
  if (!render) return;
  // Fan the renders out; the first failure propagates.
  std::vector<std::future<void>> jobs;
  for (const std::string& key : missing) {
    jobs.push_back(std::async(std::launch::async, [this, key] {
      images_.png(key);
    }));
  }
  for (auto& job : jobs) job.get();
}

void CompositeService::persist(const Session& session) const {
  if (config_.data_dir.empty()) return;
  save_session((std::filesystem::path(config_.data_dir) / (session.id() + ".json")).string(),
               session);
}

std::string CompositeService::view_json(const Entry& entry) {
  const Session& s = *entry.session;
  const GeneratorDescriptor& descriptor = s.config().generator;
  json slots = json::array();
  const Population& pop = s.population();
  for (std::size_t i = 0; i < pop.slots.size(); ++i) {
    const std::string key = image_key(descriptor, pop.slots[i].latent);
    slots.push_back({{"index", i},
                     {"status", to_string(pop.slots[i].status)},
                     {"image_key", key},
                     {"image_url", image_url(key)}});
  }
  json features = json::array();
  for (const FeatureAxis& axis : s.registry().axes()) {
    features.push_back({{"name", axis.name},
                        {"locked", s.registry().is_locked(axis.name)},
                        {"degenerate", s.registry().is_degenerate(axis.name)}});
  }
  json presets = json::array();
  for (const auto& [name, latent] : s.presets()) presets.push_back(name);
  json view = {
      {"session_id", s.id()},
      {"generation", pop.generation},
      {"seed", s.config().seed},
      {"status", to_string(s.status())},
      {"witness_type", to_string(s.config().witness)},
      {"profile",
       {{"gender", to_string(s.config().profile.gender)}, {"age", to_string(s.config().profile.age)}}},
      {"dim", s.dim()},
      {"slots", std::move(slots)},
      {"locks", s.registry().locked()},
      {"features", std::move(features)},
      {"presets", std::move(presets)},
      {"settings", {{"mode", to_string(s.settings().mode)}, {"amount", s.settings().amount}}},
      {"actions", s.actions().size()},
  };
  return view.dump();
}

HttpResponse CompositeService::create_session(const std::string& raw) {
  const json body = parse_body(raw);
  SessionConfig config;
  const json profile = body.contains("profile") ? body.at("profile") : json::object();
  if (!profile.is_object()) throw Error(ErrorCode::Validation, "profile must be an object", "profile");
  config.profile.gender = gender_from_string(field<std::string>(profile, "gender", "unspecified"));
  config.profile.age = age_from_string(field<std::string>(profile, "age", "unspecified"));
  config.witness = witness_type_from_string(field<std::string>(body, "witness_type", "active"));
  config.seed = body.contains("seed") && !body.at("seed").is_null()
                    ? field<std::uint64_t>(body, "seed", 0)
                    : new_seed();
  config.generator = body.contains("generator")
                         ? detail::guarded([&] {
                             return detail::descriptor_from_json(body.at("generator"),
                                                                 config_.generator);
                           })
                         : config_.generator;
  if (default_registry_.size() > 0 && default_registry_.dim() == config.generator.dim) {
    config.axes = config_.axes;
  } else if (config.generator.kind == GeneratorKind::Synthetic) {
    config.axes = SyntheticGenerator(config.generator).attribute_axes();
  }
  config.id = new_session_id();

  auto entry = std::make_shared<Entry>();
  entry->generator = make_generator(config.generator);
  entry->session = std::make_unique<Session>(Session::create(std::move(config)));
  register_images(*entry, true);
  persist(*entry->session);
  {
    std::lock_guard lock(mutex_);
    sessions_.emplace(entry->session->id(), entry);
  }
  return {201, "application/json", view_json(*entry)};
}

HttpResponse CompositeService::session_route(const std::string& id, const std::string& action,
                                             const HttpRequest& request) {
  std::shared_ptr<Entry> entry = find(id);
  std::lock_guard lock(entry->mutex);
  Session& session = *entry->session;

  if (request.method == "GET") {
    if (action == "debug") {
      json slots = json::array();
      for (std::size_t i = 0; i < session.population().slots.size(); ++i) {
        const Individual& ind = session.population().slots[i];
        slots.push_back({{"index", i},
                         {"status", to_string(ind.status)},
                         {"latent", detail::latent_to_json(ind.latent)}});
      }
      return json_response(200, {{"session_id", session.id()},
                                 {"generation", session.population().generation},
                                 {"slots", std::move(slots)},
                                 {"locks", session.registry().locked()},
                                 {"rng",
                                  {{"seed", session.rng().seed()},
                                   {"position", session.rng().position()}}}});
    }
    if (action == "file") return {200, "application/json", session_to_json(session)};
    return {200, "application/json", view_json(*entry)};
  }

  const std::string key = header(request, "Idempotency-Key");
  const std::string scope = action + ' ' + key;
  if (!key.empty()) {
    if (auto it = entry->idempotent.find(scope); it != entry->idempotent.end()) return it->second;
  }

  const json body = parse_body(request.body);
  json extra;
  if (action == "step") {
    StepAction step;
    step.selected = field<std::vector<std::size_t>>(body, "selected", {});
    step.locked = field<std::vector<std::size_t>>(body, "locked", {});
    step.settings = session.settings();
    if (body.contains("mode")) {
      step.settings.mode = mutation_mode_from_string(field<std::string>(body, "mode", ""));
    }
    step.settings.amount = field<double>(body, "amount", step.settings.amount);
    session.apply(step);
  } else if (action == "randomize") {
    session.apply(RandomizeAction{field<std::vector<std::size_t>>(body, "selected", {}),
                                  field<std::vector<std::size_t>>(body, "locked", {})});
  } else if (action == "edit") {
    EditAction edit;
    edit.slot = field<std::size_t>(body, "slot", 0);
    edit.feature = field<std::string>(body, "feature", "");
    edit.direction = edit_direction_from_string(field<std::string>(body, "direction", "+"));
    edit.step = field<double>(body, "step", session.settings().amount);
    if (body.contains("locks")) edit.locks = field<std::vector<std::string>>(body, "locks", {});
    session.apply(edit);
  } else if (action == "locks") {
    std::vector<std::string> locked = session.registry().locked();
    if (body.contains("locked")) {
      locked = field<std::vector<std::string>>(body, "locked", {});
    } else {
      const std::string feature = field<std::string>(body, "feature", "");
      const bool smart = field<bool>(body, "smart", false);
      const bool lock_it = field<bool>(body, "lock", true);
      const std::vector<std::string> group =
          smart ? smart_lock_set(session.registry(), feature)
                : std::vector<std::string>{session.registry().axis(feature).name};
      for (const std::string& name : group) {
        const auto it = std::find(locked.begin(), locked.end(), name);
        if (lock_it && it == locked.end()) locked.push_back(name);
        if (!lock_it && it != locked.end()) locked.erase(it);
      }
      extra["affected"] = group;
    }
    session.apply(LocksAction{locked});
  } else if (action == "presets" || action == "presets/load") {
    const std::string name = field<std::string>(body, "name", "");
    const std::size_t slot = field<std::size_t>(body, "slot", 0);
    if (action == "presets") {
      session.apply(SavePresetAction{name, slot});
    } else {
      session.apply(LoadPresetAction{name, slot});
    }
  } else if (action == "finish") {
    const std::size_t frames = field<std::size_t>(body, "frames", config_.default_frames);
    session.apply(FinishAction{field<std::vector<std::size_t>>(body, "selected", {}), frames});
    const ExportRecord& record = session.exports().back();
    const GeneratorDescriptor& descriptor = session.config().generator;
    json frame_urls = json::array();
    for (const LatentVector& z : animation_latents(record.selected, record.frames_per_segment)) {
      const std::string k = image_key(descriptor, z);
      images_.add(k, entry->generator, z);
      frame_urls.push_back(image_url(k));
    }
    const std::string merged = image_key(descriptor, record.composite);
    images_.add(merged, entry->generator, record.composite);
    const std::size_t frame_count = frame_urls.size();
    extra["export"] = {{"frames", std::move(frame_urls)},
                       {"frame_count", frame_count},
                       {"merged", image_url(merged)}};
  } else {
    throw Error(ErrorCode::NotFound, "no route for POST /sessions/" + id + "/" + action);
  }

  // Rendering failures after a committed action are not fatal: images are
  // rendered again on demand.
  try {
    register_images(*entry, true);
  } catch (const Error&) {
    register_images(*entry, false);
  }
  persist(session);

  json view = json::parse(view_json(*entry));
  for (auto& [k, v] : extra.items()) view[k] = v;
  HttpResponse response = json_response(200, view);
  if (!key.empty()) entry->idempotent.emplace(scope, response);
  return response;
}

HttpResponse CompositeService::merge(const std::string& raw) {
  const json body = parse_body(raw);
  const MergeWeighting weighting =
      merge_weighting_from_string(field<std::string>(body, "weighting", "simple"));
  std::vector<WitnessComposite> composites;
  std::optional<GeneratorDescriptor> descriptor;
  auto add = [&](const Session& s) {
    const std::optional<LatentVector> c = s.composite();
    if (!c) {
      throw Error(ErrorCode::Validation, "session " + s.id() + " is not finished", "sessions");
    }
    if (!descriptor) descriptor = s.config().generator;
    composites.push_back({*c, s.config().witness});
  };
  for (const std::string& id : field<std::vector<std::string>>(body, "sessions", {})) {
    std::shared_ptr<Entry> entry = find(id);
    std::lock_guard lock(entry->mutex);
    add(*entry->session);
  }
  for (const std::string& path : field<std::vector<std::string>>(body, "files", {})) {
    add(load_session(path));
  }
  const LatentVector merged = merge_witness_sessions(composites, weighting);
  const std::string key = image_key(*descriptor, merged);
  images_.add(key, std::shared_ptr<const Generator>(make_generator(*descriptor)), merged);
  return json_response(200, {{"count", composites.size()},
                             {"weighting", weighting == MergeWeighting::Simple ? "simple" : "weighted"},
                             {"latent", detail::latent_to_json(merged)},
                             {"image_url", image_url(key)}});
}

HttpResponse CompositeService::features() const {
  json names = json::array();
  json similarity = json::array();
  for (std::size_t i = 0; i < default_registry_.size(); ++i) {
    names.push_back(default_registry_.axes()[i].name);
    json row = json::array();
    for (std::size_t j = 0; j < default_registry_.size(); ++j) {
      row.push_back(default_registry_.similarity(i, j));
    }
    similarity.push_back(std::move(row));
  }
  return json_response(200, {{"dim", default_registry_.dim()},
                             {"features", std::move(names)},
                             {"similarity", std::move(similarity)},
                             {"smart_lock_threshold", kSmartLockThreshold}});
}

HttpResponse CompositeService::image(const std::string& key) {
  return {200, "image/png", images_.png(key)};
}

}  // namespace facelve
