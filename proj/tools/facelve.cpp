// facelve: composite server and session file utilities.

#include <CLI11.hpp>
#include <json.hpp>

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <pthread.h>
#include <thread>

#include "facelve/axis_registry.hpp"
#include "facelve/error.hpp"
#include "facelve/service.hpp"
#include "facelve/session.hpp"
#include "generator_flags.hpp"

namespace {

using namespace facelve;

int serve(const std::string& listen, const std::string& data_dir, const std::string& axes_file,
          const GeneratorDescriptor& descriptor, std::size_t cache) {
  const auto colon = listen.rfind(':');
  if (colon == std::string::npos) {
    throw Error(ErrorCode::Configuration, "listen address must be host:port", "listen");
  }
  const std::string host = listen.substr(0, colon);
  const int port = std::stoi(listen.substr(colon + 1));

  ServiceConfig config;
  config.generator = descriptor;
  config.data_dir = data_dir;
  config.image_cache_capacity = cache;
  if (!axes_file.empty()) config.axes = load_axes(axes_file);

  // Signals are taken synchronously by a dedicated thread so shutdown can call
  // into the server safely.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  CompositeService service(std::move(config));
  HttpServer server(service);
  std::thread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
  });
  std::fprintf(stderr, "listening on %s:%d\n", host.c_str(), port);
  const bool ok = server.listen(host, port);
  if (!ok) {
    std::fprintf(stderr, "could not listen on %s\n", listen.c_str());
    pthread_kill(waiter.native_handle(), SIGTERM);
  }
  waiter.join();
  return ok ? 0 : 1;
}

int export_session(const std::string& path, std::size_t frames, const std::string& out) {
  const Session session = load_session(path);
  if (session.exports().empty()) {
    throw Error(ErrorCode::Validation, "session " + session.id() + " has no export", "session");
  }
  const ExportRecord& record = session.exports().back();
  const auto generator = make_generator(session.config().generator);
  const ExportBundle bundle =
      export_animation(record.selected, frames ? frames : record.frames_per_segment, *generator);
  write_export(bundle, out);
  std::printf("%zu frames written to %s\n", bundle.frames.size(), out.c_str());
  return 0;
}

int export_axes(const GeneratorDescriptor& descriptor, const std::string& out) {
  if (descriptor.kind != GeneratorKind::Synthetic) {
    throw Error(ErrorCode::Unsupported, "only the synthetic backend ships axes", "generator");
  }
  save_axes(out, SyntheticGenerator(descriptor).attribute_axes());
  return 0;
}

int merge(const std::vector<std::string>& files, const std::string& weighting,
          const std::string& png) {
  std::vector<WitnessComposite> composites;
  std::optional<GeneratorDescriptor> descriptor;
  for (const std::string& file : files) {
    const Session session = load_session(file);
    const auto composite = session.composite();
    if (!composite) throw Error(ErrorCode::Validation, file + " is not finished", "files");
    if (!descriptor) descriptor = session.config().generator;
    composites.push_back({*composite, session.config().witness});
  }
  const LatentVector merged =
      merge_witness_sessions(composites, merge_weighting_from_string(weighting));
  if (!png.empty()) write_png(png, generate(*descriptor, merged));
  std::cout << nlohmann::json(merged.to_vector()).dump() << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactive composite construction server and tools"};
  app.require_subcommand(1);

  tools::GeneratorFlags serve_gen;
  std::string listen = "127.0.0.1:8080";
  std::string data_dir;
  std::string axes_file;
  std::size_t cache = 4096;
  auto* serve_cmd = app.add_subcommand("serve", "Run the HTTP composite service");
  serve_cmd->add_option("--listen", listen, "host:port")->envname("FACELVE_LISTEN");
  serve_cmd->add_option("--data-dir", data_dir, "session directory")->envname("FACELVE_DATA_DIR");
  serve_cmd->add_option("--axes", axes_file, "feature axis file")->envname("FACELVE_AXES");
  serve_cmd->add_option("--image-cache", cache, "PNG cache entries");
  serve_gen.attach(*serve_cmd);

  std::string session_file;
  std::size_t frames = 0;
  std::string out_dir;
  auto* export_cmd = app.add_subcommand("export", "Render a finished session's animation");
  export_cmd->add_option("--session", session_file, "session file")->required();
  export_cmd->add_option("--frames", frames, "frames per segment (default: as recorded)")
      ->check(CLI::PositiveNumber);
  export_cmd->add_option("--out", out_dir, "output directory")->required();

  tools::GeneratorFlags axes_gen;
  std::string axes_out;
  auto* axes_cmd = app.add_subcommand("axes", "Write the synthetic backend's feature axes");
  axes_cmd->add_option("--out", axes_out, "axis file")->required();
  axes_gen.attach(*axes_cmd);

  std::vector<std::string> merge_files;
  std::string weighting = "simple";
  std::string merge_png;
  auto* merge_cmd = app.add_subcommand("merge", "Merge finished witness sessions");
  merge_cmd->add_option("files", merge_files, "session files")->required()->expected(1, -1);
  merge_cmd->add_option("--weighting", weighting, "simple or weighted");
  merge_cmd->add_option("--png", merge_png, "also render the merged face");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) return serve(listen, data_dir, axes_file, serve_gen.resolve(), cache);
    if (*export_cmd) return export_session(session_file, frames, out_dir);
    if (*axes_cmd) return export_axes(axes_gen.resolve(), axes_out);
    if (*merge_cmd) return merge(merge_files, weighting, merge_png);
  } catch (const Error& e) {
    std::fprintf(stderr, "error (%s): %s\n", std::string(to_string(e.code())).c_str(), e.what());
    return 2;
  }
  return 0;
}
