#pragma once

#include <condition_variable>
#include <cstddef>
#include <cstdint>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

#include "facelve/axis_registry.hpp"
#include "facelve/error.hpp"
#include "facelve/generator.hpp"
#include "facelve/session.hpp"

namespace facelve {

struct ServiceConfig {
  /// Used for sessions that do not name their own generator.
  GeneratorDescriptor generator;
  /// Feature axes for new sessions. When empty (or of another dimension) a
  /// synthetic session falls back to the generator's attribute axes.
  std::vector<FeatureAxis> axes;
  /// Sessions are written here after every mutation, and loaded at start-up.
  std::string data_dir;
  std::size_t image_cache_capacity = 4096;
  std::size_t default_frames = 12;
};

struct HttpRequest {
  std::string method;
  std::string path;
  std::string body;
  /// Header names are matched case-insensitively by the service.
  std::map<std::string, std::string> headers;
};

struct HttpResponse {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
};

/// Maps library error codes to HTTP status codes.
int http_status(ErrorCode code) noexcept;

/// Content-addressed PNG cache. Keys are registered with the latent and the
/// generator able to render them; PNGs are rendered on first use and evicted
/// least-recently-used.
class ImageCache {
 public:
  explicit ImageCache(std::size_t capacity) : capacity_(capacity) {}

  void add(const std::string& key, std::shared_ptr<const Generator> generator,
           const LatentVector& latent);
  void put_png(const std::string& key, std::string png);
  /// Throws NotFound for unknown keys.
  std::string png(const std::string& key);
  bool contains(const std::string& key) const;

 private:
  struct Source {
    std::shared_ptr<const Generator> generator;
    LatentVector latent;
  };
  void touch(const std::string& key, std::string png);

  std::size_t capacity_;
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Source> sources_;
  std::list<std::string> lru_;
  std::unordered_map<std::string, std::pair<std::string, std::list<std::string>::iterator>> pngs_;
};

/// Mutex that admits waiters in arrival order.
class FifoMutex {
 public:
  void lock();
  void unlock();

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::uint64_t next_ = 0;
  std::uint64_t serving_ = 0;
};

/// The session-scoped HTTP API, independent of any transport. Requests for
/// different sessions run concurrently; requests within a session are
/// serialized in arrival order.
class CompositeService {
 public:
  explicit CompositeService(ServiceConfig config);

  HttpResponse handle(const HttpRequest& request);

  const ServiceConfig& config() const noexcept { return config_; }

 private:
  struct Entry {
    FifoMutex mutex;
    std::unique_ptr<Session> session;
    std::shared_ptr<const Generator> generator;
    std::map<std::string, HttpResponse> idempotent;
  };

  HttpResponse route(const HttpRequest& request);
  HttpResponse create_session(const std::string& body);
  HttpResponse session_route(const std::string& id, const std::string& action,
                             const HttpRequest& request);
  HttpResponse merge(const std::string& body);
  HttpResponse features() const;
  HttpResponse image(const std::string& key);

  std::shared_ptr<Entry> find(const std::string& id);
  std::string view_json(const Entry& entry);
  void register_images(const Entry& entry, bool render);
  void persist(const Session& session) const;
  std::string new_session_id();
  std::uint64_t new_seed();

  ServiceConfig config_;
  AxisRegistry default_registry_;
  ImageCache images_;
  std::mutex mutex_;
  std::mutex create_mutex_;
  std::map<std::string, std::shared_ptr<Entry>> sessions_;
  std::map<std::string, HttpResponse> idempotent_;
  std::uint64_t counter_ = 0;
};

/// Binds a CompositeService to an HTTP/1.1 listener.
class HttpServer {
 public:
  explicit HttpServer(CompositeService& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  /// Blocks until stop() is called.
  bool listen(const std::string& host, int port);
  /// Binds an ephemeral port and returns it; call serve() to accept.
  int bind_any_port(const std::string& host);
  bool serve();
  void wait_until_ready() const;
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace facelve
