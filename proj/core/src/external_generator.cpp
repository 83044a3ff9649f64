#include <httplib.h>

#include <json.hpp>

#include "facelve/error.hpp"
#include "facelve/generator.hpp"
#include "subprocess.hpp"

namespace facelve {

ExternalGenerator::ExternalGenerator(GeneratorDescriptor descriptor)
    : descriptor_(std::move(descriptor)) {
  if (descriptor_.kind != GeneratorKind::External) {
    throw Error(ErrorCode::Configuration, "descriptor is not an external backend");
  }
  if (descriptor_.model.empty()) {
    throw Error(ErrorCode::BackendUnavailable, "external backend has no model configured");
  }
  if (descriptor_.dim == 0) throw Error(ErrorCode::InvalidDimension, "dimension must be positive");
}

std::string ExternalGenerator::request_body(const LatentVector& latent) {
  nlohmann::json body;
  body["dim"] = latent.dim();
  body["latent"] = latent.to_vector();
  return body.dump() + "\n";
}

std::string ExternalGenerator::fetch_once(const std::string& body) const {
  const std::string& model = descriptor_.model;
  if (model.rfind("http://", 0) == 0) {
    const auto slash = model.find('/', 7);
    const std::string host = model.substr(0, slash);
    const std::string path = slash == std::string::npos ? "/" : model.substr(slash);
    httplib::Client client(host);
    const auto timeout = std::chrono::milliseconds(descriptor_.timeout_ms);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    client.set_write_timeout(timeout);
    auto response = client.Post(path, body, "application/json");
    if (!response) {
      throw Error(ErrorCode::BackendUnavailable,
                  "generator endpoint unreachable: " + httplib::to_string(response.error()));
    }
    if (response->status != 200) {
      throw Error(ErrorCode::BackendUnavailable,
                  "generator endpoint returned HTTP " + std::to_string(response->status));
    }
    return response->body;
  }
  const detail::ProcessResult result = detail::run_process(model, body, descriptor_.timeout_ms);
  if (result.timed_out) throw Error(ErrorCode::BackendUnavailable, "generator command timed out");
  if (result.exit_status != 0) {
    throw Error(ErrorCode::BackendUnavailable,
                "generator command exited with status " + std::to_string(result.exit_status));
  }
  return result.output;
}

ImageBuffer ExternalGenerator::generate(const LatentVector& latent) const {
  if (latent.dim() != descriptor_.dim) {
    throw Error(ErrorCode::DimensionMismatch, "latent dimension does not match the generator");
  }
  const std::string body = request_body(latent);
  std::string last_failure;
  for (int attempt = 0; attempt <= std::max(0, descriptor_.retries); ++attempt) {
    try {
      ImageBuffer image = decode_png(fetch_once(body));
      if (image.width != descriptor_.width || image.height != descriptor_.height) {
        throw Error(ErrorCode::BackendUnavailable, "generator returned the wrong resolution");
      }
      return image;
    } catch (const Error& e) {
      last_failure = e.what();
    }
  }
  throw Error(ErrorCode::BackendUnavailable, "external generator failed: " + last_failure);
}

}  // namespace facelve
