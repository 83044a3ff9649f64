#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "facelve/axis_registry.hpp"
#include "facelve/image.hpp"
#include "facelve/latent.hpp"

namespace facelve {

enum class GeneratorKind { Synthetic, External };

std::string_view to_string(GeneratorKind kind) noexcept;
GeneratorKind generator_kind_from_string(std::string_view text);

struct GeneratorDescriptor {
  GeneratorKind kind = GeneratorKind::Synthetic;
  std::size_t dim = kDefaultLatentDim;
  int width = 128;
  int height = 128;
  /// Synthetic backend: seed of the mixing matrix.
  std::uint64_t seed = 0;
  /// External backend: an http:// endpoint URL, or a shell command that reads
  /// one JSON request line on stdin and writes PNG bytes to stdout.
  std::string model;
  int timeout_ms = 30000;
  int retries = 1;

  friend bool operator==(const GeneratorDescriptor&, const GeneratorDescriptor&) = default;
};

/// Stable hex key for (descriptor, latent); the content address of its image.
std::string image_key(const GeneratorDescriptor& descriptor, const LatentVector& latent);

/// The genotype-to-phenotype mapping. Implementations are pure functions of
/// (descriptor, latent) and safe to call concurrently.
class Generator {
 public:
  virtual ~Generator() = default;
  virtual const GeneratorDescriptor& descriptor() const noexcept = 0;
  virtual ImageBuffer generate(const LatentVector& latent) const = 0;
};

enum class FaceParam : std::size_t {
  SkinTone,
  HairLength,
  HairColor,
  BeardDensity,
  EyeSize,
  FaceWidth,
  MouthWidth,
  Glasses,
};

inline constexpr std::size_t kFaceParamCount = 8;
inline constexpr std::array<std::string_view, kFaceParamCount> kFaceParamNames = {
    "skin_tone", "hair_length", "hair_color", "beard_density",
    "eye_size",  "face_width",  "mouth_width", "glasses"};

/// Eight parameters in (0, 1) driving the procedural face.
struct SyntheticFaceParams {
  std::array<double, kFaceParamCount> values{};

  double operator[](FaceParam p) const { return values[static_cast<std::size_t>(p)]; }
  double& operator[](FaceParam p) { return values[static_cast<std::size_t>(p)]; }
};

/// Deterministic procedural faces: params = sigmoid(W · latent), where W is a
/// seeded row-orthonormal 8 × D matrix, rendered as layered ellipses and
/// rectangles. Each parameter only ever touches pixels inside its region mask,
/// so latent moves along one row of W change one parameter and one region.
class SyntheticGenerator final : public Generator {
 public:
  explicit SyntheticGenerator(GeneratorDescriptor descriptor);

  const GeneratorDescriptor& descriptor() const noexcept override { return descriptor_; }
  ImageBuffer generate(const LatentVector& latent) const override;

  SyntheticFaceParams params(const LatentVector& latent) const;
  ImageBuffer render(const SyntheticFaceParams& params) const;

  /// Rows of W, named after the parameters.
  std::vector<FeatureAxis> ground_truth_axes() const;
  /// Ground-truth axes plus "gender" and "age": correlated mixtures of rows of W
  /// with a render-invisible component, pointing toward male and old.
  std::vector<FeatureAxis> attribute_axes() const;
  /// Directions orthogonal to every row of W (and to each other).
  const std::vector<LatentVector>& hidden_directions() const noexcept { return hidden_; }

  /// Pixels (row-major, width × height) that parameter `p` can influence.
  std::vector<bool> region_mask(FaceParam p) const;

 private:
  GeneratorDescriptor descriptor_;
  std::vector<LatentVector> rows_;
  std::vector<LatentVector> hidden_;
};

/// Delegates to a model outside the process. Request: one line of JSON
/// {"dim": D, "latent": [...]}; response: PNG bytes. Failures after the
/// configured retries surface as BackendUnavailable.
class ExternalGenerator final : public Generator {
 public:
  explicit ExternalGenerator(GeneratorDescriptor descriptor);

  const GeneratorDescriptor& descriptor() const noexcept override { return descriptor_; }
  ImageBuffer generate(const LatentVector& latent) const override;

  static std::string request_body(const LatentVector& latent);

 private:
  std::string fetch_once(const std::string& body) const;

  GeneratorDescriptor descriptor_;
};

std::unique_ptr<Generator> make_generator(const GeneratorDescriptor& descriptor);

ImageBuffer generate(const GeneratorDescriptor& descriptor, const LatentVector& latent);
SyntheticFaceParams synthetic_params(const GeneratorDescriptor& descriptor,
                                     const LatentVector& latent);
std::vector<FeatureAxis> ground_truth_axes(const GeneratorDescriptor& descriptor);

}  // namespace facelve
