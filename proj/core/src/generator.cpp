#include "facelve/generator.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <cmath>
#include <cstring>

#include "facelve/error.hpp"

namespace facelve {

namespace {

// Rows of W plus two hidden directions used by the gender and age axes.
constexpr std::size_t kSyntheticRows = kFaceParamCount + 2;

struct Rgb {
  double r, g, b;
};

Rgb lerp(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sq(double x) { return x * x; }

// Face geometry in normalized coordinates (u right, v down, both in [0, 1]).
// Each predicate below takes the single parameter that controls its extent.
constexpr double kEyeY = 0.46;
constexpr double kEyeLeftX = 0.38;
constexpr double kEyeRightX = 0.62;
constexpr double kMaxEyeRadius = 0.06;
constexpr double kGlassesInner = 0.075;
constexpr double kGlassesOuter = 0.09;
constexpr double kBeardTop = 0.66;

bool in_hair(double u, double v, double length) {
  if (std::abs(u - 0.5) > 0.40 || v < 0.06 || v > 0.40 + 0.50 * length) return false;
  return v >= 0.40 || sq((u - 0.5) / 0.40) + sq((v - 0.40) / 0.34) <= 1.0;
}

bool in_face(double u, double v, double width) {
  return sq((u - 0.5) / (0.26 + 0.10 * width)) + sq((v - 0.52) / 0.34) <= 1.0;
}

bool in_beard_zone(double u, double v) { return v >= kBeardTop && in_face(u, v, 0.0); }

bool in_mouth(double u, double v, double width) {
  return std::abs(u - 0.5) <= 0.05 + 0.08 * width && std::abs(v - 0.74) <= 0.018;
}

double eye_distance(double u, double v) {
  return std::min(std::hypot(u - kEyeLeftX, v - kEyeY), std::hypot(u - kEyeRightX, v - kEyeY));
}

double eye_radius(double size) { return 0.025 + 0.035 * size; }

bool in_glasses(double u, double v) {
  const double d = eye_distance(u, v);
  if (d >= kGlassesInner && d <= kGlassesOuter) return true;
  return std::abs(v - kEyeY) <= 0.008 && u >= kEyeLeftX + kGlassesOuter &&
         u <= kEyeRightX - kGlassesOuter;
}

std::uint8_t to_byte(double c) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(c, 0.0, 255.0)));
}

void require_synthetic(const GeneratorDescriptor& d) {
  if (d.kind != GeneratorKind::Synthetic) {
    throw Error(ErrorCode::Unsupported, "operation requires the synthetic backend");
  }
}

}  // namespace

std::string_view to_string(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::Synthetic ? "synthetic" : "external";
}

GeneratorKind generator_kind_from_string(std::string_view text) {
  if (text == "synthetic") return GeneratorKind::Synthetic;
  if (text == "external") return GeneratorKind::External;
  throw Error(ErrorCode::Validation, "unknown generator kind '" + std::string(text) + "'", "kind");
}

std::string image_key(const GeneratorDescriptor& descriptor, const LatentVector& latent) {
  std::string header = std::string(to_string(descriptor.kind)) + '|' +
                       std::to_string(descriptor.dim) + '|' + std::to_string(descriptor.width) +
                       'x' + std::to_string(descriptor.height) + '|' +
                       std::to_string(descriptor.seed) + '|' + descriptor.model + '|';
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr);
  EVP_DigestUpdate(ctx, header.data(), header.size());
  EVP_DigestUpdate(ctx, latent.values().data(), latent.dim() * sizeof(double));
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  EVP_DigestFinal_ex(ctx, digest, &length);
  EVP_MD_CTX_free(ctx);

  static constexpr char kHex[] = "0123456789abcdef";
  std::string key;
  key.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) {
    key.push_back(kHex[digest[i] >> 4]);
    key.push_back(kHex[digest[i] & 0xf]);
  }
  return key;
}

SyntheticGenerator::SyntheticGenerator(GeneratorDescriptor descriptor)
    : descriptor_(std::move(descriptor)) {
  require_synthetic(descriptor_);
  if (descriptor_.dim < kSyntheticRows) {
    throw Error(ErrorCode::InvalidDimension, "synthetic backend needs dim >= " +
                                                 std::to_string(kSyntheticRows));
  }
  if (descriptor_.width <= 0 || descriptor_.height <= 0) {
    throw Error(ErrorCode::Validation, "output resolution must be positive");
  }
  RandomStream rng(descriptor_.seed);
  std::vector<LatentVector> raw;
  raw.reserve(kSyntheticRows);
  for (std::size_t i = 0; i < kSyntheticRows; ++i) raw.push_back(sample_standard(rng, descriptor_.dim));
  std::vector<LatentVector> basis = orthonormal_basis(raw);
  if (basis.size() != kSyntheticRows) {
    throw Error(ErrorCode::Configuration, "seeded mixing matrix is rank deficient");
  }
  rows_.assign(basis.begin(), basis.begin() + kFaceParamCount);
  hidden_.assign(basis.begin() + kFaceParamCount, basis.end());
}

SyntheticFaceParams SyntheticGenerator::params(const LatentVector& latent) const {
  if (latent.dim() != descriptor_.dim) {
    throw Error(ErrorCode::DimensionMismatch, "latent dimension does not match the generator");
  }
  SyntheticFaceParams p;
  for (std::size_t i = 0; i < kFaceParamCount; ++i) p.values[i] = sigmoid(dot(rows_[i], latent));
  return p;
}

ImageBuffer SyntheticGenerator::generate(const LatentVector& latent) const {
  return render(params(latent));
}

ImageBuffer SyntheticGenerator::render(const SyntheticFaceParams& p) const {
  const Rgb background{200, 210, 220};
  const Rgb hair = lerp({225, 195, 120}, {35, 25, 20}, p[FaceParam::HairColor]);
  const Rgb skin = lerp({245, 215, 185}, {95, 65, 45}, p[FaceParam::SkinTone]);
  const Rgb beard{45, 30, 20};
  const Rgb mouth{150, 50, 60};
  const Rgb eye_white{250, 250, 250};
  const Rgb pupil{30, 30, 40};
  const Rgb frame{20, 20, 20};
  const double radius = eye_radius(p[FaceParam::EyeSize]);

  ImageBuffer image(descriptor_.width, descriptor_.height);
  for (int y = 0; y < image.height; ++y) {
    const double v = (y + 0.5) / image.height;
    for (int x = 0; x < image.width; ++x) {
      const double u = (x + 0.5) / image.width;
      Rgb c = background;
      if (in_hair(u, v, p[FaceParam::HairLength])) c = hair;
      if (in_face(u, v, p[FaceParam::FaceWidth])) c = skin;
      if (in_beard_zone(u, v)) c = lerp(c, beard, 0.85 * p[FaceParam::BeardDensity]);
      if (in_mouth(u, v, p[FaceParam::MouthWidth])) c = mouth;
      const double d = eye_distance(u, v);
      if (d <= radius) c = d <= 0.45 * radius ? pupil : eye_white;
      if (in_glasses(u, v)) c = lerp(c, frame, p[FaceParam::Glasses]);

      std::uint8_t* px = image.at(x, y);
      px[0] = to_byte(c.r);
      px[1] = to_byte(c.g);
      px[2] = to_byte(c.b);
    }
  }
  return image;
}

std::vector<bool> SyntheticGenerator::region_mask(FaceParam param) const {
  const int w = descriptor_.width, h = descriptor_.height;
  std::vector<bool> mask(static_cast<std::size_t>(w) * h, false);
  for (int y = 0; y < h; ++y) {
    const double v = (y + 0.5) / h;
    for (int x = 0; x < w; ++x) {
      const double u = (x + 0.5) / w;
      bool inside = false;
      switch (param) {
        case FaceParam::SkinTone: inside = in_face(u, v, 1.0); break;
        case FaceParam::HairLength: inside = in_hair(u, v, 1.0) && !in_hair(u, v, 0.0); break;
        case FaceParam::HairColor: inside = in_hair(u, v, 1.0); break;
        case FaceParam::BeardDensity: inside = in_beard_zone(u, v); break;
        case FaceParam::EyeSize: inside = eye_distance(u, v) <= kMaxEyeRadius; break;
        case FaceParam::FaceWidth: inside = in_face(u, v, 1.0) && !in_face(u, v, 0.0); break;
        case FaceParam::MouthWidth: inside = in_mouth(u, v, 1.0) && !in_mouth(u, v, 0.0); break;
        case FaceParam::Glasses: inside = in_glasses(u, v); break;
      }
      mask[static_cast<std::size_t>(y) * w + x] = inside;
    }
  }
  return mask;
}

std::vector<FeatureAxis> SyntheticGenerator::ground_truth_axes() const {
  std::vector<FeatureAxis> axes;
  for (std::size_t i = 0; i < kFaceParamCount; ++i) {
    axes.push_back(FeatureAxis{std::string(kFaceParamNames[i]), rows_[i], 0});
  }
  return axes;
}

std::vector<FeatureAxis> SyntheticGenerator::attribute_axes() const {
  auto row = [&](FaceParam p) { return rows_[static_cast<std::size_t>(p)]; };
  std::vector<FeatureAxis> axes = ground_truth_axes();
  // Male faces: more beard, shorter hair, wider face.
  const LatentVector gender = 0.62 * row(FaceParam::BeardDensity) -
                              0.55 * row(FaceParam::HairLength) +
                              0.30 * row(FaceParam::FaceWidth) + 0.45 * hidden_[0];
  // Older faces: darker hair, darker skin, smaller eyes.
  const LatentVector age = 0.60 * row(FaceParam::HairColor) + 0.30 * row(FaceParam::SkinTone) -
                           0.35 * row(FaceParam::EyeSize) + 0.65 * hidden_[1];
  axes.push_back(FeatureAxis::make("gender", gender));
  axes.push_back(FeatureAxis::make("age", age));
  return axes;
}

std::unique_ptr<Generator> make_generator(const GeneratorDescriptor& descriptor) {
  if (descriptor.kind == GeneratorKind::Synthetic) {
    return std::make_unique<SyntheticGenerator>(descriptor);
  }
  return std::make_unique<ExternalGenerator>(descriptor);
}

ImageBuffer generate(const GeneratorDescriptor& descriptor, const LatentVector& latent) {
  return make_generator(descriptor)->generate(latent);
}

SyntheticFaceParams synthetic_params(const GeneratorDescriptor& descriptor,
                                     const LatentVector& latent) {
  require_synthetic(descriptor);
  return SyntheticGenerator(descriptor).params(latent);
}

std::vector<FeatureAxis> ground_truth_axes(const GeneratorDescriptor& descriptor) {
  require_synthetic(descriptor);
  return SyntheticGenerator(descriptor).ground_truth_axes();
}

}  // namespace facelve
