#pragma once

#include <CLI11.hpp>

#include <string>

#include "facelve/generator.hpp"

namespace facelve::tools {

// Generator descriptor options shared by the subcommands; each also reads an
// environment variable so a deployment can be configured without flags.
struct GeneratorFlags {
  std::string kind = "synthetic";
  GeneratorDescriptor descriptor;

  void attach(CLI::App& app) {
    app.add_option("--generator", kind, "synthetic or external")
        ->envname("FACELVE_GENERATOR")
        ->check(CLI::IsMember({"synthetic", "external"}));
    app.add_option("--model", descriptor.model, "external backend: http:// URL or shell command")
        ->envname("FACELVE_MODEL");
    app.add_option("--dim", descriptor.dim, "latent dimension")->envname("FACELVE_DIM");
    app.add_option("--width", descriptor.width, "image width")->envname("FACELVE_WIDTH");
    app.add_option("--height", descriptor.height, "image height")->envname("FACELVE_HEIGHT");
    app.add_option("--generator-seed", descriptor.seed, "synthetic mixing-matrix seed")
        ->envname("FACELVE_GENERATOR_SEED");
    app.add_option("--timeout-ms", descriptor.timeout_ms, "external backend timeout")
        ->envname("FACELVE_TIMEOUT_MS");
    app.add_option("--retries", descriptor.retries, "external backend retries")
        ->envname("FACELVE_RETRIES");
  }

  GeneratorDescriptor resolve() const {
    GeneratorDescriptor d = descriptor;
    d.kind = generator_kind_from_string(kind);
    return d;
  }
};

}  // namespace facelve::tools
