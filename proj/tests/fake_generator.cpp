// Stand-in external model for the backend tests. Reads one JSON request on
// stdin and answers on stdout according to the mode in argv[1]:
//   render W H        synthetic face at W x H
//   fail              exit status 3
//   garbage           bytes that are not a PNG
//   sleep             never answers
//   flaky FILE W H    fails until FILE exists, then creates it and renders

#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <string>
#include <thread>

#include "facelve/generator.hpp"
#include "facelve/image.hpp"

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "render";
  const std::string input(std::istreambuf_iterator<char>(std::cin), {});

  if (mode == "fail") return 3;
  if (mode == "garbage") {
    std::fputs("not a png", stdout);
    return 0;
  }
  if (mode == "sleep") {
    std::this_thread::sleep_for(std::chrono::seconds(30));
    return 0;
  }
  int arg = 2;
  if (mode == "flaky") {
    const std::filesystem::path marker = argv[arg++];
    if (!std::filesystem::exists(marker)) {
      std::FILE* f = std::fopen(marker.c_str(), "w");
      if (f) std::fclose(f);
      return 4;
    }
  }
  const auto request = nlohmann::json::parse(input);
  facelve::GeneratorDescriptor d;
  d.dim = request.at("dim").get<std::size_t>();
  d.width = argc > arg ? std::stoi(argv[arg]) : 128;
  d.height = argc > arg + 1 ? std::stoi(argv[arg + 1]) : 128;
  const facelve::LatentVector latent(request.at("latent").get<std::vector<double>>());
  const std::string png = facelve::encode_png(facelve::SyntheticGenerator(d).generate(latent));
  std::fwrite(png.data(), 1, png.size(), stdout);
  return 0;
}
