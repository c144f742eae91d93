#include <array>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pipeseg/enhance.hpp"

namespace pipeseg {

void validate(const GammaConfig& cfg) {
  if (!(cfg.gamma > 0.0) || !std::isfinite(cfg.gamma)) throw std::invalid_argument("gamma must be positive");
}

ImageBuffer gamma_correct(const ImageBuffer& img, const GammaConfig& cfg) {
  validate(cfg);
  std::array<std::uint8_t, 256> lut{};
  for (int v = 0; v < 256; ++v) {
    lut[v] = static_cast<std::uint8_t>(std::floor(255.0 * std::pow(v / 255.0, cfg.gamma) + 0.5));
  }
  auto apply = [&lut](const ImageBuffer& plane) {
    ImageBuffer out = plane;
    for (auto& s : out.samples()) s = lut[s];
    return out;
  };
  if (img.channels() == 1) return apply(img);
  return luma_transform(img, apply);
}

std::string_view to_string(EnhanceMode mode) noexcept {
  switch (mode) {
    case EnhanceMode::original: return "original";
    case EnhanceMode::clahe: return "clahe";
    case EnhanceMode::clahe_gamma: return "clahe_gamma";
    case EnhanceMode::dcpd: return "dcpd";
  }
  return "original";
}

std::string_view display_name(EnhanceMode mode) noexcept {
  switch (mode) {
    case EnhanceMode::original: return "Original";
    case EnhanceMode::clahe: return "CLAHE";
    case EnhanceMode::clahe_gamma: return "CLAHE+Gamma";
    case EnhanceMode::dcpd: return "DCPD";
  }
  return "Original";
}

EnhanceMode parse_enhance_mode(std::string_view name) {
  for (auto m : {EnhanceMode::original, EnhanceMode::clahe, EnhanceMode::clahe_gamma, EnhanceMode::dcpd}) {
    if (name == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown enhancement mode '" + std::string(name) +
                              "' (expected original, clahe, clahe_gamma or dcpd)");
}

ImageBuffer enhance(const ImageBuffer& img, EnhanceMode mode, const EnhanceConfig& cfg) {
  switch (mode) {
    case EnhanceMode::original: return img;
    case EnhanceMode::clahe: return clahe(img, cfg.clahe);
    case EnhanceMode::clahe_gamma: return gamma_correct(clahe(img, cfg.clahe), cfg.gamma);
    case EnhanceMode::dcpd: return dehaze(img, cfg.dehaze);
  }
  return img;
}

}  // namespace pipeseg
