#pragma once

#include <array>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "pipeseg/image.hpp"

namespace pipeseg {

struct ClaheConfig {
  int tiles_x = 8;
  int tiles_y = 8;
  /// Multiple of the uniform bin height (tile_pixels / bins); infinity disables clipping.
  double clip_limit = 2.0;
  int bins = 256;
};

struct GammaConfig {
  double gamma = 0.7;
};

struct DehazeConfig {
  int patch = 15;
  double omega = 0.95;
  double t0 = 0.1;
  double bright_fraction = 0.001;
  int gf_radius = 40;
  double gf_eps = 1e-3;
};

void validate(const ClaheConfig& cfg);
void validate(const GammaConfig& cfg);
void validate(const DehazeConfig& cfg);

/// One equalization table per tile, row-major over the tile grid.
struct ClaheTables {
  int tiles_x = 0;
  int tiles_y = 0;
  std::vector<std::array<std::uint8_t, 256>> luts;
};

/// Tile tables for a single-channel plane. Throws std::invalid_argument when the plane is
/// smaller than the tile grid.
ClaheTables clahe_tables(const ImageBuffer& plane, const ClaheConfig& cfg);

/// Contrast-limited adaptive histogram equalization; RGB input is processed on luma.
ImageBuffer clahe(const ImageBuffer& img, const ClaheConfig& cfg = {});

/// v -> round(255 (v/255)^gamma); RGB input is processed on luma.
ImageBuffer gamma_correct(const ImageBuffer& img, const GammaConfig& cfg = {});

/// Per pixel: min over a patch x patch window (clipped at the border) of the channel minimum.
Field dark_channel(const ImageBuffer& img, int patch);

/// Same, for three real-valued planes (used on I/A).
Field dark_channel(const std::array<Field, 3>& planes, int patch);

using AtmosphericLight = std::array<double, 3>;

/// Brightest-luma pixel among the ceil(fraction * pixels) highest dark-channel pixels.
/// Each component is clamped to >= 1.
AtmosphericLight estimate_atmospheric_light(const ImageBuffer& img, const Field& dark,
                                            double fraction);

/// t = 1 - omega * dark_channel(I / A), clamped to [t0, 1].
Field estimate_transmission(const ImageBuffer& img, const AtmosphericLight& A,
                            const DehazeConfig& cfg);

/// Mean over the (2r+1)^2 window clipped to the plane, via an integral image.
Field box_mean(const Field& src, int radius);

/// Edge-preserving local linear smoothing of src steered by guide.
Field guided_filter(const Field& guide, const Field& src, int radius, double eps);

/// Dark-channel-prior dehazing with guided-filter refinement of the transmission.
ImageBuffer dehaze(const ImageBuffer& img, const DehazeConfig& cfg = {});

enum class EnhanceMode { original, clahe, clahe_gamma, dcpd };

std::string_view to_string(EnhanceMode mode) noexcept;
/// Report label: Original, CLAHE, CLAHE+Gamma, DCPD.
std::string_view display_name(EnhanceMode mode) noexcept;
/// Throws std::invalid_argument for unknown names.
EnhanceMode parse_enhance_mode(std::string_view name);

struct EnhanceConfig {
  ClaheConfig clahe;
  GammaConfig gamma;
  DehazeConfig dehaze;
};

/// Applies one of the four pipelines; original returns the input unchanged.
/// dcpd on a single-channel image is a data error (std::invalid_argument).
ImageBuffer enhance(const ImageBuffer& img, EnhanceMode mode, const EnhanceConfig& cfg = {});

}  // namespace pipeseg
