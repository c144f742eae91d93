#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pipeseg/enhance.hpp"
#include "pipeseg/errors.hpp"

namespace pipeseg {

namespace {

// Separable min filter with the window clipped at the border.
Field min_filter(const Field& src, int patch) {
  if (patch < 1 || patch % 2 == 0) throw std::invalid_argument("patch size must be a positive odd number");
  const int r = patch / 2;
  const int w = src.width(), h = src.height();
  Field tmp(w, h), out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = src.at(x, y);
      for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) m = std::min(m, src.at(xx, y));
      tmp.at(x, y) = m;
    }
  }
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      double m = tmp.at(x, y);
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy) m = std::min(m, tmp.at(x, yy));
      out.at(x, y) = m;
    }
  }
  return out;
}

void require_rgb(const ImageBuffer& img, const char* what) {
  if (img.channels() != 3) throw std::invalid_argument(std::string(what) + " needs a 3-channel image");
}

void require_same_shape(const Field& a, const Field& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch("guided_filter: guide and source differ in size");
  }
}

Field luma_field(const ImageBuffer& img) {
  const ImageBuffer y = luma(img);
  Field f(img.width(), img.height());
  auto src = y.samples();
  auto dst = f.values();
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = src[i] / 255.0;
  return f;
}

}  // namespace

void validate(const DehazeConfig& cfg) {
  if (cfg.patch < 1 || cfg.patch % 2 == 0) throw std::invalid_argument("dehaze patch must be odd");
  if (!(cfg.omega > 0.0 && cfg.omega <= 1.0)) throw std::invalid_argument("omega must be in (0, 1]");
  if (!(cfg.t0 > 0.0 && cfg.t0 < 1.0)) throw std::invalid_argument("t0 must be in (0, 1)");
  if (!(cfg.bright_fraction > 0.0 && cfg.bright_fraction <= 1.0)) {
    throw std::invalid_argument("bright fraction must be in (0, 1]");
  }
  if (cfg.gf_radius < 0) throw std::invalid_argument("guided filter radius must be nonnegative");
  if (!(cfg.gf_eps > 0.0)) throw std::invalid_argument("guided filter eps must be positive");
}

Field dark_channel(const ImageBuffer& img, int patch) {
  require_rgb(img, "dark_channel");
  Field mins(img.width(), img.height());
  auto s = img.samples();
  auto d = mins.values();
  for (std::size_t i = 0; i < d.size(); ++i) d[i] = std::min({s[3 * i], s[3 * i + 1], s[3 * i + 2]});
  return min_filter(mins, patch);
}

Field dark_channel(const std::array<Field, 3>& planes, int patch) {
  for (const auto& p : planes) {
    if (p.width() != planes[0].width() || p.height() != planes[0].height()) {
      throw DimensionMismatch("dark_channel: planes differ in size");
    }
  }
  Field mins(planes[0].width(), planes[0].height());
  auto d = mins.values();
  for (std::size_t i = 0; i < d.size(); ++i) {
    d[i] = std::min({planes[0].values()[i], planes[1].values()[i], planes[2].values()[i]});
  }
  return min_filter(mins, patch);
}

AtmosphericLight estimate_atmospheric_light(const ImageBuffer& img, const Field& dark, double fraction) {
  require_rgb(img, "estimate_atmospheric_light");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw std::invalid_argument("fraction must be in (0, 1]");
  if (dark.width() != img.width() || dark.height() != img.height()) {
    throw DimensionMismatch("dark channel and image differ in size");
  }
  const std::size_t n = img.pixel_count();
  const auto k = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9)), 1, n);

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  auto dv = dark.values();
  // Strict total order, so the selected set is unique.
  auto brighter = [&](std::size_t a, std::size_t b) { return dv[a] != dv[b] ? dv[a] > dv[b] : a < b; };
  std::nth_element(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k - 1), idx.end(), brighter);

  auto s = img.samples();
  std::size_t best = idx[0];
  int best_luma = -1;
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t i = idx[j];
    const int l = luma_of(s[3 * i], s[3 * i + 1], s[3 * i + 2]);
    if (l > best_luma || (l == best_luma && i < best)) {
      best_luma = l;
      best = i;
    }
  }
  return {std::max(1.0, static_cast<double>(s[3 * best])), std::max(1.0, static_cast<double>(s[3 * best + 1])),
          std::max(1.0, static_cast<double>(s[3 * best + 2]))};
}

Field estimate_transmission(const ImageBuffer& img, const AtmosphericLight& A, const DehazeConfig& cfg) {
  require_rgb(img, "estimate_transmission");
  validate(cfg);
  for (double a : A) {
    if (!(a >= 1.0)) throw std::invalid_argument("atmospheric light components must be >= 1");
  }
  std::array<Field, 3> normalized{Field(img.width(), img.height()), Field(img.width(), img.height()),
                                  Field(img.width(), img.height())};
  auto s = img.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    for (int c = 0; c < 3; ++c) normalized[c].values()[i] = s[3 * i + c] / A[c];
  }
  Field t = dark_channel(normalized, cfg.patch);
  for (double& v : t.values()) v = std::clamp(1.0 - cfg.omega * v, cfg.t0, 1.0);
  return t;
}

Field box_mean(const Field& src, int radius) {
  if (radius < 0) throw std::invalid_argument("box radius must be nonnegative");
  const int w = src.width(), h = src.height();
  const std::size_t stride = static_cast<std::size_t>(w) + 1;
  std::vector<double> integral(stride * (h + 1), 0.0);
  for (int y = 0; y < h; ++y) {
    double row = 0.0;
    for (int x = 0; x < w; ++x) {
      row += src.at(x, y);
      integral[(y + 1) * stride + x + 1] = integral[y * stride + x + 1] + row;
    }
  }
  Field out(w, h);
  for (int y = 0; y < h; ++y) {
    const int y0 = std::max(0, y - radius), y1 = std::min(h, y + radius + 1);
    for (int x = 0; x < w; ++x) {
      const int x0 = std::max(0, x - radius), x1 = std::min(w, x + radius + 1);
      const double sum = integral[y1 * stride + x1] - integral[y0 * stride + x1] -
                         integral[y1 * stride + x0] + integral[y0 * stride + x0];
      out.at(x, y) = sum / static_cast<double>((x1 - x0) * (y1 - y0));
    }
  }
  return out;
}

Field guided_filter(const Field& guide, const Field& src, int radius, double eps) {
  require_same_shape(guide, src);
  if (!(eps > 0.0)) throw std::invalid_argument("guided filter eps must be positive");
  const std::size_t n = guide.size();
  Field gg(guide.width(), guide.height()), gs(guide.width(), guide.height());
  for (std::size_t i = 0; i < n; ++i) {
    gg.values()[i] = guide.values()[i] * guide.values()[i];
    gs.values()[i] = guide.values()[i] * src.values()[i];
  }
  const Field mean_g = box_mean(guide, radius);
  const Field mean_s = box_mean(src, radius);
  const Field mean_gg = box_mean(gg, radius);
  const Field mean_gs = box_mean(gs, radius);

  Field a(guide.width(), guide.height()), b(guide.width(), guide.height());
  for (std::size_t i = 0; i < n; ++i) {
    const double mg = mean_g.values()[i];
    const double ms = mean_s.values()[i];
    const double var = mean_gg.values()[i] - mg * mg;
    const double cov = mean_gs.values()[i] - mg * ms;
    a.values()[i] = cov / (var + eps);
    b.values()[i] = ms - a.values()[i] * mg;
  }
  const Field mean_a = box_mean(a, radius);
  const Field mean_b = box_mean(b, radius);
  Field out(guide.width(), guide.height());
  for (std::size_t i = 0; i < n; ++i) {
    out.values()[i] = mean_a.values()[i] * guide.values()[i] + mean_b.values()[i];
  }
  return out;
}

ImageBuffer dehaze(const ImageBuffer& img, const DehazeConfig& cfg) {
  require_rgb(img, "dehaze");
  validate(cfg);
  const Field dark = dark_channel(img, cfg.patch);
  const AtmosphericLight A = estimate_atmospheric_light(img, dark, cfg.bright_fraction);
  const Field t = estimate_transmission(img, A, cfg);
  const Field refined = guided_filter(luma_field(img), t, cfg.gf_radius, cfg.gf_eps);

  ImageBuffer out(img.width(), img.height(), 3);
  auto s = img.samples();
  auto d = out.samples();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double tt = std::max(refined.values()[i], cfg.t0);
    for (int c = 0; c < 3; ++c) {
      const double j = (s[3 * i + c] - A[c]) / tt + A[c];
      d[3 * i + c] = static_cast<std::uint8_t>(std::clamp(std::floor(j + 0.5), 0.0, 255.0));
    }
  }
  return out;
}

}  // namespace pipeseg
