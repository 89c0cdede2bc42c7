#pragma once

// Heightmaps, procedural terrain and foothold queries.
//
// A heightmap stores one height per square cell; cell (r, c) is centred at
// origin + ((c + 0.5) res, (r + 0.5) res), rows run along y and columns along
// x. Cells flagged in the gap mask cannot support a foot. Their stored height
// still takes part in interpolation so height_at() stays defined at gap edges.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <system_error>
#include <variant>
#include <vector>

#include "liprint/lip_core.hpp"

namespace liprint {

/// Raised when no admissible foothold exists; the simulator reports it as a failure.
class PlanningError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class Heightmap {
public:
  Heightmap(Vec2 origin, double resolution, int rows, int cols, std::vector<double> heights,
            std::vector<std::uint8_t> gap_mask = {})
      : origin_(origin),
        resolution_(resolution),
        rows_(rows),
        cols_(cols),
        heights_(std::move(heights)),
        gap_mask_(std::move(gap_mask))
  {
    if (!(resolution > 0.0) || !std::isfinite(resolution)) throw std::invalid_argument("Heightmap: resolution must be positive");
    if (rows <= 0 || cols <= 0) throw std::invalid_argument("Heightmap: rows and cols must be positive");
    if (!origin.allFinite()) throw std::invalid_argument("Heightmap: non-finite origin");
    const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);
    if (heights_.size() != n) {
      throw std::invalid_argument("Heightmap: expected " + std::to_string(n) + " heights, got " +
                                  std::to_string(heights_.size()));
    }
    if (gap_mask_.empty()) gap_mask_.assign(n, 0);
    if (gap_mask_.size() != n) throw std::invalid_argument("Heightmap: gap mask size mismatch");
    for (double h : heights_) {
      if (!std::isfinite(h)) throw std::invalid_argument("Heightmap: non-finite height");
    }
  }

  static Heightmap flat(Vec2 origin, double resolution, int rows, int cols, double height = 0.0)
  {
    return {origin, resolution, rows, cols,
            std::vector<double>(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), height)};
  }

  const Vec2& origin() const { return origin_; }
  double resolution() const { return resolution_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const std::vector<double>& heights() const { return heights_; }
  const std::vector<std::uint8_t>& gap_mask() const { return gap_mask_; }

  Vec2 upper_corner() const { return origin_ + Vec2(cols_ * resolution_, rows_ * resolution_); }

  double height(int r, int c) const { return heights_[index(r, c)]; }
  bool is_gap(int r, int c) const { return gap_mask_[index(r, c)] != 0; }

  Vec2 cell_center(int r, int c) const
  {
    return origin_ + Vec2((c + 0.5) * resolution_, (r + 0.5) * resolution_);
  }

  bool contains(const Vec2& p) const
  {
    const Vec2 hi = upper_corner();
    return p.allFinite() && p.x() >= origin_.x() && p.y() >= origin_.y() && p.x() <= hi.x() && p.y() <= hi.y();
  }

  /// Column/row of the cell containing p (clamped onto the map for points on the upper edge).
  std::pair<int, int> cell_of(const Vec2& p) const
  {
    const int c = std::clamp(static_cast<int>(std::floor((p.x() - origin_.x()) / resolution_)), 0, cols_ - 1);
    const int r = std::clamp(static_cast<int>(std::floor((p.y() - origin_.y()) / resolution_)), 0, rows_ - 1);
    return {r, c};
  }

private:
  std::size_t index(int r, int c) const
  {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(c);
  }

  Vec2 origin_;
  double resolution_;
  int rows_;
  int cols_;
  std::vector<double> heights_;
  std::vector<std::uint8_t> gap_mask_;
};

namespace detail {

// Lower interpolation node and weight along one axis of cell centres.
inline std::pair<int, double> interp_axis(double coord, double origin, double res, int count)
{
  if (count == 1) return {0, 0.0};
  const double u = std::clamp((coord - origin) / res - 0.5, 0.0, static_cast<double>(count - 1));
  const int i = std::min(static_cast<int>(std::floor(u)), count - 2);
  return {i, u - i};
}

}  // namespace detail

/// Bilinear interpolation between cell centres; constant extrapolation inside the outer half cell.
inline double height_at(const Heightmap& h, const Vec2& p)
{
  if (!h.contains(p)) {
    throw std::out_of_range("height_at: point (" + std::to_string(p.x()) + ", " + std::to_string(p.y()) +
                            ") lies outside the heightmap");
  }
  const auto [c0, fx] = detail::interp_axis(p.x(), h.origin().x(), h.resolution(), h.cols());
  const auto [r0, fy] = detail::interp_axis(p.y(), h.origin().y(), h.resolution(), h.rows());
  const int c1 = std::min(c0 + 1, h.cols() - 1);
  const int r1 = std::min(r0 + 1, h.rows() - 1);
  const double lo = (1.0 - fx) * h.height(r0, c0) + fx * h.height(r0, c1);
  const double hi = (1.0 - fx) * h.height(r1, c0) + fx * h.height(r1, c1);
  return (1.0 - fy) * lo + fy * hi;
}

/// Flatness criterion for a foothold.
struct FootholdParams {
  double radius = 0.07;
  double max_deviation = 0.03;
  double search_radius = 0.3;
};

/// True iff the foot disk around p lies on the map, touches no gap cell, and every
/// cell centre in it is within max_dev of the height at p.
inline bool is_steppable(const Heightmap& h, const Vec2& p, double radius, double max_dev)
{
  if (!(radius > 0.0)) throw std::invalid_argument("is_steppable: radius must be positive");
  if (!h.contains(p)) return false;
  const double res = h.resolution();
  const Vec2& o = h.origin();
  const int c_lo = static_cast<int>(std::floor((p.x() - radius - o.x()) / res));
  const int c_hi = static_cast<int>(std::floor((p.x() + radius - o.x()) / res));
  const int r_lo = static_cast<int>(std::floor((p.y() - radius - o.y()) / res));
  const int r_hi = static_cast<int>(std::floor((p.y() + radius - o.y()) / res));
  if (c_lo < 0 || r_lo < 0 || c_hi >= h.cols() || r_hi >= h.rows()) return false;

  const auto [pr, pc] = h.cell_of(p);
  if (h.is_gap(pr, pc)) return false;

  const double ref = height_at(h, p);
  const double r2 = radius * radius;
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int c = c_lo; c <= c_hi; ++c) {
      if ((h.cell_center(r, c) - p).squaredNorm() > r2) continue;
      if (h.is_gap(r, c)) return false;
      if (!(std::abs(h.height(r, c) - ref) < max_dev)) return false;
    }
  }
  return true;
}

inline bool is_steppable(const Heightmap& h, const Vec2& p, const FootholdParams& fp = {})
{
  return is_steppable(h, p, fp.radius, fp.max_deviation);
}

namespace detail {

// Squared distances closer than this are treated as ties.
inline constexpr double kTieTolerance = 1e-12;

struct Candidate {
  double d2;
  Vec2 p;
};

inline bool lexicographically_smaller(const Vec2& a, const Vec2& b)
{
  return a.x() < b.x() || (a.x() == b.x() && a.y() < b.y());
}

// Cell centres within `search_radius` of p, nearest first.
inline std::vector<Candidate> candidates_near(const Heightmap& h, const Vec2& p, double search_radius)
{
  if (!p.allFinite()) throw PlanningError("foothold search from a non-finite point");
  const double res = h.resolution();
  const Vec2& o = h.origin();
  auto index_range = [&](double lo, double hi, double origin, int count) {
    const double a = std::clamp(std::floor((lo - origin) / res), 0.0, static_cast<double>(count));
    const double b = std::clamp(std::floor((hi - origin) / res), -1.0, static_cast<double>(count - 1));
    return std::pair<int, int>(static_cast<int>(a), static_cast<int>(b));
  };
  const auto [c_lo, c_hi] = index_range(p.x() - search_radius, p.x() + search_radius, o.x(), h.cols());
  const auto [r_lo, r_hi] = index_range(p.y() - search_radius, p.y() + search_radius, o.y(), h.rows());
  const double s2 = search_radius * search_radius;

  std::vector<Candidate> out;
  for (int r = r_lo; r <= r_hi; ++r) {
    for (int c = c_lo; c <= c_hi; ++c) {
      const Vec2 q = h.cell_center(r, c);
      const double d2 = (q - p).squaredNorm();
      if (d2 <= s2) out.push_back({d2, q});
    }
  }
  std::sort(out.begin(), out.end(), [](const Candidate& a, const Candidate& b) {
    if (a.d2 != b.d2) return a.d2 < b.d2;
    return lexicographically_smaller(a.p, b.p);
  });
  return out;
}

template <class Steppable>
std::optional<Vec2> nearest_among(const std::vector<Candidate>& sorted, Steppable&& steppable)
{
  std::optional<Candidate> best;
  for (const auto& cand : sorted) {
    if (best && cand.d2 > best->d2 + kTieTolerance) break;
    if (!steppable(cand.p)) continue;
    if (!best) {
      best = cand;
    } else if (lexicographically_smaller(cand.p, best->p)) {
      best->p = cand.p;
    }
  }
  if (!best) return std::nullopt;
  return best->p;
}

}  // namespace detail

/// Closest steppable point to p: p itself if admissible, else the nearest steppable
/// cell centre within the search radius (ties: smaller x, then smaller y).
inline Vec2 nearest_steppable(const Heightmap& h, const Vec2& p, const FootholdParams& fp = {})
{
  if (is_steppable(h, p, fp)) return p;
  const auto sorted = detail::candidates_near(h, p, fp.search_radius);
  auto found = detail::nearest_among(sorted, [&](const Vec2& q) { return is_steppable(h, q, fp); });
  if (!found) {
    throw PlanningError("no steppable ground within " + std::to_string(fp.search_radius) + " m of (" +
                        std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")");
  }
  return *found;
}

/// Heightmap plus precomputed steppability of every cell centre, for repeated queries
/// with one FootholdParams.
class FootholdMap {
public:
  FootholdMap(std::shared_ptr<const Heightmap> heightmap, FootholdParams params)
      : map_(std::move(heightmap)), params_(params)
  {
    const Heightmap& map = *map_;
    steppable_.resize(static_cast<std::size_t>(map.rows()) * static_cast<std::size_t>(map.cols()));
    for (int r = 0; r < map.rows(); ++r) {
      for (int c = 0; c < map.cols(); ++c) {
        steppable_[static_cast<std::size_t>(r) * map.cols() + c] =
            is_steppable(map, map.cell_center(r, c), params.radius, params.max_deviation);
      }
    }
  }

  const Heightmap& map() const { return *map_; }
  const FootholdParams& params() const { return params_; }

  Vec2 nearest_steppable(const Vec2& p) const
  {
    if (is_steppable(*map_, p, params_)) return p;
    const auto sorted = detail::candidates_near(*map_, p, params_.search_radius);
    auto found = detail::nearest_among(sorted, [&](const Vec2& q) {
      const auto [r, c] = map_->cell_of(q);
      return steppable_[static_cast<std::size_t>(r) * map_->cols() + c] != 0;
    });
    if (!found) {
      throw PlanningError("no steppable ground within " + std::to_string(params_.search_radius) + " m of (" +
                          std::to_string(p.x()) + ", " + std::to_string(p.y()) + ")");
    }
    return *found;
  }

private:
  std::shared_ptr<const Heightmap> map_;
  FootholdParams params_;
  std::vector<std::uint8_t> steppable_;
};

// --- procedural terrain -------------------------------------------------------

struct FlatTerrain {};

struct RoughTerrain {
  double amplitude = 0.05;
  double correlation_length = 0.5;
  std::uint64_t seed = 0;
};

/// Non-supporting strips across the x axis: [offset + k period, offset + k period + width).
/// A width of at least one period makes everything beyond `offset` a gap.
struct GapTerrain {
  double width = 0.15;
  double period = 0.8;
  double offset = 1.0;
};

using TerrainSpec = std::variant<FlatTerrain, RoughTerrain, GapTerrain>;

struct Extent {
  Vec2 min = Vec2::Zero();
  Vec2 max = Vec2::Zero();
};

inline void validate(const TerrainSpec& spec)
{
  if (const auto* r = std::get_if<RoughTerrain>(&spec)) {
    if (!(r->amplitude >= 0.0)) throw std::invalid_argument("rough terrain: amplitude must be >= 0");
    if (!(r->correlation_length > 0.0)) throw std::invalid_argument("rough terrain: correlation length must be > 0");
  } else if (const auto* g = std::get_if<GapTerrain>(&spec)) {
    if (!(g->width > 0.0) || !(g->period > 0.0)) throw std::invalid_argument("gap terrain: width and period must be > 0");
    if (!std::isfinite(g->offset)) throw std::invalid_argument("gap terrain: non-finite offset");
  }
}

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x)
{
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Uniform value in [-1, 1] attached to lattice node (i, j); independent of the map extent.
inline double lattice_value(std::uint64_t seed, std::int64_t i, std::int64_t j)
{
  std::uint64_t h = splitmix64(seed);
  h = splitmix64(h ^ static_cast<std::uint64_t>(i));
  h = splitmix64(h ^ static_cast<std::uint64_t>(j));
  return static_cast<double>(h >> 11) * 0x1.0p-53 * 2.0 - 1.0;
}

inline double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

inline double value_noise(const RoughTerrain& spec, const Vec2& p)
{
  const double u = p.x() / spec.correlation_length;
  const double v = p.y() / spec.correlation_length;
  const double fi = std::floor(u);
  const double fj = std::floor(v);
  const auto i = static_cast<std::int64_t>(fi);
  const auto j = static_cast<std::int64_t>(fj);
  const double sx = smoothstep(u - fi);
  const double sy = smoothstep(v - fj);
  const double a = lattice_value(spec.seed, i, j);
  const double b = lattice_value(spec.seed, i + 1, j);
  const double c = lattice_value(spec.seed, i, j + 1);
  const double d = lattice_value(spec.seed, i + 1, j + 1);
  return (1.0 - sy) * ((1.0 - sx) * a + sx * b) + sy * ((1.0 - sx) * c + sx * d);
}

inline bool in_gap(const GapTerrain& g, double x)
{
  if (x < g.offset) return false;
  if (g.width >= g.period) return true;
  return std::fmod(x - g.offset, g.period) < g.width;
}

}  // namespace detail

inline Heightmap generate(const TerrainSpec& spec, const Extent& extent, double resolution)
{
  validate(spec);
  if (!(resolution > 0.0)) throw std::invalid_argument("generate: resolution must be positive");
  const Vec2 size = extent.max - extent.min;
  if (!(size.x() > 0.0) || !(size.y() > 0.0)) throw std::invalid_argument("generate: empty extent");
  const int cols = static_cast<int>(std::ceil(size.x() / resolution - 1e-9));
  const int rows = static_cast<int>(std::ceil(size.y() / resolution - 1e-9));
  const auto n = static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols);

  std::vector<double> heights(n, 0.0);
  std::vector<std::uint8_t> mask(n, 0);
  Heightmap shape(extent.min, resolution, rows, cols, heights);

  std::visit(
      [&](const auto& s) {
        using T = std::decay_t<decltype(s)>;
        for (int r = 0; r < rows; ++r) {
          for (int c = 0; c < cols; ++c) {
            const std::size_t k = static_cast<std::size_t>(r) * cols + c;
            const Vec2 q = shape.cell_center(r, c);
            if constexpr (std::is_same_v<T, RoughTerrain>) {
              if (s.amplitude > 0.0) heights[k] = s.amplitude * detail::value_noise(s, q);
            } else if constexpr (std::is_same_v<T, GapTerrain>) {
              mask[k] = detail::in_gap(s, q.x()) ? 1 : 0;
            }
          }
        }
      },
      spec);
  return {extent.min, resolution, rows, cols, std::move(heights), std::move(mask)};
}

inline TerrainSpec with_seed(TerrainSpec spec, std::uint64_t seed)
{
  if (auto* r = std::get_if<RoughTerrain>(&spec)) r->seed = seed;
  return spec;
}

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep)
{
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return out;
}

inline double parse_number(const std::string& s, const std::string& what)
{
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("terrain spec: bad " + what + " '" + s + "'");
  }
  if (used != s.size() || !std::isfinite(v)) throw std::invalid_argument("terrain spec: bad " + what + " '" + s + "'");
  return v;
}

}  // namespace detail

/// Parses `flat`, `rough:<amp>:<corr>:<seed>` or `gap:<width>:<period>[:<offset>]`.
inline TerrainSpec parse_terrain_spec(const std::string& text)
{
  const auto parts = detail::split(text, ':');
  const std::string& kind = parts.front();
  TerrainSpec spec;
  if (kind == "flat" && parts.size() == 1) {
    spec = FlatTerrain{};
  } else if (kind == "rough" && parts.size() == 4) {
    RoughTerrain r;
    r.amplitude = detail::parse_number(parts[1], "amplitude");
    r.correlation_length = detail::parse_number(parts[2], "correlation length");
    const std::string& seed = parts[3];
    const auto res = std::from_chars(seed.data(), seed.data() + seed.size(), r.seed);
    if (seed.empty() || res.ec != std::errc{} || res.ptr != seed.data() + seed.size()) {
      throw std::invalid_argument("terrain spec: seed must be a non-negative integer, got '" + seed + "'");
    }
    spec = r;
  } else if (kind == "gap" && (parts.size() == 3 || parts.size() == 4)) {
    GapTerrain g;
    g.width = detail::parse_number(parts[1], "gap width");
    g.period = detail::parse_number(parts[2], "gap period");
    if (parts.size() == 4) g.offset = detail::parse_number(parts[3], "gap offset");
    spec = g;
  } else {
    throw std::invalid_argument("terrain spec: cannot parse '" + text +
                                "' (expected flat | rough:<amp>:<corr>:<seed> | gap:<width>:<period>[:<offset>])");
  }
  validate(spec);
  return spec;
}

inline std::string to_string(const TerrainSpec& spec)
{
  return std::visit(
      [](const auto& s) -> std::string {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, FlatTerrain>) {
          return "flat";
        } else if constexpr (std::is_same_v<T, RoughTerrain>) {
          return "rough:" + std::to_string(s.amplitude) + ":" + std::to_string(s.correlation_length) + ":" +
                 std::to_string(s.seed);
        } else {
          return "gap:" + std::to_string(s.width) + ":" + std::to_string(s.period) + ":" + std::to_string(s.offset);
        }
      },
      spec);
}

}  // namespace liprint
