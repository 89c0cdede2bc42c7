#pragma once

// Linear inverted pendulum (3D-LIPM) and instantaneous capture point dynamics.
//
// Every quantity here is planar and expressed in the world frame. The pendulum
// keeps a constant height z0 above its stance foot, which makes the two axes
// decouple into
//
//     x'' = omega0^2 (x - p),      omega0 = sqrt(g / z0)
//
// and the capture point xi = x + x'/omega0 obeys xi' = omega0 (xi - p).

#include <cmath>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace liprint {

using Vec2 = Eigen::Vector2d;

inline double natural_frequency(double gravity, double pendulum_height)
{
  if (!(gravity > 0.0) || !(pendulum_height > 0.0)) {
    throw std::domain_error("natural_frequency: gravity and pendulum height must be positive (g=" +
                            std::to_string(gravity) + ", z0=" + std::to_string(pendulum_height) + ")");
  }
  return std::sqrt(gravity / pendulum_height);
}

/// Pendulum constants. omega0 is derived on construction and cannot drift from g and z0.
class LipParams {
public:
  LipParams(double gravity, double pendulum_height)
      : gravity_(gravity),
        pendulum_height_(pendulum_height),
        omega0_(natural_frequency(gravity, pendulum_height))
  {}

  double gravity() const { return gravity_; }
  double pendulum_height() const { return pendulum_height_; }
  double omega0() const { return omega0_; }

  /// Same gravity, new height. Used when the stance surface changes elevation.
  LipParams with_height(double pendulum_height) const { return {gravity_, pendulum_height}; }

private:
  double gravity_;
  double pendulum_height_;
  double omega0_;
};

struct FootPosition {
  Vec2 p = Vec2::Zero();
  double z = 0.0;
};

struct IcpPoint {
  Vec2 xi = Vec2::Zero();
};

struct LipState {
  Vec2 com_pos = Vec2::Zero();
  Vec2 com_vel = Vec2::Zero();
  LipParams params{9.81, 0.62};

  bool finite() const { return com_pos.allFinite() && com_vel.allFinite(); }
};

inline Vec2 lip_acceleration(const LipState& s, const FootPosition& f)
{
  const double w = s.params.omega0();
  return w * w * (s.com_pos - f.p);
}

/// Exact state after `t` seconds on a fixed stance foot.
inline LipState com_trajectory(const LipState& s0, const FootPosition& f, double t)
{
  if (!(t >= 0.0)) {
    throw std::domain_error("com_trajectory: negative duration " + std::to_string(t));
  }
  const double w = s0.params.omega0();
  const double sh = std::sinh(w * t);
  const double half = std::sinh(0.5 * w * t);
  const double cosh_minus_one = 2.0 * half * half;
  const Vec2 rel = s0.com_pos - f.p;

  // Written as increments on s0 so that t == 0 and the equilibrium are reproduced bit-exactly.
  LipState out = s0;
  out.com_pos = s0.com_pos + rel * cosh_minus_one + s0.com_vel * (sh / w);
  out.com_vel = s0.com_vel + rel * (w * sh) + s0.com_vel * cosh_minus_one;
  return out;
}

inline IcpPoint icp_of(const LipState& s)
{
  return {s.com_pos + s.com_vel / s.params.omega0()};
}

inline Vec2 icp_derivative(const IcpPoint& xi, const FootPosition& f, double omega0)
{
  return omega0 * (xi.xi - f.p);
}

inline IcpPoint icp_trajectory(const IcpPoint& xi0, const FootPosition& f, double omega0, double t)
{
  if (!(t >= 0.0)) {
    throw std::domain_error("icp_trajectory: negative duration " + std::to_string(t));
  }
  const double e = std::exp(omega0 * t);
  return {e * xi0.xi + (1.0 - e) * f.p};
}

}  // namespace liprint
