#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <math.h>  // the Boost interpolator calls unqualified isnan

#include <boost/math/interpolators/pchip.hpp>

#include "nipsqw/errors.hpp"

namespace nipsqw {

/// phi(t) together with its time derivative.
struct PhiSample {
  double phi = 0.0;
  double phi_dot = 0.0;
};

/// Time profile of the boundary angle phi, with r = sin(phi).
///
///   constant    phi(t) = phi0
///   linear      phi(t) = phi0 + omega t
///   sinusoidal  phi(t) = phi0 + amp sin(freq t)
///   tabulated   piecewise-cubic (PCHIP) interpolant of sorted samples,
///               differentiated analytically
class PhiProfile {
 public:
  enum class Kind { constant, linear, sinusoidal, tabulated };

  static PhiProfile constant(double phi) { return PhiProfile(Kind::constant, phi, 0.0, 0.0); }

  static PhiProfile linear(double phi0, double omega) {
    return PhiProfile(Kind::linear, phi0, omega, 0.0);
  }

  static PhiProfile sinusoidal(double phi0, double amplitude, double frequency) {
    return PhiProfile(Kind::sinusoidal, phi0, amplitude, frequency);
  }

  static PhiProfile tabulated(std::vector<double> times, std::vector<double> phis) {
    if (times.size() != phis.size()) throw ProfileError("table columns differ in length");
    if (times.size() < 4) throw ProfileError("table needs at least four samples");
    if (!std::is_sorted(times.begin(), times.end()) ||
        std::adjacent_find(times.begin(), times.end()) != times.end()) {
      throw ProfileError("table times must be strictly increasing");
    }
    PhiProfile p(Kind::tabulated, 0.0, 0.0, 0.0);
    p.t_min_ = times.front();
    p.t_max_ = times.back();
    p.spline_ = std::make_shared<const Spline>(std::move(times), std::move(phis));
    return p;
  }

  /// Two-column CSV `t,phi`; a non-numeric first line is treated as a header.
  static PhiProfile from_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ProfileError("cannot open '" + path.string() + "'");
    std::vector<double> ts, ps;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream row(line);
      double t = 0.0, phi = 0.0;
      if (!(row >> t >> phi)) {
        if (first) {
          first = false;
          continue;
        }
        throw ProfileError("malformed row '" + line + "' in " + path.string());
      }
      first = false;
      ts.push_back(t);
      ps.push_back(phi);
    }
    return tabulated(std::move(ts), std::move(ps));
  }

  /// Parses `constant:phi=<f>`, `linear:phi0=<f>,omega=<f>`,
  /// `sin:phi0=<f>,amp=<f>,freq=<f>` or `table:<path>`.
  static PhiProfile parse(std::string_view spec) {
    const auto colon = spec.find(':');
    if (colon == std::string_view::npos) {
      throw ProfileError("expected <kind>:<parameters>, got '" + std::string(spec) + "'");
    }
    const std::string kind(spec.substr(0, colon));
    const std::string rest(spec.substr(colon + 1));
    if (kind == "table") return from_csv(rest);

    std::vector<std::pair<std::string, double>> kv;
    std::istringstream items(rest);
    std::string item;
    while (std::getline(items, item, ',')) {
      const auto eq = item.find('=');
      if (eq == std::string::npos) throw ProfileError("expected key=value, got '" + item + "'");
      const std::string value = item.substr(eq + 1);
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(value, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != value.size()) throw ProfileError("not a number: '" + value + "'");
      kv.emplace_back(item.substr(0, eq), v);
    }
    auto take = [&](const char* key) {
      for (auto it = kv.begin(); it != kv.end(); ++it) {
        if (it->first == key) {
          const double v = it->second;
          kv.erase(it);
          return v;
        }
      }
      throw ProfileError(kind + " profile is missing '" + key + "'");
    };

    PhiProfile p = [&] {
      if (kind == "constant") return constant(take("phi"));
      if (kind == "linear") {
        const double phi0 = take("phi0");
        return linear(phi0, take("omega"));
      }
      if (kind == "sin") {
        const double phi0 = take("phi0");
        const double amp = take("amp");
        return sinusoidal(phi0, amp, take("freq"));
      }
      throw ProfileError("unknown profile kind '" + kind + "'");
    }();
    if (!kv.empty()) throw ProfileError("unexpected key '" + kv.front().first + "'");
    return p;
  }

  Kind kind() const { return kind_; }

  PhiSample at(double t) const {
    switch (kind_) {
      case Kind::constant:
        return {a_, 0.0};
      case Kind::linear:
        return {a_ + b_ * t, b_};
      case Kind::sinusoidal:
        return {a_ + b_ * std::sin(c_ * t), b_ * c_ * std::cos(c_ * t)};
      case Kind::tabulated:
        if (t < t_min_ || t > t_max_) {
          throw ProfileError("t = " + std::to_string(t) + " outside the tabulated range");
        }
        return {(*spline_)(t), spline_->prime(t)};
    }
    return {};
  }

  /// Lower bound of |sin phi(t)| over [t0, t1]: exact for constant and
  /// linear profiles, sampled otherwise.
  double min_abs_sin(double t0, double t1, int samples = 4096) const {
    if (t1 < t0) std::swap(t0, t1);
    if (kind_ == Kind::linear) {
      const double lo = std::min(a_ + b_ * t0, a_ + b_ * t1);
      const double hi = std::max(a_ + b_ * t0, a_ + b_ * t1);
      if (std::floor(hi / std::numbers::pi) * std::numbers::pi >= lo) return 0.0;
    }
    if (kind_ == Kind::constant || kind_ == Kind::linear) {
      return std::min(std::abs(std::sin(at(t0).phi)), std::abs(std::sin(at(t1).phi)));
    }
    double worst = std::abs(std::sin(at(t1).phi));
    for (int k = 0; k < samples; ++k) {
      const double t = t0 + (t1 - t0) * k / samples;
      worst = std::min(worst, std::abs(std::sin(at(t).phi)));
    }
    return worst;
  }

 private:
  using Spline = boost::math::interpolators::pchip<std::vector<double>>;

  PhiProfile(Kind kind, double a, double b, double c) : kind_(kind), a_(a), b_(b), c_(c) {}

  Kind kind_;
  double a_ = 0.0, b_ = 0.0, c_ = 0.0;
  double t_min_ = 0.0, t_max_ = 0.0;
  std::shared_ptr<const Spline> spline_;
};

}  // namespace nipsqw
