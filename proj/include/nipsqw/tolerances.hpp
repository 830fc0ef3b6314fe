#pragma once

#include <cstdlib>
#include <fstream>
#include <map>
#include <string>
#include <string_view>

#include "nipsqw/errors.hpp"

namespace nipsqw {

/// Numerical thresholds shared by all modules. Every field can be
/// overridden by key through `set`, a key=value file, or the
/// NIPSQW_TOL_OVERRIDES environment variable.
struct Tolerances {
  double eps_singular = 1e-12;      // |det M| / ||M||^N below this is singular
  double eps_pd = 1e-10;            // smallest eigenvalue / ||M|| for HPD input
  double hermitian = 1e-12;         // ||M - M^dagger|| / ||M|| for Hermitian input
  double eig_residual = 1e-10;      // accepted eigendecomposition residual
  double cluster_radius = 1e-6;     // candidate multiplet spread, relative to ||M||
  double defect_condition = 1e8;    // eigenvector condition treated as defective
  double tol_real = 1e-9;           // |Im E| counted as real
  double secular = 1e-8;            // |secular value| accepted as an eigenvalue
  double no_slope = 1e-13;          // |d - a| below this has no r^2 dependence
  double ketket_pivot = 1e-8;       // diagonal-unit normalisation fallback
  double observable = 1e-8;         // quasi-Hermiticity residual for observables
  double nonreal_norm = 1e-10;      // |Im <psi|Theta|psi>| / Re allowed
  double ep_margin = 1e-6;          // minimum |sin phi| during evolution
  double fd_step = 1e-5;            // central-difference step for Omega dot

  /// Sets a field by its name. Throws DomainError on an unknown key.
  void set(std::string_view key, double value) {
    this->*lookup(key) = value;
  }

  double get(std::string_view key) const { return this->*lookup(key); }

  /// Applies `key=value` lines; blank lines and `#` comments are skipped.
  void load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("cannot open tolerance file '" + path + "'");
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const auto first = line.find_first_not_of(" \t\r");
      if (first == std::string::npos) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw DomainError(path + ":" + std::to_string(lineno) + ": expected key=value");
      }
      set(trim(line.substr(0, eq)), parse_value(trim(line.substr(eq + 1))));
    }
  }

  /// Defaults, then the file named by NIPSQW_TOL_OVERRIDES if it is set.
  static Tolerances from_environment() {
    Tolerances tol;
    if (const char* path = std::getenv("NIPSQW_TOL_OVERRIDES"); path && *path) {
      tol.load_file(path);
    }
    return tol;
  }

  static std::map<std::string, double> defaults() {
    Tolerances tol;
    std::map<std::string, double> out;
    for (const auto& [name, ptr] : fields()) out[name] = tol.*ptr;
    return out;
  }

 private:
  using Field = double Tolerances::*;

  static const std::map<std::string, Field, std::less<>>& fields() {
    static const std::map<std::string, Field, std::less<>> table = {
        {"eps_singular", &Tolerances::eps_singular},
        {"eps_pd", &Tolerances::eps_pd},
        {"hermitian", &Tolerances::hermitian},
        {"eig_residual", &Tolerances::eig_residual},
        {"cluster_radius", &Tolerances::cluster_radius},
        {"defect_condition", &Tolerances::defect_condition},
        {"tol_real", &Tolerances::tol_real},
        {"secular", &Tolerances::secular},
        {"no_slope", &Tolerances::no_slope},
        {"ketket_pivot", &Tolerances::ketket_pivot},
        {"observable", &Tolerances::observable},
        {"nonreal_norm", &Tolerances::nonreal_norm},
        {"ep_margin", &Tolerances::ep_margin},
        {"fd_step", &Tolerances::fd_step},
    };
    return table;
  }

  static Field lookup(std::string_view key) {
    const auto it = fields().find(key);
    if (it == fields().end()) {
      throw DomainError("unknown tolerance key '" + std::string(key) + "'");
    }
    return it->second;
  }

  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  }

  static double parse_value(const std::string& text) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != text.size()) {
      throw DomainError("not a number: '" + text + "'");
    }
    return v;
  }
};

}  // namespace nipsqw
