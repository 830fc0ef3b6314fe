#pragma once

// Command-line front end. `run` is kept separate from main() so the test
// suite can drive it in-process.

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "nipsqw/nipsqw.hpp"

namespace nipsqw::cli {

using nlohmann::json;

enum ExitCode { kOk = 0, kUsage = 1, kNumerical = 2, kVerification = 3 };

struct RunConfig {
  std::string format = "csv";
  std::string output_path;
  std::vector<std::string> tol_overrides;
  std::optional<double> ep_margin;
  int workers = 1;

  Tolerances tolerances() const {
    Tolerances tol = Tolerances::from_environment();
    for (const auto& kv : tol_overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos) throw DomainError("--tol expects key=value, got '" + kv + "'");
      tol.set(kv.substr(0, eq), parse_number(kv.substr(eq + 1)));
    }
    if (ep_margin) tol.ep_margin = *ep_margin;
    return tol;
  }

  static double parse_number(const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != s.size()) throw DomainError("not a number: '" + s + "'");
    return v;
  }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) out.push_back(RunConfig::parse_number(item));
  return out;
}

inline Complex parse_complex(const std::string& text) {
  const auto v = parse_list(text);
  if (v.size() != 2) throw DomainError("expected re,im, got '" + text + "'");
  return {v[0], v[1]};
}

// "a:b:count" or a comma-separated list.
inline std::vector<double> parse_grid(const std::string& text) {
  if (text.find(':') == std::string::npos) return parse_list(text);
  std::vector<std::string> parts;
  std::istringstream in(text);
  std::string item;
  while (std::getline(in, item, ':')) parts.push_back(item);
  if (parts.size() != 3) throw DomainError("grid expects start:stop:count");
  const double a = RunConfig::parse_number(parts[0]);
  const double b = RunConfig::parse_number(parts[1]);
  const double c = RunConfig::parse_number(parts[2]);
  if (c < 1 || c != std::floor(c)) throw DomainError("grid count must be a positive integer");
  const auto count = static_cast<int>(c);
  std::vector<double> out;
  for (int k = 0; k < count; ++k) out.push_back(count == 1 ? a : a + (b - a) * k / (count - 1));
  return out;
}

inline std::vector<double> linspace(double a, double b, int samples) {
  std::vector<double> out(static_cast<std::size_t>(samples));
  for (int k = 0; k < samples; ++k) out[static_cast<std::size_t>(k)] = a + (b - a) * k / (samples - 1);
  return out;
}

// Order-preserving parallel map over [0, count).
template <class Row>
std::vector<Row> parallel_rows(std::size_t count, int workers,
                               const std::function<Row(std::size_t)>& make) {
  std::vector<Row> rows(count);
  const auto pool = static_cast<std::size_t>(std::clamp(workers, 1, 64));
  if (pool == 1 || count < 2) {
    for (std::size_t k = 0; k < count; ++k) rows[k] = make(k);
    return rows;
  }
  std::vector<std::exception_ptr> failures(pool);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < pool; ++w) {
    threads.emplace_back([&, w] {
      try {
        for (std::size_t k = w; k < count; k += pool) rows[k] = make(k);
      } catch (...) {
        failures[w] = std::current_exception();
      }
    });
  }
  for (auto& t : threads) t.join();
  for (auto& f : failures) {
    if (f) std::rethrow_exception(f);
  }
  return rows;
}

inline json complex_json(Complex c) { return json::array({c.real(), c.imag()}); }

inline json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_json(m(i, j)));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline ComplexMatrix matrix_from_json(const json& rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  ComplexMatrix m(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto& c = rows.at(static_cast<std::size_t>(i)).at(static_cast<std::size_t>(j));
      m(i, j) = Complex{c.at(0).get<double>(), c.at(1).get<double>()};
    }
  }
  return m;
}

inline std::string fmt(double x) { return io::format_double(x); }

// Exactly one of --z, --r, --phi, --robin.
struct BoundaryFlags {
  std::string z, robin;
  std::optional<double> r, phi;

  BoundaryValue resolve(bool allow_phi) const {
    const int given = !z.empty() + !robin.empty() + r.has_value() + phi.has_value();
    if (given != 1) {
      throw DomainError(allow_phi ? "give exactly one of --z, --r, --phi, --robin"
                                  : "give exactly one of --z, --r, --robin");
    }
    if (!z.empty()) return {parse_complex(z)};
    if (r) return z_from_r(*r);
    if (phi) return z_from_phi(*phi);
    const auto v = parse_list(robin);
    if (v.size() != 3) throw DomainError("--robin expects alpha,beta,h");
    return robin_to_z({v[0], v[1], v[2]});
  }
};

}  // namespace detail

class Cli {
 public:
  Cli(std::ostream& out, std::ostream& err) : out_(out), err_(err) {}

  int run(std::vector<std::string> args) {
    CLI::App app{"Discrete square well with Robin boundaries in the non-Hermitian interaction picture",
                 "nipsqw"};
    app.require_subcommand(1);
    app.fallthrough();  // global options may follow the subcommand
    app.add_option("--format", cfg_.format, "Output format")
        ->check(CLI::IsMember({"csv", "json"}));
    app.add_option("--output", cfg_.output_path, "Write output to this file");
    app.add_option("--tol", cfg_.tol_overrides, "Tolerance override key=value (repeatable)");
    app.add_option("--ep-margin", cfg_.ep_margin, "Minimum |sin phi| along a trajectory");
    app.add_option("--workers", cfg_.workers, "Worker threads for grid subcommands")
        ->check(CLI::PositiveNumber);

    std::function<int()> action;
    add_spectrum(app, action);
    add_curve(app, action);
    add_metric(app, action);
    add_evolve(app, action);
    add_epscan(app, action);
    add_n2verify(app, action);

    std::reverse(args.begin(), args.end());
    try {
      app.parse(args);
    } catch (const CLI::CallForHelp&) {
      out_ << app.help();
      return kOk;
    } catch (const CLI::CallForAllHelp&) {
      out_ << app.help("", CLI::AppFormatMode::All);
      return kOk;
    } catch (const CLI::ParseError& e) {
      err_ << "nipsqw: " << e.what() << '\n';
      return kUsage;
    }

    try {
      tol_ = cfg_.tolerances();
      return action();
    } catch (const DomainError& e) {
      flush();
      err_ << "nipsqw: " << e.what() << '\n';
      return kUsage;
    } catch (const Error& e) {
      flush();
      err_ << "nipsqw: " << e.what() << '\n';
      return kNumerical;
    }
  }

 private:
  std::ostream& out_;
  std::ostream& err_;
  RunConfig cfg_;
  Tolerances tol_;
  std::ostringstream buffer_;

  // Output is buffered so that an abort still leaves the partial result in
  // the requested destination.
  std::ostream& sink() { return buffer_; }

  void flush() {
    const std::string text = buffer_.str();
    buffer_.str("");
    if (cfg_.output_path.empty()) {
      out_ << text;
      return;
    }
    std::ofstream file(cfg_.output_path, std::ios::binary);
    if (!file) throw DomainError("cannot write '" + cfg_.output_path + "'");
    file << text;
  }

  bool json_out() const { return cfg_.format == "json"; }

  static void add_n(CLI::App* sub, Eigen::Index& n) {
    sub->add_option("--n", n, "Matrix dimension")->required()->check(CLI::Range(2, 64));
  }

  // spectrum ---------------------------------------------------------------
  void add_spectrum(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("spectrum", "Eigenvalues of H(z)");
    auto n = std::make_shared<Eigen::Index>(0);
    auto b = std::make_shared<detail::BoundaryFlags>();
    add_n(sub, *n);
    sub->add_option("--z", b->z, "Corner entry re,im");
    sub->add_option("--r", b->r, "Boundary parameter r in [-1, 1]");
    sub->add_option("--robin", b->robin, "alpha,beta,h");
    sub->callback([this, n, b, &action] {
      action = [this, n, b] { return spectrum(*n, b->resolve(false)); };
    });
  }

  int spectrum(Eigen::Index n, BoundaryValue bv) {
    const SpectrumResult s = solve_spectrum(build_h(n, bv), tol_);
    if (json_out()) {
      json rows = json::array();
      for (Eigen::Index k = 0; k < n; ++k) {
        rows.push_back({{"index", k},
                        {"re", s.energies(k).real()},
                        {"im", s.energies(k).imag()},
                        {"real_flag", static_cast<bool>(s.real_flag[static_cast<std::size_t>(k)])}});
      }
      sink() << json{{"n", n},
                     {"z", detail::complex_json(bv.z)},
                     {"energies", rows},
                     {"all_real", s.all_real},
                     {"vector_condition", s.vector_condition}}
                    .dump(2)
             << '\n';
    } else {
      io::write_row(sink(), {"index", "re", "im", "real_flag"});
      for (Eigen::Index k = 0; k < n; ++k) {
        io::write_row(sink(), {std::to_string(k), detail::fmt(s.energies(k).real()),
                               detail::fmt(s.energies(k).imag()),
                               s.real_flag[static_cast<std::size_t>(k)] ? "true" : "false"});
      }
      sink() << "# all_real=" << (s.all_real ? "true" : "false") << '\n';
    }
    flush();
    return kOk;
  }

  // curve ------------------------------------------------------------------
  void add_curve(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("curve", "Boundary parameter r(E) along an energy grid");
    struct Flags {
      Eigen::Index n = 0;
      double e_min = 0.0, e_max = 0.0;
      int samples = 0;
      std::string svg;
    };
    auto f = std::make_shared<Flags>();
    add_n(sub, f->n);
    sub->add_option("--e-min", f->e_min)->required();
    sub->add_option("--e-max", f->e_max)->required();
    sub->add_option("--samples", f->samples)->required();
    sub->add_option("--svg", f->svg, "Also write a line plot of E against r");
    sub->callback([this, f, &action] {
      action = [this, f] { return curve(f->n, f->e_min, f->e_max, f->samples, f->svg); };
    });
  }

  struct CurveRow {
    double energy = 0.0;
    std::optional<SpectralCurvePoint> point;
    std::string flag;
  };

  int curve(Eigen::Index n, double e_min, double e_max, int samples, const std::string& svg) {
    if (!(e_min < e_max)) throw DomainError("--e-min must be below --e-max");
    if (samples < 2) throw DomainError("--samples must be at least 2");
    const auto grid = detail::linspace(e_min, e_max, samples);
    const auto rows = detail::parallel_rows<CurveRow>(grid.size(), cfg_.workers, [&](std::size_t k) {
      CurveRow row;
      row.energy = grid[k];
      try {
        row.point = spectral_curve(n, grid[k], tol_);
        if (!row.point->r_plus) row.flag = "no_real_r";
      } catch (const NoSlope&) {
        row.flag = "no_slope";
      }
      return row;
    });

    auto opt = [](const std::optional<double>& v) { return v ? detail::fmt(*v) : std::string(); };
    if (json_out()) {
      json arr = json::array();
      for (const auto& row : rows) {
        json j{{"E", row.energy}, {"flag", row.flag}};
        if (row.point) {
          j["r_squared"] = row.point->r_squared;
          j["residual"] = row.point->residual;
          j["r_plus"] = row.point->r_plus ? json(*row.point->r_plus) : json(nullptr);
          j["r_minus"] = row.point->r_minus ? json(*row.point->r_minus) : json(nullptr);
        }
        arr.push_back(std::move(j));
      }
      sink() << json{{"n", n}, {"rows", arr}}.dump(2) << '\n';
    } else {
      io::write_row(sink(), {"E", "r_squared", "r_plus", "r_minus", "residual", "flag"});
      for (const auto& row : rows) {
        if (row.point) {
          io::write_row(sink(), {detail::fmt(row.energy), detail::fmt(row.point->r_squared),
                                 opt(row.point->r_plus), opt(row.point->r_minus),
                                 detail::fmt(row.point->residual), row.flag});
        } else {
          io::write_row(sink(), {detail::fmt(row.energy), "", "", "", "", row.flag});
        }
      }
    }
    flush();

    if (!svg.empty()) {
      const double nan = std::numeric_limits<double>::quiet_NaN();
      io::Series plus{"r > 0", "#1f77b4", {}, {}};
      io::Series minus{"r < 0", "#d62728", {}, {}};
      for (const auto& row : rows) {
        const bool ok = row.point && row.point->r_plus;
        plus.x.push_back(ok ? *row.point->r_plus : nan);
        minus.x.push_back(ok ? *row.point->r_minus : nan);
        plus.y.push_back(row.energy);
        minus.y.push_back(row.energy);
      }
      std::ofstream file(svg);
      if (!file) throw DomainError("cannot write '" + svg + "'");
      file << io::render_svg({plus, minus}, "r", "E");
    }
    return kOk;
  }

  // metric -----------------------------------------------------------------
  void add_metric(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("metric", "Metric and Dyson map from the ketkets of H");
    struct Flags {
      Eigen::Index n = 0;
      detail::BoundaryFlags b;
      std::string kappa;
      std::string dyson = "ketket";
    };
    auto f = std::make_shared<Flags>();
    add_n(sub, f->n);
    sub->add_option("--z", f->b.z, "Corner entry re,im");
    sub->add_option("--r", f->b.r, "Boundary parameter r in [-1, 1]");
    sub->add_option("--phi", f->b.phi, "Boundary angle, z = i cos phi");
    sub->add_option("--robin", f->b.robin, "alpha,beta,h");
    sub->add_option("--kappa", f->kappa, "Comma-separated positive weights");
    sub->add_option("--dyson", f->dyson)->check(CLI::IsMember({"ketket", "hermitian"}));
    sub->callback([this, f, &action] {
      action = [this, f] { return metric(f->n, f->b.resolve(true), f->kappa, f->dyson); };
    });
  }

  int metric(Eigen::Index n, BoundaryValue bv, const std::string& kappa_text,
             const std::string& dyson) {
    RealVector kappa = RealVector::Ones(n);
    if (!kappa_text.empty()) {
      const auto v = detail::parse_list(kappa_text);
      kappa = Eigen::Map<const RealVector>(v.data(), static_cast<Eigen::Index>(v.size()));
    }
    require_weights(kappa, n);
    const ComplexMatrix h = build_h(n, bv);
    const KetketBasis basis = ketkets(h, tol_);
    MetricBundle bundle = dyson_from_ketkets(basis, kappa, tol_);
    if (dyson == "hermitian") {
      ComplexMatrix h_diag = std::move(bundle.h_diag);
      bundle = dyson_hermitian(bundle.theta, tol_);
      bundle.kappa = kappa;
      bundle.h_diag = std::move(h_diag);
    }
    const double qh = quasi_hermiticity_residual(h, bundle.theta);

    if (json_out()) {
      json eigs = json::array();
      for (Eigen::Index k = 0; k < n; ++k) eigs.push_back(bundle.positivity_eigs(k));
      json weights = json::array();
      for (Eigen::Index k = 0; k < n; ++k) weights.push_back(kappa(k));
      sink() << json{{"n", n},
                     {"z", detail::complex_json(bv.z)},
                     {"kappa", weights},
                     {"dyson", dyson},
                     {"hamiltonian", detail::matrix_json(h)},
                     {"theta", detail::matrix_json(bundle.theta)},
                     {"omega", detail::matrix_json(bundle.omega)},
                     {"h_diag", detail::matrix_json(bundle.h_diag)},
                     {"positivity_eigs", eigs},
                     {"qh_residual", qh}}
                    .dump(2)
             << '\n';
    } else {
      io::write_row(sink(), {"name", "row", "col", "re", "im"});
      auto emit = [&](const char* name, const ComplexMatrix& m) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
          for (Eigen::Index j = 0; j < m.cols(); ++j) {
            io::write_row(sink(), {name, std::to_string(i), std::to_string(j),
                                   detail::fmt(m(i, j).real()), detail::fmt(m(i, j).imag())});
          }
        }
      };
      emit("hamiltonian", h);
      emit("theta", bundle.theta);
      emit("omega", bundle.omega);
      emit("h_diag", bundle.h_diag);
      for (Eigen::Index k = 0; k < n; ++k) {
        io::write_row(sink(), {"positivity_eigs", std::to_string(k), "0",
                               detail::fmt(bundle.positivity_eigs(k)), "0"});
      }
      sink() << "# qh_residual=" << detail::fmt(qh) << '\n';
    }
    flush();
    return kOk;
  }

  // evolve -----------------------------------------------------------------
  void add_evolve(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("evolve", "Interaction-picture evolution along a phi(t) profile");
    auto f = std::make_shared<EvolveFlags>();
    add_n(sub, f->n);
    sub->add_option("--profile", f->profile, "constant:phi=.. | linear:phi0=..,omega=.. | "
                                             "sin:phi0=..,amp=..,freq=.. | table:<csv>")
        ->required();
    sub->add_option("--psi0", f->psi0, "Initial state as re,im pairs")->required();
    sub->add_option("--t0", f->t0);
    sub->add_option("--t1", f->t1)->required();
    sub->add_option("--dt", f->dt)->required();
    sub->add_option("--stride", f->stride)->check(CLI::PositiveNumber);
    sub->add_option("--observable", f->observables, "H or I (repeatable)")
        ->check(CLI::IsMember({"H", "I"}));
    sub->add_flag("--crosscheck", f->crosscheck, "Compare with the textbook-picture integration");
    sub->add_option("--dyson", f->dyson)->check(CLI::IsMember({"ketket", "hermitian"}));
    sub->callback([this, f, &action] { action = [this, f] { return evolve(*f); }; });
  }

  struct EvolveFlags {
    Eigen::Index n = 0;
    std::string profile, psi0;
    double t0 = 0.0, t1 = 0.0, dt = 0.0;
    int stride = 1;
    std::vector<std::string> observables;
    bool crosscheck = false;
    std::string dyson = "ketket";
  };

  int evolve(const EvolveFlags& f) {
    const PhiProfile profile = PhiProfile::parse(f.profile);
    const auto parts = detail::parse_list(f.psi0);
    if (parts.size() != static_cast<std::size_t>(2 * f.n)) {
      throw DomainError("--psi0 needs " + std::to_string(2 * f.n) + " numbers");
    }
    ComplexVector psi0(f.n);
    for (Eigen::Index k = 0; k < f.n; ++k) {
      psi0(k) = Complex{parts[static_cast<std::size_t>(2 * k)], parts[static_cast<std::size_t>(2 * k + 1)]};
    }
    EvolutionOptions opt;
    opt.tol = tol_;
    opt.dyson = f.dyson == "hermitian" ? DysonKind::hermitian_root : DysonKind::ketket_columns;

    const Trajectory traj = nipsqw::evolve(f.n, profile, psi0, f.t0, f.t1, f.dt, opt, f.stride);
    TextbookTrajectory tb;
    if (f.crosscheck) tb = textbook_evolve(f.n, profile, psi0, f.t0, f.t1, f.dt, opt, f.stride);

    std::vector<std::string> header{"t"};
    for (Eigen::Index k = 0; k < f.n; ++k) {
      header.push_back("re_psi" + std::to_string(k));
      header.push_back("im_psi" + std::to_string(k));
    }
    header.push_back("phys_norm");
    for (const auto& o : f.observables) header.push_back("exp_" + o);
    for (Eigen::Index k = 0; k < f.n; ++k) {
      header.push_back("re_g" + std::to_string(k));
      header.push_back("im_g" + std::to_string(k));
    }
    if (f.crosscheck) header.push_back("crosscheck");

    std::vector<std::vector<double>> table;
    std::string failure;
    for (std::size_t i = 0; i < traj.states.size(); ++i) {
      const EvolutionState& s = traj.states[i];
      std::vector<double> row{s.t};
      for (Eigen::Index k = 0; k < f.n; ++k) {
        row.push_back(s.psi(k).real());
        row.push_back(s.psi(k).imag());
      }
      row.push_back(s.phys_norm);
      GeneratorSnapshot g;
      try {
        g = generator(f.n, profile, s.t, opt);
        for (const auto& o : f.observables) {
          row.push_back(expectation(s, o == "H" ? g.H : identity(f.n), tol_));
        }
      } catch (const NumericalError& e) {
        // The endpoint may sit closer to the EP than the generator stencil allows.
        failure = e.what();
        break;
      }
      for (Eigen::Index k = 0; k < f.n; ++k) {
        row.push_back(g.g_eigs(k).real());
        row.push_back(g.g_eigs(k).imag());
      }
      if (f.crosscheck) {
        row.push_back(i < tb.states.size() ? (s.omega * s.psi - tb.states[i].psi).norm()
                                           : std::numeric_limits<double>::quiet_NaN());
      }
      table.push_back(std::move(row));
    }

    const double drift = max_norm_drift(traj);
    const bool aborted = traj.aborted || !failure.empty();
    const std::string diagnostic = traj.aborted ? traj.diagnostic : failure;
    if (json_out()) {
      sink() << json{{"columns", header},
                     {"rows", table},
                     {"norm_drift", drift},
                     {"aborted", aborted},
                     {"diagnostic", diagnostic}}
                    .dump(2)
             << '\n';
    } else {
      io::write_row(sink(), header);
      for (const auto& row : table) {
        std::vector<std::string> cells;
        cells.reserve(row.size());
        for (double v : row) cells.push_back(detail::fmt(v));
        io::write_row(sink(), cells);
      }
      sink() << "# norm_drift=" << detail::fmt(drift) << '\n';
      if (aborted) sink() << "# aborted: " << diagnostic << '\n';
    }
    flush();
    if (aborted) {
      err_ << "nipsqw: evolution aborted: " << diagnostic << '\n';
      return kNumerical;
    }
    return kOk;
  }

  // epscan -----------------------------------------------------------------
  void add_epscan(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("epscan", "Eigenvalue gap and eigenvector condition along r");
    struct Flags {
      Eigen::Index n = 0;
      double r_min = 0.0, r_max = 0.0;
      int samples = 0;
    };
    auto f = std::make_shared<Flags>();
    add_n(sub, f->n);
    sub->add_option("--r-min", f->r_min)->required();
    sub->add_option("--r-max", f->r_max)->required();
    sub->add_option("--samples", f->samples)->required();
    sub->callback([this, f, &action] {
      action = [this, f] { return epscan(f->n, f->r_min, f->r_max, f->samples); };
    });
  }

  int epscan(Eigen::Index n, double r_min, double r_max, int samples) {
    if (samples < 2) throw DomainError("--samples must be at least 2");
    if (!(r_min < r_max)) throw DomainError("--r-min must be below --r-max");
    if (!(std::abs(r_min) <= 1.0 && std::abs(r_max) <= 1.0)) {
      throw OutOfRange("r range must lie within [-1, 1]");
    }
    const auto grid = detail::linspace(r_min, r_max, samples);
    const auto rows = detail::parallel_rows<EpScanRow>(
        grid.size(), cfg_.workers, [&](std::size_t k) { return ep_scan_point(n, grid[k], tol_); });
    if (json_out()) {
      json arr = json::array();
      for (const auto& r : rows) {
        arr.push_back({{"r", r.r},
                       {"min_gap", std::isnan(r.min_gap) ? json(nullptr) : json(r.min_gap)},
                       {"vector_condition", std::isinf(r.vector_condition)
                                                ? json("inf")
                                                : json(r.vector_condition)}});
      }
      sink() << json{{"n", n}, {"rows", arr}}.dump(2) << '\n';
    } else {
      io::write_row(sink(), {"r", "min_gap", "vector_condition"});
      for (const auto& r : rows) {
        io::write_row(sink(), {detail::fmt(r.r), detail::fmt(r.min_gap),
                               detail::fmt(r.vector_condition)});
      }
    }
    flush();
    return kOk;
  }

  // n2verify ---------------------------------------------------------------
  void add_n2verify(CLI::App& app, std::function<int()>& action) {
    auto* sub = app.add_subcommand("n2verify", "Check the two-level closed forms against the pipeline");
    struct Flags {
      std::string phi_grid = "0.15:2.9915926535897931:40";
      std::string phidot_grid = "0.1,1,10";
      std::optional<double> fd_step;
    };
    auto f = std::make_shared<Flags>();
    sub->add_option("--phi-grid", f->phi_grid, "start:stop:count or a comma list");
    sub->add_option("--phidot-grid", f->phidot_grid, "start:stop:count or a comma list");
    sub->add_option("--fd-step", f->fd_step, "Finite-difference step for the Coriolis check");
    sub->callback([this, f, &action] {
      action = [this, f] {
        return n2verify(detail::parse_grid(f->phi_grid), detail::parse_grid(f->phidot_grid),
                        f->fd_step.value_or(tol_.fd_step));
      };
    });
  }

  struct Identity {
    std::string name;
    double tolerance;
    double worst = 0.0;
    void record(double v) { worst = std::max(worst, std::isnan(v) ? INFINITY : v); }
    bool ok() const { return worst <= tolerance; }
  };

  static double pair_distance(Complex a0, Complex a1, Complex b0, Complex b1) {
    const double scale = std::max({1.0, std::abs(b0), std::abs(b1)});
    return std::min(std::max(std::abs(a0 - b0), std::abs(a1 - b1)),
                    std::max(std::abs(a0 - b1), std::abs(a1 - b0))) /
           scale;
  }

  int n2verify(const std::vector<double>& phis, const std::vector<double>& phi_dots,
               double fd_step) {
    constexpr double kGuard = 0.1;
    for (double phi : phis) {
      if (std::abs(std::sin(phi)) < kGuard) {
        throw EPProximity("phi = " + detail::fmt(phi) + " has |sin phi| below " +
                          detail::fmt(kGuard));
      }
    }
    std::vector<Identity> ids{{"omega_inverse", 1e-13},        {"metric_factorization", 1e-13},
                              {"intertwining", 1e-13},         {"coriolis_chain", 1e-13},
                              {"generator_difference", 1e-13}, {"pipeline_metric", 1e-10},
                              {"pipeline_theta_eigs", 1e-10},  {"pipeline_coriolis", 1e-8},
                              {"sigma_eigs", 1e-12},           {"g_eigs", 1e-12},
                              {"regime_imaginary_w", 1e-12}};
    Identity &inv = ids[0], &fact = ids[1], &inter = ids[2], &chain = ids[3], &diff = ids[4];
    Identity &pmetric = ids[5], &peigs = ids[6], &pcor = ids[7], &seigs = ids[8];
    Identity &geigs = ids[9], &wimag = ids[10];

    const ComplexMatrix eye = identity(2);
    for (double phi : phis) {
      const double s = std::sin(phi);
      const ComplexMatrix h = n2::hamiltonian(phi);
      const ComplexMatrix om = n2::omega_s(phi);
      const ComplexMatrix omd = n2::omega_s_dagger(phi);
      inv.record((om * n2::omega_s_inv(phi) - eye).cwiseAbs().maxCoeff());
      fact.record((omd * om - n2::theta_s(phi)).cwiseAbs().maxCoeff());
      ComplexMatrix diag = ComplexMatrix::Zero(2, 2);
      diag(0, 0) = 2.0 + s;
      diag(1, 1) = 2.0 - s;
      inter.record((h.adjoint() * omd - omd * diag).cwiseAbs().maxCoeff());

      const ComplexMatrix theta = build_metric(ketkets(build_h_at_phi(2, phi), tol_));
      pmetric.record((theta - n2::theta_s(phi)).cwiseAbs().maxCoeff());
      const RealVector te = eig_hermitian(theta, tol_).eigenvalues.real();
      const auto [lo, hi] = n2::theta_eigs(phi);
      peigs.record(std::max(std::abs(te(0) - lo), std::abs(te(1) - hi)));

      for (double pd : phi_dots) {
        const ComplexMatrix sig = n2::sigma_s(phi, pd);
        chain.record((kI * n2::omega_s_inv(phi) * n2::omega_s_dot(phi, pd) - sig)
                         .cwiseAbs()
                         .maxCoeff());
        diff.record((h - sig - n2::g_s(phi, pd)).cwiseAbs().maxCoeff());

        EvolutionOptions opt;
        opt.tol = tol_;
        const ComplexMatrix fd = coriolis(2, PhiProfile::linear(phi, pd), 0.0, fd_step, opt);
        pcor.record((fd - sig).cwiseAbs().maxCoeff());

        const ComplexVector se = eig_general(sig, tol_).eigenvalues;
        const auto [sp, sm] = n2::sigma_eigs(phi, pd);
        seigs.record(pair_distance(se(0), se(1), sp, sm));
        const ComplexVector ge = eig_general(n2::g_s(phi, pd), tol_).eigenvalues;
        const auto [gp, gm] = n2::g_eigs(phi, pd);
        geigs.record(pair_distance(ge(0), ge(1), gp, gm));

        const n2::N2Params params{phi, pd};
        if (n2::regime(params) == n2::Regime::strongly_non_stationary) {
          const auto [wp, wm] = n2::w_pm(phi, pd);
          wimag.record(std::max(std::abs(wp.real()), std::abs(wm.real())));
        }
      }
    }

    bool all = true;
    if (json_out()) {
      json arr = json::array();
      for (const auto& id : ids) {
        arr.push_back({{"identity", id.name},
                       {"max_residual", id.worst},
                       {"tolerance", id.tolerance},
                       {"status", id.ok() ? "pass" : "fail"}});
        all = all && id.ok();
      }
      sink() << json{{"identities", arr}, {"all_pass", all}}.dump(2) << '\n';
    } else {
      io::write_row(sink(), {"identity", "max_residual", "tolerance", "status"});
      for (const auto& id : ids) {
        io::write_row(sink(), {id.name, detail::fmt(id.worst), detail::fmt(id.tolerance),
                               id.ok() ? "pass" : "fail"});
        all = all && id.ok();
      }
    }
    flush();
    return all ? kOk : kVerification;
  }
};

inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  return Cli(out, err).run(args);
}

}  // namespace nipsqw::cli
