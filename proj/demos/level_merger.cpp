// Traces E(r) for the six-site well and writes it as CSV plus an SVG plot.
//
//   level_merger [out.csv] [out.svg]

#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "nipsqw/nipsqw.hpp"

int main(int argc, char** argv) {
  using namespace nipsqw;
  const char* csv_path = argc > 1 ? argv[1] : "level_merger.csv";
  const char* svg_path = argc > 2 ? argv[2] : "level_merger.svg";

  std::ofstream csv(csv_path);
  io::write_row(csv, {"E", "r_plus"});
  io::Series plus{"r > 0", "#1f77b4", {}, {}}, minus{"r < 0", "#d62728", {}, {}};
  const int samples = 800;
  for (int k = 0; k < samples; ++k) {
    const double e = 0.05 + 3.9 * k / (samples - 1);
    const SpectralCurvePoint p = spectral_curve(6, e);
    const double r = p.r_plus.value_or(std::numeric_limits<double>::quiet_NaN());
    plus.x.push_back(r);
    minus.x.push_back(-r);
    plus.y.push_back(e);
    minus.y.push_back(e);
    if (p.r_plus) io::write_row(csv, {io::format_double(e), io::format_double(r)});
  }
  std::ofstream(svg_path) << io::render_svg({plus, minus}, "r", "E");

  // At r = 0 the two middle levels have merged.
  const SpectrumResult s = solve_spectrum(build_h(6, z_from_r(0.0)));
  std::cout << "spectrum at r = 0:";
  for (Eigen::Index k = 0; k < s.energies.size(); ++k) std::cout << ' ' << s.energies(k).real();
  std::cout << "\nwrote " << csv_path << " and " << svg_path << '\n';
}
