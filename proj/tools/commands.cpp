#include "commands.hpp"

#include <cmath>
#include <functional>
#include <iostream>
#include <random>
#include <thread>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "ehs/clifford.hpp"
#include "ehs/cqed.hpp"
#include "ehs/error.hpp"
#include "ehs/geometry.hpp"
#include "ehs/parallel.hpp"
#include "ehs/spectral.hpp"
#include "ehs/version.hpp"
#include "ehs/wilson.hpp"

namespace ehs::cli {

namespace {

const double nan = std::numeric_limits<double>::quiet_NaN();

// Error label used in status columns.
std::string status_of(const std::exception& e) {
  if (const auto* x = dynamic_cast<const Error*>(&e)) return errc_name(x->code());
  return "error";
}

// Runs f(i) for every point; failures are captured per point instead of aborting the scan.
struct PointStatus {
  std::string status = "ok";
  std::string message;
};
std::vector<PointStatus> guarded(std::size_t n, const std::function<void(std::size_t)>& f) {
  std::vector<PointStatus> st(n);
  parallel_for(n, 0, [&](std::size_t i) {
    try {
      f(i);
    } catch (const std::exception& e) {
      st[i] = {status_of(e), e.what()};
    }
  });
  return st;
}

void note(Outcome& out, const PointStatus& s, const std::string& where) {
  if (s.status != "ok") out.failures.push_back(where + ": " + s.message);
}

void emit(Outcome& out, const DataTable& t, const OutputContext& ctx) { out.files.push_back(write_table(t, ctx)); }

int axis_index(const std::string& a) {
  if (a == "q1") return 0;
  if (a == "q2") return 1;
  if (a == "q3") return 2;
  return 4;
}

DataTable& q_columns(DataTable& t) { return t.real("q1").real("q2").real("q3").real("q4").real("q5"); }
DataTable::Row& q_cells(DataTable::Row& r, const Vector5d& q) { return r << q(0) << q(1) << q(2) << q(3) << q(4); }

// Uniform double in [0, 1) from the top 53 bits; independent of the standard library's distributions.
double unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

// ---- spectrum -------------------------------------------------------------------

Outcome cmd_spectrum(const RunConfig& rc, const OutputContext& ctx) {
  const SpectrumConfig& c = rc.spectrum;
  Outcome out;

  DataTable locus("locus");
  locus.text("scan").real("points").real("spacing").real("min_gap").real("locus_points").real("locus_r_min").real(
      "locus_r_max");
  for (const ScanSpec& s : c.scans) {
    PlaneSpec p;
    for (const auto& a : s.axes) p.axes.push_back(axis_index(a));
    p.base = s.base;
    p.lo = s.lo;
    p.hi = s.hi;
    p.n = s.n;
    const auto rows = spectrum_scan(p, c.kappa);
    DataTable t("scan_" + s.name);
    q_columns(t).complex("e_plus").complex("e_minus").real("gap");
    double min_gap = 1e300, rmin = nan, rmax = nan;
    int count = 0;
    for (const auto& r : rows) {
      q_cells(t.row(), r.q) << r.e_plus << r.e_minus << r.gap;
      min_gap = std::min(min_gap, r.gap);
      if (r.gap < c.locus_gap) {
        const double rad = std::sqrt(r.q.squaredNorm() - r.q(3) * r.q(3));
        rmin = count ? std::min(rmin, rad) : rad;
        rmax = count ? std::max(rmax, rad) : rad;
        ++count;
      }
    }
    emit(out, t, ctx);
    locus.row() << s.name << static_cast<double>(rows.size()) << (s.hi - s.lo) / (s.n - 1) << min_gap
                << static_cast<double>(count) << rmin << rmax;
  }
  emit(out, locus, ctx);

  // θ2 sweep in the {q1,q2} plane and θ1 sweep in the {q1,q4} plane, each at a
  // radius enclosing the exceptional hypersphere and one inside it.
  DataTable rot("rotations");
  rot.text("rotation").real("R").real("angle");
  q_columns(rot).complex("e_a").complex("e_b").text("status");
  struct Sweep {
    const char* name;
    double R;
    bool theta1;
  };
  const Sweep sweeps[] = {{"theta2_outside", c.rotation_R_outside, false},
                          {"theta2_inside", c.rotation_R_inside, false},
                          {"theta1_outside", c.rotation_R_outside, true},
                          {"theta1_inside", c.rotation_R_inside, true}};
  for (const Sweep& s : sweeps) {
    const int n = c.rotation_samples;
    std::vector<ParameterPoint> loop;
    std::vector<double> ang;
    for (int k = 0; k < n; ++k) {
      const double a = 2.0 * pi * k / (n - 1);
      ang.push_back(a);
      loop.push_back(ParameterPoint::cartesian(
          s.theta1 ? spherical_to_cartesian(s.R, a, pi / 2, 0.0, 0.0) : spherical_to_cartesian(s.R, pi / 2, a, 0.0, 0.0),
          c.kappa));
    }
    std::vector<std::array<cd, 2>> e;
    PointStatus st;
    try {
      e = track_branches(loop).energies;
    } catch (const std::exception& x) {
      st = {status_of(x), x.what()};
      for (const auto& p : loop) {
        const auto pe = pair_energies(build_hamiltonian(p));
        e.push_back({pe[1], pe[0]});
      }
    }
    note(out, st, fmt::format("rotations {} R={}", s.name, format_number(s.R)));
    for (int k = 0; k < n; ++k) q_cells(rot.row() << s.name << s.R << ang[k], loop[k].q) << e[k][0] << e[k][1] << st.status;
  }
  emit(out, rot, ctx);

  if (c.random_count > 0) {
    DataTable t("random");
    t.real("R").real("theta1").real("theta2").real("phi1").real("phi2");
    t.complex("e_lower").complex("e_upper").complex("e_closed").real("error").text("status");
    std::mt19937_64 rng(rc.seed);
    struct Pt {
      Spherical s;
      std::array<cd, 2> e;
      cd closed;
      double err;
    };
    std::vector<Pt> pts(c.random_count);
    for (auto& p : pts) {
      p.s.R = c.random_R_lo + (c.random_R_hi - c.random_R_lo) * unit(rng);
      p.s.theta1 = pi * unit(rng);
      p.s.theta2 = 0.5 * pi * unit(rng);
      p.s.phi1 = 2.0 * pi * unit(rng);
      p.s.phi2 = 2.0 * pi * unit(rng);
    }
    parallel_for(pts.size(), 0, [&](std::size_t i) {
      Pt& p = pts[i];
      const auto pe = pair_energies(build_hamiltonian(spherical_to_cartesian(p.s), c.kappa));
      p.e = {pe[1], pe[0]};
      p.closed = eigenvalues_closed_form(p.s.R, c.kappa, p.s.theta1).first;
      // branch matching: the closed form fixes the pair only up to sign
      p.err = std::min(std::abs(p.e[0] - p.closed) + std::abs(p.e[1] + p.closed),
                       std::abs(p.e[0] + p.closed) + std::abs(p.e[1] - p.closed));
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const Pt& p = pts[i];
      const bool ok = p.err <= 1e-10 * std::max(1.0, std::abs(p.closed));
      if (!ok) out.failures.push_back(fmt::format("random point {}: eigenvalue mismatch {}", i, format_number(p.err)));
      t.row() << p.s.R << p.s.theta1 << p.s.theta2 << p.s.phi1 << p.s.phi2 << p.e[0] << p.e[1] << p.closed << p.err
              << (ok ? "ok" : "mismatch");
    }
    emit(out, t, ctx);
  }
  return out;
}

// ---- chern ----------------------------------------------------------------------

Outcome cmd_chern(const RunConfig& rc, const OutputContext& ctx) {
  const ChernConfig& c = rc.chern;
  Outcome out;
  QuadratureGrid g;
  g.n_theta1 = c.grid[0];
  g.n_theta2 = c.grid[1];
  g.n_phi1 = c.grid[2];
  g.n_phi2 = c.grid[3];
  g.fd_step = c.fd_step;
  ChernOptions opt;
  opt.max_refinements = c.max_refinements;
  opt.defect_target = c.defect_target;
  opt.fail_defect = c.fail_defect;

  DataTable t("c2");
  t.real("R").real("kappa").real("c2").real("c2_imag").real("defect").real("refinements");
  t.real("n_theta1").real("n_theta2").real("n_phi1").real("n_phi2").text("status");
  // points run one after another; each integral is parallel over its grid
  for (double R : c.R) {
    ChernResult r;
    r.grid = g;
    PointStatus st;
    try {
      r = second_chern(R, c.kappa, g, opt);
    } catch (const std::exception& e) {
      st = {status_of(e), e.what()};
      r.c2 = r.c2_imag = r.defect = nan;
    }
    note(out, st, fmt::format("c2 R={}", format_number(R)));
    t.row() << R << c.kappa << r.c2 << r.c2_imag << r.defect << r.refinements << r.grid.n_theta1 << r.grid.n_theta2
            << r.grid.n_phi1 << r.grid.n_phi2 << st.status;
  }
  emit(out, t, ctx);
  return out;
}

// ---- wilson ---------------------------------------------------------------------

Outcome cmd_wilson(const RunConfig& rc, const OutputContext& ctx) {
  const WilsonConfig& c = rc.wilson;
  Outcome out;

  {
    const int n = c.theta2_points;
    std::vector<double> grid(n);
    for (int k = 0; k < n; ++k) grid[k] = c.theta2_lo + (c.theta2_hi - c.theta2_lo) * k / (n - 1);
    std::vector<WilsonRow> rows(n);
    const auto st = guarded(n, [&](std::size_t i) { rows[i] = wilson_scan(c.slice_R, c.kappa, {grid[i]}, 1)[0]; });
    DataTable t("slice");
    t.real("theta2").complex("w").complex("w_closed_form");
    t.complex("u00").complex("u01").complex("u10").complex("u11").real("max_deviation").text("status");
    const double n2 = slice_norm2(c.slice_R, c.kappa);
    for (int i = 0; i < n; ++i) {
      note(out, st[i], fmt::format("slice theta2={}", format_number(grid[i])));
      auto& r = t.row() << grid[i];
      if (st[i].status == "ok") {
        const Matrix2c& u = rows[i].u;
        r << rows[i].w << rows[i].w_closed_form << u(0, 0) << u(0, 1) << u(1, 0) << u(1, 1)
          << (u - holonomy_closed_form(grid[i], n2)).cwiseAbs().maxCoeff();
      } else {
        for (int k = 0; k < 13; ++k) r << nan;
      }
      r << st[i].status;
    }
    emit(out, t, ctx);
  }

  {
    std::vector<MinWilsonRow> rows(c.min_R.size());
    std::vector<PointStatus> st(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
      try {
        rows[i] = min_wilson_vs_radius(c.kappa, {c.min_R[i]}, c.min_theta2_points)[0];
      } catch (const std::exception& e) {
        st[i] = {status_of(e), e.what()};
        rows[i] = {c.min_R[i], nan, nan};
      }
    }
    DataTable t("min_radius");
    t.real("R").real("min_re_w").real("theta2_at_min").text("status");
    for (std::size_t i = 0; i < rows.size(); ++i) {
      note(out, st[i], fmt::format("min_radius R={}", format_number(c.min_R[i])));
      t.row() << c.min_R[i] << rows[i].min_re_w << rows[i].theta2_at_min << st[i].status;
    }
    emit(out, t, ctx);
  }

  {
    const std::size_t n = c.moebius_delta.size();
    std::vector<cd> w(n);
    std::vector<int> swapped(n);
    const auto st = guarded(n, [&](std::size_t i) {
      const double d = c.moebius_delta[i];
      w[i] = moebius_wilson(c.moebius_R, d, c.kappa, c.moebius_steps);
      swapped[i] = track_branches(moebius_loop(c.moebius_R, d, c.kappa, 4 * c.moebius_steps)).swapped;
    });
    DataTable t("moebius");
    t.real("R").real("kappa").real("delta").complex("w").real("swapped").text("status");
    for (std::size_t i = 0; i < n; ++i) {
      note(out, st[i], fmt::format("moebius delta={}", format_number(c.moebius_delta[i])));
      const bool ok = st[i].status == "ok";
      t.row() << c.moebius_R << c.kappa << c.moebius_delta[i] << (ok ? w[i] : cd(nan, nan))
              << (ok ? static_cast<double>(swapped[i]) : nan) << st[i].status;
    }
    emit(out, t, ctx);
  }

  if (c.transition) {
    DataTable t("transition");
    t.real("R").real("kappa").real("delta_c").real("r_plus_kappa").real("tolerance").text("status");
    PointStatus st;
    double dc = nan;
    try {
      dc = locate_moebius_transition(c.moebius_R, c.kappa, c.transition_lo, c.transition_hi, c.transition_tol);
    } catch (const std::exception& e) {
      st = {status_of(e), e.what()};
    }
    note(out, st, "transition");
    t.row() << c.moebius_R << c.kappa << dc << c.moebius_R + c.kappa << c.transition_tol << st.status;
    emit(out, t, ctx);
  }

  {
    const std::size_t n = c.transport_theta2.size();
    std::vector<TransportSeries> ser(n);
    const auto st = guarded(n, [&](std::size_t i) {
      ser[i] = transport_expectations(c.transport_R, c.kappa, c.transport_theta2[i], c.transport_initial,
                                      c.transport_samples);
    });
    DataTable t("transport");
    t.real("theta2").real("phi1").real("sx").real("sy").real("sz").real("s2").text("status");
    for (std::size_t i = 0; i < n; ++i) {
      note(out, st[i], fmt::format("transport theta2={}", format_number(c.transport_theta2[i])));
      if (st[i].status != "ok") {
        t.row() << c.transport_theta2[i] << nan << nan << nan << nan << nan << st[i].status;
        continue;
      }
      const TransportSeries& s = ser[i];
      for (std::size_t k = 0; k < s.phi.size(); ++k)
        t.row() << c.transport_theta2[i] << s.phi[k] << s.sx[k] << s.sy[k] << s.sz[k] << s.s2[k] << "ok";
    }
    emit(out, t, ctx);
  }
  return out;
}

// ---- cqed -----------------------------------------------------------------------

Outcome cmd_cqed(const RunConfig& rc, const OutputContext& ctx) {
  const CqedRunConfig& c = rc.cqed;
  Outcome out;
  const std::vector<std::string> warnings = validate_config(c.model);
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  const CqedConfig model = configure_drives(c.model);

  MappingReport rep;
  PointStatus mst;
  try {
    rep = validate_mapping(model, false);
    if (rep.residual > 1e-3 * rep.h_norm)
      mst = {errc_name(Errc::residual_too_large),
             fmt::format("mapping residual {} exceeds 1e-3 of |H| = {}", format_number(rep.residual),
                         format_number(rep.h_norm))};
  } catch (const std::exception& e) {
    mst = {status_of(e), e.what()};
    rep.kappa_eff = nan;
  }
  note(out, mst, "mapping");
  {
    DataTable t("mapping");
    q_columns(t).real("kappa_eff").complex("shift").real("residual").real("h_norm").real("relative_residual");
    t.real("kappa_eff_literal").real("residual_literal").real("loop_mismatch");
    for (const char* p : {"lambda", "xi", "phi"})
      for (int m = 0; m < 4; ++m) t.real(fmt::format("{}{}", p, m));
    t.text("warnings").text("status");
    std::string wj;
    for (const auto& w : warnings) wj += (wj.empty() ? "" : "; ") + w;
    auto& r = q_cells(t.row(), rep.q) << rep.kappa_eff << rep.shift << rep.residual << rep.h_norm
                                      << (rep.h_norm > 0.0 ? rep.residual / rep.h_norm : nan) << rep.kappa_eff_literal
                                      << rep.residual_literal << rep.loop_mismatch;
    for (const auto* arr : {&model.lambda, &model.xi, &model.phi})
      for (int m = 0; m < 4; ++m) r << (*arr)[m];
    r << wj << mst.status;
    emit(out, t, ctx);
  }

  // postselected trajectory from one S state
  {
    DataTable t("trajectory");
    t.real("t").real("no_jump_norm2").real("lindblad_trace").real("discarded");
    t.complex("c_fg0").complex("c_1p").complex("c_gf0").complex("c_1m").text("status");
    PointStatus st;
    try {
      const int idx = c.initial == "fg0" ? 0 : c.initial == "1+" ? 1 : c.initial == "gf0" ? 2 : 3;
      double tmax = c.t_max;
      if (tmax == 0.0) {
        const double qn = effective_q(model.effective()).norm();
        if (!(qn > 0.0)) throw Error(Errc::invalid_argument, "t_max = 0 needs a nonzero target Hamiltonian");
        tmax = 2.0 * pi / (2.0 * qn);
      }
      std::vector<double> grid(c.trajectory_samples);
      for (int k = 0; k < c.trajectory_samples; ++k) grid[k] = tmax * k / (c.trajectory_samples - 1);
      if (c.trajectory_model == "effective") {
        const Model m = effective_model(model, model.dissipator);
        const VectorXc psi0 = m.space.s_basis().col(idx);
        const auto nj = no_jump_evolve(m, psi0, grid);
        std::vector<MatrixXc> rho;
        if (c.lindblad) rho = lindblad_evolve(m, psi0 * psi0.adjoint(), grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const TrajectorySample s = postselect(nj[k], m.space);
          t.row() << grid[k] << nj[k].psi.squaredNorm() << (c.lindblad ? rho[k].trace().real() : nan) << s.discarded
                  << s.state(0) << s.state(1) << s.state(2) << s.state(3) << "ok";
        }
      } else {
        const Model m = full_model(model, model.dissipator);
        const DressedStates d = dressed_states(model);
        const auto nj = no_jump_evolve(m, d.vectors.col(idx), grid);
        for (std::size_t k = 0; k < grid.size(); ++k) {
          const Vector4c a = effective_frame_amplitudes(model, d, nj[k].psi, grid[k]);
          const double total = nj[k].psi.squaredNorm();
          const Vector4c v = a.normalized();
          t.row() << grid[k] << total << nan << std::max(0.0, (total - a.squaredNorm()) / total) << v(0) << v(1)
                  << v(2) << v(3) << "ok";
        }
      }
    } catch (const std::exception& e) {
      st = {status_of(e), e.what()};
      t.row() << nan << nan << nan << nan << cd(nan, nan) << cd(nan, nan) << cd(nan, nan) << cd(nan, nan) << st.status;
    }
    note(out, st, "trajectory");
    emit(out, t, ctx);
  }

  {
    DataTable t("fits");
    t.real("R_over_kappa").real("theta1").real("theta2").real("phi1").real("phi2");
    t.real("fidelity").real("residual").real("condition").complex("e_lower").complex("e_exact").text("status");
    const std::size_t n = c.fit_points.size();
    std::vector<PointFit> fits(n);
    std::vector<cd> exact(n);
    const auto st = guarded(n, [&](std::size_t i) {
      if (!(rep.kappa_eff > 0.0)) throw Error(Errc::invalid_argument, "fits need kappa_eff > 0");
      const FitPoint& p = c.fit_points[i];
      const double R = p.R_over_kappa * rep.kappa_eff;
      fits[i] = protocol_point(model, rep.kappa_eff, R, p.angles, c.fit_samples);
      exact[i] = lower_energy(effective_q(params_from_spherical(R, p.angles)), rep.kappa_eff);
    });
    for (std::size_t i = 0; i < n; ++i) {
      const FitPoint& p = c.fit_points[i];
      note(out, st[i], fmt::format("fit R/kappa={} angles=({}, {}, {}, {})", format_number(p.R_over_kappa),
                                   format_number(p.angles[0]), format_number(p.angles[1]), format_number(p.angles[2]),
                                   format_number(p.angles[3])));
      auto& r = t.row() << p.R_over_kappa << p.angles[0] << p.angles[1] << p.angles[2] << p.angles[3];
      if (st[i].status == "ok")
        r << fits[i].fidelity << fits[i].fit.residual << fits[i].fit.condition << fits[i].fit.energies[1] << exact[i];
      else
        r << nan << nan << nan << cd(nan, nan) << cd(nan, nan);
      r << st[i].status;
    }
    emit(out, t, ctx);
  }

  {
    DataTable t("protocol");
    t.real("R_over_kappa").real("kappa_eff").real("c2").real("c2_imag").real("defect");
    t.real("mean_fidelity").real("min_fidelity").real("fits").text("status");
    ProtocolOptions opt;
    opt.grid = QuadratureGrid{c.protocol_grid[0], c.protocol_grid[1], c.protocol_grid[2], c.protocol_grid[3],
                              c.protocol_fd_step};
    opt.samples = c.protocol_samples;
    for (double ratio : c.protocol_R) {
      ProtocolResult r;
      PointStatus st;
      try {
        r = protocol_chern(model, ratio, opt);
      } catch (const std::exception& e) {
        st = {status_of(e), e.what()};
        r.kappa_eff = rep.kappa_eff;
        r.chern.c2 = r.chern.c2_imag = r.chern.defect = r.mean_fidelity = r.min_fidelity = nan;
      }
      note(out, st, fmt::format("protocol R/kappa={}", format_number(ratio)));
      t.row() << ratio << r.kappa_eff << r.chern.c2 << r.chern.c2_imag << r.chern.defect << r.mean_fidelity
              << r.min_fidelity << static_cast<double>(r.fits) << st.status;
    }
    emit(out, t, ctx);
  }
  return out;
}

// ---- entry point ----------------------------------------------------------------

int run_cli(int argc, char** argv) {
  CLI::App app{"Exceptional hypersphere toolkit: spectra, Chern numbers, Wilson loops and circuit-QED protocol"};
  app.set_version_flag("--version", std::string(version_string));
  app.require_subcommand(1);
  std::string config, out_dir, format = "csv";
  int threads = 0;
  const std::pair<const char*, const char*> cmds[] = {
      {"spectrum", "Spectrum scans, rotation traces and random closed-form checks"},
      {"chern", "Second Chern number versus radius"},
      {"wilson", "Slice and Moebius Wilson loops and transport expectations"},
      {"cqed", "Circuit-QED mapping, trajectories, fits and measurement protocol"}};
  for (const auto& [name, help] : cmds) {
    CLI::App* sub = app.add_subcommand(name, help);
    sub->add_option("--config", config, "YAML configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out_dir, "Output directory")->required();
    sub->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  set_default_threads(threads > 0 ? threads : static_cast<int>(std::max(1u, std::thread::hardware_concurrency())));

  RunConfig cfg;
  try {
    cfg = load_config(config, command);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }
  OutputContext ctx;
  ctx.dir = out_dir;
  ctx.format = format == "json" ? Format::json : Format::csv;
  ctx.command = command;
  ctx.config = resolved_json(cfg);

  Outcome res;
  try {
    if (command == "spectrum") res = cmd_spectrum(cfg, ctx);
    if (command == "chern") res = cmd_chern(cfg, ctx);
    if (command == "wilson") res = cmd_wilson(cfg, ctx);
    if (command == "cqed") res = cmd_cqed(cfg, ctx);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  for (const auto& f : res.files) std::cout << f << "\n";
  if (!res.failures.empty()) {
    std::cerr << res.failures.size() << " point(s) failed:\n";
    for (const auto& f : res.failures) std::cerr << "  " << f << "\n";
    return 1;
  }
  return 0;
}

}  // namespace ehs::cli
