// Batch front-end: continue, invariants, conjugate, dispersion, reduced-ode, profile.
//
// Exit codes: 0 success, 1 invariant checks failed, 2 solver failure,
// 64 bad configuration or usage, 66 unreadable input file.

#include "solwave/io.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using namespace solwave;

namespace {

constexpr int kOk = 0;
constexpr int kChecksFailed = 1;
constexpr int kSolverFailure = 2;
constexpr int kUsage = 64;
constexpr int kNoInput = 66;

struct Overrides {
  std::string config;
  std::string out;
  std::optional<double> gamma, alpha, eps, span, step;
  std::string solution;
};

RunConfig load(const Overrides& o) {
  json j = o.config.empty() ? json{{"schema_version", kConfigSchemaVersion}} : read_json_file(o.config);
  if (!j.is_object()) throw ConfigError("config: top level must be an object");
  apply_env_overrides(j, process_environment());
  if (o.gamma) j["gamma"] = *o.gamma;
  if (o.alpha) j["alpha"] = *o.alpha;
  if (o.eps) j["eps"] = *o.eps;
  if (o.span) j["span"] = *o.span;
  if (o.step) j["step"] = *o.step;
  if (!o.solution.empty()) j["solution"] = o.solution;
  if (!o.out.empty()) j["output_dir"] = o.out;
  return parse_config(j);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

int cmd_continue(const RunConfig& c) {
  const Branch b = run_branch(c.branch);
  const fs::path out = c.output_dir;
  write_atomic(out / "branch.csv", branch_csv(b));
  write_atomic(out / "diagnostics.ndjson", diagnostics_ndjson(b));
  for (std::size_t i = 0; i < b.points.size(); ++i) {
    char name[32];
    std::snprintf(name, sizeof name, "step_%04zu.json", i);
    write_solution(out / "solutions" / name, b.points[i].state);
  }
  json attempts = json::array();
  for (const StepAttempt& a : b.attempts)
    attempts.push_back({{"step", a.step}, {"h", a.h}, {"accepted", a.accepted}, {"outcome", a.outcome}, {"modes", a.modes}});
  const json term = {{"reason", b.reason.label()},
                     {"detail", b.reason.detail},
                     {"points", b.points.size()},
                     {"attempts", attempts},
                     {"config", to_json(c)}};
  write_atomic(out / "termination.json", term.dump(1) + "\n");

  const BranchPoint& last = b.points.back();
  std::cout << "points: " << b.points.size() << "\n"
            << "termination: " << b.reason.label() << " (" << b.reason.detail << ")\n"
            << "final alpha: " << fmt(last.state.params.alpha) << "  crest w1: " << fmt(last.state.w1.crest())
            << "  m1: " << fmt(last.diagnostics.monitor.m1) << "  modes: " << last.state.basis.mode_count() << "\n";
  using K = TerminationReason::Kind;
  return (b.reason.kind == K::MonitorBlowup || b.reason.kind == K::MaxSteps) ? kOk : kSolverFailure;
}

struct CheckRow {
  std::string name;
  double value;
  std::string bound;
  bool pass;
};

std::vector<CheckRow> invariant_checks(const ReducedState& s) {
  const double tol = NewtonSettings{}.tol_residual;
  std::vector<CheckRow> rows;
  const double res = residual_norm(s);
  rows.push_back({"residual", res, "<= 1e-9", res <= 10.0 * tol});

  const FlowForce ff = flow_force_profile(s, default_stations(s.basis));
  const double rel = ff.spread / std::max(std::abs(ff.mean), std::numeric_limits<double>::min());
  rows.push_back({"flow_force_spread", rel, "<= 1e-8 |S|", ff.spread <= 1e-8 * std::abs(ff.mean)});
  const PhiCheck phi = phi_surface_check(s, ff.stations);
  rows.push_back({"phi_identity", phi.max_rel, "<= 1e-7", phi.max_rel <= 1e-7});
  const IntegralIdentity ii = integral_identity_check(s);
  rows.push_back({"integral_identity", ii.residual, "<= 1e-6", ii.residual <= 1e-6});
  const ComplementingCheck cc = complementing_identity(s);
  rows.push_back({"complementing_identity", cc.max_rel, "<= 1e-10", cc.max_rel <= 1e-10});
  const double lam = lopatinskii_constant(s);
  rows.push_back({"lopatinskii", lam, "> 0", lam > 0.0});
  const NodalCheck nc = nodal_check(s);
  rows.push_back({"nodal", nc.worst, "< 1e-12", nc.holds});
  const SurfaceFields f = surface_samples(s);
  const double wmin = f.w1.minCoeff();
  rows.push_back({"elevation", wmin, ">= -1e-8", wmin >= -1e-8});
  const bool trivial = f.w1.cwiseAbs().maxCoeff() < 1e-8;
  rows.push_back({"supercritical", s.params.alpha, trivial ? "(trivial)" : "< alpha_cr",
                  trivial || s.params.alpha < s.params.alpha_cr()});
  const PsiBound pb = psi_bound_check(s);
  rows.push_back({"psi_bound", s.params.gamma <= 0.0 ? pb.psi_y_max : pb.psi_y_min, "psi_y bound", pb.ok});
  const SurfaceVelocityCheck sv = surface_velocity_check(s);
  rows.push_back({"dynamic_velocity", sv.dynamic, "<= 1e-9", sv.dynamic <= 10.0 * tol});
  rows.push_back({"kinematic_velocity", sv.kinematic, "<= 1e-9", sv.kinematic <= 10.0 * tol});
  return rows;
}

int cmd_invariants(const RunConfig& c) {
  if (c.solution.empty()) throw ConfigError("invariants: no solution file given");
  const ReducedState s = read_solution(c.solution);
  bool all = true;
  std::printf("%-24s %-14s %-14s %s\n", "check", "value", "bound", "result");
  for (const CheckRow& r : invariant_checks(s)) {
    std::printf("%-24s % -14.6e %-14s %s\n", r.name.c_str(), r.value, r.bound.c_str(), r.pass ? "pass" : "FAIL");
    all = all && r.pass;
  }
  return all ? kOk : kChecksFailed;
}

int cmd_conjugate(const RunConfig& c) {
  if (!c.alpha) throw ConfigError("conjugate: alpha is required");
  const Parameters p{c.branch.gamma, *c.alpha};
  if (!(p.alpha > 0.0)) throw ConfigError("conjugate: alpha must be positive");
  const double dcr = d_critical(p);
  const bool degenerate = !(p.alpha < p.alpha_cr()) ||
                          std::abs(p.alpha - p.alpha_cr()) <= 1e-14;
  std::cout << "gamma: " << fmt(p.gamma) << "  alpha: " << fmt(p.alpha) << "  alpha_cr: " << fmt(p.alpha_cr())
            << "\n"
            << "d_cr: " << fmt(dcr) << "\n";
  std::ostringstream csv;
  csv << "d,qhat,shat\n";
  for (int i = 0; i <= 48; ++i) {
    const double d = 0.2 + 4.8 * i / 48.0;
    csv << fmt(d) << ',' << fmt(qhat(d, p)) << ',' << fmt(shat(d, p)) << '\n';
  }
  int code = kOk;
  if (degenerate) {
    std::cout << "d_star: degenerate (alpha >= alpha_cr)\n";
  } else {
    const ConjugateDepth cd = conjugate_depth(p);
    const double gap = shat(*cd.d, p) - shat(1.0, p);
    std::cout << "d_star: " << fmt(*cd.d) << "\n"
              << "shat(d_star) - shat(1): " << fmt(gap) << "  " << (gap > 0.0 ? "pass" : "FAIL") << "\n";
    if (!(gap > 0.0)) code = kChecksFailed;
  }
  std::cout << "\n" << csv.str();
  if (!c.output_dir.empty()) write_atomic(fs::path(c.output_dir) / "conjugate.csv", csv.str());
  return code;
}

int cmd_dispersion(const RunConfig& c) {
  if (!c.alpha) throw ConfigError("dispersion: alpha is required");
  const DispersionRoot r = dispersion_root(c.branch.gamma, *c.alpha);
  std::string k = r.k ? fmt(*r.k) : "";
  std::cout << "gamma: " << fmt(c.branch.gamma) << "  alpha: " << fmt(*c.alpha) << "\n"
            << "k: " << (r.k ? k : std::string("none")) << (r.boundary ? "  (boundary: gamma + alpha = 1)" : "")
            << "\n";
  const std::string csv = "gamma,alpha,k,boundary\n" + fmt(c.branch.gamma) + "," + fmt(*c.alpha) + "," + k + "," +
                          (r.boundary ? "1" : "0") + "\n";
  write_atomic(fs::path(c.output_dir) / "dispersion.csv", csv);
  return kOk;
}

int cmd_reduced_ode(const RunConfig& c) {
  const double g = c.branch.gamma;
  const double eps = c.eps.value_or(c.branch.eps0);
  if (!(eps > 0.0)) throw ConfigError("reduced-ode: eps must be positive");
  const double X0 = -c.span / 2.0;
  const ReducedOdeState start{explicit_homoclinic(g, X0), explicit_homoclinic_slope(g, X0), X0};
  const auto path = integrate_reduced_ode(start, g, c.span, c.step);
  std::ostringstream csv;
  csv << "X,Q,P\n";
  char line[96];
  for (const ReducedOdeState& s : path) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", s.X, s.Q, s.P);
    csv << line;
  }
  write_atomic(fs::path(c.output_dir) / "reduced_ode.csv", csv.str());
  const auto ev = origin_eigenvalues(g);
  std::cout << "Q0: " << fmt(homoclinic_peak(g)) << "  crest q = eps Q0: " << fmt(eps * homoclinic_peak(g)) << "\n"
            << "origin eigenvalues: " << fmt(ev[0].real()) << ", " << fmt(ev[1].real()) << "\n"
            << "samples: " << path.size() << "  (x = X / sqrt(eps), q = eps Q)\n";
  return kOk;
}

int cmd_profile(const RunConfig& c) {
  if (c.solution.empty()) throw ConfigError("profile: no solution file given");
  const ReducedState s = read_solution(c.solution);
  const fs::path out = c.output_dir;
  const PhysicalSurface surf = reconstruct_surface(s);
  std::ostringstream p;
  p << "x,X,Y\n";
  char line[128];
  for (const SurfacePoint& q : surf.points) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g\n", q.x, q.X, q.Y);
    p << line;
  }
  write_atomic(out / "profile.csv", p.str());

  const ScanGrid& grid = c.branch.diagnostics.scan;
  const SurfaceTrace w2 = eliminate_w2(s.w1, s.params.gamma, s.basis);
  std::ostringstream v;
  v << "x,y,u,v\n";
  for (int i = 0; i < grid.nx; ++i) {
    const double x = s.basis.half_period() * i / (grid.nx - 1);
    const StripColumn col(s, w2, x);
    for (int j = 0; j < grid.ny; ++j) {
      const double y = static_cast<double>(j) / (grid.ny - 1);
      const Velocity u = velocity_from(col.at(y), s.params.gamma);
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", x, y, u.u, u.v);
      v << line;
    }
  }
  write_atomic(out / "velocity.csv", v.str());

  const StagnationReport st = stagnation_scan(s, grid);
  json pts = json::array();
  for (const StagnationPoint& q : st.points) pts.push_back({q.x, q.y, q.speed2});
  json layers = json::array();
  for (const CriticalLayerCrossing& q : st.critical_layers) layers.push_back({q.x, q.y});
  const json summary = {{"overhang", surf.overhang},
                        {"min_xi_x", surf.min_xi_x},
                        {"stagnation_points", pts},
                        {"critical_layers", layers},
                        {"min_speed2", st.min_speed2},
                        {"crest_speed2", st.crest_speed2}};
  write_atomic(out / "profile_summary.json", summary.dump(1) + "\n");
  std::cout << "overhang: " << (surf.overhang ? "yes" : "no") << "  min xi_x: " << fmt(surf.min_xi_x) << "\n"
            << "stagnation points: " << st.points.size() << "  critical-layer crossings: " << st.critical_layers.size()
            << "\n"
            << "crest speed^2: " << fmt(st.crest_speed2) << "  min speed^2: " << fmt(st.min_speed2) << "\n";
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Solitary waves with constant vorticity: continuation and diagnostics"};
  app.require_subcommand(1, 1);
  Overrides o;
  app.add_option("--config", o.config, "JSON configuration file");
  app.add_option("--out", o.out, "output directory");

  auto* cont = app.add_subcommand("continue", "trace the solution branch from the small-amplitude seed");
  cont->add_option("--gamma", o.gamma, "vorticity");

  auto* inv = app.add_subcommand("invariants", "recompute all checks on a solution file");
  inv->add_option("solution", o.solution, "solution file")->required();

  auto* conj = app.add_subcommand("conjugate", "conjugate-flow depths and flow-force comparison");
  conj->add_option("--gamma", o.gamma, "vorticity");
  conj->add_option("--alpha", o.alpha, "1/F^2");

  auto* disp = app.add_subcommand("dispersion", "positive root of k coth k = gamma + alpha");
  disp->add_option("--gamma", o.gamma, "vorticity");
  disp->add_option("--alpha", o.alpha, "1/F^2");

  auto* ode = app.add_subcommand("reduced-ode", "RK4 along the homoclinic orbit of the reduced equation");
  ode->add_option("--gamma", o.gamma, "vorticity");
  ode->add_option("--eps", o.eps, "alpha_cr - alpha");
  ode->add_option("--span", o.span, "length of the X interval, centred on the crest");
  ode->add_option("--step", o.step, "RK4 step");

  auto* prof = app.add_subcommand("profile", "physical surface, velocity field and stagnation summary");
  prof->add_option("solution", o.solution, "solution file")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    const RunConfig c = load(o);
    if (cont->parsed()) return cmd_continue(c);
    if (inv->parsed()) return cmd_invariants(c);
    if (conj->parsed()) return cmd_conjugate(c);
    if (disp->parsed()) return cmd_dispersion(c);
    if (ode->parsed()) return cmd_reduced_ode(c);
    if (prof->parsed()) return cmd_profile(c);
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const FileError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNoInput;
  } catch (const SolverError& e) {
    std::cerr << "solver failure (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::domain_error& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kUsage;
}
