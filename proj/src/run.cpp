#include "fracvar/run.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <functional>
#include <ostream>

#include "fracvar/capacity.hpp"
#include "fracvar/errors.hpp"
#include "fracvar/norms.hpp"
#include "fracvar/solvers.hpp"

namespace fracvar {

namespace {

namespace fs = std::filesystem;

class Artifacts {
 public:
  explicit Artifacts(const std::string& dir) : dir_(dir) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec || !fs::is_directory(dir_)) throw IoError("cannot create output directory '" + dir + "'");
  }

  void write(const std::string& name, const std::function<void(std::ostream&)>& body) const {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
    body(out);
    out.flush();
    if (!out) throw IoError("failed writing '" + path.string() + "'");
  }

 private:
  fs::path dir_;
};

SolverSettings settings_from(const RunConfig& c) {
  SolverSettings s;
  s.tol = c.tol;
  s.max_iter = c.max_iter;
  s.seed = c.seed;
  s.embedding_samples = c.samples;
  return s;
}

void write_trace(std::ostream& o, const SolveReport& r) {
  o << "# schema=1\niter,energy,residual,norm_W,norm_q\n";
  for (std::size_t i = 0; i < r.energy_trace.size(); ++i)
    o << i << ',' << format_number(r.energy_trace[i]) << ',' << format_number(r.residual_trace[i]) << ','
      << format_number(r.norm_w_trace[i]) << ',' << format_number(r.norm_q_trace[i]) << '\n';
}

std::string summary_line(bool converged, int iterations, double residual, double energy) {
  return std::string(converged ? "converged" : "not_converged") + ',' + std::to_string(iterations) + ',' +
         format_number(residual) + ',' + format_number(energy);
}

void write_key_values(std::ostream& o, const std::vector<std::pair<std::string, double>>& rows) {
  o << "# schema=1\nkey,value\n";
  for (const auto& [k, v] : rows) o << k << ',' << format_number(v) << '\n';
}

void emit_solution(const Artifacts& art, const SolveReport& r, std::ostream& out, std::ostream& err,
                   const std::string& summary) {
  art.write("solution.csv", [&](std::ostream& o) { write_csv(o, r.solution); });
  art.write("trace.csv", [&](std::ostream& o) { write_trace(o, r); });
  art.write("summary.csv", [&](std::ostream& o) { o << summary << '\n'; });
  for (const auto& w : r.warnings) err << "warning: " << w << '\n';
  out << summary << '\n';
}

EnergyModel model_with_source(const RunConfig& c, const char* command) {
  EnergyModel m = build_model(c);
  if (!m.has_source()) throw ConfigurationError(std::string(command) + " needs a source (source = none given)");
  return m;
}

double lambda1_for(const EnergyModel& m, const RunConfig& c) {
  const auto k = estimate_embedding_constants(m.quadrature(), m.p(), m.q(), c.samples, c.seed);
  const double fn = source_norm(m.source(), m.mesh(), m.conjugate_exponent(), m.rule().gauss_order);
  return lambda1_threshold(m.p(), m.q(), m.lambda_cap(), k.C4, k.C5, fn);
}

double rayleigh_for(const EnergyModel& m, const RunConfig& c) {
  return rayleigh_inf_estimate(m.mesh(), m.kernel(), m.p(), m.q(), 200, settings_from(c), m.rule()).value;
}

void write_geometry(const Artifacts& art, const MountainPassGeometry& g, double lambda) {
  art.write("geometry.csv", [&](std::ostream& o) {
    write_key_values(o, {{"lambda", lambda},
                         {"C4", g.C4},
                         {"C5", g.C5},
                         {"f_norm", g.f_norm},
                         {"lambda1", g.lambda1},
                         {"r0", g.r0},
                         {"r0_stationary", g.r0_stationary},
                         {"r0_is_maximizer", g.r0_is_maximizer ? 1.0 : 0.0},
                         {"energy_u1", g.energy_u1},
                         {"sphere_min", g.sphere_min_estimate},
                         {"sphere_min_closed_form_r0", g.sphere_min_closed_form}});
  });
  art.write("F_profile.csv", [&](std::ostream& o) {
    o << "# schema=1\nr,F\n";
    for (std::size_t i = 0; i < g.profile_r.size(); ++i)
      o << format_number(g.profile_r[i]) << ',' << format_number(g.profile_F[i]) << '\n';
  });
}

int cmd_solve_p2(const RunConfig& c, const Artifacts& art, std::ostream& out, std::ostream& err) {
  EnergyModel m = model_with_source(c, "solve-p2");
  if (c.lambda_scale > 0.0) m = m.with_lambda(c.lambda_scale * lambda1_for(m, c));
  out << "lambda = " << format_number(m.lambda()) << '\n';
  const MountainPassResult res = mountain_pass_solve(m, settings_from(c));
  const SolveReport& r = res.report;
  write_geometry(art, res.geometry, m.lambda());
  emit_solution(art, r, out, err, summary_line(r.converged, r.iterations, r.residual(), r.energy()));
  out << "wallclock_seconds = " << r.wallclock << '\n';
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_geometry(const RunConfig& c, const Artifacts& art, std::ostream& out, std::ostream& err) {
  EnergyModel m = model_with_source(c, "geometry");
  if (c.lambda_scale > 0.0) m = m.with_lambda(c.lambda_scale * lambda1_for(m, c));
  const MountainPassGeometry g = mountain_pass_geometry(m, settings_from(c));
  write_geometry(art, g, m.lambda());
  for (const auto& w : g.warnings) err << "warning: " << w << '\n';
  out << "lambda = " << format_number(m.lambda()) << "\nlambda1 = " << format_number(g.lambda1)
      << "\nr0 = " << format_number(g.r0) << "\nr0_stationary = " << format_number(g.r0_stationary)
      << "\nsphere_min = " << format_number(g.sphere_min_estimate) << "\nenergy_u1 = " << format_number(g.energy_u1)
      << '\n';
  return kExitOk;
}

int cmd_sphere_min(const RunConfig& c, const Artifacts& art, std::ostream& out, std::ostream& err) {
  EnergyModel m = build_model(c);
  if (c.lambda_scale > 0.0) m = m.with_lambda(c.lambda_scale * rayleigh_for(m, c));
  const SolveReport r = sphere_constrained_solve(m, settings_from(c));
  out << "lambda = " << format_number(m.lambda()) << "\nlambda_effective = " << format_number(r.lambda_effective)
      << '\n';
  emit_solution(art, r, out, err, summary_line(r.converged, r.iterations, r.residual(), r.energy()));
  out << "wallclock_seconds = " << r.wallclock << '\n';
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_homotopy(const RunConfig& c, const Artifacts& art, std::ostream& out, std::ostream& err) {
  EnergyModel m = build_model(c);
  if (c.lambda_scale > 0.0) m = m.with_lambda(c.lambda_scale * rayleigh_for(m, c));
  const HomotopyReport h = homotopy_to_p1(m, c.n_steps, settings_from(c));
  const SolveReport& r = h.report;
  art.write("homotopy.csv", [&](std::ostream& o) {
    o << "# schema=1\nstage,source_scale,cauchy,lambda_effective,iterations,residual,bound_chain_gap\n";
    for (std::size_t n = 0; n < h.source_scale.size(); ++n) {
      o << n << ',' << format_number(h.source_scale[n]) << ',' << (n == 0 ? std::string() : format_number(h.cauchy[n - 1]))
        << ',' << format_number(h.stage_lambda[n]) << ',' << h.stage_iterations[n] << ','
        << format_number(r.residual_trace[n]) << ',' << format_number(h.bound_chain_gap[n]) << '\n';
    }
  });
  out << "lambda = " << format_number(m.lambda()) << "\nrayleigh_estimate = " << format_number(h.rayleigh_estimate)
      << "\nlambda_effective = " << format_number(h.lambda_effective)
      << "\nresidual_p1 = " << format_number(h.residual_p1)
      << "\nresidual_p1_at_model_lambda = " << format_number(h.residual_p1_model) << '\n';
  emit_solution(art, r, out, err, summary_line(r.converged, r.iterations, h.residual_p1, r.energy()));
  out << "wallclock_seconds = " << r.wallclock << '\n';
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_capacity(const RunConfig& c, const Artifacts& art, std::ostream& out, std::ostream&) {
  const auto t0 = std::chrono::steady_clock::now();
  const CompactSet1D k = CompactSet1D::parse(c.set);
  const Mesh1D mesh = build_mesh(c);
  CapacityOptions opt;
  opt.tol = c.tol;
  opt.max_iter = c.max_iter;
  opt.rule = build_rule(c);
  const CapacityResult r = capacity_estimate(k, mesh, build_kernel(c), c.q, opt);
  art.write("capacity.csv", [&](std::ostream& o) {
    o << "# schema=1\nset_description,q,s,n_elem,capacity_upper_bound\n"
      << k.description() << ',' << format_number(c.q) << ',' << format_number(c.s) << ',' << c.n_elem << ','
      << format_number(r.upper_bound) << '\n';
  });
  art.write("capacity_phi.csv", [&](std::ostream& o) { write_csv(o, r.minimizer); });
  const std::string summary = summary_line(r.converged, r.iterations, r.kkt_residual, r.upper_bound);
  art.write("summary.csv", [&](std::ostream& o) { o << summary << '\n'; });
  out << "capacity_upper_bound = " << format_number(r.upper_bound) << '\n' << summary << '\n';
  out << "wallclock_seconds = " << std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count()
      << '\n';
  return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_check_kernel(const RunConfig& c, const Artifacts& art, std::ostream& out, std::ostream& err) {
  const PhiSpec phi = build_phi(c);
  const KernelSpec kernel = build_kernel(c);
  const BoundReport rp = validate_phi(phi, default_phi_samples());
  const BoundReport rk = validate_kernel(kernel, random_kernel_pairs(200, c.seed));
  art.write("kernel_check.csv", [&](std::ostream& o) {
    o << "# schema=1\nobject,name,min_ratio,max_ratio,lower_bound,upper_bound,samples,violation\n";
    auto row = [&](const char* what, const std::string& name, const BoundReport& r) {
      o << what << ',' << name << ',' << format_number(r.min_ratio) << ',' << format_number(r.max_ratio) << ','
        << format_number(r.lower_bound) << ',' << format_number(r.upper_bound) << ',' << r.samples << ','
        << (r.violation ? 1 : 0) << '\n';
    };
    row("phi", phi.name(), rp);
    row("kernel", kernel.name(), rk);
  });
  auto report = [&](const char* what, const std::string& name, const BoundReport& r) {
    out << what << ' ' << name << ": ratio in [" << format_number(r.min_ratio) << ", " << format_number(r.max_ratio)
        << "], bounds [" << format_number(r.lower_bound) << ", " << format_number(r.upper_bound) << "], "
        << (r.violation ? "VIOLATION" : "ok") << '\n';
    if (r.violation) err << "warning: " << what << ' ' << name << " violates its bounds\n";
  };
  report("phi", phi.name(), rp);
  if (!rp.odd) err << "warning: phi " << phi.name() << " is not odd; the gradient is not the operator pairing\n";
  report("kernel", kernel.name(), rk);
  return kExitOk;
}

int cmd_validate(const RunConfig& c, std::ostream& out) {
  write_config_echo(out, c);
  const auto diags = validate(c);
  bool failed = false;
  for (const auto& d : diags) {
    failed |= d.level == Diagnostic::Level::error;
    out << (d.level == Diagnostic::Level::error ? "error: " : "warning: ") << d.message << '\n';
  }
  if (diags.empty()) out << "ok: no diagnostics\n";
  return failed ? kExitConfig : kExitOk;
}

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names = {"solve-p2", "homotopy", "sphere-min", "capacity",
                                                 "geometry", "check-kernel", "validate"};
  return names;
}

int run(const std::string& command, const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (command == "validate") return cmd_validate(cfg, out);
    const Artifacts art(cfg.output);
    art.write("config_echo", [&](std::ostream& o) { write_config_echo(o, cfg); });
    if (command == "solve-p2") return cmd_solve_p2(cfg, art, out, err);
    if (command == "homotopy") return cmd_homotopy(cfg, art, out, err);
    if (command == "sphere-min") return cmd_sphere_min(cfg, art, out, err);
    if (command == "capacity") return cmd_capacity(cfg, art, out, err);
    if (command == "geometry") return cmd_geometry(cfg, art, out, err);
    if (command == "check-kernel") return cmd_check_kernel(cfg, art, out, err);
    throw ConfigurationError("unknown command '" + command + "'");
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const std::invalid_argument& e) {  // ConfigurationError, PreconditionError
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::domain_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
}

}  // namespace fracvar
