// mblab — command-line front end for the minimal/WSI Allen–Cahn engine.
//
// Pipelines: periodic, lamination, j1-gap, j2-heteroclinic, verify.
// Exit codes: 0 ok, 2 config error, 3 solver non-convergence, 4 gap
// condition violated.

#include <CLI11.hpp>
#include <filesystem>
#include <iostream>

#include "mblab/mblab.hpp"

namespace fs = std::filesystem;
using namespace mblab;

namespace {

struct RunContext {
  Ini ini;
  fs::path out;
  SolverConfig solver;
  Stopwatch sw;
  std::vector<std::string> outputs;

  std::string path(const std::string& name) {
    outputs.push_back(name);
    return (out / name).string();
  }
  void finish() { write_manifest((out / "manifest.json").string(), ini, outputs, sw); }
};

std::ofstream open_csv(RunContext& ctx, const std::string& name) {
  std::ofstream csv(ctx.path(name));
  csv << "iteration,energy,residual,contacts\n";
  return csv;
}

ProgressFn csv_progress(std::ofstream& csv) {
  return [&csv](long long it, double e, double r, long long contacts) {
    csv << it << ',' << format_double(e) << ',' << format_double(r) << ',' << contacts
        << '\n';
  };
}

DomainSpec base_domain(const Ini& ini, int n) {
  int n2 = static_cast<int>(ini.get_int("domain.n2", 0));
  int m = static_cast<int>(ini.get_int("domain.m"));
  std::vector<int> lo, hi;
  if (n2 > 0) {
    int R = static_cast<int>(ini.get_int("domain.R"));
    lo.assign(n2, -R);
    hi.assign(n2, R);
  }
  std::vector<int> periods, jumps;
  if (n - n2 > 0) {
    periods = ini.get_int_list("domain.periods");
    if (static_cast<int>(periods.size()) != n - n2)
      throw ConfigError("domain.periods must list " + std::to_string(n - n2) + " entries");
    jumps.assign(n - n2, 0);
    if (ini.has("domain.jumps")) {
      jumps = ini.get_int_list("domain.jumps");
      if (jumps.size() != periods.size()) throw ConfigError("domain.jumps length mismatch");
    }
  }
  std::vector<double> lambdas(n, 1.0);
  if (ini.has("domain.lambdas")) {
    lambdas = ini.get_double_list("domain.lambdas");
    if (static_cast<int>(lambdas.size()) != n) throw ConfigError("domain.lambdas length");
  }
  return DomainSpec::cylinder(n, lo, hi, periods, jumps, m, lambdas);
}

std::vector<double> alpha_doubles(const RotationVector& alpha) {
  std::vector<double> a;
  for (const auto& e : alpha.entries) a.push_back(e.to_double());
  return a;
}

int cmd_periodic(RunContext& ctx) {
  RotationVector alpha = rotation_from(ctx.ini);
  for (const auto& e : alpha.entries)
    if (!e.is_rational()) throw ConfigError("periodic pipeline needs a rational rotation");
  int m = static_cast<int>(ctx.ini.get_int("domain.m"));
  std::vector<double> lambdas;
  if (ctx.ini.has("domain.lambdas")) lambdas = ctx.ini.get_double_list("domain.lambdas");
  std::vector<int> fold;
  if (ctx.ini.has("domain.fold")) fold = ctx.ini.get_int_list("domain.fold");
  auto dom = periodic_domain_for(alpha, m, lambdas, fold);
  auto pot = potential_from(ctx.ini, alpha.n());

  ctx.sw.start("solve");
  auto csv = open_csv(ctx, "progress.csv");
  auto res = minimize_periodic(pot, alpha, dom, ctx.solver, nullptr, csv_progress(csv));
  ctx.sw.stop();

  write_field(ctx.path("minimizer.field"), res.field);
  write_json_file(ctx.path("solve.json"), solve_summary(res));

  ctx.sw.start("verify");
  VerificationReport rep;
  auto sys = make_direction_system(alpha, false);
  int bound = static_cast<int>(ctx.ini.get_int("verify.shift_bound", 3));
  rep.add(check_wsi(res.field, sys, bound, 10.0 * ctx.solver.residual_tol));
  rep.add(check_rotation_bound(res.field, alpha_doubles(alpha), 1e-6));
  ctx.sw.stop();
  json verj = to_json(rep);
  verj["direction_system"] = to_json(sys);
  write_json_file(ctx.path("verify.json"), verj);
  write_text(ctx.path("verify.txt"), render_table(rep));

  ctx.finish();
  return res.converged ? 0 : 3;
}

int cmd_lamination(RunContext& ctx) {
  RotationVector alpha = rotation_from(ctx.ini);
  int m = static_cast<int>(ctx.ini.get_int("domain.m"));
  auto pot = potential_from(ctx.ini, alpha.n());
  int depth = static_cast<int>(ctx.ini.get_int("lamination.depth", 4));
  int bound = static_cast<int>(ctx.ini.get_int("lamination.shift_bound", 6));
  double tol = ctx.ini.get_double("lamination.tol", 10.0 / m);
  GapDetectConfig gcfg;
  gcfg.persistence_step =
      static_cast<int>(ctx.ini.get_int("lamination.persistence_step", 2));

  ctx.sw.start("approximate");
  auto appr = approximate_recurrent(alpha, depth, pot, m, ctx.solver);
  ctx.sw.stop();

  {
    std::ofstream csv(ctx.path("stages.csv"));
    csv << "stage,energy,residual,converged,c0_delta\n";
    for (size_t s = 0; s < appr.stages.size(); ++s) {
      csv << (s + 1) << ',' << format_double(appr.stages[s].energy.total) << ','
          << format_double(appr.stages[s].residual) << ','
          << (appr.stages[s].converged ? 1 : 0) << ','
          << (s > 0 ? format_double(appr.c0_deltas[s - 1]) : "") << '\n';
    }
  }

  ctx.sw.start("gaps");
  auto orbit = build_orbit(appr.stages.back().field, bound);
  auto gaps = detect_gaps(orbit, tol, gcfg);
  ctx.sw.stop();

  {
    std::ofstream dat(ctx.path("orbit.dat"));
    for (size_t i = 0; i < orbit.sorted_values.size(); ++i)
      dat << i << ' ' << format_double(orbit.sorted_values[i]) << '\n';
  }
  std::vector<std::string> refs;
  for (size_t g = 0; g < gaps.gaps.size(); ++g) {
    auto pair = gap_representatives(orbit, gaps.gaps[g]);
    std::string lo = "gap" + std::to_string(g) + "_lower.field";
    std::string hi = "gap" + std::to_string(g) + "_upper.field";
    write_field(ctx.path(lo), pair.lower);
    write_field(ctx.path(hi), pair.upper);
    refs.push_back(lo);
    refs.push_back(hi);
  }
  write_json_file(ctx.path("gaps.json"), to_json(gaps, refs));
  write_field(ctx.path("recurrent.field"), appr.stages.back().field);

  ctx.finish();
  for (const auto& st : appr.stages)
    if (!st.converged) return 3;
  return 0;
}

Field init_field(RunContext& ctx, const std::string& kind, const ConstraintPair& pair,
                 long long k) {
  const DomainSpec& dom = pair.lower.domain();
  if (kind == "lower") return pair.lower;
  if (kind == "upper") return pair.upper;
  if (kind == "midpoint") {
    Field init(dom);
    for (long long i = 0; i < init.size(); ++i)
      init[i] = 0.5 * (pair.lower[i] + pair.upper[i]);
    return init;
  }
  if (kind == "random")
    return random_feasible(pair, ctx.solver.seed + static_cast<unsigned long long>(k));
  return field_from_source(kind, dom);
}

int cmd_j1(RunContext& ctx) {
  RotationVector alpha = rotation_from(ctx.ini);
  auto dom = base_domain(ctx.ini, alpha.n());
  auto pot = potential_from(ctx.ini, alpha.n());
  ConstraintPair pair{field_from_source(ctx.ini.get("j1.lower"), dom),
                      field_from_source(ctx.ini.get("j1.upper"), dom)};
  pair.validate();

  long long inits = ctx.ini.get_int("j1.inits", 1);
  std::string init_kind = ctx.ini.get("j1.init", "random");
  std::vector<SolveResult> results;
  bool all_converged = true;
  ctx.sw.start("solve");
  for (long long k = 0; k < inits; ++k) {
    Field init = init_field(ctx, init_kind, pair, k);
    auto csv = open_csv(ctx, "progress_" + std::to_string(k) + ".csv");
    auto res = minimize_J1(pot, pair, init, ctx.solver, csv_progress(csv));
    all_converged &= res.converged;
    write_field(ctx.path("minimizer_" + std::to_string(k) + ".field"), res.field);
    results.push_back(std::move(res));
  }
  ctx.sw.stop();

  json arr = json::array();
  for (const auto& r : results) arr.push_back(solve_summary(r));
  json solvej;
  solvej["runs"] = arr;

  // truncation check: re-solve the first run on the R+2 cylinder and report
  // the renormalized-energy difference (no extrapolation)
  if (dom.n2 > 0 && ctx.ini.get_int("j1.truncation_check", 1) != 0) {
    try {
      DomainSpec wide = dom;
      for (int d = 0; d < wide.n2; ++d) {
        wide.lo[d] -= 2;
        wide.hi[d] += 2;
      }
      ConstraintPair wpair{field_from_source(ctx.ini.get("j1.lower"), wide),
                           field_from_source(ctx.ini.get("j1.upper"), wide)};
      Field winit = init_field(ctx, init_kind, wpair, 0);
      auto wres = minimize_J1(pot, wpair, winit, ctx.solver);
      json tc;
      tc["energy"] = results.front().energy.total;
      tc["energy_wide"] = wres.energy.total;
      tc["delta"] = std::abs(wres.energy.total - results.front().energy.total);
      solvej["truncation_check"] = tc;
    } catch (const ConfigError& e) {
      solvej["truncation_check"] = std::string("unavailable: ") + e.what();
    }
  }
  write_json_file(ctx.path("solve.json"), solvej);

  ctx.sw.start("verify");
  VerificationReport rep;
  auto sys = make_direction_system(alpha, false);
  int bound = static_cast<int>(ctx.ini.get_int("verify.shift_bound", 3));
  rep.add(check_wsi(results.front().field, sys, bound, 10.0 * ctx.solver.residual_tol));
  std::vector<const Field*> fields;
  for (const auto& r : results) fields.push_back(&r.field);
  rep.add(check_ordered(fields, 1e-7));
  ctx.sw.stop();
  json verj = to_json(rep);
  verj["direction_system"] = to_json(sys);
  write_json_file(ctx.path("verify.json"), verj);
  write_text(ctx.path("verify.txt"), render_table(rep));

  ctx.finish();
  return all_converged ? 0 : 3;
}

// The Gamma_2 cylinder of a base domain: the first periodic direction is
// promoted to the truncated heteroclinic one, strips [-P, P+1].
DomainSpec j2_domain(const DomainSpec& base, int P) {
  if (base.n2 >= base.n) throw ConfigError("j2 needs a periodic direction to unroll");
  if (base.seam_jump.at(0) != 0)
    throw ConfigError("the heteroclinic direction must carry no seam jump");
  DomainSpec dom = base;
  dom.n2 += 1;
  dom.lo.push_back(-P);
  dom.hi.push_back(P + 1);
  dom.periods.erase(dom.periods.begin());
  dom.seam_jump.erase(dom.seam_jump.begin());
  return dom;
}

SolveResult solve_j2_at(RunContext& ctx, const DomainSpec& base, const PotentialSpec& pot,
                        int P, const ProgressFn& progress) {
  DomainSpec dom = j2_domain(base, P);
  ConstraintPair base_pair{field_from_source(ctx.ini.get("j2.lower"), base),
                           field_from_source(ctx.ini.get("j2.upper"), base)};
  base_pair.validate();
  ConstraintPair pair{extend_to_cylinder(base_pair.lower, dom),
                      extend_to_cylinder(base_pair.upper, dom)};

  std::string init_kind = ctx.ini.get("j2.init", "sharp");
  Field init(dom);
  if (init_kind == "sharp") {
    int sd = strip_dir(dom);
    for_each_node(dom, [&](long long flat, const std::vector<long long>& idx) {
      init[flat] = dom.coord(sd, idx[sd]) >= 0.5 ? pair.upper[flat] : pair.lower[flat];
    });
  } else {
    init = field_from_source(init_kind, dom);
  }
  return minimize_J2(pot, pair, init, ctx.solver, progress);
}

int cmd_j2(RunContext& ctx) {
  RotationVector alpha = rotation_from(ctx.ini);
  auto base = base_domain(ctx.ini, alpha.n());
  auto pot = potential_from(ctx.ini, alpha.n());
  int P = static_cast<int>(ctx.ini.get_int("j2.P"));
  DomainSpec dom = j2_domain(base, P);
  ConstraintPair pair{
      extend_to_cylinder(field_from_source(ctx.ini.get("j2.lower"), base), dom),
      extend_to_cylinder(field_from_source(ctx.ini.get("j2.upper"), base), dom)};

  ctx.sw.start("solve");
  auto csv = open_csv(ctx, "progress.csv");
  auto res = solve_j2_at(ctx, base, pot, P, csv_progress(csv));
  ctx.sw.stop();

  write_field(ctx.path("heteroclinic.field"), res.field);
  json solvej = solve_summary(res);
  if (ctx.ini.get_int("j2.truncation_check", 1) != 0) {
    ctx.sw.start("truncation_check");
    auto wide = solve_j2_at(ctx, base, pot, P + 2, nullptr);
    json tc;
    tc["energy"] = res.energy.total;
    tc["energy_wide"] = wide.energy.total;
    tc["delta"] = std::abs(wide.energy.total - res.energy.total);
    solvej["truncation_check"] = tc;
    ctx.sw.stop();
  }
  write_json_file(ctx.path("solve.json"), solvej);
  {
    int sd = strip_dir(dom);
    std::ofstream dat(ctx.path("strip_profile.dat"));
    for (int i = dom.lo[sd]; i < dom.hi[sd]; ++i)
      dat << i << ' ' << format_double(strip_L2(res.field, pair.lower, i)) << ' '
          << format_double(strip_L2(res.field, pair.upper, i)) << '\n';
  }

  ctx.sw.start("verify");
  VerificationReport rep;
  auto sys = make_direction_system(alpha, true);
  int bound = static_cast<int>(ctx.ini.get_int("verify.shift_bound", 3));
  rep.add(check_wsi(res.field, sys, bound, 10.0 * ctx.solver.residual_tol));
  rep.add(check_heteroclinic(res.field, pair, ctx.ini.get_double("verify.tol", 1e-3)));
  auto strip_rep = check_corollary_249(res.field, pair, pot,
                                       ctx.ini.get_double("verify.tol", 1e-3));
  rep.add(strip_rep.check);
  ctx.sw.stop();
  json verj = to_json(rep);
  verj["direction_system"] = to_json(sys);
  write_json_file(ctx.path("verify.json"), verj);
  write_text(ctx.path("verify.txt"), render_table(rep));

  ctx.finish();
  return res.converged ? 0 : 3;
}

int cmd_verify(RunContext& ctx) {
  auto paths = ctx.ini.get_list("verify.fields");
  std::vector<Field> fields;
  for (const auto& p : paths) {
    if (!fs::exists(p)) throw ConfigError("field file not found: " + p);
    fields.push_back(read_field(p));
  }
  auto checks = ctx.ini.get_list("verify.checks");
  double tol = ctx.ini.get_double("verify.tol", 1e-6);
  int bound = static_cast<int>(ctx.ini.get_int("verify.shift_bound", 3));

  VerificationReport rep;
  for (const auto& kind : checks) {
    if (kind == "wsi") {
      auto sys = make_direction_system(rotation_from(ctx.ini),
                                       ctx.ini.get_int("verify.with_second", 0) != 0);
      for (const auto& f : fields) rep.add(check_wsi(f, sys, bound, tol));
    } else if (kind == "ordered") {
      std::vector<const Field*> ptrs;
      for (const auto& f : fields) ptrs.push_back(&f);
      rep.add(check_ordered(ptrs, tol));
    } else if (kind == "rotation_bound") {
      auto a = alpha_doubles(rotation_from(ctx.ini));
      for (const auto& f : fields) rep.add(check_rotation_bound(f, a, tol));
    } else if (kind == "bangert") {
      if (fields.size() < 2) throw ConfigError("bangert check needs two fields");
      auto sys = make_direction_system(rotation_from(ctx.ini), false);
      double eps = ctx.ini.get_double("verify.eps_quad", 10.0 / fields[0].domain().m);
      rep.add(check_bangert_bound(fields[0], fields[1], sys, bound, eps));
    } else if (kind == "heteroclinic") {
      if (fields.size() < 3)
        throw ConfigError("heteroclinic check needs fields = U, lower, upper");
      ConstraintPair pair{fields[1], fields[2]};
      rep.add(check_heteroclinic(fields[0], pair, tol));
    } else if (kind == "strip_limits") {
      if (fields.size() < 3)
        throw ConfigError("strip_limits check needs fields = U, lower, upper");
      ConstraintPair pair{fields[1], fields[2]};
      auto pot = potential_from(ctx.ini, fields[0].domain().n);
      rep.add(check_corollary_249(fields[0], pair, pot, tol).check);
    } else {
      throw ConfigError("unknown check '" + kind + "'");
    }
  }
  write_json_file(ctx.path("verify.json"), to_json(rep));
  write_text(ctx.path("verify.txt"), render_table(rep));
  std::cout << render_table(rep);
  ctx.finish();
  return rep.overall ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mblab: minimal and without-self-intersection solutions of "
               "-Laplace u + F_u(x, u) = 0 by renormalized-energy minimization"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  long long seed = -1;
  app.add_option("--config", config_path, "run configuration (INI)")->required();
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "override [run] seed");

  std::map<std::string, int (*)(RunContext&)> pipelines = {
      {"periodic", cmd_periodic},  {"lamination", cmd_lamination},
      {"j1-gap", cmd_j1},          {"j2-heteroclinic", cmd_j2},
      {"verify", cmd_verify},
  };
  for (auto& [name, fn] : pipelines) app.add_subcommand(name)->fallthrough();

  CLI11_PARSE(app, argc, argv);
  std::string sub = app.get_subcommands().front()->get_name();

  try {
    RunContext ctx{Ini::parse_file(config_path)};
    if (ctx.ini.has("run.pipeline") && ctx.ini.get("run.pipeline") != sub)
      throw ConfigError("config pipeline '" + ctx.ini.get("run.pipeline") +
                        "' does not match subcommand '" + sub + "'");
    ctx.out = out_dir;
    fs::create_directories(ctx.out);
    ctx.solver = solver_from(ctx.ini, static_cast<unsigned long long>(seed), seed >= 0);
    return pipelines.at(sub)(ctx);
  } catch (const GapConditionViolated& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const RationalInput& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
