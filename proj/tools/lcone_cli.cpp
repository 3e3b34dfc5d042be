// lcone_cli: generate, analyze, transform, flow and verify lightcone cross sections.
//
// Exit codes: 0 success; 1 an unflagged check failed; 2 usage error;
// 3 unreadable or malformed input; 4 numerical failure.

#include <CLI11.hpp>

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "lcone/lcone.hpp"

namespace {

using lcone::Json;

constexpr int kExitCheckFailed = 1;
constexpr int kExitUsage = 2;
constexpr int kExitInput = 3;
constexpr int kExitNumeric = 4;

struct Options {
  std::string command;
  int bandlimit = 48;
  std::uint64_t seed = 0;
  std::string input;
  std::string output;
  std::string final_output;
  bool print = false;
  int threads = 1;
  // generate
  std::string kind = "round";
  double rho = 1.0;
  std::string boost;
  std::string rotate;
  double s = 0.05;
  int l = 2;
  int m = 0;
  double amplitude = 0.3;
  int generation_degree = 12;
  // flow
  double dt = 1e-2;
  double t_max = 1.0;
  bool normalized = false;
  double cfl = 0.5;
  double stop_tol = 0.0;
  int max_steps = 200000;
  // verify / optimality / compactness
  std::string suite = "all";
  int n = 0;
  std::vector<double> c_values;
  std::vector<int> l_values;
  double s_max = 1e-2;
  std::string reference = "published";
  std::string mode = "convergent";
  double step = 0.2;
};

class UsageError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, std::size_t expected, const char* flag) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse \"" + item + "\"");
    }
  }
  if (out.size() != expected)
    throw UsageError(std::string(flag) + " expects " + std::to_string(expected) + " comma-separated numbers");
  return out;
}

lcone::LorentzMatrix transform_from(const Options& o) {
  lcone::LorentzMatrix lambda;
  if (!o.rotate.empty()) {
    const auto r = parse_list(o.rotate, 4, "--rotate");
    lambda = lcone::LorentzMatrix::spatial_rotation(lcone::axis_angle_rotation(Eigen::Vector3d(r[0], r[1], r[2]), r[3]));
  }
  if (!o.boost.empty()) {
    const auto a = parse_list(o.boost, 3, "--boost");
    lambda = lcone::boost_toward(Eigen::Vector3d(a[0], a[1], a[2])) * lambda;
  }
  return lambda;
}

void log(const std::string& msg) { std::cerr << msg << '\n'; }

// Writes to --output (if given) and to stdout with --print.
void emit(const Options& o, const std::string& text, const std::string& path) {
  if (!path.empty()) {
    lcone::write_text_file(path, text);
    log("wrote " + path);
  }
  if (o.print) std::cout << text;
}

void require_output(const Options& o) {
  if (o.output.empty() && !o.print) throw UsageError(o.command + " needs --output or --print");
}

void require_input(const Options& o) {
  if (o.input.empty()) throw UsageError(o.command + " needs --input");
}

// Evaluates f(0..n-1) on `threads` workers; results keep index order.
template <typename F>
auto parallel_map(int n, int threads, F f) -> std::vector<decltype(f(0))> {
  std::vector<decltype(f(0))> out(n);
  threads = std::max(1, std::min(threads, n));
  if (threads == 1) {
    for (int i = 0; i < n; ++i) out[i] = f(i);
    return out;
  }
  std::vector<std::exception_ptr> errors(threads);
  std::vector<std::thread> pool;
  for (int w = 0; w < threads; ++w)
    pool.emplace_back([&, w] {
      try {
        for (int i = w; i < n; i += threads) out[i] = f(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  for (auto& t : pool) t.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

lcone::RandomSectionParams random_params(const Options& o) {
  lcone::RandomSectionParams p;
  p.bandlimit = o.bandlimit;
  p.generation_degree = o.generation_degree;
  p.amplitude = o.amplitude;
  return p;
}

int cmd_generate(const Options& o) {
  require_output(o);
  Json meta{{"kind", o.kind}, {"seed", o.seed}};
  auto section = [&]() -> lcone::CrossSection {
    try {
      if (o.kind == "round") {
        meta["rho"] = o.rho;
        return lcone::round_section(o.bandlimit, o.rho);
      }
      if (o.kind == "boosted-round") {
        const auto a = o.boost.empty() ? std::vector<double>{0, 0, 0} : parse_list(o.boost, 3, "--boost");
        meta["rho"] = o.rho;
        meta["boost"] = a;
        return lcone::boosted_round(o.bandlimit, o.rho, Eigen::Vector3d(a[0], a[1], a[2]));
      }
      if (o.kind == "perturbed") {
        meta["s"] = o.s;
        meta["l"] = o.l;
        meta["m"] = o.m;
        return lcone::perturbed_section(o.bandlimit, o.s, o.l, o.m);
      }
      if (o.kind == "random") {
        meta["amplitude"] = o.amplitude;
        meta["generation_degree"] = o.generation_degree;
        return lcone::random_section(o.seed, random_params(o));
      }
    } catch (const lcone::Error& e) {
      if (e.kind() == lcone::ErrorKind::SRangeTooLarge || e.kind() == lcone::ErrorKind::DegenerateSection ||
          e.kind() == lcone::ErrorKind::InvalidReferenceVector)
        throw lcone::Error(lcone::ErrorKind::GenerationFailed, e.what());
      throw;
    }
    throw UsageError("unknown --kind " + o.kind);
  }();
  meta["bandlimit"] = o.bandlimit;
  emit(o, lcone::dump_json(lcone::section_to_json(section, meta)), o.output);
  return 0;
}

int cmd_analyze(const Options& o) {
  require_input(o);
  require_output(o);
  const auto loaded = lcone::load_section(o.input);
  auto report = lcone::to_json(lcone::geometry_report(loaded.section));
  report["seed"] = o.seed;
  emit(o, lcone::dump_json(report), o.output);
  return 0;
}

int cmd_boost(const Options& o) {
  require_input(o);
  require_output(o);
  if (o.boost.empty() && o.rotate.empty()) throw UsageError("boost needs --boost and/or --rotate");
  const auto loaded = lcone::load_section(o.input);
  const auto lambda = transform_from(o);
  const auto mapped = lcone::apply_to_section_with_residual(lambda, loaded.section);
  Json meta = loaded.meta;
  meta["lambda"] = lcone::to_json(lambda);
  meta["tail_energy"] = mapped.tail_energy;
  meta["seed"] = o.seed;
  if (mapped.tail_energy > 1e-6) log("warning: tail energy " + lcone::format_real(mapped.tail_energy) + " above 1e-6");
  emit(o, lcone::dump_json(lcone::section_to_json(mapped.section, meta)), o.output);
  return 0;
}

int cmd_balance(const Options& o) {
  require_input(o);
  require_output(o);
  const auto loaded = lcone::load_section(o.input);
  const auto b = lcone::balance(loaded.section);
  Json meta = loaded.meta;
  meta["lambda"] = lcone::to_json(b.lambda);
  meta["iterations"] = b.iterations;
  meta["residual"] = b.residual;
  meta["seed"] = o.seed;
  log("balanced in " + std::to_string(b.iterations) + " iteration(s), residual " + lcone::format_real(b.residual));
  emit(o, lcone::dump_json(lcone::section_to_json(b.section, meta)), o.output);
  return 0;
}

int cmd_flow(const Options& o) {
  require_input(o);
  require_output(o);
  const auto loaded = lcone::load_section(o.input);
  lcone::FlowConfig cfg;
  cfg.dt_initial = o.dt;
  cfg.t_max = o.t_max;
  cfg.normalized = o.normalized;
  cfg.cfl_safety = o.cfl;
  cfg.stop_tracefree_tol = o.stop_tol;
  cfg.max_steps = o.max_steps;
  const auto run = lcone::run(loaded.section, cfg);
  log("flow " + std::string(lcone::to_string(run.status)) + " after " + std::to_string(run.states.size() - 1) +
      " steps, t = " + lcone::format_real(run.states.back().t) + (run.message.empty() ? "" : " (" + run.message + ")"));
  emit(o, lcone::flow_csv(run), o.output);
  if (!o.final_output.empty()) {
    Json meta = loaded.meta;
    meta["flow_status"] = lcone::to_string(run.status);
    meta["t"] = run.states.back().t;
    meta["normalized"] = o.normalized;
    meta["seed"] = o.seed;
    lcone::write_text_file(o.final_output, lcone::dump_json(lcone::section_to_json(run.states.back().section, meta)));
    log("wrote " + o.final_output);
  }
  switch (run.status) {
    case lcone::FlowStatus::Completed:
    case lcone::FlowStatus::Converged: return 0;
    default: return kExitNumeric;
  }
}

struct Check {
  std::string name;
  double value = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

Json to_json(const Check& c) {
  return Json{{"name", c.name}, {"value", c.value}, {"tolerance", c.tolerance}, {"passed", c.passed}};
}

Check at_most(std::string name, double value, double tol) { return {std::move(name), value, tol, value <= tol}; }

std::vector<Check> identity_checks(const lcone::CrossSection& s) {
  std::vector<Check> out;
  out.push_back(at_most("gauss_bonnet", std::abs(s.int_h2() / (16.0 * lcone::kPi) - 1.0), 1e-8));
  out.push_back(at_most("codazzi", s.codazzi_residual(), 1e-6));
  const auto gap = lcone::tracefree_gap(s);
  out.push_back({"gap_chain", gap.chain_error, 1e-8 * std::abs(gap.lhs_decomposition) + 1e-12 * lcone::k128Pi2, gap.chain_consistent});
  out.push_back(at_most("mean_h2_area_radius", gap.mean_h2_error, 1e-8));
  out.push_back(at_most("schur_gap_identity", lcone::almost_schur(s).identity_error, 1e-9));
  const auto b = lcone::bochner_chain(s);
  out.push_back(at_most("bochner_equality_link", b.equality_error, 1e-6));
  out.push_back(at_most("bochner_identity_link", b.bochner_error, 1e-6));
  out.push_back(at_most("poisson_residual", b.poisson_residual, 1e-7));
  out.push_back(at_most("cauchy_schwarz", b.pairing - b.cauchy_schwarz, 1e-12 * std::max(b.cauchy_schwarz, 1.0)));
  const auto rc = lcone::radius_comparison(s);
  out.push_back({"area_radius_le_rz", rc.gap, -1e-10 * rc.r, rc.gap >= -1e-10 * rc.r});
  return out;
}

std::vector<Check> equivariance_checks(const lcone::CrossSection& s, const lcone::LorentzMatrix& lambda) {
  const auto image = lcone::apply_to_section(lambda, s);
  const auto expected = lambda * lcone::z_vector(s);
  const double z_err = (lcone::z_vector(image).p - expected.p).cwiseAbs().maxCoeff();
  const double k0 = lcone::k_defect_on_surface(s);
  const double k1 = lcone::k_defect_on_surface(image);
  std::vector<Check> out;
  out.push_back(at_most("z_vector", z_err, 1e-7));
  out.push_back(at_most("area", std::abs(image.area() / s.area() - 1.0), 1e-8));
  out.push_back(at_most("k_defect", std::abs(k1 - k0) / std::max(k0, 1e-12), 1e-6));
  return out;
}

lcone::LorentzMatrix suite_transform(std::uint64_t seed, int i) {
  std::mt19937_64 rng(lcone::derive_seed(seed, 1000000 + i));
  static constexpr double kMagnitudes[] = {0.2, 0.6, 1.0};
  const auto a = lcone::random_vector(rng, kMagnitudes[i % 3]);
  const auto axis = lcone::random_vector(rng, 1.0);
  std::uniform_real_distribution<double> angle(0.0, 2.0 * lcone::kPi);
  return lcone::boost_toward(a) * lcone::LorentzMatrix::spatial_rotation(lcone::axis_angle_rotation(axis, angle(rng)));
}

int cmd_verify(const Options& o) {
  require_output(o);
  static const std::vector<std::string> kSuites = {"identities", "inequalities", "equivariance"};
  std::vector<std::string> suites;
  if (o.suite == "all")
    suites = kSuites;
  else if (std::find(kSuites.begin(), kSuites.end(), o.suite) != kSuites.end())
    suites = {o.suite};
  else
    throw UsageError("unknown --suite " + o.suite);
  const int n = o.n > 0 ? o.n : 50;
  const auto params = random_params(o);

  Json result{{"suite", o.suite}, {"seed", o.seed}, {"n", n}, {"bandlimit", o.bandlimit}};
  int n_pass = 0, n_fail = 0, n_flagged = 0;
  double max_ratio = 0.0;
  for (const auto& suite : suites) {
    log("suite " + suite + ": " + std::to_string(n) + " sections");
    Json entries = Json::array();
    if (suite == "inequalities") {
      auto reports = parallel_map(n, o.threads, [&](int i) {
        const auto s = lcone::random_section(lcone::derive_seed(o.seed, i), params);
        const auto h = lcone::hoelder_lemma(s.geometry().h2, lcone::pointwise([](double w) { return w * w; }, s.geometry().omega));
        return std::vector<lcone::InequalityReport>{lcone::tracefree_gap(s).report, lcone::almost_schur(s).report, h.report};
      });
      // sharpness witnesses: STCMC and high-degree small perturbations
      reports.push_back({lcone::tracefree_gap(lcone::boosted_round(o.bandlimit, 1.0, Eigen::Vector3d(0.3, -0.2, 0.5))).report});
      for (int l : {4, 8, 12})
        if (l <= o.bandlimit) reports.push_back({lcone::tracefree_gap(lcone::perturbed_section(o.bandlimit, 1e-3, l, 0)).report});
      static const char* kNames[] = {"tracefree_gap", "almost_schur", "hoelder"};
      for (std::size_t i = 0; i < reports.size(); ++i)
        for (std::size_t k = 0; k < reports[i].size(); ++k) {
          const auto& r = reports[i][k];
          auto j = lcone::to_json(r);
          j["check"] = kNames[k];
          j["section"] = static_cast<int>(i);
          entries.push_back(j);
          if (r.hypothesis_violated) {
            ++n_flagged;
            continue;
          }
          r.passed ? ++n_pass : ++n_fail;
          if (k == 0) max_ratio = std::max(max_ratio, r.ratio);
        }
    } else {
      auto checks = parallel_map(n, o.threads, [&](int i) {
        const auto s = lcone::random_section(lcone::derive_seed(o.seed, i), params);
        return suite == "identities" ? identity_checks(s) : equivariance_checks(s, suite_transform(o.seed, i));
      });
      for (std::size_t i = 0; i < checks.size(); ++i)
        for (const auto& c : checks[i]) {
          auto j = to_json(c);
          j["section"] = static_cast<int>(i);
          entries.push_back(j);
          c.passed ? ++n_pass : ++n_fail;
        }
    }
    result[suite] = entries;
  }
  result["summary"] = Json{{"n_pass", n_pass}, {"n_fail", n_fail}, {"n_flagged", n_flagged}, {"max_ratio", max_ratio}, {"seed", o.seed}};
  log("pass " + std::to_string(n_pass) + ", fail " + std::to_string(n_fail) + ", flagged " + std::to_string(n_flagged));
  emit(o, lcone::dump_json(result), o.output);
  return n_fail == 0 ? 0 : kExitCheckFailed;
}

int cmd_optimality(const Options& o) {
  require_output(o);
  if (o.reference != "published" && o.reference != "expansion") throw UsageError("--reference must be published or expansion");
  const auto cs = o.c_values.empty() ? std::vector<double>{1.0, 1.5, 2.0, 3.0} : o.c_values;
  std::vector<int> ls = o.l_values;
  if (ls.empty())
    for (int l = 1; l <= 8; ++l) ls.push_back(l);
  const int n = o.n > 0 ? o.n : 5;
  Json scans = Json::array();
  int n_fail = 0;
  for (double c : cs)
    for (int l : ls) {
      const auto scan = lcone::optimality_scan(c, l, std::min(o.m, l), o.s_max, n, std::min(o.bandlimit, 32));
      const double err = o.reference == "published" ? scan.relative_error : scan.relative_error_expansion;
      auto j = lcone::to_json(scan);
      j["passed"] = err <= 1e-2;
      if (err > 1e-2) ++n_fail;
      scans.push_back(j);
    }
  Json result{{"reference", o.reference}, {"seed", o.seed}, {"scans", scans}, {"n_fail", n_fail}};
  log("optimality: " + std::to_string(n_fail) + " of " + std::to_string(scans.size()) + " scans off the " + o.reference + " formula by > 1e-2");
  emit(o, lcone::dump_json(result), o.output);
  return n_fail == 0 ? 0 : kExitCheckFailed;
}

int cmd_compactness(const Options& o) {
  require_output(o);
  const int n = o.n > 0 ? o.n : 6;
  lcone::CompactnessSeries series;
  bool ok = true;
  if (o.mode == "convergent") {
    series = lcone::convergent_sequence(n, o.seed, o.bandlimit);
    for (std::size_t k = 1; k < series.terms.size(); ++k) ok = ok && series.terms[k].w22_to_limit < series.terms[k - 1].w22_to_limit;
    ok = ok && series.terms.back().w22_to_limit < series.terms.front().w22_to_limit / 10.0;
  } else if (o.mode == "divergent") {
    series = lcone::divergent_family(n, o.step, o.bandlimit);
    for (std::size_t k = 0; k < series.terms.size(); ++k) {
      ok = ok && series.terms[k].tracefree_norm <= 1e-8;
      if (k > 0) ok = ok && series.terms[k].c0_step >= 0.1;
    }
  } else {
    throw UsageError("unknown --mode " + o.mode);
  }
  series.seed = o.seed;
  auto j = lcone::to_json(series);
  j["passed"] = ok;
  emit(o, lcone::dump_json(j), o.output);
  return ok ? 0 : kExitCheckFailed;
}

void validate_paths(const Options& o) {
  if (!o.input.empty() && !std::filesystem::is_regular_file(o.input)) throw UsageError("--input " + o.input + " is not a readable file");
  for (const auto& path : {o.output, o.final_output}) {
    if (path.empty()) continue;
    const auto dir = std::filesystem::path(path).parent_path();
    if (!dir.empty() && !std::filesystem::is_directory(dir)) throw UsageError("directory of " + path + " does not exist");
  }
}

int dispatch(const Options& o) {
  validate_paths(o);
  if (o.command == "generate") return cmd_generate(o);
  if (o.command == "analyze") return cmd_analyze(o);
  if (o.command == "boost") return cmd_boost(o);
  if (o.command == "balance") return cmd_balance(o);
  if (o.command == "flow") return cmd_flow(o);
  if (o.command == "verify") return cmd_verify(o);
  if (o.command == "optimality") return cmd_optimality(o);
  return cmd_compactness(o);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Lightcone cross sections: spectral geometry, Lorentz action, null mean curvature flow, estimates"};
  Options o;
  app.set_config("--config", "", "key = value file supplying any long flag; command line wins");
  app.add_option("command", o.command, "generate | analyze | boost | balance | flow | verify | optimality | compactness")
      ->required()
      ->check(CLI::IsMember({"generate", "analyze", "boost", "balance", "flow", "verify", "optimality", "compactness"}));
  app.add_option("--bandlimit", o.bandlimit, "spectral bandlimit L (>= 4)")->check(CLI::Range(4, 512));
  app.add_option("--seed", o.seed, "master seed");
  app.add_option("--input", o.input, "input section file");
  app.add_option("--output", o.output, "output file");
  app.add_option("--final", o.final_output, "flow: final section file");
  app.add_flag("--print", o.print, "also write the result to stdout");
  app.add_option("--threads", o.threads, "verify: worker threads")->check(CLI::Range(1, 256));
  app.add_option("--kind", o.kind, "generate: round | boosted-round | perturbed | random");
  app.add_option("--rho", o.rho, "generate: radius");
  app.add_option("--boost", o.boost, "boost vector ax,ay,az");
  app.add_option("--rotate", o.rotate, "rotation ux,uy,uz,angle");
  app.add_option("--s", o.s, "generate perturbed: amplitude s");
  app.add_option("--l", o.l, "generate perturbed: degree");
  app.add_option("--m", o.m, "perturbed/optimality: order");
  app.add_option("--amplitude", o.amplitude, "generate random: c in omega = exp(c u)");
  app.add_option("--generation-degree", o.generation_degree, "generate random: top degree of u");
  app.add_option("--dt", o.dt, "flow: initial step");
  app.add_option("--t-max", o.t_max, "flow: final time");
  app.add_flag("--normalized", o.normalized, "flow: keep the area radius fixed");
  app.add_option("--cfl", o.cfl, "flow: safety factor in (0, 1]");
  app.add_option("--stop-tol", o.stop_tol, "flow: stop once ||A_tf|| drops below this (normalized)");
  app.add_option("--max-steps", o.max_steps, "flow: step limit");
  app.add_option("--suite", o.suite, "verify: identities | inequalities | equivariance | all");
  app.add_option("--n", o.n, "verify: sections; optimality: s-samples; compactness: terms");
  app.add_option("--c", o.c_values, "optimality: constants C")->delimiter(',');
  app.add_option("--degrees", o.l_values, "optimality: degrees l")->delimiter(',');
  app.add_option("--s-max", o.s_max, "optimality: half-width of the s range");
  app.add_option("--reference", o.reference, "optimality: published | expansion");
  app.add_option("--mode", o.mode, "compactness: convergent | divergent");
  app.add_option("--step", o.step, "compactness divergent: spacing of k");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    std::cerr << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    return dispatch(o);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const lcone::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    switch (e.kind()) {
      case lcone::ErrorKind::ParseError:
      case lcone::ErrorKind::InvalidInput: return kExitInput;
      default: return kExitNumeric;
    }
  }
}
