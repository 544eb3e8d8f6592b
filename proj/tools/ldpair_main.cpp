// ldpair command-line front end. Subcommands map one-to-one onto library
// operations; every run writes machine-readable output stamped with a digest
// of its effective configuration, so identical (config, seed) pairs produce
// byte-identical files.
//
// Exit codes: 0 success, 1 numerical/assertion failure (diagnostic names the
// violated invariant), 2 configuration or parse error.

#include <CLI11.hpp>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "ldpair/energy.hpp"
#include "ldpair/experiment.hpp"
#include "ldpair/io.hpp"
#include "ldpair/kernel.hpp"
#include "ldpair/measure.hpp"
#include "ldpair/properties.hpp"
#include "ldpair/sampler.hpp"
#include "ldpair/specparse.hpp"
#include "ldpair/varadhan.hpp"

namespace {

using ldpair::json;

// A numerical result violated a stated invariant: exit 1, not 2.
struct NumericalFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Options {
  std::string out;            // output stem; default <out_dir>/<command>
  std::string out_dir = ".";  // overridden by $LDPAIR_OUT_DIR
  std::string format = "csv";
  std::uint64_t seed = 1;
  unsigned workers = 0;  // 0 = hardware concurrency

  std::string stem(const std::string& command) const {
    return out.empty() ? out_dir + "/" + command : out;
  }
};

// Canonical key=value form of the effective configuration; its digest is the
// reproducibility stamp embedded in every output.
std::string canonical(const std::string& command,
                      const std::vector<std::pair<std::string, std::string>>& kv) {
  std::string s = "command=" + command;
  for (const auto& [k, v] : kv) s += "|" + k + "=" + v;
  return s;
}

void emit(const Options& opt, const std::string& command, const std::string& digest,
          const std::optional<std::string>& csv, const json& j) {
  const std::string stem = opt.stem(command);
  if (csv && opt.format == "csv")
    ldpair::write_text(stem + ".csv", "# config=" + digest + "\n" + *csv);
  ldpair::write_text(stem + ".json", j.dump(2) + "\n");
  std::cout << "config_digest " << digest << "\n";
}

json base_record(const Options& opt, const std::string& digest) {
  return json{{"config_digest", digest}, {"seed", opt.seed}};
}

// ---- subcommand bodies -------------------------------------------------------

int run_check_kernel(const Options& opt, const std::string& kernel_spec,
                     const std::string& alphas_s, int nodes) {
  const ldpair::InteractionKernel kern = ldpair::parse_kernel(kernel_spec);
  const std::vector<double> alphas = ldpair::parse_double_list(alphas_s);
  const ldpair::AssumptionReport rep =
      ldpair::check_assumptions(kern, alphas, {nodes});
  const std::string digest = ldpair::digest_hex(canonical(
      "check-kernel", {{"kernel", kernel_spec}, {"alphas", alphas_s},
                       {"nodes", std::to_string(nodes)}}));
  json j = base_record(opt, digest);
  j["kernel"] = kern.spec;
  j["report"] = ldpair::assumption_to_json(rep);
  emit(opt, "check-kernel", digest, std::nullopt, j);
  const ldpair::Verdict all[] = {rep.a1, rep.a2, rep.a3, rep.a4, rep.a5};
  for (int i = 0; i < 5; ++i)
    std::cout << "A" << (i + 1) << ": " << ldpair::verdict_name(all[i]) << "\n";
  for (int i = 0; i < 5; ++i)
    if (all[i] == ldpair::Verdict::fail)
      throw NumericalFailure("assumption A" + std::to_string(i + 1) +
                             " failed for kernel " + kern.spec);
  return 0;
}

int run_i0(const Options& opt, const std::string& kernel_spec, double tol) {
  const ldpair::InteractionKernel kern = ldpair::parse_kernel(kernel_spec);
  const ldpair::InfimumResult inf = ldpair::infimum_k(kern, tol);
  const std::string digest = ldpair::digest_hex(
      canonical("i0", {{"kernel", kernel_spec}, {"tol", ldpair::fmt(tol)}}));
  json j = base_record(opt, digest);
  j["kernel"] = kern.spec;
  j["value"] = inf.value;
  j["argmin"] = {inf.x, inf.y};
  j["tolerance"] = tol;
  emit(opt, "i0", digest, std::nullopt, j);
  std::cout << "I0 = " << ldpair::fmt(inf.value) << " at (" << ldpair::fmt(inf.x)
            << ", " << ldpair::fmt(inf.y) << ") +- " << ldpair::fmt(tol) << "\n";
  return 0;
}

int run_rate(const Options& opt, const std::string& kernel_spec,
             const std::string& nu_path, const std::string& nu2_path) {
  const ldpair::RateContext ctx = ldpair::make_context(ldpair::parse_kernel(kernel_spec));
  const ldpair::AtomicMeasure nu = ldpair::atomic_from_csv_file(nu_path);
  const ldpair::AtomicMeasure nu2 =
      nu2_path.empty() ? nu : ldpair::atomic_from_csv_file(nu2_path);
  const double value = ldpair::rate(ctx, {nu, nu2});
  const std::string mdigest =
      ldpair::digest_hex(ldpair::atomic_to_csv(nu) + ldpair::atomic_to_csv(nu2));
  const std::string digest = ldpair::digest_hex(canonical(
      "rate", {{"kernel", kernel_spec}, {"measures", mdigest}}));
  json j = base_record(opt, digest);
  j["kernel"] = ctx.kernel.spec;
  j["measure_digest"] = mdigest;
  j["value"] = value;
  j["value_text"] = ldpair::fmt(value);
  j["tolerance"] = ctx.I0_tol;
  emit(opt, "rate", digest, std::nullopt, j);
  std::cout << "rate = " << ldpair::fmt(value) << "\n";
  return 0;
}

int run_marginal_rate(const Options& opt, const std::string& kernel_spec,
                      const std::string& nu_path, double tol) {
  const ldpair::RateContext ctx = ldpair::make_context(ldpair::parse_kernel(kernel_spec));
  const ldpair::AtomicMeasure nu = ldpair::atomic_from_csv_file(nu_path);
  const double value = ldpair::marginal_rate(ctx, nu, tol);
  const std::string mdigest = ldpair::digest_hex(ldpair::atomic_to_csv(nu));
  const std::string digest = ldpair::digest_hex(canonical(
      "marginal-rate",
      {{"kernel", kernel_spec}, {"measure", mdigest}, {"tol", ldpair::fmt(tol)}}));
  json j = base_record(opt, digest);
  j["kernel"] = ctx.kernel.spec;
  j["measure_digest"] = mdigest;
  j["value"] = value;
  j["tolerance"] = tol;
  emit(opt, "marginal-rate", digest, std::nullopt, j);
  std::cout << "marginal_rate = " << ldpair::fmt(value) << "\n";
  return 0;
}

int run_average_rate(const Options& opt, const std::string& kernel_spec,
                     const std::string& nu_path) {
  const ldpair::RateContext ctx = ldpair::make_context(ldpair::parse_kernel(kernel_spec));
  const ldpair::AtomicMeasure nu = ldpair::atomic_from_csv_file(nu_path);
  const ldpair::AverageRateResult res = ldpair::average_rate(ctx, nu);
  const std::string mdigest = ldpair::digest_hex(ldpair::atomic_to_csv(nu));
  const std::string digest = ldpair::digest_hex(canonical(
      "average-rate", {{"kernel", kernel_spec}, {"measure", mdigest}}));
  json j = base_record(opt, digest);
  j["kernel"] = ctx.kernel.spec;
  j["measure_digest"] = mdigest;
  j["value"] = res.value;
  j["value_text"] = ldpair::fmt(res.value);
  j["negdef_warning"] = res.negdef_warning;
  j["tolerance"] = ctx.I0_tol;
  emit(opt, "average-rate", digest, std::nullopt, j);
  std::cout << "average_rate = " << ldpair::fmt(res.value)
            << (res.negdef_warning ? "  (warning: kernel failed the negative-definiteness probe)"
                                   : "")
            << "\n";
  return 0;
}

int run_negdef(const Options& opt, const std::string& kernel_spec, int trials,
               int points) {
  const ldpair::InteractionKernel kern = ldpair::parse_kernel(kernel_spec);
  const ldpair::NegdefResult res =
      ldpair::negdef_check(kern, trials, points, opt.seed);
  const std::string digest = ldpair::digest_hex(canonical(
      "negdef", {{"kernel", kernel_spec},
                 {"trials", std::to_string(trials)},
                 {"points", std::to_string(points)},
                 {"seed", std::to_string(opt.seed)}}));
  json j = base_record(opt, digest);
  j["kernel"] = kern.spec;
  j["pass"] = res.pass;
  if (res.witness) {
    j["witness"] = {{"points", res.witness->points},
                    {"coefficients", res.witness->coeffs},
                    {"value", res.witness->value}};
  }
  emit(opt, "negdef", digest, std::nullopt, j);
  std::cout << "negative_definite: " << (res.pass ? "pass" : "violated") << "\n";
  if (res.witness)
    std::cout << "witness value " << ldpair::fmt(res.witness->value) << "\n";
  return 0;
}

json measure_json(const ldpair::AtomicMeasure& nu) { return ldpair::atomic_to_json(nu); }

int run_varadhan(const Options& opt, const std::string& kernel_spec,
                 const std::vector<std::string>& functional_specs,
                 const std::string& support_s, const std::string& support_y_s,
                 int restarts, int iters, double step0, const std::string& mu0_path,
                 const std::string& b_list, const std::string& fclamp,
                 const std::string& gclamp) {
  const ldpair::RateContext ctx = ldpair::make_context(ldpair::parse_kernel(kernel_spec));
  ldpair::SimplexGrid grid;
  grid.support = ldpair::parse_double_list(support_s);
  if (!support_y_s.empty()) grid.support_y = ldpair::parse_double_list(support_y_s);
  grid.restarts = restarts;
  grid.max_iters = iters;
  grid.step0 = step0;
  grid.seed = opt.seed;

  if (!mu0_path.empty()) {  // divergence mode: Phi_b duality bounds
    const ldpair::BivariateAtomic mu0 = ldpair::bivariate_from_csv_file(mu0_path);
    const auto fr = ldpair::parse_double_list(fclamp);
    const auto gr = ldpair::parse_double_list(gclamp);
    if (fr.size() != 2 || gr.size() != 2)
      throw std::invalid_argument("--F-clamp/--G-clamp need lo,hi");
    const auto F = [fr](double u) { return std::clamp(u, fr[0], fr[1]); };
    const auto G = [gr](double u) { return std::clamp(u, gr[0], gr[1]); };
    const std::vector<double> bs = ldpair::parse_double_list(b_list);
    const auto rows = ldpair::nonproduct_divergence(ctx, mu0, F, G, bs, grid);
    const std::string digest = ldpair::digest_hex(canonical(
        "varadhan", {{"kernel", kernel_spec}, {"mu0", mu0_path}, {"b", b_list},
                     {"support", support_s}, {"support_y", support_y_s},
                     {"seed", std::to_string(opt.seed)}}));
    std::string csv = "b,delta,lower_bound\n";
    json jrows = json::array();
    for (const auto& r : rows) {
      csv += ldpair::fmt(r.b) + "," + ldpair::fmt(r.delta) + "," +
             ldpair::fmt(r.lower_bound) + "\n";
      jrows.push_back(json{{"b", r.b}, {"delta", r.delta}, {"lower_bound", r.lower_bound}});
      std::cout << "b=" << ldpair::fmt(r.b)
                << " lower_bound=" << ldpair::fmt(r.lower_bound) << "\n";
    }
    json j = base_record(opt, digest);
    j["kernel"] = ctx.kernel.spec;
    j["rows"] = jrows;
    emit(opt, "varadhan", digest, csv, j);
    return 0;
  }

  const ldpair::MinFunctional f = ldpair::parse_functional(functional_specs);
  const ldpair::SupResult sup = ldpair::varadhan_sup(ctx.kernel, f, grid);
  const double L = sup.value + ctx.I0;
  const std::string digest = ldpair::digest_hex(canonical(
      "varadhan",
      {{"kernel", kernel_spec}, {"support", support_s}, {"support_y", support_y_s},
       {"restarts", std::to_string(restarts)}, {"iters", std::to_string(iters)},
       {"step0", ldpair::fmt(step0)}, {"seed", std::to_string(opt.seed)},
       {"functionals", [&] {
          std::string s;
          for (const auto& c : functional_specs) s += c + ";";
          return s;
        }()}}));
  json j = base_record(opt, digest);
  j["kernel"] = ctx.kernel.spec;
  j["sup_phi_minus_K"] = sup.value;
  j["L_of_phi"] = L;
  j["I0"] = ctx.I0;
  j["iteration_limit"] = sup.iteration_limit;
  j["argmax"] = {{"left", measure_json(sup.argmax.left)},
                 {"right", measure_json(sup.argmax.right)}};
  emit(opt, "varadhan", digest, std::nullopt, j);
  std::cout << "sup(Phi - K) = " << ldpair::fmt(sup.value) << "\n"
            << "L(Phi) = " << ldpair::fmt(L) << "\n";
  if (sup.iteration_limit)
    std::cout << "warning: iteration limit reached; value is the best certificate so far\n";
  return 0;
}

int run_sample(const Options& opt, const std::string& kernel_spec, int n,
               std::uint64_t replica, long mcmc_steps, long mcmc_burnin,
               double mcmc_scale, long mcmc_thin) {
  const ldpair::InteractionKernel kern = ldpair::parse_kernel(kernel_spec);
  const std::string digest = ldpair::digest_hex(canonical(
      "sample", {{"kernel", kernel_spec}, {"n", std::to_string(n)},
                 {"seed", std::to_string(opt.seed)},
                 {"replica", std::to_string(replica)},
                 {"mcmc_steps", std::to_string(mcmc_steps)},
                 {"mcmc_burnin", std::to_string(mcmc_burnin)},
                 {"mcmc_scale", ldpair::fmt(mcmc_scale)},
                 {"mcmc_thin", std::to_string(mcmc_thin)}}));
  json j = base_record(opt, digest);
  ldpair::Ensemble e;
  if (kern.kind == ldpair::KernelKind::gaussian) {
    e = ldpair::sample_gaussian_exact(kern.theta, n, opt.seed, replica);
  } else {
    ldpair::McmcConfig cfg;
    cfg.steps = mcmc_steps;
    cfg.burn_in = mcmc_burnin;
    cfg.proposal_scale = mcmc_scale;
    cfg.thinning = mcmc_thin;
    cfg.seed = opt.seed;
    const ldpair::McmcResult res = ldpair::sample_mcmc(kern, n, cfg, replica);
    e = res.e;
    j["diagnostics"] = {{"acceptance_rate", res.diagnostics.acceptance_rate},
                        {"acceptance_in_range", res.diagnostics.acceptance_in_range},
                        {"proposal_scale_used", res.diagnostics.proposal_scale_used},
                        {"energy_first", res.diagnostics.energy_first},
                        {"energy_last", res.diagnostics.energy_last},
                        {"energy_min", res.diagnostics.energy_min},
                        {"energy_max", res.diagnostics.energy_max}};
    if (!res.diagnostics.acceptance_in_range)
      std::cout << "warning: acceptance rate "
                << ldpair::fmt(res.diagnostics.acceptance_rate)
                << " outside [0.05, 0.95]\n";
  }
  const std::string stem = opt.stem("sample");
  ldpair::write_text(stem + ".csv", "# config=" + digest + "\n" + ldpair::ensemble_to_csv(e));
  json sidecar = ldpair::ensemble_sidecar(e, kern.spec, digest);
  for (auto& [k, v] : j.items()) sidecar[k] = v;
  ldpair::write_text(stem + ".json", sidecar.dump(2) + "\n");
  std::cout << "config_digest " << digest << "\n";
  std::cout << "wrote " << stem << ".csv\n";
  return 0;
}

int run_logz(const Options& opt, double theta, const std::string& n_list) {
  const std::vector<int> ns = ldpair::parse_int_list(n_list);
  const std::string digest = ldpair::digest_hex(canonical(
      "logz", {{"theta", ldpair::fmt(theta)}, {"n", n_list}}));
  std::string csv = "n,log_z,log_z_over_n2\n";
  json rows = json::array();
  for (int n : ns) {
    const double lz = ldpair::log_partition_gaussian(theta, n);
    const double norm = lz / (double(n) * double(n));
    csv += std::to_string(n) + "," + ldpair::fmt(lz) + "," + ldpair::fmt(norm) + "\n";
    rows.push_back(json{{"n", n}, {"log_z", lz}, {"log_z_over_n2", norm}});
    std::cout << "n=" << n << " log Z = " << ldpair::fmt(lz) << "\n";
  }
  json j = base_record(opt, digest);
  j["theta"] = theta;
  j["rows"] = rows;
  emit(opt, "logz", digest, csv, j);
  return 0;
}

int run_ldp_verify(const Options& opt, const std::string& kernel_spec,
                   const std::string& event_s, const std::string& n_list,
                   long samples, bool reference_only, long mcmc_steps,
                   long mcmc_burnin) {
  const ldpair::InteractionKernel kern = ldpair::parse_kernel(kernel_spec);
  const ldpair::EventSpec ev = ldpair::parse_event(event_s);
  const std::vector<int> ns = ldpair::parse_int_list(n_list);
  const std::string digest = ldpair::digest_hex(canonical(
      "ldp-verify", {{"kernel", kernel_spec}, {"event", event_s}, {"n", n_list},
                     {"samples", std::to_string(samples)},
                     {"seed", std::to_string(opt.seed)},
                     {"reference_only", reference_only ? "1" : "0"}}));
  ldpair::DecayReport rep;
  if (reference_only) {
    if (kern.kind != ldpair::KernelKind::gaussian)
      throw std::invalid_argument("--reference-only needs a gaussian kernel");
    rep = ldpair::reference_report(kern.theta, ev, ns);
  } else {
    ldpair::McmcConfig cfg;
    cfg.steps = mcmc_steps;
    cfg.burn_in = mcmc_burnin;
    rep = ldpair::decay_rate(kern, ev, ns, samples, opt.seed, opt.workers, cfg);
  }
  json j = base_record(opt, digest);
  j["kernel"] = kern.spec;
  j["event"] = event_s;
  j["report"] = ldpair::decay_to_json(rep);
  emit(opt, "ldp-verify", digest, ldpair::decay_to_csv(rep), j);
  for (const auto& r : rep.rows)
    std::cout << "n=" << r.n << " p_hat=" << ldpair::fmt(r.p_hat)
              << " -log(p)/n^2=" << ldpair::fmt(r.neg_log_p_over_n2)
              << " reference=" << ldpair::fmt(r.reference) << "\n";
  std::cout << "predicted_rate " << ldpair::fmt(rep.predicted) << "\n";
  if (!reference_only) {
    for (const auto& r : rep.rows) {
      if (std::isnan(r.reference)) continue;
      const double p_ref = std::exp(-r.reference * double(r.n) * double(r.n));
      if (std::abs(r.p_hat - p_ref) > 3.0 * r.stderr_p)
        throw NumericalFailure(
            "ldp-verify: MC estimate at n=" + std::to_string(r.n) +
            " deviates from the exact reference by more than 3 stderr");
    }
  }
  return 0;
}

int run_props(const Options& opt, int trials) {
  const std::string digest = ldpair::digest_hex(canonical(
      "props", {{"seed", std::to_string(opt.seed)}, {"trials", std::to_string(trials)}}));
  const std::vector<ldpair::PropertyResult> results =
      ldpair::run_property_suites(opt.seed, trials);
  json rows = json::array();
  bool all_pass = true;
  for (const auto& r : results) {
    std::cout << r.name << ": " << (r.pass ? "PASS" : "FAIL") << " (" << r.failures
              << "/" << r.trials << " failures)"
              << (r.detail.empty() ? "" : "  " + r.detail) << "\n";
    rows.push_back(json{{"name", r.name},
                        {"trials", r.trials},
                        {"failures", r.failures},
                        {"pass", r.pass},
                        {"detail", r.detail}});
    all_pass = all_pass && r.pass;
  }
  json j = base_record(opt, digest);
  j["suites"] = rows;
  emit(opt, "props", digest, std::nullopt, j);
  if (!all_pass) throw NumericalFailure("props: at least one property suite failed");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pair-ensemble large deviation laboratory"};
  app.fallthrough(true);
  app.set_config("--config", "", "key=value config file; flags override file entries");

  Options opt;
  if (const char* env = std::getenv("LDPAIR_OUT_DIR")) opt.out_dir = env;
  app.add_option("--out", opt.out, "output file stem (default <out_dir>/<command>)")
      ->configurable(true);
  app.add_option("--out-dir", opt.out_dir, "output directory")->configurable(true);
  app.add_option("--format", opt.format, "csv or json")
      ->check(CLI::IsMember({"csv", "json"}))
      ->configurable(true);
  app.add_option("--seed", opt.seed, "master RNG seed")->configurable(true);
  app.add_option("--workers", opt.workers, "max worker threads (0 = all cores)")
      ->configurable(true);

  // check-kernel
  auto* c_check = app.add_subcommand("check-kernel", "numeric assumption checks");
  std::string kernel_spec, alphas = "0.5,1";
  int nodes = 241;
  c_check->add_option("--kernel", kernel_spec)->required();
  c_check->add_option("--alphas", alphas, "comma list in (0,1]");
  c_check->add_option("--nodes", nodes, "quadrature nodes per axis");

  // i0
  auto* c_i0 = app.add_subcommand("i0", "infimum of k over the search box");
  std::string i0_kernel;
  double i0_tol = 1e-8;
  c_i0->add_option("--kernel", i0_kernel)->required();
  c_i0->add_option("--tol", i0_tol);

  // rate
  auto* c_rate = app.add_subcommand("rate", "rate of a product measure");
  std::string rate_kernel, rate_nu, rate_nu2;
  c_rate->add_option("--kernel", rate_kernel)->required();
  c_rate->add_option("--nu", rate_nu, "CSV atom,weight for nu1")->required();
  c_rate->add_option("--nu2", rate_nu2, "CSV for nu2 (default: same as --nu)");

  // marginal-rate
  auto* c_mrate = app.add_subcommand("marginal-rate", "contracted rate of a marginal");
  std::string mrate_kernel, mrate_nu;
  double mrate_tol = 1e-6;
  c_mrate->add_option("--kernel", mrate_kernel)->required();
  c_mrate->add_option("--nu", mrate_nu)->required();
  c_mrate->add_option("--tol", mrate_tol);

  // average-rate
  auto* c_arate = app.add_subcommand("average-rate", "rate of the average measure");
  std::string arate_kernel, arate_nu;
  c_arate->add_option("--kernel", arate_kernel)->required();
  c_arate->add_option("--nu", arate_nu)->required();

  // negdef
  auto* c_negdef = app.add_subcommand("negdef", "negative-definiteness probe");
  std::string negdef_kernel;
  int negdef_trials = 1000, negdef_points = 4;
  c_negdef->add_option("--kernel", negdef_kernel)->required();
  c_negdef->add_option("--trials", negdef_trials);
  c_negdef->add_option("--points", negdef_points);

  // varadhan
  auto* c_var = app.add_subcommand("varadhan", "variational supremum / divergence bounds");
  std::string var_kernel, var_support, var_support_y, var_mu0, var_b = "1,2,4,8";
  std::string var_fclamp = "0,1", var_gclamp = "0,1";
  std::vector<std::string> var_functionals;
  int var_restarts = 20, var_iters = 2000;
  double var_step0 = 1.0;
  c_var->add_option("--kernel", var_kernel)->required();
  c_var->add_option("--functional", var_functionals,
                    "component spec (repeatable): zero|const:c|clampx:lo,hi|"
                    "clampy:lo,hi|clampxy:lo,hi|bump:cx,cy,s,amp");
  c_var->add_option("--support", var_support, "comma list of candidate atoms")->required();
  c_var->add_option("--support-y", var_support_y, "separate support for nu2");
  c_var->add_option("--restarts", var_restarts);
  c_var->add_option("--iters", var_iters);
  c_var->add_option("--step0", var_step0);
  c_var->add_option("--mu0", var_mu0, "bivariate CSV x,y,weight: divergence mode");
  c_var->add_option("--b", var_b, "b values for the divergence mode");
  c_var->add_option("--F-clamp", var_fclamp, "clamp range for F");
  c_var->add_option("--G-clamp", var_gclamp, "clamp range for G");

  // sample
  auto* c_sample = app.add_subcommand("sample", "draw one ensemble");
  std::string sample_kernel;
  int sample_n = 16;
  std::uint64_t sample_replica = 0;
  long sample_steps = 0, sample_burnin = -1, sample_thin = 1;
  double sample_scale = 0.0;
  c_sample->add_option("--kernel", sample_kernel)->required();
  c_sample->add_option("--n", sample_n)->required();
  c_sample->add_option("--replica", sample_replica);
  c_sample->add_option("--mcmc-steps", sample_steps);
  c_sample->add_option("--mcmc-burnin", sample_burnin);
  c_sample->add_option("--mcmc-scale", sample_scale);
  c_sample->add_option("--mcmc-thin", sample_thin);

  // logz
  auto* c_logz = app.add_subcommand("logz", "closed-form gaussian log partition");
  double logz_theta = 0.5;
  std::string logz_n = "1,2,4,8,16";
  c_logz->add_option("--theta", logz_theta)->required();
  c_logz->add_option("--n", logz_n);

  // ldp-verify
  auto* c_ldp = app.add_subcommand("ldp-verify", "decay-rate verification");
  std::string ldp_kernel, ldp_event, ldp_n = "2,4,8";
  long ldp_samples = 100000, ldp_mcmc_steps = 0, ldp_mcmc_burnin = -1;
  bool ldp_reference_only = false;
  c_ldp->add_option("--kernel", ldp_kernel)->required();
  c_ldp->add_option("--event", ldp_event, "e.g. \"marginal_mean>=0.5\"")->required();
  c_ldp->add_option("--n", ldp_n);
  c_ldp->add_option("--samples", ldp_samples);
  c_ldp->add_flag("--reference-only", ldp_reference_only,
                  "skip MC; emit the exact gaussian tail");
  c_ldp->add_option("--mcmc-steps", ldp_mcmc_steps);
  c_ldp->add_option("--mcmc-burnin", ldp_mcmc_burnin);

  // props
  auto* c_props = app.add_subcommand("props", "run the property suites");
  int props_trials = 1000;
  c_props->add_option("--trials", props_trials);

  app.require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
    app.exit(e);
    return 2;
  }

  try {
    if (*c_check) return run_check_kernel(opt, kernel_spec, alphas, nodes);
    if (*c_i0) return run_i0(opt, i0_kernel, i0_tol);
    if (*c_rate) return run_rate(opt, rate_kernel, rate_nu, rate_nu2);
    if (*c_mrate) return run_marginal_rate(opt, mrate_kernel, mrate_nu, mrate_tol);
    if (*c_arate) return run_average_rate(opt, arate_kernel, arate_nu);
    if (*c_negdef) return run_negdef(opt, negdef_kernel, negdef_trials, negdef_points);
    if (*c_var)
      return run_varadhan(opt, var_kernel, var_functionals, var_support, var_support_y,
                          var_restarts, var_iters, var_step0, var_mu0, var_b,
                          var_fclamp, var_gclamp);
    if (*c_sample)
      return run_sample(opt, sample_kernel, sample_n, sample_replica, sample_steps,
                        sample_burnin, sample_scale, sample_thin);
    if (*c_logz) return run_logz(opt, logz_theta, logz_n);
    if (*c_ldp)
      return run_ldp_verify(opt, ldp_kernel, ldp_event, ldp_n, ldp_samples,
                            ldp_reference_only, ldp_mcmc_steps, ldp_mcmc_burnin);
    if (*c_props) return run_props(opt, props_trials);
  } catch (const NumericalFailure& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 2;  // no subcommand matched (require_subcommand should prevent this)
}
