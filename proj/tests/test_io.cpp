#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <string>

#include <ldpair/io.hpp>
#include <ldpair/specparse.hpp>

using namespace ldpair;

namespace {

// scratch file helper: writes under the test working directory and cleans up
struct TempFile {
  std::string path;
  explicit TempFile(const std::string& name, const std::string& content)
      : path(name) {
    write_text(path, content);
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("fmt prints shortest round-trip doubles") {
  CHECK(fmt(0.25) == "0.25");
  CHECK(fmt(-3.0) == "-3");
  for (double v : {1.0 / 3.0, 0.1, 6.02e23, -2.2250738585072014e-308}) {
    CHECK(std::stod(fmt(v)) == v);
  }
  CHECK(fmt(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(fmt(std::numeric_limits<double>::infinity()) == "inf");
}

TEST_CASE("fnv1a64 matches the published test vectors") {
  CHECK(fnv1a64("") == 0xcbf29ce484222325ULL);
  CHECK(fnv1a64("a") == 0xaf63dc4c8601ec8cULL);
  CHECK(fnv1a64("foobar") == 0x85944171f73967e8ULL);
  CHECK(digest_hex("") == "cbf29ce484222325");
  CHECK(digest_hex("command=rate|theta=0.5").size() == 16);
}

TEST_CASE("atomic measure CSV round trip") {
  const AtomicMeasure nu = atomic({-1.0, 0.5, 1.0 / 3.0}, {0.25, 0.5, 0.25});
  const std::string csv = atomic_to_csv(nu);
  CHECK(csv.rfind("atom,weight\n", 0) == 0);

  std::istringstream in(csv);
  const AtomicMeasure back = atomic_from_csv(in);
  CHECK(back.atoms == nu.atoms);    // exact: shortest round-trip formatting
  CHECK(back.weights == nu.weights);

  // comments and the config stamp are ignored by the reader
  std::istringstream stamped("# config=deadbeef\natom,weight\n0,0.5\n1,0.5\n");
  const AtomicMeasure two = atomic_from_csv(stamped);
  CHECK(two.atoms == std::vector<double>{0.0, 1.0});

  std::istringstream broken("atom,weight\n0.5\n");
  CHECK_THROWS_AS(atomic_from_csv(broken), std::invalid_argument);
  CHECK_THROWS_AS(atomic_from_csv_file("does_not_exist_981.csv"),
                  std::invalid_argument);
}

TEST_CASE("atomic_to_json carries atoms and weights") {
  const json j = atomic_to_json(atomic({0.0, 1.0}, {0.75, 0.25}));
  CHECK(j["atoms"].size() == 2);
  CHECK(j["weights"][0].get<double>() == 0.75);
}

TEST_CASE("bivariate CSV reader builds the joint measure") {
  TempFile f("io_test_bivariate.csv", "x,y,weight\n0,0,0.5\n1,1,0.5\n");
  const BivariateAtomic mu = bivariate_from_csv_file(f.path);
  REQUIRE(mu.xs.size() == 2);
  REQUIRE(mu.ys.size() == 2);
  CHECK(mu.weights(0, 0) == Catch::Approx(0.5));
  CHECK(mu.weights(1, 1) == Catch::Approx(0.5));
  CHECK(mu.weights(0, 1) == 0.0);

  TempFile g("io_test_bivariate_bad.csv", "x,y,weight\n0;0;1\n");
  CHECK_THROWS_AS(bivariate_from_csv_file(g.path), std::invalid_argument);
  TempFile h("io_test_bivariate_empty.csv", "x,y,weight\n");
  CHECK_THROWS_AS(bivariate_from_csv_file(h.path), std::invalid_argument);
  CHECK_THROWS_AS(bivariate_from_csv_file("missing_982.csv"), std::invalid_argument);
}

TEST_CASE("density and ensemble CSV emitters") {
  GriddedDensity d;
  d.x0 = 0.0;
  d.step = 0.5;
  d.values = {0.0, 1.0, 2.0};
  CHECK(density_to_csv(d) == "x,density\n0,0\n0.5,1\n1,2\n");

  Ensemble e;
  e.n = 2;
  e.x = {0.5, -1.0};
  e.y = {0.25, 2.0};
  CHECK(ensemble_to_csv(e) == "index,x,y\n0,0.5,0.25\n1,-1,2\n");

  e.seed_info = {11, streams::sampler, 3, "exact_gaussian"};
  const json side = ensemble_sidecar(e, "gaussian:theta=0.5", "0123456789abcdef");
  CHECK(side["kernel"] == "gaussian:theta=0.5");
  CHECK(side["n"] == 2);
  CHECK(side["seed"] == 11);
  CHECK(side["replica"] == 3);
  CHECK(side["method"] == "exact_gaussian");
  CHECK(side["config_digest"] == "0123456789abcdef");
}

TEST_CASE("decay report serialization") {
  DecayReport rep;
  rep.predicted = 0.1875;
  rep.method = DecayMethod::direct_mc;
  DecayRow row;
  row.n = 2;
  row.p_hat = 0.11;
  row.stderr_p = 0.003;
  row.neg_log_p_over_n2 = 0.55;
  // row.reference left NaN: the MCMC path has no closed-form tail
  rep.rows.push_back(row);

  const std::string csv = decay_to_csv(rep);
  CHECK(csv.rfind("n,p_hat,stderr,neg_log_p_over_n2,reference,predicted_rate\n", 0) ==
        0);
  CHECK(csv.find("2,0.11,0.003,0.55,nan,0.1875") != std::string::npos);

  const json j = decay_to_json(rep);
  CHECK(j["method"] == "direct_mc");
  CHECK(j["predicted_rate"].get<double>() == 0.1875);
  REQUIRE(j["rows"].size() == 1);
  CHECK(j["rows"][0]["n"] == 2);
  // NaN must serialize as null, not break the document
  CHECK(j["rows"][0]["reference"].is_number());
  CHECK(j.dump().find("null") != std::string::npos);

  rep.method = DecayMethod::exact_gaussian_tail;
  CHECK(decay_to_json(rep)["method"] == "exact_gaussian_tail");
}

TEST_CASE("assumption report serialization") {
  AssumptionReport rep;
  rep.a1 = rep.a3 = rep.a4 = rep.a5 = Verdict::pass;
  rep.a2 = Verdict::fail;
  rep.M_alpha = {{0.5, 3.14}, {1.0, 9.87}};
  rep.notes = {"annulus mass is not decaying"};

  const json j = assumption_to_json(rep);
  CHECK(j["A1"] == "pass");
  CHECK(j["A2"] == "fail");
  CHECK(j["A5"] == "pass");
  REQUIRE(j["M_alpha"].size() == 2);
  CHECK(j["M_alpha"][1]["alpha"].get<double>() == 1.0);
  CHECK(j["M_alpha"][1]["M_alpha"].get<double>() == 9.87);
  CHECK(j["notes"][0].get<std::string>() == "annulus mass is not decaying");

  CHECK(std::string(verdict_name(Verdict::cannot_certify)) == "cannot_certify");
}

TEST_CASE("list and polynomial parsing") {
  CHECK(parse_double_list("1,2.5,-3e-2") == std::vector<double>{1.0, 2.5, -0.03});
  CHECK_THROWS_AS(parse_double_list("1.5x,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_double_list("1,,2"), std::invalid_argument);

  CHECK(parse_int_list("2,4,8") == std::vector<int>{2, 4, 8});
  CHECK_THROWS_AS(parse_int_list("2,4.5"), std::invalid_argument);

  const Univariate p = make_poly({1.0, 2.0, 3.0});
  CHECK(p(2.0) == Catch::Approx(17.0));  // 1 + 2u + 3u^2 at u = 2
  CHECK_THROWS_AS(make_poly({}), std::invalid_argument);
}

TEST_CASE("kernel spec grammar") {
  const InteractionKernel g = parse_kernel("gaussian:theta=0.5");
  CHECK(g.kind == KernelKind::gaussian);
  CHECK(g.theta == 0.5);
  CHECK(g.spec == "gaussian:theta=0.5");

  const InteractionKernel gb = parse_kernel("gaussian:theta=0.25;box=-2,2,-1,1");
  CHECK(gb.search_box.xlo == -2.0);
  CHECK(gb.search_box.yhi == 1.0);

  const InteractionKernel lg = parse_kernel("loggas:beta=2");
  CHECK(lg.beta == 2.0);
  CHECK(lg.eval_k(1.0, -1.0) == Catch::Approx(2.0 - 2.0 * std::log(2.0)));

  // explicit quadratic potentials reproduce the default
  const InteractionKernel lg2 = parse_kernel("loggas:beta=2;v=0,0,1;w=0,0,1");
  CHECK(lg2.eval_k(0.7, -0.3) == Catch::Approx(lg.eval_k(0.7, -0.3)).margin(1e-15));

  const InteractionKernel sq = parse_kernel("custom:square_diff");
  CHECK(sq.kind == KernelKind::custom);
  CHECK(sq.eval_k(2.0, 0.5) == Catch::Approx(2.25));

  CHECK_THROWS_AS(parse_kernel("gaussian"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel("gaussian:teta=0.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel("gaussian:theta=0.5;box=1,2"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel("loggas"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel("custom:frobnicate"), std::invalid_argument);
  CHECK_THROWS_AS(parse_kernel("spherical:r=1"), std::invalid_argument);
}

TEST_CASE("event spec grammar") {
  const EventSpec ev = parse_event("marginal_mean>=0.5");
  CHECK(ev.statistic == Statistic::marginal_mean);
  CHECK(ev.a == 0.5);
  CHECK(ev.direction == Direction::geq);

  const EventSpec lo = parse_event("average_mean<=-1");
  CHECK(lo.statistic == Statistic::average_mean);
  CHECK(lo.a == -1.0);
  CHECK(lo.direction == Direction::leq);

  CHECK(parse_event("marginal_second_moment>=2").statistic ==
        Statistic::marginal_second_moment);

  CHECK_THROWS_AS(parse_event("marginal_mean=0.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_event("median>=0.5"), std::invalid_argument);
  CHECK_THROWS_AS(parse_event("marginal_mean>=abc"), std::invalid_argument);

  CHECK(std::string(statistic_name(Statistic::average_mean)) == "average_mean");
}

TEST_CASE("functional component grammar") {
  CHECK(parse_component("zero").f(3.0, -4.0) == 0.0);
  CHECK(parse_component("const:0.3").f(1.0, 1.0) == Catch::Approx(0.3));
  CHECK(parse_component("clampx:0,1").f(0.4, 9.0) == Catch::Approx(0.4));
  CHECK(parse_component("clampy:-1,1").f(9.0, -2.0) == -1.0);
  CHECK(parse_component("clampxy:0,1").f(0.5, 0.5) == Catch::Approx(0.25));
  CHECK(parse_component("bump:0,0,1,2").f(0.0, 0.0) == Catch::Approx(2.0));

  CHECK_THROWS_AS(parse_component("clampx:1"), std::invalid_argument);
  CHECK_THROWS_AS(parse_component("bump:1,2,3"), std::invalid_argument);
  CHECK_THROWS_AS(parse_component("ramp:0,1"), std::invalid_argument);

  const MinFunctional f = parse_functional({"clampxy:0,1", "const:0.2"});
  CHECK(f.components.size() == 2);
  CHECK_THROWS_AS(parse_functional({}), std::invalid_argument);
}
