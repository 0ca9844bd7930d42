#include <doctest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "backflow/backflow.h"

namespace {

struct Model {
  bf_model* m = nullptr;
  explicit Model(const bf_model_params& p) { REQUIRE(bf_model_create(&p, &m) == BF_OK); }
  ~Model() { bf_model_destroy(m); }
};

bf_model_params defaults() {
  bf_model_params p;
  bf_model_params_default(&p);
  return p;
}

}  // namespace

TEST_CASE("defaults and metadata") {
  const auto p = defaults();
  CHECK(p.inv_delta_omega_ps == 35.8);
  CHECK(p.x0_mm == 19.15);
  CHECK(p.fiber_length_m == 100.0);
  CHECK(p.delta_n == 3.83e-4);
  CHECK(p.n_bar == 1.45);
  CHECK(p.delay_only == 0);
  CHECK(p.omega0_rad_per_ps == doctest::Approx(1990.5437676306174).epsilon(1e-12));
  CHECK(std::strlen(bf_version()) > 0);
  CHECK(std::string(bf_status_name(BF_ERR_BREAKPOINT)) == "breakpoint");

  bf_counting_config cfg;
  bf_counting_config_default(&cfg);
  CHECK(cfg.signal_rate_per_s == 7000.0);
  CHECK(cfg.integration_time_s == 4.0);
  CHECK(cfg.dark_rate_per_s == 150.0);
}

TEST_CASE("model creation validates parameters") {
  auto p = defaults();
  p.x0_mm = -1.0;
  bf_model* m = nullptr;
  CHECK(bf_model_create(&p, &m) == BF_ERR_INVARIANT);
  CHECK(m == nullptr);
  CHECK(std::string(bf_last_error()).find("x0_mm") != std::string::npos);
  CHECK(bf_model_create(nullptr, &m) == BF_ERR_NULL_ARGUMENT);
  bf_model_destroy(nullptr);
}

TEST_CASE("stage times and rates") {
  Model model(defaults());
  double t0 = 0, t1 = 0, tf = 0;
  REQUIRE(bf_model_stage_times(model.m, &t0, &t1, &tf) == BF_OK);
  CHECK(t0 == doctest::Approx(127.75504846089224).epsilon(1e-12));
  CHECK(tf == doctest::Approx(483795.69308578136).epsilon(1e-12));

  double g = 0;
  CHECK(bf_gamma(model.m, 50.0, &g) == BF_OK);
  CHECK(g == doctest::Approx(1.0 / 35.8));
  CHECK(bf_gamma(model.m, 1000.0, &g) == BF_OK);
  CHECK(g == doctest::Approx(-7.3781544981699095e-6).epsilon(1e-9));
  CHECK(bf_gamma(model.m, t0, &g) == BF_ERR_BREAKPOINT);

  double e = 0;
  CHECK(bf_epsilon(model.m, 50.0, &e) == BF_OK);
  CHECK(e == doctest::Approx(defaults().omega0_rad_per_ps).epsilon(1e-12));

  double re = 0, im = 0;
  REQUIRE(bf_kappa(model.m, t0, &re, &im) == BF_OK);
  CHECK(std::hypot(re, im) == doctest::Approx(0.028195954390748016).epsilon(1e-12));
  CHECK(bf_kappa(model.m, -1.0, &re, &im) == BF_ERR_DOMAIN);
  CHECK(bf_kappa(model.m, tf * 2, &re, &im) == BF_ERR_DOMAIN);
  CHECK(bf_kappa(nullptr, 1.0, &re, &im) == BF_ERR_NULL_ARGUMENT);
}

TEST_CASE("pure-state distances and delta_D") {
  double d = 0;
  REQUIRE(bf_trace_distance_pure(0.0, 90.0, &d) == BF_OK);
  CHECK(d == doctest::Approx(1.0));
  REQUIRE(bf_trace_distance_pure(0.0, 45.0, &d) == BF_OK);
  CHECK(d == doctest::Approx(std::sqrt(0.5)));

  Model model(defaults());
  REQUIRE(bf_delta_d(model.m, 135.0, 45.0, &d) == BF_OK);
  CHECK(d == doctest::Approx(0.97180404560925198).epsilon(1e-9));
}

TEST_CASE("series handle") {
  Model model(defaults());
  bf_series* s = nullptr;
  REQUIRE(bf_series_create(model.m, 135.0, 45.0, 100, &s) == BF_OK);
  const size_t n = bf_series_length(s);
  CHECK(n == 201);
  bf_series_row first, mid, last;
  REQUIRE(bf_series_row_at(s, 0, &first) == BF_OK);
  REQUIRE(bf_series_row_at(s, 100, &mid) == BF_OK);
  REQUIRE(bf_series_row_at(s, n - 1, &last) == BF_OK);
  CHECK(first.D == doctest::Approx(1.0));
  CHECK(mid.D == doctest::Approx(0.028195954390748016).epsilon(1e-9));
  CHECK(last.D == doctest::Approx(1.0).epsilon(1e-9));
  for (size_t i = 0; i < n; ++i) {
    bf_series_row r;
    REQUIRE(bf_series_row_at(s, i, &r) == BF_OK);
    CHECK(std::isfinite(r.gamma));
  }
  CHECK(bf_series_row_at(s, n, &first) == BF_ERR_INPUT);
  bf_series_destroy(s);
  CHECK(bf_series_create(model.m, 135.0, 45.0, 0, &s) != BF_OK);
}

TEST_CASE("measure handle") {
  Model model(defaults());
  bf_measure_options opts;
  bf_measure_options_default(&opts);
  CHECK(opts.coarse_step_deg == 5.0);
  CHECK(opts.fine_step_deg == 0.5);
  bf_measure_result* r = nullptr;
  REQUIRE(bf_measure_create(model.m, &opts, &r) == BF_OK);
  CHECK(bf_measure_value(r) == doctest::Approx(0.972).epsilon(0.001 / 0.972));
  double theta = 0, xi = 0;
  REQUIRE(bf_measure_best_pair(r, &theta, &xi) == BF_OK);
  CHECK(theta == 135.0);
  CHECK(xi == 45.0);
  CHECK(bf_measure_resolution_deg(r) == 0.5);
  REQUIRE(bf_measure_interval_count(r) == 1);
  bf_interval iv;
  REQUIRE(bf_measure_interval_at(r, 0, &iv) == BF_OK);
  CHECK(iv.delta_D == doctest::Approx(bf_measure_value(r)));
  CHECK(bf_measure_interval_at(r, 1, &iv) == BF_ERR_INPUT);
  bf_measure_destroy(r);

  opts.coarse_step_deg = -1.0;
  CHECK(bf_measure_create(model.m, &opts, &r) == BF_ERR_INPUT);
}

TEST_CASE("delay-only model has no backflow") {
  auto p = defaults();
  p.delay_only = 1;
  Model model(p);
  double t0 = 0, tf = 0;
  REQUIRE(bf_model_stage_times(model.m, &t0, nullptr, &tf) == BF_OK);
  CHECK(tf == t0);
  bf_measure_result* r = nullptr;
  REQUIRE(bf_measure_create(model.m, nullptr, &r) == BF_OK);
  CHECK(bf_measure_value(r) == 0.0);
  CHECK(bf_measure_interval_count(r) == 0);
  bf_measure_destroy(r);
}

TEST_CASE("sweeps") {
  const auto p = defaults();
  const std::vector<double> x0{0.0, 19.15, 25.0};
  std::vector<double> dd(3), dtf(3);
  REQUIRE(bf_sweep_delay(&p, x0.data(), 3, 135.0, 45.0, dd.data(), dtf.data()) == BF_OK);
  CHECK(dtf[0] == doctest::Approx(0.028195954390748016).epsilon(1e-9));
  CHECK(dd[1] == doctest::Approx(0.97180404560925198).epsilon(1e-9));
  CHECK(dd[2] == doctest::Approx(0.32669092623957359).epsilon(1e-9));

  const std::vector<double> bad{-1.0};
  CHECK(bf_sweep_delay(&p, bad.data(), 1, 135.0, 45.0, dd.data(), dtf.data()) ==
        BF_ERR_INVARIANT);

  Model model(p);
  std::vector<double> axis;
  for (double a = 0.0; a < 180.0; a += 5.0) axis.push_back(a);
  std::vector<double> surface(axis.size() * axis.size());
  double bt = 0, bx = 0;
  REQUIRE(bf_sweep_angles(model.m, axis.data(), axis.size(), axis.data(), axis.size(),
                          surface.data(), &bt, &bx) == BF_OK);
  CHECK(bt == 135.0);
  CHECK(bx == 45.0);
}

TEST_CASE("fit and Monte Carlo") {
  std::vector<double> x0, d;
  for (int i = 0; i <= 14; ++i) {
    x0.push_back(40.0 * i / 14.0);
    d.push_back(std::exp(-std::abs(38.3 - 2.0 * x0.back()) / 0.299792458 / 35.8));
  }
  bf_fit_result fit;
  REQUIRE(bf_fit_delta_omega(x0.data(), d.data(), x0.size(), &fit) == BF_OK);
  CHECK(fit.converged);
  CHECK(fit.physical);
  CHECK(fit.inv_delta_omega_ps == doctest::Approx(35.8).epsilon(1e-9));

  std::vector<double> same(5, 3.0), dd(5, 0.5);
  CHECK(bf_fit_delta_omega(same.data(), dd.data(), 5, &fit) == BF_ERR_FIT);
  CHECK(bf_fit_delta_omega(x0.data(), d.data(), 2, &fit) == BF_ERR_INPUT);

  Model model(defaults());
  bf_counting_config cfg;
  bf_counting_config_default(&cfg);
  cfg.seed = 12;
  bf_mc_summary raw, corrected;
  REQUIRE(bf_delta_d_monte_carlo(model.m, 135.0, 45.0, &cfg, 100, &raw, &corrected) == BF_OK);
  CHECK(raw.n_trials == 100);
  CHECK(raw.seed == 12);
  CHECK(raw.mean < corrected.mean);
  cfg.integration_time_s = 0.0;
  CHECK(bf_delta_d_monte_carlo(model.m, 135.0, 45.0, &cfg, 100, &raw, &corrected) ==
        BF_ERR_INVARIANT);
}
