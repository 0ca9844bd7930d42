// backflow: batch front end over the C API.
//
//   backflow <trajectory|sweep-delay|sweep-angles|measure|fit> [--config f.json]
//            [--out dir] [--seed n] [--data points.csv]

#include <openssl/evp.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "backflow/backflow.h"

namespace fs = std::filesystem;
using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

namespace {

enum Exit { kOk = 0, kConfigError = 1, kComputeError = 2, kIoError = 3 };

struct Failure {
  Exit code;
  std::string message;
};

[[noreturn]] void fail(Exit code, std::string message) { throw Failure{code, std::move(message)}; }

void check(bf_status s, Exit code, const std::string& context) {
  if (s == BF_OK) return;
  fail(code, context + ": " + bf_last_error());
}

// ---- config ---------------------------------------------------------------

struct Config {
  double wavelength_nm = 946.3;
  double inv_delta_omega_ps = 35.8;

  double x0_mm = 19.15;
  double fiber_length_m = 100.0;
  double delta_n = 3.83e-4;
  double n_bar = 1.45;
  bool delay_only = false;

  double theta_deg = 135.0;
  double xi_deg = 45.0;

  double signal_rate_per_s = 7000.0;
  double integration_time_s = 4.0;
  double dark_rate_per_s = 150.0;

  std::int64_t trajectory_cells_per_piece = 2000;

  double sweep_x0_min_mm = 0.0;
  double sweep_x0_max_mm = 40.0;
  double sweep_x0_step_mm = 0.05;
  std::int64_t sweep_noisy_trials = 0;
  bool sweep_dark_correct = true;

  double theta_min_deg = 0.0;
  double theta_max_deg = 175.0;
  double theta_step_deg = 5.0;
  double xi_min_deg = 0.0;
  double xi_max_deg = 175.0;
  double xi_step_deg = 5.0;

  double coarse_step_deg = 5.0;
  double fine_step_deg = 0.5;
  std::int64_t measure_cells_per_piece = 2000;
  std::int64_t monte_carlo_trials = 0;

  std::string output_dir = "out";
  std::uint64_t seed = 0;
};

// Reads known keys from one JSON object and rejects the rest.
class Section {
 public:
  Section(const json& node, std::string path) : node_(node), path_(std::move(path)) {
    if (!node_.is_object()) fail(kConfigError, where("") + ": expected an object");
  }

  void number(const char* key, double& out) {
    if (const json* v = take(key)) {
      if (!v->is_number()) fail(kConfigError, where(key) + ": expected a number");
      out = v->get<double>();
      if (!std::isfinite(out)) fail(kConfigError, where(key) + ": must be finite");
    }
  }
  void integer(const char* key, std::int64_t& out) {
    if (const json* v = take(key)) {
      if (!v->is_number_integer()) fail(kConfigError, where(key) + ": expected an integer");
      out = v->get<std::int64_t>();
    }
  }
  void boolean(const char* key, bool& out) {
    if (const json* v = take(key)) {
      if (!v->is_boolean()) fail(kConfigError, where(key) + ": expected true or false");
      out = v->get<bool>();
    }
  }
  void string(const char* key, std::string& out) {
    if (const json* v = take(key)) {
      if (!v->is_string()) fail(kConfigError, where(key) + ": expected a string");
      out = v->get<std::string>();
    }
  }
  const json* object(const char* key) { return take(key); }

  void finish() const {
    for (const auto& [k, v] : node_.items()) {
      if (!seen_.count(k)) fail(kConfigError, where(k) + ": unknown key");
    }
  }

  std::string where(const std::string& key) const {
    if (path_.empty()) return key.empty() ? "config" : key;
    return key.empty() ? path_ : path_ + "." + key;
  }

 private:
  const json* take(const std::string& key) {
    seen_.insert(key);
    auto it = node_.find(key);
    return it == node_.end() ? nullptr : &*it;
  }

  const json& node_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& field, const std::string& what) {
  if (!ok) fail(kConfigError, field + ": " + what);
}

void validate(const Config& c) {
  require(c.wavelength_nm > 0, "spectrum.wavelength_nm", "must be > 0");
  require(c.inv_delta_omega_ps > 0, "spectrum.inv_delta_omega_ps", "must be > 0");
  require(c.signal_rate_per_s >= 0, "counting.signal_rate_per_s", "must be >= 0");
  require(c.integration_time_s > 0, "counting.integration_time_s", "must be > 0");
  require(c.dark_rate_per_s >= 0, "counting.dark_rate_per_s", "must be >= 0");
  require(c.trajectory_cells_per_piece > 0, "trajectory.cells_per_piece", "must be > 0");
  require(c.sweep_x0_min_mm >= 0, "sweep_delay.x0_min_mm", "must be >= 0");
  require(c.sweep_x0_max_mm >= c.sweep_x0_min_mm, "sweep_delay.x0_max_mm",
          "must be >= x0_min_mm");
  require(c.sweep_x0_step_mm > 0, "sweep_delay.x0_step_mm", "must be > 0");
  require(c.sweep_noisy_trials >= 0, "sweep_delay.noisy_trials", "must be >= 0");
  require(c.theta_step_deg > 0, "sweep_angles.theta_step_deg", "must be > 0");
  require(c.theta_max_deg >= c.theta_min_deg, "sweep_angles.theta_max_deg",
          "must be >= theta_min_deg");
  require(c.xi_step_deg > 0, "sweep_angles.xi_step_deg", "must be > 0");
  require(c.xi_max_deg >= c.xi_min_deg, "sweep_angles.xi_max_deg", "must be >= xi_min_deg");
  require(c.coarse_step_deg > 0, "measure.coarse_step_deg", "must be > 0");
  require(c.fine_step_deg > 0, "measure.fine_step_deg", "must be > 0");
  require(c.measure_cells_per_piece > 0, "measure.cells_per_piece", "must be > 0");
  require(c.monte_carlo_trials >= 0, "measure.monte_carlo_trials", "must be >= 0");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
}

Config load_config(const std::string& path) {
  Config c;
  if (path.empty()) return c;
  std::ifstream in(path);
  if (!in) fail(kIoError, "cannot open config " + path);
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    fail(kConfigError, path + ": " + e.what());
  }
  Section root(doc, "");
  if (const json* s = root.object("spectrum")) {
    Section sec(*s, "spectrum");
    sec.number("wavelength_nm", c.wavelength_nm);
    sec.number("inv_delta_omega_ps", c.inv_delta_omega_ps);
    sec.finish();
  }
  if (const json* s = root.object("process")) {
    Section sec(*s, "process");
    sec.number("x0_mm", c.x0_mm);
    sec.number("fiber_length_m", c.fiber_length_m);
    sec.number("delta_n", c.delta_n);
    sec.number("n_bar", c.n_bar);
    sec.boolean("delay_only", c.delay_only);
    sec.finish();
  }
  if (const json* s = root.object("pair")) {
    Section sec(*s, "pair");
    sec.number("theta_deg", c.theta_deg);
    sec.number("xi_deg", c.xi_deg);
    sec.finish();
  }
  if (const json* s = root.object("counting")) {
    Section sec(*s, "counting");
    sec.number("signal_rate_per_s", c.signal_rate_per_s);
    sec.number("integration_time_s", c.integration_time_s);
    sec.number("dark_rate_per_s", c.dark_rate_per_s);
    sec.finish();
  }
  if (const json* s = root.object("trajectory")) {
    Section sec(*s, "trajectory");
    sec.integer("cells_per_piece", c.trajectory_cells_per_piece);
    sec.finish();
  }
  if (const json* s = root.object("sweep_delay")) {
    Section sec(*s, "sweep_delay");
    sec.number("x0_min_mm", c.sweep_x0_min_mm);
    sec.number("x0_max_mm", c.sweep_x0_max_mm);
    sec.number("x0_step_mm", c.sweep_x0_step_mm);
    sec.integer("noisy_trials", c.sweep_noisy_trials);
    sec.boolean("dark_correct", c.sweep_dark_correct);
    sec.finish();
  }
  if (const json* s = root.object("sweep_angles")) {
    Section sec(*s, "sweep_angles");
    sec.number("theta_min_deg", c.theta_min_deg);
    sec.number("theta_max_deg", c.theta_max_deg);
    sec.number("theta_step_deg", c.theta_step_deg);
    sec.number("xi_min_deg", c.xi_min_deg);
    sec.number("xi_max_deg", c.xi_max_deg);
    sec.number("xi_step_deg", c.xi_step_deg);
    sec.finish();
  }
  if (const json* s = root.object("measure")) {
    Section sec(*s, "measure");
    sec.number("coarse_step_deg", c.coarse_step_deg);
    sec.number("fine_step_deg", c.fine_step_deg);
    sec.integer("cells_per_piece", c.measure_cells_per_piece);
    sec.integer("monte_carlo_trials", c.monte_carlo_trials);
    sec.finish();
  }
  root.string("output_dir", c.output_dir);
  if (const json* v = root.object("seed")) {
    if (!v->is_number_unsigned()) fail(kConfigError, "seed: expected a non-negative integer");
    c.seed = v->get<std::uint64_t>();
  }
  root.finish();
  return c;
}

ordered_json resolved(const Config& c) {
  ordered_json j;
  j["spectrum"] = {{"wavelength_nm", c.wavelength_nm},
                   {"inv_delta_omega_ps", c.inv_delta_omega_ps}};
  j["process"] = {{"x0_mm", c.x0_mm},
                  {"fiber_length_m", c.fiber_length_m},
                  {"delta_n", c.delta_n},
                  {"n_bar", c.n_bar},
                  {"delay_only", c.delay_only}};
  j["pair"] = {{"theta_deg", c.theta_deg}, {"xi_deg", c.xi_deg}};
  j["counting"] = {{"signal_rate_per_s", c.signal_rate_per_s},
                   {"integration_time_s", c.integration_time_s},
                   {"dark_rate_per_s", c.dark_rate_per_s}};
  j["trajectory"] = {{"cells_per_piece", c.trajectory_cells_per_piece}};
  j["sweep_delay"] = {{"x0_min_mm", c.sweep_x0_min_mm},
                      {"x0_max_mm", c.sweep_x0_max_mm},
                      {"x0_step_mm", c.sweep_x0_step_mm},
                      {"noisy_trials", c.sweep_noisy_trials},
                      {"dark_correct", c.sweep_dark_correct}};
  j["sweep_angles"] = {{"theta_min_deg", c.theta_min_deg}, {"theta_max_deg", c.theta_max_deg},
                       {"theta_step_deg", c.theta_step_deg}, {"xi_min_deg", c.xi_min_deg},
                       {"xi_max_deg", c.xi_max_deg},       {"xi_step_deg", c.xi_step_deg}};
  j["measure"] = {{"coarse_step_deg", c.coarse_step_deg},
                  {"fine_step_deg", c.fine_step_deg},
                  {"cells_per_piece", c.measure_cells_per_piece},
                  {"monte_carlo_trials", c.monte_carlo_trials}};
  j["output_dir"] = c.output_dir;
  j["seed"] = c.seed;
  return j;
}

// ---- model plumbing -----------------------------------------------------

struct ModelDeleter {
  void operator()(bf_model* m) const { bf_model_destroy(m); }
};
using ModelPtr = std::unique_ptr<bf_model, ModelDeleter>;

bf_model_params model_params(const Config& c, double x0_mm) {
  bf_model_params p;
  bf_model_params_default(&p);
  p.omega0_rad_per_ps = bf_omega_from_wavelength_nm(c.wavelength_nm);
  p.inv_delta_omega_ps = c.inv_delta_omega_ps;
  p.x0_mm = x0_mm;
  p.fiber_length_m = c.fiber_length_m;
  p.delta_n = c.delta_n;
  p.n_bar = c.n_bar;
  p.delay_only = c.delay_only ? 1 : 0;
  return p;
}

// Library messages start with the field name; prefix the config section.
ModelPtr make_model(const Config& c, double x0_mm) {
  const auto p = model_params(c, x0_mm);
  bf_model* raw = nullptr;
  const bf_status s = bf_model_create(&p, &raw);
  if (s != BF_OK) {
    const std::string msg = bf_last_error();
    const bool spectral = msg.rfind("omega0", 0) == 0 || msg.rfind("delta_omega", 0) == 0 ||
                          msg.rfind("inv_delta_omega", 0) == 0;
    fail(kConfigError, (spectral ? "spectrum." : "process.") + msg);
  }
  return ModelPtr(raw);
}

bf_counting_config counting(const Config& c) {
  bf_counting_config cfg;
  bf_counting_config_default(&cfg);
  cfg.signal_rate_per_s = c.signal_rate_per_s;
  cfg.integration_time_s = c.integration_time_s;
  cfg.dark_rate_per_s = c.dark_rate_per_s;
  cfg.seed = c.seed;
  return cfg;
}

std::vector<double> axis(double lo, double hi, double step) {
  std::vector<double> v;
  const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= n; ++i) v.push_back(lo + step * static_cast<double>(i));
  return v;
}

// ---- output -------------------------------------------------------------

std::string fmt(double v) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) fail(kIoError, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& content) {
    const fs::path path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    out.close();
    if (!out) fail(kIoError, "cannot write " + path.string());
    hashes_[name] = sha256(content);
  }

  void manifest(const std::string& command, const Config& c) {
    ordered_json m;
    m["command"] = command;
    m["version"] = bf_version();
    m["config"] = resolved(c);
    ordered_json files = ordered_json::object();
    for (const auto& [name, hash] : hashes_) files[name] = {{"sha256", hash}};
    m["outputs"] = files;
    const fs::path path = dir_ / "manifest.json";
    std::ofstream out(path, std::ios::binary);
    out << m.dump(2) << '\n';
    out.close();
    if (!out) fail(kIoError, "cannot write " + path.string());
  }

 private:
  static std::string sha256(const std::string& data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
      fail(kIoError, "sha256 failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string s;
    for (unsigned int i = 0; i < len; ++i) {
      s += hex[digest[i] >> 4];
      s += hex[digest[i] & 15];
    }
    return s;
  }

  fs::path dir_;
  std::map<std::string, std::string> hashes_;
};

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

// ---- commands -----------------------------------------------------------

void cmd_trajectory(const Config& c, Outputs& out) {
  const auto model = make_model(c, c.x0_mm);
  bf_series* series = nullptr;
  check(bf_series_create(model.get(), c.theta_deg, c.xi_deg,
                         static_cast<size_t>(c.trajectory_cells_per_piece), &series),
        kComputeError, "trajectory");
  std::unique_ptr<bf_series, decltype(&bf_series_destroy)> guard(series, bf_series_destroy);

  std::string csv = "t_ps,D,sigma,abs_kappa,gamma\n";
  const size_t n = bf_series_length(series);
  for (size_t i = 0; i < n; ++i) {
    bf_series_row r;
    check(bf_series_row_at(series, i, &r), kComputeError, "trajectory");
    csv += fmt(r.t_ps) + ',' + fmt(r.D) + ',' + fmt(r.sigma) + ',' + fmt(r.abs_kappa) + ',' +
           fmt(r.gamma) + '\n';
  }
  out.write("trajectory.csv", csv);
}

void cmd_sweep_delay(const Config& c, Outputs& out) {
  const auto x0 = axis(c.sweep_x0_min_mm, c.sweep_x0_max_mm, c.sweep_x0_step_mm);
  const auto base = model_params(c, c.x0_mm);
  std::vector<double> dd(x0.size()), dtf(x0.size());
  check(bf_sweep_delay(&base, x0.data(), x0.size(), c.theta_deg, c.xi_deg, dd.data(),
                       dtf.data()),
        kComputeError, "sweep-delay");

  const bool noisy = c.sweep_noisy_trials > 0;
  std::vector<double> dd_mean, dd_std, dtf_mean, dtf_std;
  if (noisy) {
    dd_mean.resize(x0.size());
    dd_std.resize(x0.size());
    dtf_mean.resize(x0.size());
    dtf_std.resize(x0.size());
    const auto cfg = counting(c);
    check(bf_sweep_delay_noisy(&base, x0.data(), x0.size(), c.theta_deg, c.xi_deg, &cfg,
                               static_cast<size_t>(c.sweep_noisy_trials),
                               c.sweep_dark_correct ? 1 : 0, dd_mean.data(), dd_std.data(),
                               dtf_mean.data(), dtf_std.data()),
          kComputeError, "sweep-delay");
  }

  std::string csv = "x0_mm,delta_D,D_tf";
  if (noisy) csv += ",delta_D_noisy_mean,delta_D_noisy_std,D_tf_noisy_mean,D_tf_noisy_std";
  csv += '\n';
  for (size_t i = 0; i < x0.size(); ++i) {
    csv += fmt(x0[i]) + ',' + fmt(dd[i]) + ',' + fmt(dtf[i]);
    if (noisy) {
      csv += ',' + fmt(dd_mean[i]) + ',' + fmt(dd_std[i]) + ',' + fmt(dtf_mean[i]) + ',' +
             fmt(dtf_std[i]);
    }
    csv += '\n';
  }
  out.write("sweep_delay.csv", csv);
}

void cmd_sweep_angles(const Config& c, Outputs& out) {
  const auto model = make_model(c, c.x0_mm);
  const auto theta = axis(c.theta_min_deg, c.theta_max_deg, c.theta_step_deg);
  const auto xi = axis(c.xi_min_deg, c.xi_max_deg, c.xi_step_deg);
  std::vector<double> surface(theta.size() * xi.size());
  double best_theta = 0.0, best_xi = 0.0;
  check(bf_sweep_angles(model.get(), theta.data(), theta.size(), xi.data(), xi.size(),
                        surface.data(), &best_theta, &best_xi),
        kComputeError, "sweep-angles");

  // Rows are theta, columns xi.
  std::string csv = "theta_deg";
  for (double x : xi) csv += ",xi_" + fmt(x);
  csv += '\n';
  double best_value = 0.0;
  for (size_t i = 0; i < theta.size(); ++i) {
    csv += fmt(theta[i]);
    for (size_t j = 0; j < xi.size(); ++j) {
      const double v = surface[i * xi.size() + j];
      csv += ',' + fmt(v);
      if (theta[i] == best_theta && xi[j] == best_xi) best_value = v;
    }
    csv += '\n';
  }
  out.write("sweep_angles.csv", csv);

  ordered_json summary;
  summary["x0_mm"] = c.x0_mm;
  summary["argmax"] = {{"theta_deg", best_theta}, {"xi_deg", best_xi}};
  summary["max_delta_D"] = best_value;
  summary["n_theta"] = theta.size();
  summary["n_xi"] = xi.size();
  out.write("sweep_angles_summary.json", dump(summary));
}

void cmd_measure(const Config& c, Outputs& out) {
  const auto model = make_model(c, c.x0_mm);
  bf_measure_options opts;
  bf_measure_options_default(&opts);
  opts.coarse_step_deg = c.coarse_step_deg;
  opts.fine_step_deg = c.fine_step_deg;
  opts.cells_per_piece = static_cast<size_t>(c.measure_cells_per_piece);
  bf_measure_result* result = nullptr;
  check(bf_measure_create(model.get(), &opts, &result), kComputeError, "measure");
  std::unique_ptr<bf_measure_result, decltype(&bf_measure_destroy)> guard(result,
                                                                         bf_measure_destroy);
  double theta = 0.0, xi = 0.0;
  check(bf_measure_best_pair(result, &theta, &xi), kComputeError, "measure");

  ordered_json j;
  j["value"] = bf_measure_value(result);
  j["best_theta_deg"] = theta;
  j["best_xi_deg"] = xi;
  ordered_json intervals = ordered_json::array();
  for (size_t i = 0; i < bf_measure_interval_count(result); ++i) {
    bf_interval iv;
    check(bf_measure_interval_at(result, i, &iv), kComputeError, "measure");
    intervals.push_back(
        {{"t_start_ps", iv.t_start_ps}, {"t_end_ps", iv.t_end_ps}, {"delta_D", iv.delta_D}});
  }
  j["intervals"] = intervals;
  j["grid_resolution_deg"] = bf_measure_resolution_deg(result);
  out.write("measure.json", dump(j));

  if (c.monte_carlo_trials > 0) {
    const auto cfg = counting(c);
    bf_mc_summary raw, corrected;
    check(bf_delta_d_monte_carlo(model.get(), c.theta_deg, c.xi_deg, &cfg,
                                 static_cast<size_t>(c.monte_carlo_trials), &raw, &corrected),
          kComputeError, "measure");
    double noise_free = 0.0;
    check(bf_delta_d(model.get(), c.theta_deg, c.xi_deg, &noise_free), kComputeError,
          "measure");
    auto summary = [](const bf_mc_summary& s) {
      return ordered_json{
          {"mean", s.mean}, {"std", s.std}, {"n_trials", s.n_trials}, {"seed", s.seed}};
    };
    ordered_json mc;
    mc["theta_deg"] = c.theta_deg;
    mc["xi_deg"] = c.xi_deg;
    mc["noise_free_delta_D"] = noise_free;
    mc["raw"] = summary(raw);
    mc["dark_corrected"] = summary(corrected);
    out.write("noise_chain.json", dump(mc));
  }
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) {
    const auto a = cell.find_first_not_of(" \t\r");
    const auto b = cell.find_last_not_of(" \t\r");
    cells.push_back(a == std::string::npos ? "" : cell.substr(a, b - a + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& file, std::size_t line) {
  double v = 0.0;
  const char* end = cell.data() + cell.size();
  const auto r = std::from_chars(cell.data(), end, v);
  if (cell.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(v)) {
    fail(kConfigError,
         file + ":" + std::to_string(line) + ": not a number: '" + cell + "'");
  }
  return v;
}

// Reads the x0_mm and D_tf columns of a CSV with a header row.
void read_points(const std::string& file, std::vector<double>& x0, std::vector<double>& d) {
  std::ifstream in(file);
  if (!in) fail(kIoError, "cannot open data file " + file);
  std::string line;
  std::size_t lineno = 0;
  int ix = -1, id = -1;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split(line);
    if (ix < 0) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (cells[i] == "x0_mm") ix = static_cast<int>(i);
        if (cells[i] == "D_tf") id = static_cast<int>(i);
      }
      if (ix < 0 || id < 0) {
        fail(kConfigError, file + ":" + std::to_string(lineno) +
                               ": header must name columns x0_mm and D_tf");
      }
      width = cells.size();
      continue;
    }
    if (cells.size() != width) {
      fail(kConfigError, file + ":" + std::to_string(lineno) + ": expected " +
                             std::to_string(width) + " fields, found " +
                             std::to_string(cells.size()));
    }
    x0.push_back(parse_cell(cells[ix], file, lineno));
    d.push_back(parse_cell(cells[id], file, lineno));
  }
  if (ix < 0) fail(kConfigError, file + ": empty data file");
}

int cmd_fit(const std::string& data, Outputs& out) {
  std::vector<double> x0, d;
  read_points(data, x0, d);
  bf_fit_result r{};
  const bf_status s = bf_fit_delta_omega(x0.data(), d.data(), x0.size(), &r);
  if (s == BF_ERR_INPUT) fail(kConfigError, data + ": " + bf_last_error());

  ordered_json j;
  j["data_file"] = fs::path(data).filename().string();
  j["n_points"] = x0.size();
  if (s != BF_OK || !r.physical || !r.converged) {
    j["failed"] = true;
    j["reason"] = s != BF_OK       ? std::string(bf_last_error())
                  : !r.physical    ? std::string("fitted width is not physical")
                                   : std::string("optimizer did not converge");
    if (s == BF_OK) {
      j["inv_delta_omega_ps"] = r.inv_delta_omega_ps;
      j["delta_n_l_mm"] = r.delta_n_l_mm;
      j["residual_norm"] = r.residual_norm;
      j["iterations"] = r.iterations;
    }
    out.write("fit.json", dump(j));
    std::cerr << "fit: " << j["reason"].get<std::string>() << '\n';
    return kComputeError;
  }
  j["failed"] = false;
  j["inv_delta_omega_ps"] = r.inv_delta_omega_ps;
  j["std_error_ps"] = r.std_error_ps;
  j["residual_norm"] = r.residual_norm;
  j["delta_n_l_mm"] = r.delta_n_l_mm;
  j["iterations"] = r.iterations;
  out.write("fit.json", dump(j));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Staged dephasing of a polarization qubit: trace distance dynamics, "
               "information backflow and fits"};
  app.require_subcommand(1);

  std::string config_path, out_dir, data_path;
  std::uint64_t seed = 0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config_path, "JSON run configuration");
    sub->add_option("--out", out_dir, "output directory (overrides output_dir)");
    sub->add_option("--seed", seed, "RNG seed (overrides seed)");
  };
  auto* traj = app.add_subcommand("trajectory", "D(t), sigma(t), |kappa(t)|, gamma(t) for a pair");
  auto* sweep_delay = app.add_subcommand("sweep-delay", "delta_D and D(tf) versus delay");
  auto* sweep_angles = app.add_subcommand("sweep-angles", "delta_D over initial-state angles");
  auto* measure = app.add_subcommand("measure", "information-backflow measure");
  auto* fit = app.add_subcommand("fit", "fit 1/delta_omega to D(tf) versus delay");
  for (auto* sub : {traj, sweep_delay, sweep_angles, measure, fit}) add_common(sub);
  fit->add_option("--data", data_path, "CSV with columns x0_mm and D_tf")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    Config c = load_config(config_path);
    if (!out_dir.empty()) c.output_dir = out_dir;
    for (auto* sub : {traj, sweep_delay, sweep_angles, measure, fit}) {
      if (sub->count("--seed")) c.seed = seed;
    }
    validate(c);
    make_model(c, c.x0_mm);  // physical parameters are checked before any output

    const std::string command = app.get_subcommands().front()->get_name();
    Outputs out(c.output_dir);
    int rc = kOk;
    if (command == "trajectory") cmd_trajectory(c, out);
    if (command == "sweep-delay") cmd_sweep_delay(c, out);
    if (command == "sweep-angles") cmd_sweep_angles(c, out);
    if (command == "measure") cmd_measure(c, out);
    if (command == "fit") rc = cmd_fit(data_path, out);
    out.manifest(command, c);
    return rc;
  } catch (const Failure& f) {
    std::cerr << "error: " << f.message << '\n';
    return f.code;
  }
}
