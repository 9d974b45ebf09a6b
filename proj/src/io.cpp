#include "misinfo/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "misinfo/dynamics.hpp"

namespace misinfo::io {

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + " must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) {
      std::string names;
      for (const auto& k : known) names += (names.empty() ? "" : ", ") + k;
      throw std::invalid_argument("unknown key '" + it.key() + "' in " + where + "; valid keys: " + names);
    }
  }
}

double get_real(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (!v.is_number()) throw std::invalid_argument("'" + key + "' must be a number");
  return v.get<double>();
}

std::uint64_t get_count(const json& j, const std::string& key) {
  const json& v = j.at(key);
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) throw std::invalid_argument("'" + key + "' must be >= 0");
  if (v.is_number_float()) {
    const double d = v.get<double>();
    if (d >= 0.0 && d == std::floor(d) && d < 1.8e19) return static_cast<std::uint64_t>(d);
  }
  throw std::invalid_argument("'" + key + "' must be a non-negative integer");
}

template <typename T>
void set_real(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = get_real(j, key);
}

template <typename T>
void set_count(const json& j, const char* key, T& field) {
  if (j.contains(key)) field = static_cast<T>(get_count(j, key));
}

json to_array(const VectorXd& v) {
  json a = json::array();
  for (double x : v) a.push_back(x);
  return a;
}

VectorXd from_array(const json& j, const std::string& what) {
  if (!j.is_array()) throw std::invalid_argument(what + " must be a list of numbers");
  VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw std::invalid_argument(what + " must be a list of numbers");
    v(static_cast<Eigen::Index>(k)) = j[k].get<double>();
  }
  return v;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::stringstream ss(line);
  std::string field;
  while (std::getline(ss, field, ',')) fields.push_back(trim(field));
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

double parse_double(const std::string& text, const std::string& what) {
  double v = 0.0;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (!text.empty() && *begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, v);
  if (ec != std::errc() || ptr != end) throw std::invalid_argument("cannot parse '" + text + "' as a number in " + what);
  return v;
}

bool next_data_line(std::istream& in, std::string& line) {
  while (std::getline(in, line)) {
    if (!trim(line).empty()) return true;
  }
  return false;
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc()) throw std::runtime_error("number formatting failed");
  return std::string(buf, ptr);
}

// Configuration ----------------------------------------------------------------

json to_json(const ModelParams& p) {
  return {{"eta", p.eta},     {"xi", p.xi},       {"kappa", p.kappa}, {"kappa_hat", p.kappa_hat},
          {"lambda", p.lambda}, {"h", p.h},       {"sigma", p.sigma}, {"varpi", p.varpi},
          {"vartheta", p.vartheta}, {"gamma", p.gamma}, {"x_min", p.x_min}, {"x_max", p.x_max}};
}

json to_json(const SimulationConfig& c) {
  json j = {{"n_individuals", c.n_individuals},
            {"n_sources", c.n_sources},
            {"horizon_T", c.horizon_T},
            {"beta1", c.beta1},
            {"beta2", c.beta2},
            {"n_bins_l", c.n_bins_l},
            {"seed", c.seed},
            {"params", to_json(c.params)}};
  j["source_opinions"] = to_array(c.resolved_source_opinions());
  return j;
}

json to_json(const SolverParams& s) {
  return {{"tau_L", s.tau_L},
          {"tau_R", s.tau_R},
          {"step_size", s.step_size},
          {"max_iters", s.max_iters},
          {"tolerance", s.tolerance}};
}

json to_json(const RunConfig& r) {
  json j = to_json(r.simulation);
  j["solver"] = to_json(r.solver);
  j["n_rollouts"] = r.n_rollouts;
  j["replications"] = r.replications;
  if (!r.axes.empty()) {
    json axes = json::array();
    for (const auto& a : r.axes) axes.push_back({{"name", a.name}, {"values", a.values}});
    j["axes"] = axes;
  }
  return j;
}

void update_from_json(ModelParams& p, const json& j) {
  reject_unknown(j,
                 {"eta", "xi", "kappa", "kappa_hat", "lambda", "h", "sigma", "varpi", "vartheta", "gamma", "x_min",
                  "x_max"},
                 "params");
  set_real(j, "eta", p.eta);
  set_real(j, "xi", p.xi);
  set_real(j, "kappa", p.kappa);
  set_real(j, "kappa_hat", p.kappa_hat);
  set_real(j, "lambda", p.lambda);
  set_real(j, "h", p.h);
  set_real(j, "sigma", p.sigma);
  set_real(j, "varpi", p.varpi);
  if (j.contains("vartheta")) {
    const double v = get_real(j, "vartheta");
    if (v != std::floor(v) || v < 1.0 || v > 1000.0) throw std::invalid_argument("'vartheta' must be a positive integer");
    p.vartheta = static_cast<int>(v);
  }
  set_real(j, "gamma", p.gamma);
  set_real(j, "x_min", p.x_min);
  set_real(j, "x_max", p.x_max);
}

void update_from_json(SimulationConfig& c, const json& j) {
  reject_unknown(j,
                 {"n_individuals", "n_sources", "horizon_T", "beta1", "beta2", "n_bins_l", "seed", "params",
                  "source_opinions"},
                 "simulation config");
  set_count(j, "n_individuals", c.n_individuals);
  set_count(j, "n_sources", c.n_sources);
  set_count(j, "horizon_T", c.horizon_T);
  set_real(j, "beta1", c.beta1);
  set_real(j, "beta2", c.beta2);
  set_count(j, "n_bins_l", c.n_bins_l);
  set_count(j, "seed", c.seed);
  if (j.contains("params")) update_from_json(c.params, j.at("params"));
  if (j.contains("source_opinions")) c.source_opinions = from_array(j.at("source_opinions"), "source_opinions");
}

void update_from_json(SolverParams& s, const json& j) {
  reject_unknown(j, {"tau_L", "tau_R", "step_size", "max_iters", "tolerance"}, "solver");
  set_real(j, "tau_L", s.tau_L);
  set_real(j, "tau_R", s.tau_R);
  set_real(j, "step_size", s.step_size);
  set_count(j, "max_iters", s.max_iters);
  set_real(j, "tolerance", s.tolerance);
}

void update_from_json(RunConfig& r, const json& j) {
  if (!j.is_object()) throw std::invalid_argument("config must be an object");
  json sim = json::object();
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& key = it.key();
    if (key == "solver") {
      update_from_json(r.solver, it.value());
    } else if (key == "n_rollouts") {
      r.n_rollouts = get_count(j, key);
    } else if (key == "replications") {
      r.replications = get_count(j, key);
    } else if (key == "axes") {
      if (!it->is_array()) throw std::invalid_argument("'axes' must be a list");
      r.axes.clear();
      for (const auto& a : *it) {
        reject_unknown(a, {"name", "values"}, "axis");
        if (!a.contains("name") || !a.at("name").is_string()) throw std::invalid_argument("axis needs a string 'name'");
        SweepAxis axis{a.at("name").get<std::string>(), {}};
        if (a.contains("values")) {
          const VectorXd v = from_array(a.at("values"), "axis values");
          axis.values.assign(v.begin(), v.end());
        }
        r.axes.push_back(std::move(axis));
      }
    } else {
      sim[key] = it.value();
    }
  }
  update_from_json(r.simulation, sim);
}

RunConfig load_run_config(const std::filesystem::path& path) {
  RunConfig r;
  update_from_json(r, read_json_file(path));
  return r;
}

std::string config_hash(const json& j) {
  const std::uint64_t h = hash_label(j.dump());
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// Files ------------------------------------------------------------------------

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot read " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

void write_json_file(const std::filesystem::path& path, const json& j) { write_text_file(path, j.dump(2) + "\n"); }

// Trajectories and metrics -------------------------------------------------------

void write_trajectory_csv(std::ostream& out, const Trajectory& traj) {
  const auto horizon = static_cast<Eigen::Index>(traj.horizon());
  const auto n = static_cast<Eigen::Index>(traj.n_individuals());
  const auto m = static_cast<Eigen::Index>(traj.n_sources());
  out << "t,entity_kind,entity_id,opinion,credibility,action,susceptibility\n";
  for (Eigen::Index t = 0; t <= horizon; ++t) {
    for (Eigen::Index i = 0; i < n; ++i)
      out << t << ",individual," << i << ',' << format_double(traj.opinion_history(t, i)) << ",,,"
          << format_double(traj.susceptibilities(i)) << '\n';
    for (Eigen::Index s = 0; s < m; ++s) {
      out << t << ",source," << s << ',' << format_double(traj.source_opinions(s)) << ','
          << format_double(traj.credibility_history(t, s)) << ',';
      if (t < horizon) out << traj.action_history(t, s);
      out << ",\n";
    }
  }
}

void write_histogram_csv(std::ostream& out, const Trajectory& traj, std::size_t bins, double x_min, double x_max) {
  const double width = (x_max - x_min) / static_cast<double>(bins);
  out << "t,bin_center,density\n";
  for (Eigen::Index t = 0; t < traj.opinion_history.rows(); ++t) {
    const VectorXd z = discretize_opinions(traj.opinion_history.row(t).transpose(), bins, x_min, x_max);
    for (std::size_t b = 0; b < bins; ++b)
      out << t << ',' << format_double(x_min + (static_cast<double>(b) + 0.5) * width) << ','
          << format_double(z(static_cast<Eigen::Index>(b)) / width) << '\n';
  }
}

json to_json(const MetricReport& m) {
  json j = {{"mean_exposure", m.mean_exposure}, {"discounted_return", m.discounted_return}};
  j["bimodality"] = std::isfinite(m.bimodality) ? json(m.bimodality) : json(nullptr);
  j["polarized"] = std::isfinite(m.bimodality) ? json(m.bimodality > kBimodalityThreshold) : json(nullptr);
  j["bimodality_threshold"] = kBimodalityThreshold;
  return j;
}

// Profiles and curves -------------------------------------------------------------

std::vector<CredibilityCurveRecord> read_credibility_curve_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw std::invalid_argument("credibility curve CSV is empty");
  if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
  const auto header = split_csv_line(line);
  if (header.size() != 2 || header[0] != "bias" || header[1] != "credibility")
    throw std::invalid_argument("credibility curve CSV needs the header 'bias,credibility'");
  std::vector<CredibilityCurveRecord> rows;
  std::size_t line_no = 1;
  while (next_data_line(in, line)) {
    ++line_no;
    const auto fields = split_csv_line(line);
    const std::string where = "credibility curve line " + std::to_string(line_no);
    if (fields.size() != 2) throw std::invalid_argument(where + " must have two fields");
    rows.push_back({parse_double(fields[0], where), parse_double(fields[1], where)});
  }
  if (rows.empty()) throw std::invalid_argument("credibility curve CSV has no records");
  return rows;
}

std::vector<StrategyProfile> read_profile_file(const std::filesystem::path& path) {
  const json j = read_json_file(path);
  if (!j.is_object() || j.empty()) throw std::invalid_argument("profile file must map names to probability lists");
  std::vector<StrategyProfile> out;
  for (auto it = j.begin(); it != j.end(); ++it) {
    StrategyProfile p{it.key(), from_array(it.value(), "profile '" + it.key() + "'")};
    p.validate();
    out.push_back(std::move(p));
  }
  return out;
}

json to_json(const std::vector<StrategyProfile>& profiles) {
  json j = json::object();
  for (const auto& p : profiles) j[p.name] = to_array(p.factual_prob);
  return j;
}

// Game ------------------------------------------------------------------------------

void write_matrix_csv(std::ostream& out, const MatrixXd& m, const std::vector<std::string>& row_names,
                      const std::vector<std::string>& col_names) {
  if (row_names.size() != static_cast<std::size_t>(m.rows()) || col_names.size() != static_cast<std::size_t>(m.cols()))
    throw std::invalid_argument("matrix labels do not match its shape");
  out << "profile";
  for (const auto& c : col_names) out << ',' << c;
  out << '\n';
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    out << row_names[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < m.cols(); ++j) out << ',' << format_double(m(i, j));
    out << '\n';
  }
}

LabelledMatrix read_matrix_csv(std::istream& in) {
  std::string line;
  if (!next_data_line(in, line)) throw std::invalid_argument("matrix CSV is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "profile")
    throw std::invalid_argument("matrix CSV needs a header 'profile,<column names>'");
  LabelledMatrix out;
  out.col_names.assign(header.begin() + 1, header.end());
  std::vector<std::vector<double>> rows;
  while (next_data_line(in, line)) {
    const auto fields = split_csv_line(line);
    const std::string where = "matrix row " + std::to_string(rows.size() + 1);
    if (fields.size() != header.size()) throw std::invalid_argument(where + " has the wrong number of fields");
    out.row_names.push_back(fields[0]);
    std::vector<double> row;
    for (std::size_t k = 1; k < fields.size(); ++k) {
      row.push_back(parse_double(fields[k], where));
      if (!std::isfinite(row.back())) throw std::invalid_argument(where + " contains a non-finite value");
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw std::invalid_argument("matrix CSV has no rows");
  out.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(out.col_names.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      out.values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
  return out;
}

json to_json(const EquilibriumResult& e) {
  return {{"mu", to_array(e.mu)},       {"nu", to_array(e.nu)},
          {"value", e.value},           {"residual", e.residual},
          {"iterations", e.iterations}, {"converged", e.converged}};
}

json to_json(const MirrorReport& r) {
  return {{"entries", r.entries},
          {"within_bound", r.within},
          {"fraction_within", r.fraction_within},
          {"max_abs_z", std::isfinite(r.max_abs_z) ? json(r.max_abs_z) : json(nullptr)},
          {"z_bound", r.z_bound}};
}

json to_json(const OutcomeStats& o) {
  return {{"bimodality_mean", o.bimodality_mean},
          {"bimodality_se", o.bimodality_se},
          {"polarized_fraction", o.polarized_fraction},
          {"exposure_mean", o.exposure_mean},
          {"exposure_se", o.exposure_se},
          {"exposure_left_mean", o.exposure_left_mean},
          {"exposure_right_mean", o.exposure_right_mean},
          {"replications", o.replications},
          {"degenerate", o.degenerate}};
}

json to_json(const DeviationReport& d) {
  return {{"forced_mu", to_array(d.forced_mu)},
          {"response_nu", to_array(d.response_nu)},
          {"equilibrium", to_json(d.equilibrium)},
          {"response_mean_factual", d.response_mean_factual},
          {"equilibrium_mean_factual", d.equilibrium_mean_factual},
          {"tv_to_equilibrium", d.tv_to_equilibrium},
          {"payoff_L_deviation", d.payoff_L_deviation},
          {"payoff_L_equilibrium", d.payoff_L_equilibrium},
          {"deviation_loses_for_L", d.deviation_loses_for_L},
          {"outcome", to_json(d.outcome)}};
}

// Sweep ---------------------------------------------------------------------------

void write_sweep_csv(std::ostream& out, const SweepSpec& spec, const std::vector<SweepCellResult>& cells) {
  for (const auto& axis : spec.axes) out << axis.name << ',';
  out << "ok,phase,low_confidence,bimodality,bimodality_se,polarized_fraction,mean_exposure,mean_exposure_se,"
         "value,residual,radical_factual,centrist_factual,error\n";
  for (const auto& cell : cells) {
    for (double v : cell.values) out << format_double(v) << ',';
    if (!cell.ok) {
      std::string message = cell.error;
      for (char& c : message)
        if (c == ',' || c == '\n' || c == '\r') c = ' ';
      out << "0,,,,,,,,,,,," << message << '\n';
      continue;
    }
    const auto& o = cell.outcome;
    out << "1," << phase_name(cell.phase.label) << ',' << (cell.phase.low_confidence ? 1 : 0) << ','
        << format_double(o.bimodality_mean) << ',' << format_double(o.bimodality_se) << ','
        << format_double(o.polarized_fraction) << ',' << format_double(o.exposure_mean) << ','
        << format_double(o.exposure_se) << ',' << format_double(cell.equilibrium.value) << ','
        << format_double(cell.equilibrium.residual) << ',' << format_double(cell.phase.radical_factual) << ','
        << format_double(cell.phase.centrist_factual) << ",\n";
  }
}

json to_json(const SweepCellResult& cell) {
  json j = {{"values", cell.values}, {"ok", cell.ok}};
  if (!cell.ok) {
    j["error"] = cell.error;
    return j;
  }
  j["equilibrium"] = to_json(cell.equilibrium);
  j["outcome"] = to_json(cell.outcome);
  j["phase"] = phase_name(cell.phase.label);
  j["low_confidence"] = cell.phase.low_confidence;
  j["radical_factual"] = cell.phase.radical_factual;
  j["centrist_factual"] = cell.phase.centrist_factual;
  return j;
}

// Manifest --------------------------------------------------------------------------

json to_json(const RunManifest& m) {
  return {{"command", m.command}, {"config", m.config},        {"seed", m.seed},
          {"artifacts", m.artifacts}, {"wall_seconds", m.wall_seconds}, {"version", m.version}};
}

}  // namespace misinfo::io
