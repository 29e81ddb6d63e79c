#include "nloc/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include <json.hpp>

namespace nloc {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& what) { throw std::invalid_argument(what); }

void check_fields(const json& j, const char* where, std::initializer_list<const char*> allowed) {
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* k : allowed) known = known || item.key() == k;
    if (!known) bad(std::string("schema: unknown field '") + item.key() + "' in " + where);
  }
}

const json& field(const json& j, const char* key, const char* where) {
  auto it = j.find(key);
  if (it == j.end()) bad(std::string("schema: missing field '") + key + "' in " + where);
  return *it;
}

double num_field(const json& j, const char* key, const char* where) {
  const json& v = field(j, key, where);
  if (!v.is_number()) bad(std::string("schema: '") + key + "' in " + where + " must be a number");
  return v.get<double>();
}

int int_field(const json& j, const char* key, const char* where) {
  const json& v = field(j, key, where);
  if (!v.is_number_integer())
    bad(std::string("schema: '") + key + "' in " + where + " must be an integer");
  return v.get<int>();
}

std::string str_field(const json& j, const char* key, const char* where) {
  const json& v = field(j, key, where);
  if (!v.is_string()) bad(std::string("schema: '") + key + "' in " + where + " must be a string");
  return v.get<std::string>();
}

std::vector<double> vec_field(const json& j, const char* key, const char* where) {
  const json& v = field(j, key, where);
  if (!v.is_array()) bad(std::string("schema: '") + key + "' in " + where + " must be an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number())
      bad(std::string("schema: '") + key + "' in " + where + " must hold numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

std::string num17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string num6(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

std::string kind_name(const FrontSegment& seg) {
  if (seg.left == seg.right) return "edge";
  switch (seg.kind) {
    case FrontKind::shock: return "shock";
    case FrontKind::fan: return "fan";
    case FrontKind::nonclassical: return "nonclassical";
  }
  return "shock";
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  return out;
}

json json_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

Scenario parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    bad(std::string("schema: not valid JSON: ") + e.what());
  }
  if (!j.is_object()) bad("schema: scenario must be a JSON object");
  check_fields(j, "scenario",
               {"schema", "engine", "flux", "weight", "constraint", "datum", "params", "outputs"});
  if (str_field(j, "schema", "scenario") != "nloc-scenario/1")
    bad("schema: expected \"nloc-scenario/1\"");

  Scenario sc;
  sc.source_json = text;
  sc.engine = str_field(j, "engine", "scenario");
  if (sc.engine != "split" && sc.engine != "exact")
    bad("schema: engine must be \"split\" or \"exact\"");

  const json& jf = field(j, "flux", "scenario");
  std::string ftype = str_field(jf, "type", "flux");
  if (ftype == "lwr") {
    check_fields(jf, "flux", {"type", "v_max", "R"});
    sc.flux = build_lwr_flux(num_field(jf, "v_max", "flux"), num_field(jf, "R", "flux"));
  } else if (ftype == "table") {
    check_fields(jf, "flux", {"type", "rho", "f"});
    sc.flux = build_table_flux(vec_field(jf, "rho", "flux"), vec_field(jf, "f", "flux"));
  } else {
    bad("schema: flux type must be \"lwr\" or \"table\"");
  }

  const json& jw = field(j, "weight", "scenario");
  std::string wtype = str_field(jw, "type", "weight");
  if (wtype == "linear") {
    check_fields(jw, "weight", {"type", "i_w"});
    sc.weight = build_linear_weight(num_field(jw, "i_w", "weight"));
  } else if (wtype == "pwl") {
    check_fields(jw, "weight", {"type", "x", "w"});
    sc.weight = build_pwl_weight(vec_field(jw, "x", "weight"), vec_field(jw, "w", "weight"));
  } else {
    bad("schema: weight type must be \"linear\" or \"pwl\"");
  }

  const json& jc = field(j, "constraint", "scenario");
  std::string ctype = str_field(jc, "type", "constraint");
  if (sc.engine == "split" && ctype != "lipschitz")
    bad("engine/constraint compatibility: split requires Lipschitz p");
  if (sc.engine == "exact" && ctype != "step")
    bad("engine/constraint compatibility: exact requires step p");
  if (ctype == "lipschitz") {
    check_fields(jc, "constraint", {"type", "xi", "p"});
    sc.lip = build_lipschitz_constraint(vec_field(jc, "xi", "constraint"),
                                        vec_field(jc, "p", "constraint"));
  } else if (ctype == "step") {
    check_fields(jc, "constraint", {"type", "thresholds", "values"});
    sc.step = build_step_constraint(vec_field(jc, "thresholds", "constraint"),
                                    vec_field(jc, "values", "constraint"));
  } else {
    bad("schema: constraint type must be \"lipschitz\" or \"step\"");
  }

  const json& jd = field(j, "datum", "scenario");
  check_fields(jd, "datum", {"breakpoints", "values"});
  sc.rho0 = make_profile(vec_field(jd, "breakpoints", "datum"), vec_field(jd, "values", "datum"));

  std::vector<double> profile_times;
  if (j.contains("outputs")) {
    const json& jo = j["outputs"];
    check_fields(jo, "outputs", {"profile_times"});
    if (jo.contains("profile_times")) profile_times = vec_field(jo, "profile_times", "outputs");
    std::sort(profile_times.begin(), profile_times.end());
    profile_times.erase(std::unique(profile_times.begin(), profile_times.end()),
                        profile_times.end());
  }

  const json& jp = field(j, "params", "scenario");
  if (sc.engine == "split") {
    check_fields(jp, "params", {"n", "h", "T"});
    sc.split_cfg.n = int_field(jp, "n", "params");
    sc.split_cfg.h = int_field(jp, "h", "params");
    sc.split_cfg.T = num_field(jp, "T", "params");
    sc.split_cfg.profile_times = profile_times;
  } else {
    check_fields(jp, "params", {"n_fan", "T", "policy"});
    sc.exact_cfg.n_fan = int_field(jp, "n_fan", "params");
    sc.exact_cfg.T = num_field(jp, "T", "params");
    sc.exact_cfg.profile_times = profile_times;
    if (jp.contains("policy")) {
      std::string pol = str_field(jp, "policy", "params");
      if (pol == "rq")
        sc.exact_cfg.policy = SolverPolicy::rq;
      else if (pol == "rp")
        sc.exact_cfg.policy = SolverPolicy::rp;
      else
        bad("schema: policy must be \"rq\" or \"rp\"");
    }
  }
  return sc;
}

Scenario load_scenario(const std::string& path) { return parse_scenario(slurp(path)); }

Scenario corridor_scenario(int n_fan, SolverPolicy policy) {
  json j;
  j["schema"] = "nloc-scenario/1";
  j["engine"] = "exact";
  j["flux"] = {{"type", "lwr"}, {"v_max", 1.0}, {"R", 1.0}};
  j["weight"] = {{"type", "linear"}, {"i_w", 1.0}};
  j["constraint"] = {{"type", "step"},
                     {"thresholds", {0.566027937496, 0.730760427145}},
                     {"values", {0.21, 0.168, 0.021}}};
  j["datum"] = {{"breakpoints", {-5.75, -2.0}}, {"values", {0.0, 1.0, 0.0}}};
  j["params"] = {{"n_fan", n_fan},
                 {"T", 95.0},
                 {"policy", policy == SolverPolicy::rq ? "rq" : "rp"}};
  j["outputs"] = {{"profile_times", {0.0, 15.0, 60.0, 95.0}}};
  return parse_scenario(j.dump(2) + "\n");
}

Trajectory run_scenario(const Scenario& sc) {
  if (sc.engine == "split") return run_splitting(sc.rho0, sc.flux, sc.weight, sc.lip, sc.split_cfg);
  return run_exact(sc.rho0, sc.flux, sc.weight, sc.step, sc.exact_cfg);
}

std::vector<CheckReport> standard_checks(const Scenario& sc, const Trajectory& traj) {
  std::vector<CheckReport> out;
  out.push_back(check_conservation(traj));
  out.push_back(check_flux_trace(traj, sc.flux));
  if (sc.engine == "split") {
    out.push_back(check_temple_monotone(traj, sc.flux, sc.split_cfg.n));
    out.push_back(check_interaction_table(traj, sc.flux, sc.split_cfg.n, sc.split_cfg.h));
    out.push_back(check_tv_bound(traj, sc.flux, sc.weight, sc.lip));
    out.push_back(check_efficiency_jumps(traj, sc.flux, sc.weight, sc.lip, sc.split_cfg.h));
    out.push_back(validate_entropy(traj, build_piecewise_linear(sc.flux, sc.split_cfg.n)));
  } else {
    out.push_back(validate_entropy(traj, sc.flux, sc.exact_cfg.n_fan));
  }
  return out;
}

namespace {

void write_fronts_svg(const Trajectory& traj, const std::string& path) {
  double x_lo = 0.0, x_hi = 0.0;
  for (const FrontSegment& s : traj.segments) {
    x_lo = std::min({x_lo, s.x0, s.x1});
    x_hi = std::max({x_hi, s.x0, s.x1});
  }
  if (x_hi <= x_lo) x_hi = x_lo + 1.0;
  const double W = 720, H = 520, m = 40;
  auto X = [&](double x) { return m + (x - x_lo) / (x_hi - x_lo) * W; };
  auto Y = [&](double t) { return m + H - t / traj.T * H; };

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num6(W + 2 * m) << "\" height=\""
      << num6(H + 2 * m) << "\">\n";
  out << "<line x1=\"" << num6(X(0.0)) << "\" y1=\"" << num6(Y(0.0)) << "\" x2=\"" << num6(X(0.0))
      << "\" y2=\"" << num6(Y(traj.T))
      << "\" stroke=\"#99aacc\" stroke-width=\"0.8\" stroke-dasharray=\"6 3\"/>\n";
  for (const FrontSegment& s : traj.segments) {
    const char* color = "#222222";
    const char* width = "1";
    if (s.left == s.right) {
      color = "#bbbbbb";
      width = "0.6";
    } else if (s.kind == FrontKind::fan) {
      color = "#888888";
      width = "0.8";
    } else if (s.kind == FrontKind::nonclassical) {
      color = "#cc2222";
      width = "2.4";
    }
    out << "<line x1=\"" << num6(X(s.x0)) << "\" y1=\"" << num6(Y(s.t0)) << "\" x2=\""
        << num6(X(s.x1)) << "\" y2=\"" << num6(Y(s.t1)) << "\" stroke=\"" << color
        << "\" stroke-width=\"" << width << "\"/>\n";
  }
  out << "</svg>\n";
}

void write_profile_svg(const ProfileSnapshot& snap, double R, const std::string& path) {
  const DensityProfile& pr = snap.rho;
  double x_lo = -1.0, x_hi = 1.0;
  if (!pr.breakpoints.empty()) {
    x_lo = pr.breakpoints.front() - 1.0;
    x_hi = pr.breakpoints.back() + 1.0;
  }
  const double W = 720, H = 320, m = 40;
  auto X = [&](double x) { return m + (x - x_lo) / (x_hi - x_lo) * W; };
  auto Y = [&](double v) { return m + H - v / R * H; };

  std::ofstream out = open_out(path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num6(W + 2 * m) << "\" height=\""
      << num6(H + 2 * m) << "\">\n";
  out << "<line x1=\"" << num6(m) << "\" y1=\"" << num6(Y(0.0)) << "\" x2=\"" << num6(m + W)
      << "\" y2=\"" << num6(Y(0.0)) << "\" stroke=\"#888888\" stroke-width=\"0.5\"/>\n";
  out << "<polyline fill=\"none\" stroke=\"#1133aa\" stroke-width=\"1.5\" points=\"";
  double x = x_lo;
  out << num6(X(x)) << "," << num6(Y(pr.values.front()));
  for (size_t i = 0; i < pr.breakpoints.size(); ++i) {
    double b = pr.breakpoints[i];
    out << " " << num6(X(b)) << "," << num6(Y(pr.values[i]));
    out << " " << num6(X(b)) << "," << num6(Y(pr.values[i + 1]));
  }
  out << " " << num6(X(x_hi)) << "," << num6(Y(pr.values.back()));
  out << "\"/>\n</svg>\n";
}

}  // namespace

void write_outputs(const Scenario& sc, const Trajectory& traj, const std::string& dir,
                   bool with_svg) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  {
    std::ofstream out = open_out(dir + "/fronts.csv");
    out << "id,kind,t0,x0,t1,x1,left,right\n";
    for (const FrontSegment& s : traj.segments)
      out << s.id << "," << kind_name(s) << "," << num17(s.t0) << "," << num17(s.x0) << ","
          << num17(s.t1) << "," << num17(s.x1) << "," << num17(s.left) << "," << num17(s.right)
          << "\n";
  }
  {
    std::ofstream out = open_out(dir + "/xi.csv");
    out << "t,xi,q\n";
    for (const XiSample& s : traj.xi.samples)
      out << num17(s.t) << "," << num17(s.xi) << "," << num17(s.q) << "\n";
  }
  {
    std::ofstream out = open_out(dir + "/profiles.csv");
    out << "t,x_left,x_right,value\n";
    const double inf = std::numeric_limits<double>::infinity();
    for (const ProfileSnapshot& snap : traj.profiles) {
      const DensityProfile& pr = snap.rho;
      for (size_t i = 0; i < pr.values.size(); ++i) {
        double a = i == 0 ? -inf : pr.breakpoints[i - 1];
        double b = i == pr.breakpoints.size() ? inf : pr.breakpoints[i];
        out << num17(snap.t) << "," << num17(a) << "," << num17(b) << "," << num17(pr.values[i])
            << "\n";
      }
    }
  }
  {
    std::ofstream out = open_out(dir + "/events.jsonl");
    for (const EventRecord& ev : traj.events) {
      json row;
      row["t"] = ev.t;
      row["x"] = ev.x;
      row["label"] = ev.label;
      row["waves_before"] = ev.waves_before;
      row["waves_after"] = ev.waves_after;
      row["ups_before"] = ev.ups_before;
      row["ups_after"] = ev.ups_after;
      row["detail"] = ev.detail;
      out << row.dump() << "\n";
    }
  }
  {
    json arr = json::array();
    for (const CheckReport& rep : standard_checks(sc, traj)) {
      json row;
      row["check"] = rep.check;
      row["pass"] = rep.pass;
      row["worst_violation"] = rep.worst_violation;
      row["context"] = rep.context;
      arr.push_back(row);
    }
    std::ofstream out = open_out(dir + "/reports.json");
    out << arr.dump(2) << "\n";
  }
  {
    json ev;
    ev["T"] = traj.T;
    ev["evacuated"] = traj.evacuated;
    ev["evacuation_time"] = traj.evacuated ? json(traj.evacuation_time) : json(nullptr);
    ev["remaining_mass"] = json_or_null(traj.remaining_mass);
    ev["mass0"] = json_or_null(traj.mass0);
    std::ofstream out = open_out(dir + "/evacuation.json");
    out << ev.dump(2) << "\n";
  }
  {
    std::ofstream out = open_out(dir + "/scenario.json");
    out << sc.source_json;
  }
  if (with_svg) {
    write_fronts_svg(traj, dir + "/fronts.svg");
    if (!traj.profiles.empty())
      write_profile_svg(traj.profiles.back(), sc.flux.R, dir + "/profile.svg");
  }
}

void write_region_map(const FluxModel& f, const StepConstraint& p, int grid,
                      const std::string& dir) {
  if (grid < 2) throw std::invalid_argument("region_map: grid must be at least 2");
  namespace fs = std::filesystem;
  fs::create_directories(dir);

  std::vector<CaseLabel> labels(static_cast<size_t>(grid) * static_cast<size_t>(grid));
  auto sweep_rows = [&](int row_lo, int row_hi) {
    for (int i = row_lo; i < row_hi; ++i) {
      double rho_l = f.R * static_cast<double>(i) / static_cast<double>(grid - 1);
      for (int k = 0; k < grid; ++k) {
        double rho_r = f.R * static_cast<double>(k) / static_cast<double>(grid - 1);
        labels[static_cast<size_t>(i) * static_cast<size_t>(grid) + static_cast<size_t>(k)] =
            classify(f, p, rho_l, rho_r);
      }
    }
  };
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  int workers = static_cast<int>(std::min<unsigned>(hw, static_cast<unsigned>(grid)));
  std::vector<std::thread> pool;
  for (int widx = 0; widx < workers; ++widx) {
    int lo = grid * widx / workers, hi = grid * (widx + 1) / workers;
    pool.emplace_back(sweep_rows, lo, hi);
  }
  for (std::thread& th : pool) th.join();

  {
    std::ofstream out = open_out(dir + "/region_map.csv");
    out << "rho_l,rho_r,label\n";
    for (int i = 0; i < grid; ++i) {
      double rho_l = f.R * static_cast<double>(i) / static_cast<double>(grid - 1);
      for (int k = 0; k < grid; ++k) {
        double rho_r = f.R * static_cast<double>(k) / static_cast<double>(grid - 1);
        out << num17(rho_l) << "," << num17(rho_r) << ","
            << to_string(labels[static_cast<size_t>(i) * static_cast<size_t>(grid) +
                                static_cast<size_t>(k)])
            << "\n";
      }
    }
  }
  {
    // gray for classical, white for nonclassical, black for multi-solution;
    // rho_l runs left to right, rho_r bottom to top
    std::ofstream out = open_out(dir + "/region_map.pgm");
    out << "P2\n" << grid << " " << grid << "\n255\n";
    for (int k = grid - 1; k >= 0; --k) {
      for (int i = 0; i < grid; ++i) {
        CaseLabel lab =
            labels[static_cast<size_t>(i) * static_cast<size_t>(grid) + static_cast<size_t>(k)];
        int tone = is_classical_label(lab) ? 128 : is_nonclassical_label(lab) ? 255 : 0;
        out << tone << (i + 1 == grid ? "" : " ");
      }
      out << "\n";
    }
  }
}

CheckReport validate_output_dir(const std::string& dir) {
  Scenario sc = parse_scenario(slurp(dir + "/scenario.json"));

  Trajectory traj;
  {
    std::istringstream in(slurp(dir + "/fronts.csv"));
    std::string line;
    if (!std::getline(in, line) || line != "id,kind,t0,x0,t1,x1,left,right")
      throw std::runtime_error("validate: fronts.csv header mismatch");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::istringstream row(line);
      std::string cell;
      FrontSegment seg;
      std::getline(row, cell, ',');
      seg.id = std::strtol(cell.c_str(), nullptr, 10);
      std::string kind;
      std::getline(row, kind, ',');
      auto next = [&row, &cell]() {
        if (!std::getline(row, cell, ',')) throw std::runtime_error("validate: short fronts row");
        return std::strtod(cell.c_str(), nullptr);
      };
      seg.t0 = next();
      seg.x0 = next();
      seg.t1 = next();
      seg.x1 = next();
      seg.left = next();
      seg.right = next();
      if (kind == "fan")
        seg.kind = FrontKind::fan;
      else if (kind == "nonclassical")
        seg.kind = FrontKind::nonclassical;
      else
        seg.kind = FrontKind::shock;  // shock and edge rows
      traj.segments.push_back(seg);
    }
  }
  {
    std::istringstream in(slurp(dir + "/xi.csv"));
    std::string line;
    if (!std::getline(in, line) || line != "t,xi,q")
      throw std::runtime_error("validate: xi.csv header mismatch");
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      XiSample s;
      if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &s.t, &s.xi, &s.q) != 3)
        throw std::runtime_error("validate: bad xi row");
      traj.xi.samples.push_back(s);
    }
  }

  if (sc.engine == "split")
    return validate_entropy(traj, build_piecewise_linear(sc.flux, sc.split_cfg.n));
  return validate_entropy(traj, sc.flux, sc.exact_cfg.n_fan);
}

std::string default_out_dir() {
  const char* env = std::getenv("NLOC_LWR_OUT");
  if (env != nullptr && env[0] != '\0') return env;
  return "out";
}

}  // namespace nloc
