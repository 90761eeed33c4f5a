#include "sesim/config.hpp"

#include "sesim/analysis.hpp"

#include "json.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace sesim {
namespace {

using nlohmann::json;

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------------------
// Parsing with path diagnostics

[[noreturn]] void fail(const std::string& path, const std::string& msg) {
  if (path.empty()) throw ConfigInvalid("config: " + msg);
  throw ConfigInvalid("config " + path + ": " + msg);
}

void expect_object(const json& j, const std::string& path) {
  if (!j.is_object()) fail(path, "must be an object");
}

void expect_keys(const json& j, const std::string& path,
                 std::initializer_list<const char*> keys) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys)
      if (it.key() == k) {
        known = true;
        break;
      }
    if (!known) fail(path, "unknown key '" + it.key() + "'");
  }
}

const json* find(const json& j, const char* key) {
  auto it = j.find(key);
  return it == j.end() ? nullptr : &*it;
}

double get_double(const json& j, const std::string& path, const char* key, double fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number()) fail(path + "/" + key, "must be a number");
  return v->get<double>();
}

int get_int(const json& j, const std::string& path, const char* key, int fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_integer()) fail(path + "/" + key, "must be an integer");
  return v->get<int>();
}

std::uint64_t get_seed(const json& j, const std::string& path, const char* key,
                       std::uint64_t fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_number_unsigned()) fail(path + "/" + key, "must be a nonnegative integer");
  return v->get<std::uint64_t>();
}

std::string get_string(const json& j, const std::string& path, const char* key,
                       const std::string& fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_string()) fail(path + "/" + key, "must be a string");
  return v->get<std::string>();
}

bool get_bool(const json& j, const std::string& path, const char* key, bool fallback) {
  const json* v = find(j, key);
  if (!v) return fallback;
  if (!v->is_boolean()) fail(path + "/" + key, "must be a boolean");
  return v->get<bool>();
}

void expect_numbers(const json& v, const std::string& path, std::size_t count,
                    const char* shape) {
  if (!v.is_array() || v.size() != count) fail(path, shape);
  for (const json& x : v)
    if (!x.is_number()) fail(path, shape);
}

Vec3 get_vec3(const json& v, const std::string& path) {
  expect_numbers(v, path, 3, "must be an array of 3 numbers");
  return Vec3(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
}

Mat3 get_mat3(const json& v, const std::string& path) {
  expect_numbers(v, path, 9, "must be an array of 9 numbers (row-major)");
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = v[3 * r + c].get<double>();
  return m;
}

MatX get_matx(const json& v, const std::string& path, int n) {
  if (!v.is_array() || int(v.size()) != n)
    fail(path, "must be an array of " + std::to_string(n) + " rows");
  MatX m(n, n);
  for (int r = 0; r < n; ++r) {
    expect_numbers(v[r], path, std::size_t(n),
                   "rows must be arrays of as many numbers as there are agents");
    for (int c = 0; c < n; ++c) m(r, c) = v[r][c].get<double>();
  }
  return m;
}

Digraph parse_graph(const json& j, const std::string& path) {
  expect_object(j, path);
  expect_keys(j, path, {"n", "edges", "weight", "weights"});
  if (!find(j, "n")) fail(path, "needs the node count 'n'");
  const int n = get_int(j, path, "n", 0);
  if (n < 1) fail(path + "/n", "must be at least 1");
  try {
    if (const json* w = find(j, "weights")) {
      if (find(j, "edges") || find(j, "weight"))
        fail(path, "give either 'weights' or 'edges', not both");
      Digraph g;
      g.n = n;
      g.weights = get_matx(*w, path + "/weights", n);
      validate_digraph(g);
      return g;
    }
    std::vector<std::pair<int, int>> edges;
    if (const json* e = find(j, "edges")) {
      if (!e->is_array()) fail(path + "/edges", "must be an array of [i, j] pairs");
      for (const json& entry : *e) {
        if (!entry.is_array() || entry.size() != 2 || !entry[0].is_number_integer() ||
            !entry[1].is_number_integer())
          fail(path + "/edges", "must be an array of [i, j] pairs");
        const int from = entry[0].get<int>();
        const int to = entry[1].get<int>();
        if (from < 0 || from >= n || to < 0 || to >= n)
          fail(path + "/edges", "node indices must lie in [0, " + std::to_string(n - 1) + "]");
        edges.push_back({from, to});
      }
    }
    return Digraph::from_edges(n, edges, get_double(j, path, "weight", 1.0));
  } catch (const ConfigInvalid& e) {
    const std::string what = e.what();
    if (what.rfind("config", 0) == 0) throw;  // already carries a path
    fail(path, what);
  }
}

InitSpec::Rotation parse_rotation_mode(const std::string& s, const std::string& path) {
  if (s == "identity") return InitSpec::Rotation::Identity;
  if (s == "ball") return InitSpec::Rotation::Ball;
  if (s == "flip_z") return InitSpec::Rotation::FixedFlipZ;
  fail(path, "unknown rotation init '" + s + "' (identity, ball, flip_z)");
}

InitSpec::Translation parse_translation_mode(const std::string& s, const std::string& path) {
  if (s == "zero") return InitSpec::Translation::Zero;
  if (s == "box") return InitSpec::Translation::Box;
  if (s == "planar_box") return InitSpec::Translation::PlanarBox;
  fail(path, "unknown translation init '" + s + "' (zero, box, planar_box)");
}

InitSpec::Velocity parse_velocity_mode(const std::string& s, const std::string& path) {
  if (s == "zero") return InitSpec::Velocity::Zero;
  if (s == "ball") return InitSpec::Velocity::Ball;
  if (s == "error_ball") return InitSpec::Velocity::ErrorBall;
  fail(path, "unknown velocity init '" + s + "' (zero, ball, error_ball)");
}

const char* rotation_mode_name(InitSpec::Rotation m) {
  switch (m) {
    case InitSpec::Rotation::Identity: return "identity";
    case InitSpec::Rotation::Ball: return "ball";
    case InitSpec::Rotation::FixedFlipZ: return "flip_z";
  }
  return "ball";
}

const char* translation_mode_name(InitSpec::Translation m) {
  switch (m) {
    case InitSpec::Translation::Zero: return "zero";
    case InitSpec::Translation::Box: return "box";
    case InitSpec::Translation::PlanarBox: return "planar_box";
  }
  return "box";
}

const char* velocity_mode_name(InitSpec::Velocity m) {
  switch (m) {
    case InitSpec::Velocity::Zero: return "zero";
    case InitSpec::Velocity::Ball: return "ball";
    case InitSpec::Velocity::ErrorBall: return "error_ball";
  }
  return "zero";
}

void parse_init(const json& j, const std::string& path, InitSpec& init) {
  expect_object(j, path);
  expect_keys(j, path,
              {"rotation", "rotation_radius", "translation", "box_size", "omega", "omega_radius",
               "velocity", "velocity_radius", "states"});
  if (find(j, "rotation"))
    init.rotation =
        parse_rotation_mode(get_string(j, path, "rotation", ""), path + "/rotation");
  init.rotation_radius = get_double(j, path, "rotation_radius", init.rotation_radius);
  if (find(j, "translation"))
    init.translation =
        parse_translation_mode(get_string(j, path, "translation", ""), path + "/translation");
  init.box_size = get_double(j, path, "box_size", init.box_size);
  if (find(j, "omega"))
    init.omega = parse_velocity_mode(get_string(j, path, "omega", ""), path + "/omega");
  init.omega_radius = get_double(j, path, "omega_radius", init.omega_radius);
  if (find(j, "velocity"))
    init.velocity = parse_velocity_mode(get_string(j, path, "velocity", ""), path + "/velocity");
  init.velocity_radius = get_double(j, path, "velocity_radius", init.velocity_radius);
  if (const json* st = find(j, "states")) {
    const std::string sp = path + "/states";
    if (!st->is_array()) fail(sp, "must be an array of agent states");
    for (std::size_t i = 0; i < st->size(); ++i) {
      const json& entry = (*st)[i];
      const std::string ep = sp + "/" + std::to_string(i);
      expect_object(entry, ep);
      expect_keys(entry, ep, {"rotation", "translation", "omega", "velocity"});
      AgentState s;
      if (const json* r = find(entry, "rotation")) s.pose.R = get_mat3(*r, ep + "/rotation");
      if (const json* t = find(entry, "translation"))
        s.pose.T = get_vec3(*t, ep + "/translation");
      if (const json* w = find(entry, "omega")) s.omega = get_vec3(*w, ep + "/omega");
      if (const json* v = find(entry, "velocity")) s.v = get_vec3(*v, ep + "/velocity");
      init.explicit_states.push_back(s);
    }
  }
}

void parse_schedule(const json& j, const std::string& path, int n, double horizon,
                    ScheduleSpec& out) {
  expect_object(j, path);
  const std::string kind = get_string(j, path, "kind", "");
  if (!find(j, "kind")) fail(path, "needs a 'kind'");
  if (kind == "fixed") {
    expect_keys(j, path, {"kind", "graph"});
    const json* g = find(j, "graph");
    if (!g) fail(path, "fixed schedules need a 'graph'");
    out.kind = ScheduleSpec::Kind::Fixed;
    out.fixed = parse_graph(*g, path + "/graph");
  } else if (kind == "explicit") {
    expect_keys(j, path, {"kind", "weights", "records", "dwell_floor"});
    const json* w = find(j, "weights");
    const json* r = find(j, "records");
    if (!w || !r) fail(path, "explicit schedules need 'weights' and 'records'");
    const MatX table = get_matx(*w, path + "/weights", n);
    std::vector<ScheduleRecord> records;
    if (!r->is_array()) fail(path + "/records", "must be an array");
    for (std::size_t k = 0; k < r->size(); ++k) {
      const json& entry = (*r)[k];
      const std::string ep = path + "/records/" + std::to_string(k);
      expect_object(entry, ep);
      expect_keys(entry, ep, {"agent", "time", "neighbors"});
      ScheduleRecord rec;
      rec.agent = get_int(entry, ep, "agent", -1);
      rec.time = get_double(entry, ep, "time", 0.0);
      if (const json* nb = find(entry, "neighbors")) {
        if (!nb->is_array()) fail(ep + "/neighbors", "must be an array of agent indices");
        for (const json& x : *nb) {
          if (!x.is_number_integer()) fail(ep + "/neighbors", "must be an array of agent indices");
          rec.neighbors.push_back(x.get<int>());
        }
      }
      records.push_back(rec);
    }
    const double dwell = get_double(j, path, "dwell_floor", 0.0);
    try {
      out.explicit_schedule =
          SwitchingSchedule::from_records(n, table, records, dwell, 0.0, horizon);
    } catch (const Error& e) {
      fail(path, e.what());
    }
    out.kind = ScheduleSpec::Kind::Explicit;
  } else if (kind == "random_constant") {
    expect_keys(j, path, {"kind"});
    out.kind = ScheduleSpec::Kind::RandomConstant;
  } else if (kind == "random_switching") {
    expect_keys(j, path, {"kind", "period"});
    out.kind = ScheduleSpec::Kind::RandomSwitching;
    out.period = get_double(j, path, "period", out.period);
  } else if (kind == "alternating") {
    expect_keys(j, path, {"kind", "period", "graphs"});
    const json* gs = find(j, "graphs");
    if (!gs || !gs->is_array() || gs->empty())
      fail(path, "alternating schedules need a nonempty 'graphs' array");
    out.kind = ScheduleSpec::Kind::Alternating;
    out.period = get_double(j, path, "period", out.period);
    for (std::size_t k = 0; k < gs->size(); ++k)
      out.graphs.push_back(parse_graph((*gs)[k], path + "/graphs/" + std::to_string(k)));
  } else if (kind == "disconnected") {
    expect_keys(j, path, {"kind"});
    out.kind = ScheduleSpec::Kind::Disconnected;
  } else {
    fail(path + "/kind",
         "unknown schedule kind '" + kind +
             "' (fixed, explicit, random_constant, random_switching, alternating, disconnected)");
  }
}

void parse_formation(const json& j, const std::string& path, FormationSpec& out) {
  expect_object(j, path);
  expect_keys(j, path, {"enabled", "targets"});
  out.enabled = get_bool(j, path, "enabled", true);
  if (const json* ts = find(j, "targets")) {
    if (!ts->is_array()) fail(path + "/targets", "must be an array of poses");
    for (std::size_t k = 0; k < ts->size(); ++k) {
      const json& entry = (*ts)[k];
      const std::string ep = path + "/targets/" + std::to_string(k);
      expect_object(entry, ep);
      expect_keys(entry, ep, {"rotation", "translation"});
      Pose p;
      if (const json* r = find(entry, "rotation")) p.R = get_mat3(*r, ep + "/rotation");
      if (const json* t = find(entry, "translation")) p.T = get_vec3(*t, ep + "/translation");
      out.targets.push_back(p);
    }
  }
}

void parse_phys(const json& j, const std::string& path, std::vector<AgentPhys>& out) {
  if (!j.is_array()) fail(path, "must be an array of {inertia, mass} entries");
  for (std::size_t k = 0; k < j.size(); ++k) {
    const json& entry = j[k];
    const std::string ep = path + "/" + std::to_string(k);
    expect_object(entry, ep);
    expect_keys(entry, ep, {"inertia", "mass"});
    AgentPhys ph;
    if (const json* in = find(entry, "inertia")) ph.inertia = get_mat3(*in, ep + "/inertia");
    ph.mass = get_double(entry, ep, "mass", ph.mass);
    out.push_back(ph);
  }
}

TrialConfig parse_trial(const json& j, const std::string& path) {
  expect_object(j, path);
  expect_keys(j, path,
              {"agents", "laws", "parameterization", "horizon", "sample_rate", "step", "gain",
               "noise", "seed", "init", "schedule", "formation", "phys"});
  TrialConfig cfg;
  const json* laws = find(j, "laws");
  if (!laws) fail(path, "needs a 'laws' tag");
  if (!laws->is_string()) fail(path + "/laws", "must be a string");
  try {
    cfg.laws = parse_law_set(laws->get<std::string>());
  } catch (const ConfigInvalid& e) {
    fail(path + "/laws", e.what());
  }
  cfg.n = get_int(j, path, "agents", cfg.n);
  if (find(j, "parameterization")) {
    try {
      cfg.param = Parameterization::parse(get_string(j, path, "parameterization", "")).kind();
    } catch (const ConfigInvalid& e) {
      fail(path + "/parameterization", e.what());
    }
  }
  cfg.horizon = get_double(j, path, "horizon", cfg.horizon);
  cfg.sample_rate = get_double(j, path, "sample_rate", cfg.sample_rate);
  cfg.step = get_double(j, path, "step", cfg.step);
  cfg.gain = get_double(j, path, "gain", cfg.gain);
  cfg.noise = get_double(j, path, "noise", cfg.noise);
  cfg.seed = get_seed(j, path, "seed", cfg.seed);
  if (const json* init = find(j, "init")) parse_init(*init, path + "/init", cfg.init);
  if (const json* sched = find(j, "schedule"))
    parse_schedule(*sched, path + "/schedule", cfg.n, cfg.horizon, cfg.schedule);
  if (const json* form = find(j, "formation"))
    parse_formation(*form, path + "/formation", cfg.formation);
  if (const json* phys = find(j, "phys")) parse_phys(*phys, path + "/phys", cfg.phys);
  return cfg;
}

// ---------------------------------------------------------------------------
// Emission

json graph_to_json(const Digraph& g) {
  json rows = json::array();
  for (int r = 0; r < g.n; ++r) {
    json row = json::array();
    for (int c = 0; c < g.n; ++c) row.push_back(g.weights(r, c));
    rows.push_back(row);
  }
  return json{{"n", g.n}, {"weights", rows}};
}

json mat3_to_json(const Mat3& m) {
  json v = json::array();
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) v.push_back(m(r, c));
  return v;
}

json vec3_to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json init_to_json(const InitSpec& init) {
  json j{{"rotation", rotation_mode_name(init.rotation)},
         {"rotation_radius", init.rotation_radius},
         {"translation", translation_mode_name(init.translation)},
         {"box_size", init.box_size},
         {"omega", velocity_mode_name(init.omega)},
         {"omega_radius", init.omega_radius},
         {"velocity", velocity_mode_name(init.velocity)},
         {"velocity_radius", init.velocity_radius}};
  if (!init.explicit_states.empty()) {
    json states = json::array();
    for (const AgentState& s : init.explicit_states)
      states.push_back(json{{"rotation", mat3_to_json(s.pose.R)},
                            {"translation", vec3_to_json(s.pose.T)},
                            {"omega", vec3_to_json(s.omega)},
                            {"velocity", vec3_to_json(s.v)}});
    j["states"] = states;
  }
  return j;
}

json schedule_to_json(const ScheduleSpec& s) {
  switch (s.kind) {
    case ScheduleSpec::Kind::Fixed:
      return json{{"kind", "fixed"}, {"graph", graph_to_json(s.fixed)}};
    case ScheduleSpec::Kind::Explicit: {
      const SwitchingSchedule& es = s.explicit_schedule;
      json rows = json::array();
      const MatX& table = es.weight_table();
      for (int r = 0; r < es.n(); ++r) {
        json row = json::array();
        for (int c = 0; c < es.n(); ++c) row.push_back(table(r, c));
        rows.push_back(row);
      }
      json records = json::array();
      for (const ScheduleRecord& rec : es.events())
        records.push_back(
            json{{"agent", rec.agent}, {"time", rec.time}, {"neighbors", rec.neighbors}});
      return json{{"kind", "explicit"},
                  {"weights", rows},
                  {"records", records},
                  {"dwell_floor", es.dwell_floor()}};
    }
    case ScheduleSpec::Kind::RandomConstant:
      return json{{"kind", "random_constant"}};
    case ScheduleSpec::Kind::RandomSwitching:
      return json{{"kind", "random_switching"}, {"period", s.period}};
    case ScheduleSpec::Kind::Alternating: {
      json graphs = json::array();
      for (const Digraph& g : s.graphs) graphs.push_back(graph_to_json(g));
      return json{{"kind", "alternating"}, {"period", s.period}, {"graphs", graphs}};
    }
    case ScheduleSpec::Kind::Disconnected:
      return json{{"kind", "disconnected"}};
  }
  return json::object();
}

json trial_to_json(const TrialConfig& cfg) {
  json j{{"agents", cfg.n},
         {"laws", law_set_name(cfg.laws)},
         {"parameterization", Parameterization(cfg.param).name()},
         {"horizon", cfg.horizon},
         {"sample_rate", cfg.sample_rate},
         {"step", cfg.step},
         {"gain", cfg.gain},
         {"noise", cfg.noise},
         {"seed", cfg.seed},
         {"init", init_to_json(cfg.init)},
         {"schedule", schedule_to_json(cfg.schedule)}};
  if (cfg.formation.enabled || !cfg.formation.targets.empty()) {
    json targets = json::array();
    for (const Pose& p : cfg.formation.targets)
      targets.push_back(
          json{{"rotation", mat3_to_json(p.R)}, {"translation", vec3_to_json(p.T)}});
    j["formation"] = json{{"enabled", cfg.formation.enabled}, {"targets", targets}};
  }
  if (!cfg.phys.empty()) {
    json phys = json::array();
    for (const AgentPhys& ph : cfg.phys)
      phys.push_back(json{{"inertia", mat3_to_json(ph.inertia)}, {"mass", ph.mass}});
    j["phys"] = phys;
  }
  return j;
}

// ---------------------------------------------------------------------------
// Text rendering

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void append_value(std::string& out, double v) {
  out += ',';
  out += fmt(v);
}

}  // namespace

Experiment parse_experiment(const std::string& json_text) {
  const json root = json::parse(json_text, nullptr, false);
  if (root.is_discarded()) fail("", "not valid JSON");
  expect_object(root, "");
  expect_keys(root, "", {"name", "trials", "success", "trial"});
  Experiment ex;
  ex.name = get_string(root, "", "name", ex.name);
  ex.trials = get_int(root, "", "trials", ex.trials);
  if (ex.trials < 1) fail("/trials", "must be at least 1");
  if (const json* s = find(root, "success")) {
    expect_object(*s, "/success");
    expect_keys(*s, "/success", {"rotation_tol", "translation_tol"});
    ex.rotation_tol = get_double(*s, "/success", "rotation_tol", ex.rotation_tol);
    ex.translation_tol = get_double(*s, "/success", "translation_tol", ex.translation_tol);
    if (!(ex.rotation_tol > 0.0)) fail("/success/rotation_tol", "must be positive");
    if (!(ex.translation_tol > 0.0)) fail("/success/translation_tol", "must be positive");
  }
  const json* trial = find(root, "trial");
  if (!trial) fail("", "needs a 'trial' object");
  ex.trial = parse_trial(*trial, "/trial");
  validate_trial_config(ex.trial);
  return ex;
}

Experiment load_experiment(const std::string& path) {
  return parse_experiment(read_text_file(path));
}

std::string experiment_to_json(const Experiment& ex) {
  const json j{{"name", ex.name},
               {"trials", ex.trials},
               {"success",
                json{{"rotation_tol", ex.rotation_tol}, {"translation_tol", ex.translation_tol}}},
               {"trial", trial_to_json(ex.trial)}};
  return j.dump(2) + "\n";
}

// ---------------------------------------------------------------------------
// Presets

namespace {

Experiment base_experiment(const std::string& name, const std::string& laws, int n) {
  Experiment ex;
  ex.name = name;
  ex.trial.laws = parse_law_set(laws);
  ex.trial.n = n;
  return ex;
}

std::vector<Experiment> preset_fig1() {
  std::vector<Experiment> out;
  for (const char* law : {"first_abs", "first_rel"}) {
    Experiment ex = base_experiment(law == std::string("first_abs") ? "first-abs" : "first-rel",
                                    law, 5);
    ex.trial.init.rotation_radius = kPi / 2;
    out.push_back(ex);
  }
  return out;
}

std::vector<Experiment> preset_fig2() {
  std::vector<Experiment> out;
  for (const char* law : {"first_abs", "first_rel"}) {
    Experiment ex = base_experiment(
        law == std::string("first_abs") ? "first-abs-noisy" : "first-rel-noisy", law, 5);
    ex.trial.init.rotation_radius = kPi / 2;
    ex.trial.noise = 0.1;
    ex.trial.schedule.kind = ScheduleSpec::Kind::RandomSwitching;
    ex.trial.schedule.period = 0.1;
    ex.rotation_tol = 0.5;
    ex.translation_tol = 0.5;
    out.push_back(ex);
  }
  return out;
}

std::vector<Experiment> preset_fig3() {
  std::vector<Experiment> out;
  for (const char* law : {"rot_abs", "rot_rel"}) {
    Experiment ex =
        base_experiment(law == std::string("rot_abs") ? "rot-abs" : "rot-rel", law, 5);
    ex.trial.param = ParamKind::SinMap;
    ex.trial.init.rotation_radius = 0.45 * (kPi / 2);
    ex.trial.init.translation = InitSpec::Translation::Zero;
    out.push_back(ex);
  }
  return out;
}

std::vector<Experiment> preset_fig4() {
  std::vector<Experiment> out;
  {
    Experiment ex = base_experiment("torque-abs", "torque_abs", 5);
    ex.trial.horizon = 20.0;
    ex.trial.init.rotation_radius = 0.5;
    ex.trial.init.translation = InitSpec::Translation::Zero;
    ex.trial.init.omega = InitSpec::Velocity::ErrorBall;
    ex.trial.init.omega_radius = 0.5;
    ex.trial.schedule.kind = ScheduleSpec::Kind::Fixed;
    ex.trial.schedule.fixed = Digraph::complete(5, 1.0);
    out.push_back(ex);
  }
  {
    Experiment ex = base_experiment("torque-rel-force", "torque_rel+force", 5);
    ex.trial.param = ParamKind::SinMap;
    ex.trial.horizon = 20.0;
    ex.trial.init.rotation_radius = 0.2 * (kPi / 2);
    ex.trial.init.omega = InitSpec::Velocity::ErrorBall;
    ex.trial.init.omega_radius = 0.2;
    ex.trial.init.velocity = InitSpec::Velocity::ErrorBall;
    ex.trial.init.velocity_radius = 0.5;
    ex.trial.schedule.kind = ScheduleSpec::Kind::Fixed;
    ex.trial.schedule.fixed = Digraph::complete(5, 1.0);
    out.push_back(ex);
  }
  return out;
}

std::vector<Experiment> preset_mc(double radius) {
  std::vector<Experiment> out;
  for (const char* law : {"first_abs", "first_rel"}) {
    Experiment ex = base_experiment(law == std::string("first_abs") ? "first-abs" : "first-rel",
                                    law, 5);
    // Trials whose consensus point settles near the half-pi ball boundary
    // decay like 1/t before turning exponential, so the horizon must be
    // generous for the success census to stabilize.
    ex.trial.horizon = 1500.0;
    ex.trial.init.rotation_radius = radius;
    ex.trials = 200;
    out.push_back(ex);
  }
  return out;
}

std::vector<Experiment> preset_counterexample() {
  Experiment ex = base_experiment("trans-abs-flip", "trans_abs", 3);
  ex.trial.horizon = 20.0;
  ex.trial.init.rotation = InitSpec::Rotation::FixedFlipZ;
  ex.trial.init.translation = InitSpec::Translation::PlanarBox;
  ex.trial.schedule.kind = ScheduleSpec::Kind::Fixed;
  ex.trial.schedule.fixed = Digraph::complete(3, 1.0);
  return {ex};
}

}  // namespace

const std::vector<std::string>& preset_names() {
  static const std::vector<std::string> names = {
      "fig1-first-laws",  "fig2-noise-switching", "fig3-rot-laws",      "fig4-dynamic",
      "mc-uniform-so3",   "mc-halfpi-ball",       "counterexample-trans"};
  return names;
}

std::vector<Experiment> preset_experiments(std::string_view name) {
  if (name == "fig1-first-laws") return preset_fig1();
  if (name == "fig2-noise-switching") return preset_fig2();
  if (name == "fig3-rot-laws") return preset_fig3();
  if (name == "fig4-dynamic") return preset_fig4();
  if (name == "mc-uniform-so3") return preset_mc(kPi);
  if (name == "mc-halfpi-ball") return preset_mc(kPi / 2);
  if (name == "counterexample-trans") return preset_counterexample();
  throw ConfigInvalid("unknown preset '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// CSV / JSON reports

std::string trace_to_csv(const Trace& tr) {
  std::string out =
      "t,agent,R00,R01,R02,R10,R11,R12,R20,R21,R22,Tx,Ty,Tz,wx,wy,wz,vx,vy,vz\n";
  for (std::size_t k = 0; k < tr.times.size(); ++k) {
    for (std::size_t i = 0; i < tr.samples[k].size(); ++i) {
      const AgentState& s = tr.samples[k][i];
      out += fmt(tr.times[k]);
      out += ',';
      out += std::to_string(i);
      for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) append_value(out, s.pose.R(r, c));
      for (int c = 0; c < 3; ++c) append_value(out, s.pose.T(c));
      for (int c = 0; c < 3; ++c) append_value(out, s.omega(c));
      for (int c = 0; c < 3; ++c) append_value(out, s.v(c));
      out += '\n';
    }
  }
  return out;
}

std::string events_to_csv(const Trace& tr) {
  std::string out = "t,agent,neighbors\n";
  for (std::size_t k = 0; k < tr.schedule.times.size(); ++k) {
    const Digraph& g = tr.schedule.graphs[k];
    for (int i = 0; i < g.n; ++i) {
      out += fmt(tr.schedule.times[k]);
      out += ',';
      out += std::to_string(i);
      out += ',';
      const std::vector<int> nb = g.neighbors(i);
      for (std::size_t m = 0; m < nb.size(); ++m) {
        if (m > 0) out += ';';
        out += std::to_string(nb[m]);
      }
      out += '\n';
    }
  }
  return out;
}

std::string plot_to_csv(const std::vector<std::pair<std::string, const Trace*>>& runs) {
  if (runs.empty()) throw ConfigInvalid("plot needs at least one run");
  std::size_t rows = std::string::npos;
  for (const auto& run : runs) {
    if (run.second == nullptr || run.second->times.empty())
      throw ConfigInvalid("plot runs must hold at least one sample");
    rows = std::min(rows, run.second->times.size());
  }
  const std::vector<double>& grid = runs[0].second->times;
  for (const auto& run : runs)
    for (std::size_t k = 0; k < rows; ++k)
      if (run.second->times[k] != grid[k])
        throw ConfigInvalid("plot runs disagree on the time grid");

  std::string out = "t";
  for (const auto& run : runs) {
    const int n = int(run.second->samples[0].size());
    for (int i = 1; i < n; ++i) out += "," + run.first + "_froR_" + std::to_string(i);
    for (int i = 1; i < n; ++i) out += "," + run.first + "_dT_" + std::to_string(i);
    for (int i = 0; i < n; ++i) out += "," + run.first + "_R00_" + std::to_string(i);
  }
  out += '\n';
  for (std::size_t k = 0; k < rows; ++k) {
    out += fmt(grid[k]);
    for (const auto& run : runs) {
      const std::vector<AgentState>& st = run.second->samples[k];
      const int n = int(st.size());
      for (int i = 1; i < n; ++i) append_value(out, (st[i].pose.R - st[0].pose.R).norm());
      for (int i = 1; i < n; ++i) append_value(out, (st[i].pose.T - st[0].pose.T).norm());
      for (int i = 0; i < n; ++i) append_value(out, st[i].pose.R(0, 0));
    }
    out += '\n';
  }
  return out;
}

std::string report_to_json(const Experiment& ex, const Trace& tr) {
  const TrialVerdict v = consensus_judge(ex.rotation_tol, ex.translation_tol)(tr);
  const json j{{"name", ex.name},
               {"laws", law_set_name(ex.trial.laws)},
               {"parameterization", Parameterization(ex.trial.param).name()},
               {"agents", ex.trial.n},
               {"seed", ex.trial.seed},
               {"horizon", ex.trial.horizon},
               {"end_time", tr.end_time},
               {"diverged", tr.diverged},
               {"failure", tr.failure},
               {"success", v.success},
               {"rotation_error", v.rotation_error},
               {"translation_error", v.translation_error},
               {"rotation_tol", ex.rotation_tol},
               {"translation_tol", ex.translation_tol}};
  return j.dump(2) + "\n";
}

std::string report_to_json(const Experiment& ex, const McResult& mc) {
  json trials = json::array();
  for (int t = 0; t < mc.trials; ++t)
    trials.push_back(json{{"trial", t},
                          {"success", mc.success[t] != 0},
                          {"rotation_error", mc.rotation_errors[t]},
                          {"translation_error", mc.translation_errors[t]}});
  const json j{{"name", ex.name},
               {"laws", law_set_name(ex.trial.laws)},
               {"parameterization", Parameterization(ex.trial.param).name()},
               {"agents", ex.trial.n},
               {"seed", ex.trial.seed},
               {"trials", mc.trials},
               {"successes", mc.successes},
               {"divergences", mc.divergences},
               {"success_rate", mc.success_rate()},
               {"rotation_tol", ex.rotation_tol},
               {"translation_tol", ex.translation_tol},
               {"trial_results", trials}};
  return j.dump(2) + "\n";
}

std::string mc_trials_to_csv(const McResult& mc) {
  std::string out = "trial,success,rotation_error,translation_error\n";
  for (int t = 0; t < mc.trials; ++t) {
    out += std::to_string(t);
    out += ',';
    out += mc.success[t] != 0 ? '1' : '0';
    append_value(out, mc.rotation_errors[t]);
    append_value(out, mc.translation_errors[t]);
    out += '\n';
  }
  return out;
}

// ---------------------------------------------------------------------------
// File IO

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(content.data(), std::streamsize(content.size()));
  f.flush();
  if (!f) throw IoError("failed while writing '" + path + "'");
}

std::string read_text_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  if (f.bad() || ss.bad()) throw IoError("failed while reading '" + path + "'");
  return ss.str();
}

}  // namespace sesim
