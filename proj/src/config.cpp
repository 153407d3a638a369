#include "uwbcoop/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <string>

#include "uwbcoop/csv.hpp"
#include "uwbcoop/errors.hpp"

namespace uwbcoop {

using nlohmann::json;

namespace {

void allow_keys(const json& obj, std::initializer_list<const char*> keys, const std::string& where) {
  if (!obj.is_object()) throw ConfigError(where + " must be an object");
  const std::set<std::string> allowed(keys.begin(), keys.end());
  for (const auto& [key, value] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

double number(const json& obj, const char* key, double fallback, const std::string& where) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + " must be a number");
  return v.get<double>();
}

Vec3 vec3_from(const json& v, const std::string& where) {
  if (!v.is_array() || v.size() != 3 || !std::all_of(v.begin(), v.end(), [](const json& e) {
        return e.is_number();
      })) {
    throw ConfigError(where + " must be a [x, y, z] array");
  }
  const Vec3 p(v[0].get<double>(), v[1].get<double>(), v[2].get<double>());
  if (!is_finite(p)) throw ConfigError(where + " must be finite");
  return p;
}

std::vector<Vec3> responders_from_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open responders file " + path.string());
  std::vector<Vec3> out;
  std::string line;
  std::size_t line_no = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (csv::is_skippable(line)) continue;
    const auto f = csv::split(line);
    if (first) {
      first = false;
      if (f.size() == 3 && f[0] == "x") continue;
    }
    try {
      if (f.size() != 3) throw ParseError("expected x,y,z", line_no);
      out.emplace_back(csv::parse_double(f[0], line_no, "x"), csv::parse_double(f[1], line_no, "y"),
                       csv::parse_double(f[2], line_no, "z"));
    } catch (const ParseError& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
  return out;
}

std::string separation_label(double s) { return "sep" + csv::format(s); }

LayoutSpec layout_from(const json& j, const std::filesystem::path& base_dir, double height,
                       const std::string& where) {
  allow_keys(j, {"label", "separation", "height", "responders", "responders_file"}, where);
  LayoutSpec spec;
  const int sources = static_cast<int>(j.contains("separation")) +
                      static_cast<int>(j.contains("responders")) +
                      static_cast<int>(j.contains("responders_file"));
  if (sources != 1) {
    throw ConfigError(where + " needs exactly one of separation, responders, responders_file");
  }
  if (j.contains("separation")) {
    spec.separation = number(j, "separation", 0.0, where);
    if (!(spec.separation > 0.0)) throw ConfigError(where + ".separation must be positive");
    spec.responders = square_anchor_layout(spec.separation, number(j, "height", height, where));
    spec.label = separation_label(spec.separation);
  } else if (j.contains("responders")) {
    const auto& arr = j.at("responders");
    if (!arr.is_array()) throw ConfigError(where + ".responders must be an array");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      spec.responders.push_back(vec3_from(arr[i], where + ".responders[" + std::to_string(i) + "]"));
    }
    spec.label = "custom";
  } else {
    auto path = std::filesystem::path(j.at("responders_file").get<std::string>());
    if (path.is_relative()) path = base_dir / path;
    spec.responders = responders_from_csv(path);
    spec.label = path.stem().string();
  }
  if (j.contains("label")) spec.label = j.at("label").get<std::string>();
  return spec;
}

FeedbackSource feedback_from(const json& j) {
  const auto s = j.get<std::string>();
  if (s == "truth") return FeedbackSource::truth;
  if (s == "uwb") return FeedbackSource::uwb;
  throw ConfigError("feedback must be 'truth' or 'uwb', got '" + s + "'");
}

void solver_from(const json& j, SolverConfig& s) {
  allow_keys(j, {"max_iterations", "gradient_tolerance", "step_tolerance", "damping_init", "z_floor"},
             "solver");
  if (j.contains("max_iterations")) s.max_iterations = j.at("max_iterations").get<int>();
  s.gradient_tolerance = number(j, "gradient_tolerance", s.gradient_tolerance, "solver");
  s.step_tolerance = number(j, "step_tolerance", s.step_tolerance, "solver");
  s.damping_init = number(j, "damping_init", s.damping_init, "solver");
  s.z_floor = number(j, "z_floor", s.z_floor, "solver");
}

std::vector<RigidOffset> initiators_from(const json& arr) {
  if (!arr.is_array()) throw ConfigError("initiators must be an array of [x, y, z]");
  std::vector<RigidOffset> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto where = "initiators[" + std::to_string(i) + "]";
    try {
      out.emplace_back(vec3_from(arr[i], where));
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

json to_json(const Vec3& v) { return json::array({v.x(), v.y(), v.z()}); }

json to_json(const Trajectory& t) {
  json j;
  j["kind"] = to_string(t.kind);
  j["speed"] = t.speed;
  if (t.kind == TrajectoryKind::vertical) {
    j["target_altitude"] = t.target_altitude;
  } else {
    j["side"] = t.side;
    j["altitude"] = t.altitude;
    j["dwell"] = t.dwell;
  }
  return j;
}

json to_json(const SolverConfig& s) {
  return {{"max_iterations", s.max_iterations},
          {"gradient_tolerance", s.gradient_tolerance},
          {"step_tolerance", s.step_tolerance},
          {"damping_init", s.damping_init},
          {"z_floor", s.z_floor}};
}

json to_json(const TransceiverLayout& l) {
  json j;
  j["initiators"] = json::array();
  for (const auto& o : l.initiators) j["initiators"].push_back(to_json(o.body_offset));
  j["responders"] = json::array();
  for (const auto& q : l.responders) j["responders"].push_back(to_json(q));
  return j;
}

Trajectory trajectory_from_json(const json& j) {
  allow_keys(j, {"kind", "target_altitude", "side", "altitude", "speed", "dwell"}, "trajectory");
  if (!j.contains("kind")) throw ConfigError("trajectory needs a kind");
  const auto kind = j.at("kind").get<std::string>();
  Trajectory t;
  if (kind == "vertical") {
    t = Trajectory::vertical(number(j, "target_altitude", 30.0, "trajectory"),
                             number(j, "speed", 1.0, "trajectory"));
  } else if (kind == "square") {
    t = Trajectory::square(number(j, "side", 8.0, "trajectory"),
                           number(j, "altitude", 5.0, "trajectory"),
                           number(j, "speed", 1.0, "trajectory"),
                           number(j, "dwell", 5.0, "trajectory"));
  } else {
    throw ConfigError("unknown trajectory kind '" + kind + "'");
  }
  try {
    t.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("trajectory: ") + e.what());
  }
  return t;
}

void ExperimentConfig::validate() const {
  if (layouts.empty()) throw ConfigError("at least one layout is required");
  if (seeds.empty()) throw ConfigError("at least one seed is required");
  if (trajectories.empty()) throw ConfigError("at least one trajectory is required");
  if (feedback.empty()) throw ConfigError("at least one feedback source is required");
  if (initiators.empty()) throw ConfigError("at least one initiator is required");
  std::set<std::string> labels;
  try {
    for (const auto& spec : layouts) {
      if (!labels.insert(spec.label).second) {
        throw ConfigError("duplicate layout label '" + spec.label + "'");
      }
      TransceiverLayout l{initiators, spec.responders};
      l.validate();
      if (are_collinear(spec.responders)) {
        throw ConfigError("layout '" + spec.label + "' has collinear responders");
      }
    }
    NoiseModel{sigma, 0, outlier_probability, outlier_sigma}.validate();
    for (const auto& t : trajectories) t.validate();
    flight.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(e.what());
  }
}

json ExperimentConfig::to_json() const {
  json j;
  j["layouts"] = json::array();
  for (const auto& l : layouts) {
    json lj;
    lj["label"] = l.label;
    if (l.separation > 0.0) {
      lj["separation"] = l.separation;
      lj["height"] = l.responders.front().z();
    } else {
      lj["responders"] = json::array();
      for (const auto& q : l.responders) lj["responders"].push_back(uwbcoop::to_json(q));
    }
    j["layouts"].push_back(lj);
  }
  j["initiators"] = json::array();
  for (const auto& o : initiators) j["initiators"].push_back(uwbcoop::to_json(o.body_offset));
  j["noise"] = {{"sigma", sigma},
                {"seeds", seeds},
                {"outlier_probability", outlier_probability},
                {"outlier_sigma", outlier_sigma}};
  j["trajectories"] = json::array();
  for (const auto& t : trajectories) j["trajectories"].push_back(uwbcoop::to_json(t));
  j["feedback"] = json::array();
  for (auto f : feedback) j["feedback"].push_back(to_string(f));
  j["solver"] = uwbcoop::to_json(flight.solver);
  j["controller"] = {{"kp", flight.controller.kp},
                     {"rate_hz", flight.controller.rate_hz},
                     {"max_speed", flight.plant.max_speed},
                     {"tau", flight.plant.tau},
                     {"init_lift", flight.init_lift},
                     {"max_consecutive_failures", flight.max_consecutive_failures},
                     {"estimate_in_truth_runs", flight.estimate_in_truth_runs}};
  j["output_dir"] = output_dir.generic_string();
  return j;
}

ExperimentConfig parse_config(const json& tree, const std::filesystem::path& base_dir) {
  try {
    allow_keys(tree, {"layouts", "initiators", "noise", "trajectories", "feedback", "solver",
                      "controller", "ranging", "output_dir"},
               "config");
    ExperimentConfig cfg;

    if (!tree.contains("layouts")) throw ConfigError("config needs 'layouts'");
    const auto& layouts = tree.at("layouts");
    if (layouts.is_object() && layouts.contains("separations")) {
      allow_keys(layouts, {"separations", "height"}, "layouts");
      const double height = number(layouts, "height", 0.0, "layouts");
      for (const auto& s : layouts.at("separations")) {
        cfg.layouts.push_back(layout_from(json{{"separation", s}}, base_dir, height, "layouts"));
      }
    } else if (layouts.is_array()) {
      for (std::size_t i = 0; i < layouts.size(); ++i) {
        cfg.layouts.push_back(
            layout_from(layouts[i], base_dir, 0.0, "layouts[" + std::to_string(i) + "]"));
      }
    } else {
      throw ConfigError("layouts must be {separations: [...]} or an array of layouts");
    }

    if (tree.contains("initiators")) cfg.initiators = initiators_from(tree.at("initiators"));

    if (tree.contains("noise")) {
      const auto& n = tree.at("noise");
      allow_keys(n, {"sigma", "seeds", "outlier_probability", "outlier_sigma"}, "noise");
      cfg.sigma = number(n, "sigma", cfg.sigma, "noise");
      cfg.outlier_probability = number(n, "outlier_probability", 0.0, "noise");
      cfg.outlier_sigma = number(n, "outlier_sigma", 1.0, "noise");
      if (n.contains("seeds")) cfg.seeds = n.at("seeds").get<std::vector<std::uint64_t>>();
    }

    if (!tree.contains("trajectories")) throw ConfigError("config needs 'trajectories'");
    for (const auto& t : tree.at("trajectories")) {
      // A square entry may list several altitudes.
      if (t.is_object() && t.contains("altitudes")) {
        for (const auto& alt : t.at("altitudes")) {
          json one = t;
          one.erase("altitudes");
          one["altitude"] = alt;
          cfg.trajectories.push_back(trajectory_from_json(one));
        }
      } else {
        cfg.trajectories.push_back(trajectory_from_json(t));
      }
    }

    if (tree.contains("feedback")) {
      cfg.feedback.clear();
      for (const auto& f : tree.at("feedback")) cfg.feedback.push_back(feedback_from(f));
    }
    if (tree.contains("solver")) solver_from(tree.at("solver"), cfg.flight.solver);
    if (tree.contains("controller")) {
      const auto& c = tree.at("controller");
      allow_keys(c, {"kp", "rate_hz", "max_speed", "tau", "init_lift", "max_consecutive_failures",
                     "estimate_in_truth_runs"},
                 "controller");
      cfg.flight.controller.kp = number(c, "kp", cfg.flight.controller.kp, "controller");
      cfg.flight.controller.rate_hz = number(c, "rate_hz", cfg.flight.controller.rate_hz, "controller");
      cfg.flight.plant.max_speed = number(c, "max_speed", cfg.flight.plant.max_speed, "controller");
      cfg.flight.plant.tau = number(c, "tau", cfg.flight.plant.tau, "controller");
      cfg.flight.init_lift = number(c, "init_lift", cfg.flight.init_lift, "controller");
      if (c.contains("max_consecutive_failures")) {
        cfg.flight.max_consecutive_failures = c.at("max_consecutive_failures").get<int>();
      }
      if (c.contains("estimate_in_truth_runs")) {
        cfg.flight.estimate_in_truth_runs = c.at("estimate_in_truth_runs").get<bool>();
      }
    }
    if (tree.contains("ranging")) {
      const auto& r = tree.at("ranging");
      allow_keys(r, {"cycle_rate_hz"}, "ranging");
      const double rate = number(r, "cycle_rate_hz", cfg.flight.controller.rate_hz, "ranging");
      // One sweep per control tick.
      if (rate != cfg.flight.controller.rate_hz) {
        throw ConfigError("ranging.cycle_rate_hz must equal controller.rate_hz");
      }
    }
    if (tree.contains("output_dir")) cfg.output_dir = tree.at("output_dir").get<std::string>();

    cfg.validate();
    return cfg;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path.string());
  json tree;
  try {
    tree = json::parse(in, nullptr, true, /*ignore_comments=*/true);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return parse_config(tree, path.parent_path());
}

ExperimentConfig reproduction_config() {
  ExperimentConfig cfg;
  for (double s : {0.6, 1.2, 3.0, 4.0, 12.0, 16.0}) {
    cfg.layouts.push_back({separation_label(s), s, square_anchor_layout(s)});
  }
  for (std::uint64_t seed = 1; seed <= 20; ++seed) cfg.seeds.push_back(seed);
  cfg.trajectories.push_back(Trajectory::vertical(30.0));
  for (double alt : {5.0, 10.0, 20.0}) cfg.trajectories.push_back(Trajectory::square(8.0, alt));
  cfg.output_dir = "out/reproduction";
  return cfg;
}

LayoutDocument parse_layout_document(const json& doc) {
  try {
    LayoutDocument out;
    const json& l = doc.contains("layout") ? doc.at("layout") : doc;
    if (l.contains("responders")) {
      const auto& arr = l.at("responders");
      for (std::size_t i = 0; i < arr.size(); ++i) {
        out.layout.responders.push_back(vec3_from(arr[i], "responders"));
      }
    } else if (l.contains("separation")) {
      out.layout.responders =
          square_anchor_layout(l.at("separation").get<double>(), number(l, "height", 0.0, "layout"));
    } else {
      throw ConfigError("layout needs 'responders' or 'separation'");
    }
    out.layout.initiators =
        l.contains("initiators") ? initiators_from(l.at("initiators")) : default_initiators(1);
    if (doc.contains("solver")) solver_from(doc.at("solver"), out.solver);
    if (doc.contains("init_lift")) out.init_lift = doc.at("init_lift").get<double>();
    out.layout.validate();
    out.solver.validate();
    return out;
  } catch (const json::exception& e) {
    throw ConfigError(std::string("layout: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("layout: ") + e.what());
  }
}

}  // namespace uwbcoop
