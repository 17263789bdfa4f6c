#include "zermelo/cli/config.hpp"

#include "zermelo/foliation.hpp"
#include "zermelo/submersion.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

namespace zermelo::cli {

namespace {

class Parser {
 public:
  explicit Parser(std::filesystem::path source) : source_(std::move(source)) {}

  [[noreturn]] void fail(const YAML::Node& node, const std::string& msg) const {
    std::ostringstream os;
    os << (source_.empty() ? "<config>" : source_.string());
    if (node.IsDefined() && node.Mark().line >= 0) os << ":" << node.Mark().line + 1;
    os << ": " << msg;
    throw ConfigError(os.str());
  }

  void require_map(const YAML::Node& node, const std::string& what) const {
    if (!node.IsMap()) fail(node, what + " must be a table");
  }

  void check_keys(const YAML::Node& node, const std::set<std::string>& allowed,
                  const std::string& where) const {
    for (const auto& kv : node) {
      const auto key = kv.first.as<std::string>();
      if (!allowed.count(key)) fail(kv.first, "unknown key '" + key + "' in " + where);
    }
  }

  template <class T>
  T scalar(const YAML::Node& node, const std::string& what) const {
    if (!node.IsScalar()) fail(node, what + " must be a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception&) {
      fail(node, "cannot read " + what + " from '" + node.Scalar() + "'");
    }
  }

  std::vector<double> list(const YAML::Node& node, const std::string& what) const {
    if (!node.IsSequence()) fail(node, what + " must be a list of numbers");
    std::vector<double> out;
    for (const auto& item : node) out.push_back(scalar<double>(item, what + " entry"));
    return out;
  }

  Vec vec(const YAML::Node& node, const std::string& what, int size = -1) const {
    const auto l = list(node, what);
    if (size >= 0 && static_cast<int>(l.size()) != size)
      fail(node, what + " must have " + std::to_string(size) + " entries");
    Vec v(static_cast<Eigen::Index>(l.size()));
    for (std::size_t i = 0; i < l.size(); ++i) v[static_cast<Eigen::Index>(i)] = l[i];
    return v;
  }

  int ambient_dim(const manifold::SceneSpec& s) const {
    if (s.template_name == "euclidean-ball") return s.dim;
    if (s.template_name == "cylinder-r3" || s.template_name == "sphere2") return 3;
    return 4;
  }

  Preset scene(const YAML::Node& node) const {
    if (node.IsScalar()) {
      const auto name = node.as<std::string>();
      if (const Preset* p = find_preset(name)) return *p;
      std::filesystem::path file = name;
      if (file.is_relative() && !source_.empty()) file = source_.parent_path() / file;
      if (!std::filesystem::exists(file))
        fail(node, "'" + name + "' is neither a preset nor an existing scene file");
      YAML::Node doc;
      try {
        doc = YAML::LoadFile(file.string());
      } catch (const YAML::Exception& e) {
        throw ConfigError(file.string() + ":" + std::to_string(e.mark.line + 1) + ": " + e.msg);
      }
      return Parser(file).scene_table(doc);
    }
    return scene_table(node);
  }

  Preset scene_table(const YAML::Node& node) const {
    require_map(node, "scene");
    check_keys(node,
               {"preset", "template", "dim", "radius", "wind", "name", "foliation", "submersion",
                "leaf_pairs", "leaf_point", "focal_time", "coefficients", "blowup_point"},
               "scene");
    Preset p;
    if (node["preset"]) {
      const auto name = scalar<std::string>(node["preset"], "scene.preset");
      const Preset* base = find_preset(name);
      if (!base) fail(node["preset"], "unknown preset '" + name + "'");
      p = *base;
    } else if (!node["template"]) {
      fail(node, "scene needs either 'preset' or 'template'");
    }
    auto& s = p.scene;
    if (node["template"]) {
      s.template_name = scalar<std::string>(node["template"], "scene.template");
      const auto t = manifold::scene_templates();
      if (std::find(t.begin(), t.end(), s.template_name) == t.end())
        fail(node["template"], "unknown template '" + s.template_name + "'");
    }
    if (node["dim"]) {
      s.dim = scalar<int>(node["dim"], "scene.dim");
      if (s.dim < 1) fail(node["dim"], "scene.dim must be positive");
    }
    if (node["radius"]) {
      s.radius = scalar<double>(node["radius"], "scene.radius");
      if (!(*s.radius > 0.0)) fail(node["radius"], "scene.radius must be positive");
    }
    if (node["name"]) s.name = scalar<std::string>(node["name"], "scene.name");
    if (node["wind"]) {
      const auto w = node["wind"];
      require_map(w, "scene.wind");
      check_keys(w, {"type", "epsilon", "c", "vector"}, "scene.wind");
      manifold::WindSpec ws;
      ws.type = w["type"] ? scalar<std::string>(w["type"], "wind.type") : "none";
      static const std::set<std::string> types{"none",   "constant", "rotational",    "rigid-rotation",
                                               "killing", "radial",   "hopf-vertical", "hopf-horizontal"};
      if (!types.count(ws.type)) fail(w["type"], "unknown wind type '" + ws.type + "'");
      if (w["epsilon"]) ws.epsilon = scalar<double>(w["epsilon"], "wind.epsilon");
      if (w["c"]) ws.c = scalar<double>(w["c"], "wind.c");
      if (w["vector"]) ws.vector = list(w["vector"], "wind.vector");
      s.wind = ws;
    }
    const int n = ambient_dim(s);
    if (s.wind.type == "constant" && static_cast<int>(s.wind.vector.size()) != n)
      fail(node["wind"] ? node["wind"] : node,
           "constant wind needs a vector with " + std::to_string(n) + " entries");
    if (node["foliation"]) {
      p.foliation = scalar<std::string>(node["foliation"], "scene.foliation");
      const auto names = foliation::foliation_names();
      if (std::find(names.begin(), names.end(), p.foliation) == names.end())
        fail(node["foliation"], "unknown foliation '" + p.foliation + "'");
    }
    if (node["submersion"]) {
      p.submersion = scalar<std::string>(node["submersion"], "scene.submersion");
      const auto names = submersion::submersion_names();
      if (std::find(names.begin(), names.end(), p.submersion) == names.end())
        fail(node["submersion"], "unknown submersion '" + p.submersion + "'");
    }
    if (node["leaf_pairs"]) {
      const auto lp = node["leaf_pairs"];
      if (!lp.IsSequence()) fail(lp, "scene.leaf_pairs must be a list");
      p.leaf_pairs.clear();
      for (const auto& item : lp) {
        require_map(item, "leaf_pairs entry");
        check_keys(item, {"source", "target"}, "leaf_pairs entry");
        if (!item["source"] || !item["target"]) fail(item, "leaf_pairs entry needs source and target");
        p.leaf_pairs.emplace_back(vec(item["source"], "source", n), vec(item["target"], "target", n));
      }
    }
    if (node["leaf_point"]) p.leaf_point = vec(node["leaf_point"], "scene.leaf_point", n);
    if (node["blowup_point"]) p.blowup_point = vec(node["blowup_point"], "scene.blowup_point", n);
    if (node["focal_time"]) p.focal_time = scalar<double>(node["focal_time"], "scene.focal_time");
    if (node["coefficients"]) p.coefficients = vec(node["coefficients"], "scene.coefficients");
    if (s.name.empty()) s.name = s.template_name + "/" + s.wind.type;
    if (!node["preset"] || node["name"]) p.name = s.name;
    return p;
  }

  SuiteOptions options(const YAML::Node& node) const {
    require_map(node, "options");
    check_keys(node, {"trials", "samples", "directions", "length", "times", "lambdas", "probes"},
               "options");
    SuiteOptions o;
    auto positive = [&](const char* key) -> std::optional<int> {
      if (!node[key]) return std::nullopt;
      const int v = scalar<int>(node[key], std::string("options.") + key);
      if (v < 1) fail(node[key], std::string("options.") + key + " must be positive");
      return v;
    };
    o.trials = positive("trials");
    o.samples = positive("samples");
    o.directions = positive("directions");
    if (node["length"]) o.length = scalar<double>(node["length"], "options.length");
    if (node["times"]) o.times = list(node["times"], "options.times");
    if (node["lambdas"]) o.lambdas = list(node["lambdas"], "options.lambdas");
    if (node["probes"]) {
      if (!node["probes"].IsSequence()) fail(node["probes"], "options.probes must be a list");
      for (const auto& item : node["probes"]) {
        require_map(item, "probe");
        check_keys(item, {"point", "vector", "expected"}, "probe");
        if (!item["point"] || !item["vector"] || !item["expected"])
          fail(item, "probe needs point, vector and expected");
        o.probes.push_back({vec(item["point"], "probe.point"), vec(item["vector"], "probe.vector"),
                            scalar<double>(item["expected"], "probe.expected")});
      }
    }
    return o;
  }

  ExperimentConfig config(const YAML::Node& root) const {
    if (!root.IsMap()) fail(root, "experiment file must be a table");
    check_keys(root, {"suite", "seed", "scene", "tolerances", "output", "options"}, "experiment");
    ExperimentConfig c;
    c.source = source_;
    if (!root["suite"]) fail(root, "missing key 'suite'");
    c.suite = scalar<std::string>(root["suite"], "suite");
    if (!known_suite(c.suite)) fail(root["suite"], "unknown suite '" + c.suite + "'");
    if (root["seed"]) c.seed = scalar<std::uint64_t>(root["seed"], "seed");
    if (!root["scene"]) fail(root, "missing key 'scene'");
    c.scene = scene(root["scene"]);
    if (root["tolerances"]) {
      const auto t = root["tolerances"];
      require_map(t, "tolerances");
      check_keys(t, {"fd_step", "ode_rel", "ode_abs", "opt_grad", "rank_sv_cutoff"}, "tolerances");
      for (const auto& kv : t) {
        const auto key = kv.first.as<std::string>();
        const double v = scalar<double>(kv.second, "tolerances." + key);
        if (!(v > 0.0)) fail(kv.second, "tolerances." + key + " must be positive");
        c.tol_overrides.emplace_back(key, v);
      }
    }
    if (root["output"]) c.output = scalar<std::string>(root["output"], "output");
    if (root["options"]) c.options = options(root["options"]);
    return c;
  }

 private:
  std::filesystem::path source_;
};

}  // namespace

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> names{"norm-audit",       "convert",  "geodesic-compare",
                                              "foliation-check",  "equifocal", "submersion-check",
                                              "blowup"};
  return names;
}

bool known_suite(const std::string& name) {
  const auto& n = suite_names();
  return std::find(n.begin(), n.end(), name) != n.end();
}

ExperimentConfig parse_config(const std::string& text, const std::filesystem::path& source) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError((source.empty() ? std::string("<config>") : source.string()) + ":" +
                      std::to_string(e.mark.line + 1) + ": " + e.msg);
  }
  return Parser(source).config(root);
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path.string() + ": cannot open");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

void apply_tolerance_override(ExperimentConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) throw ConfigError("--tol expects KEY=VAL, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  static const std::set<std::string> keys{"fd_step", "ode_rel", "ode_abs", "opt_grad",
                                          "rank_sv_cutoff"};
  if (!keys.count(key)) throw ConfigError("--tol: unknown key '" + key + "'");
  double v = 0.0;
  try {
    std::size_t used = 0;
    v = std::stod(assignment.substr(eq + 1), &used);
    if (used != assignment.size() - eq - 1) throw std::invalid_argument("trailing characters");
  } catch (const std::exception&) {
    throw ConfigError("--tol: cannot read a number from '" + assignment.substr(eq + 1) + "'");
  }
  if (!(v > 0.0)) throw ConfigError("--tol: " + key + " must be positive");
  config.tol_overrides.emplace_back(key, v);
}

numkit::Tolerances with_overrides(numkit::Tolerances tol,
                                  const std::vector<std::pair<std::string, double>>& overrides) {
  for (const auto& [key, v] : overrides) {
    if (key == "fd_step") tol.fd_step = v;
    else if (key == "ode_rel") tol.ode_rel_tol = v;
    else if (key == "ode_abs") tol.ode_abs_tol = v;
    else if (key == "opt_grad") tol.opt_grad_tol = v;
    else if (key == "rank_sv_cutoff") tol.rank_sv_cutoff = v;
  }
  tol.validate();
  return tol;
}

}  // namespace zermelo::cli
