#include "zermelo/cli/catalog.hpp"

#include "zermelo/foliation.hpp"
#include "zermelo/submersion.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace zermelo::cli {

namespace {

Vec v2(double a, double b) { return (Vec(2) << a, b).finished(); }
Vec v3(double a, double b, double c) { return (Vec(3) << a, b, c).finished(); }
Vec v4(double a, double b, double c, double d) { return (Vec(4) << a, b, c, d).finished(); }

manifold::SceneSpec scene(const std::string& tmpl, const std::string& name, manifold::WindSpec wind,
                          int dim = 2) {
  manifold::SceneSpec s;
  s.template_name = tmpl;
  s.dim = dim;
  s.wind = std::move(wind);
  s.name = name;
  return s;
}

manifold::WindSpec wind(const std::string& type, double epsilon = 0.0, double c = 0.0,
                        std::vector<double> vector = {}) {
  manifold::WindSpec w;
  w.type = type;
  w.epsilon = epsilon;
  w.c = c;
  w.vector = std::move(vector);
  return w;
}

std::vector<Preset> build_presets() {
  std::vector<Preset> out;
  const double s60 = std::sqrt(0.75);

  Preset p;
  p.name = "plane-constwind";
  p.description = "ball of radius 3 in R^2, Euclidean h, constant wind (1/2, 0); horizontal lines";
  p.scene = scene("euclidean-ball", p.name, wind("constant", 0, 0, {0.5, 0.0}));
  p.foliation = "horizontal-lines";
  p.submersion = "plane-projection";
  p.leaf_pairs = {{v2(0.0, 0.0), v2(0.0, 0.7)}};
  p.leaf_point = v2(0.0, 0.0);
  p.blowup_point = v2(0.0, 0.0);
  out.push_back(p);

  p = Preset{};
  p.name = "plane-circles-rotwind";
  p.description = "ball of radius 3 in R^2, wind 0.3/(1+x^2+y^2) (-y, x); concentric circles";
  p.scene = scene("euclidean-ball", p.name, wind("rotational", 0.3));
  p.foliation = "concentric-circles";
  p.leaf_pairs = {{v2(0.8, 0.0), v2(1.3, 0.0)}};
  p.leaf_point = v2(1.0, 0.0);
  p.blowup_point = v2(1.0, 0.0);
  out.push_back(p);

  p = Preset{};
  p.name = "plane-circles-constwind";
  p.description =
      "ball of radius 3 in R^2, constant wind (0.3, 0); concentric circles (not Finsler, "
      "negative control)";
  p.scene = scene("euclidean-ball", p.name, wind("constant", 0, 0, {0.3, 0.0}));
  p.foliation = "concentric-circles";
  p.leaf_pairs = {{v2(0.8, 0.0), v2(1.3, 0.0)}};
  p.leaf_point = v2(1.0, 0.0);
  p.blowup_point = v2(1.0, 0.0);
  out.push_back(p);

  p = Preset{};
  p.name = "euclid-ball-radialwind";
  p.description =
      "ball of radius 3 in R^2, radial wind -0.2 x (homothety, sigma = 0.4); concentric circles";
  p.scene = scene("euclidean-ball", p.name, wind("radial", 0, -0.2));
  p.foliation = "concentric-circles";
  p.leaf_pairs = {{v2(0.8, 0.0), v2(1.3, 0.0)}};
  p.leaf_point = v2(0.6, 0.0);
  p.blowup_point = v2(1.0, 0.0);
  out.push_back(p);

  p = Preset{};
  p.name = "sphere2-latitudes";
  p.description = "unit S^2, Killing wind 0.3 (-y, x, 0); latitude circles";
  p.scene = scene("sphere2", p.name, wind("killing", 0.3));
  p.foliation = "latitudes";
  p.leaf_pairs = {{v3(s60, 0.0, 0.5), v3(1.0, 0.0, 0.0)}};
  p.leaf_point = v3(s60, 0.0, 0.5);
  p.focal_time = std::numbers::pi / 3.0;
  p.blowup_point = v3(s60, 0.0, 0.5);
  out.push_back(p);

  p = Preset{};
  p.name = "sphere2-round";
  p.description = "unit S^2 without wind; latitude circles";
  p.scene = scene("sphere2", p.name, wind("none"));
  p.foliation = "latitudes";
  p.leaf_pairs = {{v3(s60, 0.0, 0.5), v3(1.0, 0.0, 0.0)}};
  p.leaf_point = v3(s60, 0.0, 0.5);
  p.focal_time = std::numbers::pi / 3.0;
  p.blowup_point = v3(s60, 0.0, 0.5);
  out.push_back(p);

  p = Preset{};
  p.name = "cylinder-r3";
  p.description = "ball of radius 3 in R^3, constant axial wind (0, 0, 0.4); circles about the z-axis";
  p.scene = scene("cylinder-r3", p.name, wind("constant", 0, 0, {0.0, 0.0, 0.4}), 3);
  p.foliation = "axial-circles";
  p.leaf_pairs = {{v3(0.8, 0.0, 0.0), v3(1.3, 0.0, 0.3)}};
  p.leaf_point = v3(1.0, 0.0, 0.0);
  p.coefficients = v2(1.0, 0.0);
  p.blowup_point = v3(1.0, 0.0, 0.0);
  out.push_back(p);

  p = Preset{};
  p.name = "sphere3-hopf";
  p.description = "unit S^3, vertical Killing wind 0.2 along the Hopf fibers; Hopf fibration";
  p.scene = scene("sphere3-hopf", p.name, wind("hopf-vertical", 0.2));
  p.foliation = "hopf-fibers";
  p.submersion = "hopf";
  p.leaf_pairs = {{v4(1.0, 0.0, 0.0, 0.0), v4(std::cos(0.5), 0.0, std::sin(0.5), 0.0)}};
  p.leaf_point = v4(std::cos(0.6), 0.0, std::sin(0.6), 0.0);
  p.coefficients = v3(0.0, 0.0, 1.0);
  p.blowup_point = v4(std::cos(0.6), 0.0, std::sin(0.6), 0.0);
  out.push_back(p);

  p = Preset{};
  p.name = "sphere3-hopf-horizontal";
  p.description =
      "unit S^3, horizontal part of the rotation wind 0.2 (-x2, x1, x4, -x3); Hopf fibration";
  p.scene = scene("sphere3-hopf", p.name, wind("hopf-horizontal", 0.2));
  p.foliation = "hopf-fibers";
  p.submersion = "hopf";
  p.leaf_pairs = {{v4(1.0, 0.0, 0.0, 0.0), v4(std::cos(0.5), 0.0, std::sin(0.5), 0.0)}};
  p.leaf_point = v4(std::cos(0.6), 0.0, std::sin(0.6), 0.0);
  p.coefficients = v3(0.0, 0.0, 1.0);
  p.blowup_point = v4(std::cos(0.6), 0.0, std::sin(0.6), 0.0);
  out.push_back(p);
  return out;
}

}  // namespace

const std::vector<Preset>& presets() {
  static const std::vector<Preset> all = build_presets();
  return all;
}

const Preset* find_preset(const std::string& name) {
  for (const auto& p : presets())
    if (p.name == name) return &p;
  return nullptr;
}

std::string catalog_text() {
  std::ostringstream os;
  os << "Presets (scene: <name>):\n";
  for (const auto& p : presets()) {
    os << "  " << p.name << "\n      " << p.description << "\n      template " << p.scene.template_name
       << ", wind " << p.scene.wind.type;
    if (!p.foliation.empty()) os << ", foliation " << p.foliation;
    if (!p.submersion.empty()) os << ", submersion " << p.submersion;
    os << "\n";
  }
  os << "\nTemplates (scene: {template: ...}):\n"
     << "  euclidean-ball   open ball of R^dim, Euclidean h; dim (default 2), radius (default 3)\n"
     << "  cylinder-r3      open ball of R^3, Euclidean h; radius (default 3)\n"
     << "  sphere2          round S^2 in R^3, two stereographic charts; radius (default 1)\n"
     << "  sphere3-hopf     round S^3 in R^4, two stereographic charts; radius (default 1)\n"
     << "\nWind types (scene.wind.type):\n"
     << "  none\n"
     << "  constant         W = vector\n"
     << "  rotational       W = epsilon / (1 + x^2 + y^2) (-y, x, 0, ...)\n"
     << "  rigid-rotation   W = epsilon (-y, x, 0, ...); alias killing\n"
     << "  radial           W = c X\n"
     << "  hopf-vertical    W = epsilon (-x2, x1, -x4, x3)\n"
     << "  hopf-horizontal  W = epsilon times the h-horizontal part of (-x2, x1, x4, -x3)\n"
     << "\nFoliations (scene.foliation):\n";
  for (const auto& f : foliation::foliation_names()) os << "  " << f << "\n";
  os << "\nSubmersions (scene.submersion):\n";
  for (const auto& s : submersion::submersion_names()) os << "  " << s << "\n";
  return os.str();
}

}  // namespace zermelo::cli
