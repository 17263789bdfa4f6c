#pragma once

#include "zermelo/common.hpp"
#include "zermelo/manifold.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace zermelo::cli {

/// A scene together with the foliation and suite data that go with it.
struct Preset {
  std::string name;
  std::string description;
  manifold::SceneSpec scene;
  /// Foliation model name; empty when the scene has none.
  std::string foliation;
  /// Submersion name for submersion-check; empty when none.
  std::string submersion;
  /// (source, target) ambient points of leaves for the equidistance checks.
  std::vector<std::pair<Vec, Vec>> leaf_pairs;
  std::optional<Vec> leaf_point;
  std::optional<double> focal_time;
  /// Coefficients of d(rho) for the basic normal field.
  std::optional<Vec> coefficients;
  std::optional<Vec> blowup_point;
};

const std::vector<Preset>& presets();
/// nullptr if unknown.
const Preset* find_preset(const std::string& name);

/// Human-readable catalog of presets, templates, wind types and foliations.
std::string catalog_text();

}  // namespace zermelo::cli
