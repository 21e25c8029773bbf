#pragma once

#include "hjbd/potential.hpp"
#include "hjbd/space.hpp"

#include <json.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace hjbd {

/// Field description:
///   {"kind": "constant", "value": c}
///   {"kind": "mode", "offset": a, "amplitude": b, "k": k, "function": "sin"|"cos"}
///       -> a + b f(2 pi k i / n)
///   {"kind": "values", "values": [...]} or a bare array
///   {"kind": "file", "path": p} (a JSON document holding another description)
///   {"kind": "random", "seed": s, "low": lo, "high": hi}
Field field_from_json(const nlohmann::json& spec, std::size_t n, const std::string& base_dir = ".");
Field load_field_file(const std::string& path, std::size_t n);

/// Potential description:
///   {"kind": "constant", "value": c}
///   {"kind": "separable", "time": {"kind": "constant"|"exp"|"poly"|"cos", "params": [...]},
///    "space": <field description>}
///   {"kind": "tabulated", "path": timefield.csv}
Potential potential_from_json(const nlohmann::json& spec, const Space& space, const std::string& base_dir = ".");
Potential load_potential_file(const std::string& path, const Space& space);

/// {"kind": "cycle"|"torus2d"|"gasket"|"file", "n" | "level": k, "scaling": s, "path": p}
SpaceSpec space_spec_from_json(const nlohmann::json& spec, const std::string& base_dir = ".");
nlohmann::json space_spec_to_json(const SpaceSpec& spec);

enum class StudyKind { identities, schrodinger, feynman_kac, hjb, value, convergence, all };
StudyKind parse_study_kind(const std::string& name);
std::string to_string(StudyKind kind);

struct ExperimentConfig {
  SpaceSpec space;
  nlohmann::json potential = {{"kind", "constant"}, {"value", 0.0}};
  nlohmann::json w0 = {{"kind", "constant"}, {"value", 1.0}};
  nlohmann::json rho0 = {{"kind", "constant"}, {"value", 1.0}};
  double t = -1.0;
  std::size_t time_steps = 200;
  std::size_t mc_samples = 20000;
  std::vector<int> ladder{16, 32, 64};
  std::uint64_t seed = 7;
  std::string output_dir = "hjbd_out";
  StudyKind study = StudyKind::identities;
  bool plots = false;
  std::string base_dir = ".";
};

/// Parses and checks a config document; relative paths resolve against base_dir.
ExperimentConfig config_from_json(const nlohmann::json& doc, const std::string& base_dir = ".");
ExperimentConfig load_config(const std::string& path);
/// The config with every default spelled out.
nlohmann::json config_to_json(const ExperimentConfig& cfg);

std::string parent_directory(const std::string& path);
std::string join_path(const std::string& dir, const std::string& name);

}  // namespace hjbd
