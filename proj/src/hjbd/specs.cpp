#include "hjbd/specs.hpp"

#include "hjbd/csv.hpp"
#include "hjbd/rng.hpp"

#include <cmath>
#include <filesystem>

namespace hjbd {

using json = nlohmann::json;

namespace {

json parse_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, "malformed JSON in '" + path + "': " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

TimeProfile::Kind parse_profile_kind(const std::string& name) {
  if (name == "constant") return TimeProfile::Kind::constant;
  if (name == "exp") return TimeProfile::Kind::exp;
  if (name == "poly") return TimeProfile::Kind::poly;
  if (name == "cos") return TimeProfile::Kind::cos;
  throw Error(ErrorCode::parse, "unknown time profile '" + name + "'");
}

}  // namespace

std::string parent_directory(const std::string& path) {
  const auto parent = std::filesystem::path(path).parent_path();
  return parent.empty() ? "." : parent.string();
}

std::string join_path(const std::string& dir, const std::string& name) {
  const std::filesystem::path p(name);
  if (p.is_absolute()) return name;
  return (std::filesystem::path(dir) / p).string();
}

Field field_from_json(const json& spec, std::size_t n, const std::string& base_dir) {
  const auto nn = static_cast<Eigen::Index>(n);
  try {
    if (spec.is_array()) {
      require(spec.size() == n, "field has " + std::to_string(spec.size()) + " values, expected " + std::to_string(n),
              ErrorCode::parse);
      Field f(nn);
      for (std::size_t i = 0; i < n; ++i) f(i) = spec.at(i).get<double>();
      require(f.allFinite(), "field values must be finite", ErrorCode::parse);
      return f;
    }
    if (spec.is_number()) return Field::Constant(nn, spec.get<double>());
    require(spec.is_object() && spec.contains("kind"), "field description needs a 'kind'", ErrorCode::parse);
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "constant") return Field::Constant(nn, spec.at("value").get<double>());
    if (kind == "values") return field_from_json(spec.at("values"), n, base_dir);
    if (kind == "mode") {
      const double offset = get_or(spec, "offset", 0.0);
      const double amplitude = get_or(spec, "amplitude", 1.0);
      const double k = get_or(spec, "k", 1.0);
      const std::string fn = get_or<std::string>(spec, "function", "sin");
      require(fn == "sin" || fn == "cos", "mode function must be sin or cos", ErrorCode::parse);
      Field f(nn);
      for (std::size_t i = 0; i < n; ++i) {
        const double arg = 2.0 * M_PI * k * static_cast<double>(i) / static_cast<double>(n);
        f(i) = offset + amplitude * (fn == "sin" ? std::sin(arg) : std::cos(arg));
      }
      return f;
    }
    if (kind == "random") {
      CounterRng rng(get_or<std::uint64_t>(spec, "seed", 1));
      const double lo = get_or(spec, "low", 0.0);
      const double hi = get_or(spec, "high", 1.0);
      Field f(nn);
      for (std::size_t i = 0; i < n; ++i) f(i) = lo + (hi - lo) * rng.uniform();
      return f;
    }
    if (kind == "file") return load_field_file(join_path(base_dir, spec.at("path").get<std::string>()), n);
    throw Error(ErrorCode::parse, "unknown field kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed field description: ") + e.what());
  }
}

Field load_field_file(const std::string& path, std::size_t n) {
  return field_from_json(parse_json_file(path), n, parent_directory(path));
}

Potential potential_from_json(const json& spec, const Space& space, const std::string& base_dir) {
  const std::size_t n = space.size();
  try {
    if (spec.is_number()) return Potential::constant(n, spec.get<double>());
    require(spec.is_object() && spec.contains("kind"), "potential description needs a 'kind'", ErrorCode::parse);
    const auto kind = spec.at("kind").get<std::string>();
    if (kind == "constant") return Potential::constant(n, spec.at("value").get<double>());
    if (kind == "separable") {
      TimeProfile profile;
      if (spec.contains("time")) {
        const auto& tj = spec.at("time");
        profile.kind = parse_profile_kind(get_or<std::string>(tj, "kind", "constant"));
        profile.params = get_or<std::vector<double>>(tj, "params", {1.0});
      }
      const std::size_t need = profile.kind == TimeProfile::Kind::constant ? 1
                               : profile.kind == TimeProfile::Kind::exp    ? 2
                               : profile.kind == TimeProfile::Kind::cos    ? 3
                                                                           : 1;
      require(profile.params.size() >= need, "time profile has too few parameters", ErrorCode::parse);
      return Potential::separable(profile, field_from_json(spec.at("space"), n, base_dir));
    }
    if (kind == "tabulated") {
      TimeField table = read_timefield_csv(join_path(base_dir, spec.at("path").get<std::string>()), space.ids());
      require(table.points() == n, "tabulated potential has the wrong number of points", ErrorCode::parse);
      return Potential::tabulated(std::move(table));
    }
    throw Error(ErrorCode::parse, "unknown potential kind '" + kind + "'");
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed potential description: ") + e.what());
  }
}

Potential load_potential_file(const std::string& path, const Space& space) {
  return potential_from_json(parse_json_file(path), space, parent_directory(path));
}

SpaceSpec space_spec_from_json(const json& spec, const std::string& base_dir) {
  try {
    SpaceSpec s;
    if (spec.is_string()) {
      s.kind = SpaceKind::file;
      s.path = join_path(base_dir, spec.get<std::string>());
      return s;
    }
    s.kind = parse_space_kind(spec.at("kind").get<std::string>());
    if (spec.contains("n")) s.size = spec.at("n").get<int>();
    if (spec.contains("level")) s.size = spec.at("level").get<int>();
    s.scaling = get_or(spec, "scaling", 1.0);
    if (s.kind == SpaceKind::file) s.path = join_path(base_dir, spec.at("path").get<std::string>());
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed space description: ") + e.what());
  }
}

json space_spec_to_json(const SpaceSpec& spec) {
  json j;
  j["kind"] = to_string(spec.kind);
  if (spec.kind == SpaceKind::file) {
    j["path"] = spec.path;
  } else {
    j[spec.kind == SpaceKind::gasket ? "level" : "n"] = spec.size;
    j["scaling"] = spec.scaling;
  }
  return j;
}

StudyKind parse_study_kind(const std::string& name) {
  if (name == "identities") return StudyKind::identities;
  if (name == "schrodinger" || name == "schroedinger") return StudyKind::schrodinger;
  if (name == "feynman-kac" || name == "feynman_kac") return StudyKind::feynman_kac;
  if (name == "hjb") return StudyKind::hjb;
  if (name == "value") return StudyKind::value;
  if (name == "convergence") return StudyKind::convergence;
  if (name == "all") return StudyKind::all;
  throw Error(ErrorCode::parse, "unknown study kind '" + name + "'");
}

std::string to_string(StudyKind kind) {
  switch (kind) {
    case StudyKind::identities: return "identities";
    case StudyKind::schrodinger: return "schrodinger";
    case StudyKind::feynman_kac: return "feynman-kac";
    case StudyKind::hjb: return "hjb";
    case StudyKind::value: return "value";
    case StudyKind::convergence: return "convergence";
    case StudyKind::all: return "all";
  }
  return "unknown";
}

ExperimentConfig config_from_json(const json& doc, const std::string& base_dir) {
  require(doc.is_object(), "config must be a JSON object", ErrorCode::parse);
  ExperimentConfig cfg;
  cfg.base_dir = base_dir;
  try {
    if (doc.contains("space")) cfg.space = space_spec_from_json(doc.at("space"), base_dir);
    if (doc.contains("potential")) cfg.potential = doc.at("potential");
    if (doc.contains("w0")) cfg.w0 = doc.at("w0");
    if (doc.contains("rho0")) cfg.rho0 = doc.at("rho0");
    cfg.t = get_or(doc, "t", cfg.t);
    cfg.time_steps = get_or(doc, "time_steps", cfg.time_steps);
    cfg.mc_samples = get_or(doc, "mc_samples", cfg.mc_samples);
    cfg.ladder = get_or(doc, "ladder", cfg.ladder);
    cfg.seed = get_or(doc, "seed", cfg.seed);
    cfg.output_dir = join_path(base_dir, get_or(doc, "output_dir", cfg.output_dir));
    if (doc.contains("study")) cfg.study = parse_study_kind(doc.at("study").get<std::string>());
    cfg.plots = get_or(doc, "plots", cfg.plots);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::parse, std::string("malformed config: ") + e.what());
  }
  require(cfg.t < 0.0, "config horizon t must be negative", ErrorCode::parse);
  require(cfg.time_steps >= 2, "time_steps must be at least 2", ErrorCode::parse);
  require(cfg.mc_samples >= 2, "mc_samples must be at least 2", ErrorCode::parse);
  for (std::size_t i = 1; i < cfg.ladder.size(); ++i) {
    require(cfg.ladder[i] > cfg.ladder[i - 1], "ladder must be strictly increasing", ErrorCode::parse);
  }
  if (cfg.space.kind == SpaceKind::file) {
    require(std::filesystem::exists(cfg.space.path), "space file '" + cfg.space.path + "' does not exist",
            ErrorCode::io);
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  return config_from_json(parse_json_file(path), parent_directory(path));
}

json config_to_json(const ExperimentConfig& cfg) {
  return json{{"space", space_spec_to_json(cfg.space)},
              {"potential", cfg.potential},
              {"w0", cfg.w0},
              {"rho0", cfg.rho0},
              {"t", cfg.t},
              {"time_steps", cfg.time_steps},
              {"mc_samples", cfg.mc_samples},
              {"ladder", cfg.ladder},
              {"seed", cfg.seed},
              {"study", to_string(cfg.study)},
              {"plots", cfg.plots}};
}

}  // namespace hjbd
