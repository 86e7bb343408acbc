#include "poseconsist/config.h"

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "poseconsist/errors.h"

namespace poseconsist {

using nlohmann::json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw UsageError("config: " + path + ": " + what);
}

// Reads the members of one JSON object, remembering which keys were consumed
// so that leftovers can be reported.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) fail(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* get(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  void number(const std::string& key, double& out) {
    if (const json* v = get(key)) {
      if (!v->is_number()) fail(field(key), "expected a number");
      out = v->get<double>();
    }
  }

  void integer(const std::string& key, int& out) {
    if (const json* v = get(key)) {
      if (!v->is_number_integer()) fail(field(key), "expected an integer");
      out = v->get<int>();
    }
  }

  void boolean(const std::string& key, bool& out) {
    if (const json* v = get(key)) {
      if (!v->is_boolean()) fail(field(key), "expected true or false");
      out = v->get<bool>();
    }
  }

  void string(const std::string& key, std::string& out) {
    if (const json* v = get(key)) {
      if (!v->is_string()) fail(field(key), "expected a string");
      out = v->get<std::string>();
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!seen_.count(it.key())) fail(field(it.key()), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

void require(bool ok, const std::string& path, const std::string& what) {
  if (!ok) fail(path, what);
}

void read_scene(Section s, ExperimentConfig& c) {
  s.integer("height", c.render.height);
  s.integer("width", c.render.width);
  s.number("camera_height", c.scene.camera_height);
  s.number("far_wall", c.scene.far_wall);
  s.number("side_wall", c.scene.side_wall);
  s.integer("n_walls", c.scene.n_walls);
  s.integer("texture_components", c.scene.texture_components);
  s.integer("channels", c.scene.channels);
  s.number("texture_band_lo", c.scene.texture_band_lo);
  s.number("texture_band_hi", c.scene.texture_band_hi);
  s.finish();

  require(c.render.height >= kMinImageSide, s.field("height"), "must be at least 8");
  require(c.render.width >= kMinImageSide, s.field("width"), "must be at least 8");
  require(c.scene.camera_height > 0.0, s.field("camera_height"), "must be positive");
  require(c.scene.far_wall > 0.0, s.field("far_wall"), "must be positive");
  require(c.scene.side_wall > 0.0, s.field("side_wall"), "must be positive");
  require(c.scene.n_walls >= 1 && c.scene.n_walls <= 3, s.field("n_walls"), "must be 1, 2 or 3");
  require(c.scene.texture_components >= 6 && c.scene.texture_components <= 12,
          s.field("texture_components"), "must lie in [6, 12]");
  require(c.scene.channels == 1 || c.scene.channels == 3, s.field("channels"), "must be 1 or 3");
  require(c.scene.texture_band_lo > 0.0, s.field("texture_band_lo"), "must be positive");
  require(c.scene.texture_band_hi >= c.scene.texture_band_lo, s.field("texture_band_hi"),
          "must be at least texture_band_lo");
}

void read_trajectory(Section s, TrajectoryParams& t) {
  s.integer("n_frames", t.n_frames);
  s.number("forward_velocity", t.forward_velocity);
  s.number("yaw_rate", t.yaw_rate);
  s.number("jitter_std", t.jitter_std);
  s.finish();
  require(t.n_frames >= 5, s.field("n_frames"), "must be at least 5");
  require(t.forward_velocity > 0.0, s.field("forward_velocity"), "must be positive");
  require(t.jitter_std >= 0.0, s.field("jitter_std"), "must be non-negative");
}

void read_noise(Section s, NoiseParams& n) {
  s.number("pose_std", n.pose_std);
  s.number("scale_std", n.scale_std);
  s.finish();
  require(n.pose_std >= 0.0, s.field("pose_std"), "must be non-negative");
  require(n.scale_std >= 0.0, s.field("scale_std"), "must be non-negative");
}

void read_objective(Section s, ExperimentConfig& c) {
  ObjectiveConfig& o = c.objective;
  std::string regime = o.regime == Regime::kDirect ? "direct" : "regressor";
  s.string("regime", regime);
  if (regime == "direct") {
    o.regime = Regime::kDirect;
  } else if (regime == "regressor") {
    o.regime = Regime::kRegressor;
  } else {
    fail(s.field("regime"), "expected \"direct\" or \"regressor\"");
  }

  if (const json* v = s.get("variants")) {
    if (!v->is_array() || v->empty()) fail(s.field("variants"), "expected a non-empty array");
    c.variants.clear();
    for (size_t i = 0; i < v->size(); ++i) {
      const std::string path = s.field("variants") + "[" + std::to_string(i) + "]";
      if (!(*v)[i].is_string()) fail(path, "expected a string");
      try {
        c.variants.push_back(parse_variant((*v)[i].get<std::string>()));
      } catch (const UsageError& e) {
        fail(path, e.what());
      }
    }
  } else if (o.regime == Regime::kRegressor) {
    c.variants = {parse_variant("baseline"), parse_variant("id")};
  }

  s.number("lambda", o.lambda);
  s.number("smoothness_weight", o.smoothness_weight);
  s.number("alpha", o.photometric.alpha);
  s.number("ssim_c1", o.photometric.ssim_c1);
  s.number("ssim_c2", o.photometric.ssim_c2);
  s.integer("iterations", o.iterations);
  s.number("learning_rate", o.adam.learning_rate);
  s.number("beta1", o.adam.beta1);
  s.number("beta2", o.adam.beta2);
  s.number("epsilon", o.adam.epsilon);
  s.number("fd_step", o.fd_step);
  s.boolean("skip_pairs", o.skip_pairs);
  s.number("divergence_threshold", o.divergence_threshold);
  s.finish();

  require(o.lambda >= 0.0, s.field("lambda"), "must be non-negative");
  require(o.smoothness_weight >= 0.0, s.field("smoothness_weight"), "must be non-negative");
  require(o.photometric.alpha >= 0.0 && o.photometric.alpha <= 1.0, s.field("alpha"),
          "must lie in [0, 1]");
  require(o.photometric.ssim_c1 > 0.0, s.field("ssim_c1"), "must be positive");
  require(o.photometric.ssim_c2 > 0.0, s.field("ssim_c2"), "must be positive");
  require(o.iterations >= 0, s.field("iterations"), "must be non-negative");
  require(o.adam.learning_rate > 0.0, s.field("learning_rate"), "must be positive");
  require(o.adam.beta1 >= 0.0 && o.adam.beta1 < 1.0, s.field("beta1"), "must lie in [0, 1)");
  require(o.adam.beta2 >= 0.0 && o.adam.beta2 < 1.0, s.field("beta2"), "must lie in [0, 1)");
  require(o.adam.epsilon > 0.0, s.field("epsilon"), "must be positive");
  require(o.fd_step > 0.0, s.field("fd_step"), "must be positive");
  require(o.divergence_threshold > 0.0, s.field("divergence_threshold"), "must be positive");
  for (size_t i = 0; i < c.variants.size(); ++i) {
    const Variant& v = c.variants[i];
    const std::string path = s.field("variants") + "[" + std::to_string(i) + "]";
    require(!v.id || o.regime == Regime::kRegressor, path,
            "the identity constraint needs the regressor regime");
    require(!v.cyc || o.skip_pairs, path, "the cycle constraint needs skip_pairs");
  }
}

void read_evaluation(Section s, EvaluationParams& e) {
  s.number("d_max", e.depth.d_max);
  s.number("min_depth", e.depth.min_depth);
  s.integer("snippet", e.snippet);
  s.number("cov_reduction_bar", e.cov_reduction_bar);
  s.finish();
  require(e.depth.min_depth > 0.0, s.field("min_depth"), "must be positive");
  require(e.depth.d_max > e.depth.min_depth, s.field("d_max"), "must exceed min_depth");
  require(e.depth.d_max * 256.0 <= 65535.0, s.field("d_max"),
          "must fit the 16-bit depth encoding (at most 255.99)");
  require(e.snippet >= 2, s.field("snippet"), "must be at least 2");
  require(e.cov_reduction_bar >= 0.0 && e.cov_reduction_bar < 1.0, s.field("cov_reduction_bar"),
          "must lie in [0, 1)");
}

}  // namespace

Variant parse_variant(const std::string& name) {
  Variant v;
  v.name = name;
  if (name == "baseline") return v;
  std::stringstream ss(name);
  std::string part;
  std::set<std::string> parts;
  while (std::getline(ss, part, '+')) {
    if (!parts.insert(part).second) throw UsageError("repeated constraint '" + part + "'");
    if (part == "fb") {
      v.fb = true;
    } else if (part == "id") {
      v.id = true;
    } else if (part == "cyc") {
      v.cyc = true;
    } else {
      throw UsageError("unknown variant '" + name + "' (expected baseline or fb/id/cyc joined by '+')");
    }
  }
  if (parts.empty()) throw UsageError("empty variant name");
  return v;
}

ExperimentConfig::ExperimentConfig() {
  variants = {parse_variant("baseline"), parse_variant("fb"), parse_variant("cyc")};
  for (std::uint64_t s = 0; s < 10; ++s) seeds.push_back(s);
}

ObjectiveConfig ExperimentConfig::variant_objective(const Variant& v) const {
  ObjectiveConfig o = objective;
  o.use_fb = v.fb;
  o.use_id = v.id;
  o.use_cyc = v.cyc;
  return o;
}

bool ExperimentConfig::operator==(const ExperimentConfig& o) const {
  return serialize_config(*this) == serialize_config(o);
}

ExperimentConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw UsageError(std::string("config: malformed JSON: ") + e.what());
  }
  ExperimentConfig c;
  Section root(j, "");
  root.string("name", c.name);
  if (const json* v = root.get("scene")) read_scene(Section(*v, "scene"), c);
  if (const json* v = root.get("trajectory")) read_trajectory(Section(*v, "trajectory"), c.trajectory);
  if (const json* v = root.get("noise")) read_noise(Section(*v, "noise"), c.noise);
  if (const json* v = root.get("objective")) {
    read_objective(Section(*v, "objective"), c);
  }
  if (const json* v = root.get("evaluation")) read_evaluation(Section(*v, "evaluation"), c.evaluation);
  c.render.d_max = c.evaluation.depth.d_max;
  if (const json* v = root.get("seeds")) {
    if (!v->is_array() || v->empty()) fail("seeds", "expected a non-empty array");
    c.seeds.clear();
    std::set<std::uint64_t> unique;
    for (size_t i = 0; i < v->size(); ++i) {
      const json& e = (*v)[i];
      if (!e.is_number_unsigned()) fail("seeds[" + std::to_string(i) + "]", "expected a non-negative integer");
      const auto s = e.get<std::uint64_t>();
      if (!unique.insert(s).second) fail("seeds[" + std::to_string(i) + "]", "duplicate seed");
      c.seeds.push_back(s);
    }
  }
  root.string("output_dir", c.output_dir);
  root.finish();
  require(!c.name.empty(), "name", "must not be empty");
  require(!c.output_dir.empty(), "output_dir", "must not be empty");
  return c;
}

ExperimentConfig parse_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("config: cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["scene"] = {
      {"height", c.render.height},
      {"width", c.render.width},
      {"camera_height", c.scene.camera_height},
      {"far_wall", c.scene.far_wall},
      {"side_wall", c.scene.side_wall},
      {"n_walls", c.scene.n_walls},
      {"texture_components", c.scene.texture_components},
      {"channels", c.scene.channels},
      {"texture_band_lo", c.scene.texture_band_lo},
      {"texture_band_hi", c.scene.texture_band_hi},
  };
  j["trajectory"] = {
      {"n_frames", c.trajectory.n_frames},
      {"forward_velocity", c.trajectory.forward_velocity},
      {"yaw_rate", c.trajectory.yaw_rate},
      {"jitter_std", c.trajectory.jitter_std},
  };
  j["noise"] = {{"pose_std", c.noise.pose_std}, {"scale_std", c.noise.scale_std}};
  const ObjectiveConfig& o = c.objective;
  json variants = json::array();
  for (const auto& v : c.variants) variants.push_back(v.name);
  j["objective"] = {
      {"regime", o.regime == Regime::kDirect ? "direct" : "regressor"},
      {"variants", variants},
      {"lambda", o.lambda},
      {"smoothness_weight", o.smoothness_weight},
      {"alpha", o.photometric.alpha},
      {"ssim_c1", o.photometric.ssim_c1},
      {"ssim_c2", o.photometric.ssim_c2},
      {"iterations", o.iterations},
      {"learning_rate", o.adam.learning_rate},
      {"beta1", o.adam.beta1},
      {"beta2", o.adam.beta2},
      {"epsilon", o.adam.epsilon},
      {"fd_step", o.fd_step},
      {"skip_pairs", o.skip_pairs},
      {"divergence_threshold", o.divergence_threshold},
  };
  j["evaluation"] = {
      {"d_max", c.evaluation.depth.d_max},
      {"min_depth", c.evaluation.depth.min_depth},
      {"snippet", c.evaluation.snippet},
      {"cov_reduction_bar", c.evaluation.cov_reduction_bar},
  };
  j["seeds"] = c.seeds;
  j["output_dir"] = c.output_dir;
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char ch : serialize_config(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace poseconsist
