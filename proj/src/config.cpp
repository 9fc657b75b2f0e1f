#include "dispersim/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace dispersim {

namespace {

using nlohmann::json;

void reject_unknown(const json& obj, const std::set<std::string>& allowed,
                    const std::string& where) {
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key()))
      throw SchemaError("unknown key '" + it.key() + "' in " + where);
}

double require_number(const json& obj, const std::string& key,
                      const std::string& where) {
  if (!obj.contains(key) || !obj[key].is_number())
    throw SchemaError(where + " needs numeric '" + key + "'");
  return obj[key].get<double>();
}

double number_or(const json& obj, const std::string& key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj[key].is_number())
    throw SchemaError("'" + key + "' must be a number");
  return obj[key].get<double>();
}

Vec3 parse_vec(const json& j, int dim, const std::string& where) {
  if (!j.is_array() || j.size() < 1 || j.size() > 3)
    throw SchemaError(where + " must be an array of 1..3 numbers");
  Vec3 v{0, 0, 0};
  for (std::size_t d = 0; d < j.size(); ++d) {
    if (!j[d].is_number()) throw SchemaError(where + " must hold numbers");
    v[d] = j[d].get<double>();
  }
  for (std::size_t d = dim; d < j.size(); ++d)
    if (v[d] != 0.0)
      throw SchemaError(where + " has a component beyond the grid dimension");
  return v;
}

ProfileShape parse_shape(const json& obj, const std::string& where) {
  std::string s = obj.value("shape", "gaussian");
  if (s == "gaussian") return ProfileShape::gaussian;
  if (s == "exponential") return ProfileShape::exponential_smooth;
  throw SchemaError(where + ": unknown shape '" + s + "'");
}

PotentialSpec parse_well(const json& obj, int dim, const std::string& where) {
  reject_unknown(obj, {"shape", "depth", "width", "center", "velocity"}, where);
  PotentialSpec spec;
  spec.shape = parse_shape(obj, where);
  spec.depth = require_number(obj, "depth", where);
  spec.width = require_number(obj, "width", where);
  if (!(spec.width > 0.0)) throw SchemaError(where + ": width must be > 0");
  if (obj.contains("center"))
    spec.center = parse_vec(obj["center"], dim, where + ".center");
  if (obj.contains("velocity"))
    spec.velocity = parse_vec(obj["velocity"], dim, where + ".velocity");
  return spec;
}

Vec3 snap_and_record(const Vec3& v, double L, bool half_step,
                     const std::string& where,
                     std::vector<std::string>* adjustments) {
  if (is_commensurate(v, L, half_step)) return v;
  Vec3 s = snap_commensurate(v, L, half_step);
  if (adjustments) {
    std::ostringstream os;
    os << where << ": velocity (" << v[0] << ", " << v[1] << ", " << v[2]
       << ") snapped to lattice-commensurate (" << s[0] << ", " << s[1]
       << ", " << s[2] << ")";
    adjustments->push_back(os.str());
  }
  return s;
}

InitialData parse_initial(const json& obj, int dim) {
  InitialData init;
  std::string type = obj.value("type", "packet");
  if (type == "packet") {
    reject_unknown(obj,
                   {"type", "center", "momentum", "width",
                    "prepare_scattering"},
                   "initial");
    if (obj.contains("center"))
      init.packet.center = parse_vec(obj["center"], dim, "initial.center");
    if (obj.contains("momentum"))
      init.packet.momentum =
          parse_vec(obj["momentum"], dim, "initial.momentum");
    init.packet.width = number_or(obj, "width", 1.0);
    if (!(init.packet.width > 0.0))
      throw SchemaError("initial.width must be > 0");
    if (obj.contains("prepare_scattering")) {
      if (!obj["prepare_scattering"].is_boolean())
        throw SchemaError("initial.prepare_scattering must be boolean");
      init.prepare_scattering = obj["prepare_scattering"].get<bool>();
    }
    init.kind = InitialData::Kind::packet;
  } else if (type == "bound_state") {
    reject_unknown(obj, {"type", "channel", "index"}, "initial");
    init.kind = InitialData::Kind::bound_state;
    init.channel = static_cast<int>(number_or(obj, "channel", 0));
    init.index = static_cast<int>(number_or(obj, "index", 0));
    if (init.channel < 0 || init.index < 0)
      throw SchemaError("initial.channel and initial.index must be >= 0");
  } else if (type == "file") {
    reject_unknown(obj, {"type", "path"}, "initial");
    if (!obj.contains("path") || !obj["path"].is_string())
      throw SchemaError("initial of type 'file' needs a string 'path'");
    init.kind = InitialData::Kind::file;
    init.path = obj["path"].get<std::string>();
  } else {
    throw SchemaError("unknown initial type '" + type + "'");
  }
  return init;
}

}  // namespace

ExperimentConfig parse_config(const json& doc,
                              std::vector<std::string>* adjustments) {
  if (!doc.is_object()) throw SchemaError("config root must be an object");
  reject_unknown(doc,
                 {"grid", "matrix", "wells", "channels", "initial", "time",
                  "checks", "save_snapshots", "seed"},
                 "config root");
  ExperimentConfig cfg;
  cfg.raw = doc;

  if (!doc.contains("grid") || !doc["grid"].is_object())
    throw SchemaError("config needs a 'grid' object");
  const json& g = doc["grid"];
  reject_unknown(g, {"dim", "points", "box_length"}, "grid");
  cfg.dim = static_cast<int>(require_number(g, "dim", "grid"));
  cfg.points = static_cast<int>(require_number(g, "points", "grid"));
  cfg.box_length = require_number(g, "box_length", "grid");
  if (cfg.dim < 1 || cfg.dim > 3)
    throw SchemaError("grid.dim must be 1, 2, or 3");
  if (cfg.points < 16 || (cfg.points & (cfg.points - 1)) != 0)
    throw SchemaError("grid.points must be a power of two >= 16");
  if (!(cfg.box_length > 0.0)) throw SchemaError("grid.box_length must be > 0");

  if (doc.contains("matrix")) {
    if (!doc["matrix"].is_boolean())
      throw SchemaError("'matrix' must be boolean");
    cfg.matrix = doc["matrix"].get<bool>();
  }

  if (cfg.matrix) {
    if (cfg.dim != 1)
      throw SchemaError("matrix models are one-dimensional");
    if (!doc.contains("channels") || !doc["channels"].is_array() ||
        doc["channels"].empty())
      throw SchemaError("matrix config needs a non-empty 'channels' array");
    if (doc.contains("wells"))
      throw SchemaError("matrix config takes 'channels', not 'wells'");
    int idx = 0;
    for (const auto& c : doc["channels"]) {
      std::string where = "channels[" + std::to_string(idx++) + "]";
      reject_unknown(c, {"u", "w", "alpha", "gamma", "velocity"}, where);
      MatrixPotentialSpec spec;
      if (!c.contains("u") || !c.contains("w"))
        throw SchemaError(where + " needs 'u' and 'w' profiles");
      spec.u_profile = parse_well(c["u"], cfg.dim, where + ".u");
      spec.w_profile = parse_well(c["w"], cfg.dim, where + ".w");
      spec.alpha = require_number(c, "alpha", where);
      spec.gamma = number_or(c, "gamma", 0.0);
      if (spec.alpha == 0.0) throw SchemaError(where + ": alpha must be nonzero");
      if (c.contains("velocity"))
        spec.velocity =
            parse_vec(c["velocity"], cfg.dim, where + ".velocity");
      spec.velocity = snap_and_record(spec.velocity, cfg.box_length, true,
                                      where, adjustments);
      spec.u_profile.velocity = spec.w_profile.velocity = spec.velocity;
      cfg.channels.push_back(spec);
    }
  } else {
    if (!doc.contains("wells") || !doc["wells"].is_array() ||
        doc["wells"].empty())
      throw SchemaError("config needs a non-empty 'wells' array");
    if (doc.contains("channels"))
      throw SchemaError("scalar config takes 'wells', not 'channels'");
    int idx = 0;
    for (const auto& w : doc["wells"]) {
      std::string where = "wells[" + std::to_string(idx++) + "]";
      PotentialSpec spec = parse_well(w, cfg.dim, where);
      spec.velocity = snap_and_record(spec.velocity, cfg.box_length, false,
                                      where, adjustments);
      cfg.wells.push_back(spec);
    }
  }

  if (doc.contains("initial")) {
    if (!doc["initial"].is_object())
      throw SchemaError("'initial' must be an object");
    cfg.initial = parse_initial(doc["initial"], cfg.dim);
  }

  if (doc.contains("time")) {
    const json& t = doc["time"];
    reject_unknown(t, {"t0", "t1", "dt", "stride"}, "time");
    cfg.t0 = number_or(t, "t0", cfg.t0);
    cfg.t1 = number_or(t, "t1", cfg.t1);
    cfg.dt = number_or(t, "dt", cfg.dt);
    cfg.stride = static_cast<int>(number_or(t, "stride", cfg.stride));
    if (!(cfg.dt > 0.0)) throw SchemaError("time.dt must be > 0");
    if (cfg.stride < 1) throw SchemaError("time.stride must be >= 1");
    if (!(cfg.t1 > cfg.t0)) throw SchemaError("time.t1 must exceed time.t0");
  }

  if (doc.contains("checks")) {
    if (!doc["checks"].is_array())
      throw SchemaError("'checks' must be an array");
    for (const auto& c : doc["checks"]) {
      CheckSpec spec;
      if (c.is_string()) {
        spec.name = c.get<std::string>();
        spec.params = json::object();
      } else if (c.is_object()) {
        reject_unknown(c, {"name", "params"}, "checks[]");
        if (!c.contains("name") || !c["name"].is_string())
          throw SchemaError("each check needs a string 'name'");
        spec.name = c["name"].get<std::string>();
        spec.params = c.value("params", json::object());
      } else {
        throw SchemaError("checks entries must be strings or objects");
      }
      cfg.checks.push_back(spec);
    }
  }

  if (doc.contains("save_snapshots")) {
    if (!doc["save_snapshots"].is_boolean())
      throw SchemaError("'save_snapshots' must be boolean");
    cfg.save_snapshots = doc["save_snapshots"].get<bool>();
  }
  if (doc.contains("seed"))
    cfg.seed = static_cast<unsigned>(require_number(doc, "seed", "config"));
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path,
                             std::vector<std::string>* adjustments) {
  std::ifstream is(path);
  if (!is) throw SchemaError("cannot open config file " + path.string());
  json doc;
  try {
    is >> doc;
  } catch (const json::parse_error& e) {
    throw SchemaError(path.string() + ": " + e.what());
  }
  return parse_config(doc, adjustments);
}

}  // namespace dispersim
