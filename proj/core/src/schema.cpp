#include "consensusflow/schema.hpp"

#include <fstream>
#include <limits>
#include <sstream>

#include <nlohmann/json.hpp>

namespace consensusflow {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw ConfigError(what, path.empty() ? "/" : path);
}

const json& require_field(const json& obj, const std::string& path, const char* key) {
  if (!obj.is_object()) fail(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) fail(path + "/" + key, "missing required field");
  return *it;
}

double parse_number(const json& j, const std::string& path) {
  if (!j.is_number()) fail(path, "expected a number");
  return j.get<double>();
}

// A number, or the strings "inf" / "-inf" for unbounded box endpoints.
double parse_extended(const json& j, const std::string& path) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    fail(path, "expected a number or \"inf\"/\"-inf\", got \"" + s + "\"");
  }
  fail(path, "expected a number or \"inf\"/\"-inf\"");
}

Eigen::VectorXd parse_vector(const json& j, const std::string& path, bool extended = false) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of numbers");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    const std::string p = path + "/" + std::to_string(i);
    v(static_cast<Eigen::Index>(i)) = extended ? parse_extended(j[i], p) : parse_number(j[i], p);
  }
  return v;
}

Eigen::MatrixXd parse_matrix(const json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(path, "expected a nonempty array of rows");
  const auto rows = static_cast<Eigen::Index>(j.size());
  Eigen::Index cols = -1;
  Eigen::MatrixXd m;
  for (Eigen::Index r = 0; r < rows; ++r) {
    const std::string rpath = path + "/" + std::to_string(r);
    const json& row = j[static_cast<std::size_t>(r)];
    if (!row.is_array()) fail(rpath, "expected an array of numbers");
    if (cols < 0) {
      cols = static_cast<Eigen::Index>(row.size());
      if (cols == 0) fail(rpath, "expected a nonempty row");
      m.resize(rows, cols);
    } else if (static_cast<Eigen::Index>(row.size()) != cols) {
      fail(rpath, "ragged matrix: expected " + std::to_string(cols) + " columns");
    }
    for (Eigen::Index c = 0; c < cols; ++c)
      m(r, c) = parse_number(row[static_cast<std::size_t>(c)],
                             rpath + "/" + std::to_string(c));
  }
  return m;
}

std::string parse_type_tag(const json& j, const std::string& path) {
  const json& t = require_field(j, path, "type");
  if (!t.is_string()) fail(path + "/type", "expected a string");
  return t.get<std::string>();
}

template <class Builder>
auto checked(const std::string& path, Builder&& build) {
  try {
    return build();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

ConvexSet parse_set(const json& j, const std::string& path) {
  const std::string type = parse_type_tag(j, path);
  if (type == "whole") {
    const json& d = require_field(j, path, "dim");
    if (!d.is_number_integer() || d.get<long long>() <= 0)
      fail(path + "/dim", "expected a positive integer");
    return checked(path, [&] { return ConvexSet(WholeSpace{d.get<Eigen::Index>()}); });
  }
  if (type == "box") {
    Eigen::VectorXd lo = parse_vector(require_field(j, path, "lo"), path + "/lo", true);
    Eigen::VectorXd hi = parse_vector(require_field(j, path, "hi"), path + "/hi", true);
    return checked(path, [&] { return ConvexSet(Box{std::move(lo), std::move(hi)}); });
  }
  if (type == "ball") {
    Eigen::VectorXd c = parse_vector(require_field(j, path, "center"), path + "/center");
    const double r = parse_number(require_field(j, path, "radius"), path + "/radius");
    return checked(path, [&] { return ConvexSet(Ball{std::move(c), r}); });
  }
  if (type == "halfspace") {
    Eigen::VectorXd a = parse_vector(require_field(j, path, "a"), path + "/a");
    const double b = parse_number(require_field(j, path, "b"), path + "/b");
    return checked(path, [&] { return ConvexSet(Halfspace{std::move(a), b}); });
  }
  if (type == "intersection") {
    const json& members = require_field(j, path, "members");
    if (!members.is_array() || members.empty())
      fail(path + "/members", "expected a nonempty array of sets");
    Intersection inter;
    for (std::size_t i = 0; i < members.size(); ++i)
      inter.members.push_back(parse_set(members[i], path + "/members/" + std::to_string(i)));
    return checked(path, [&] { return ConvexSet(std::move(inter)); });
  }
  fail(path + "/type", "unknown set type \"" + type +
                           "\" (expected whole, box, ball, halfspace, or intersection)");
}

ConvexFunction parse_function(const json& j, const std::string& path) {
  const std::string type = parse_type_tag(j, path);
  if (type == "deadzone") {
    const double c = parse_number(require_field(j, path, "center"), path + "/center");
    const double w = parse_number(require_field(j, path, "halfwidth"), path + "/halfwidth");
    return checked(path, [&] { return ConvexFunction(Deadzone{c, w}); });
  }
  if (type == "affine") {
    Eigen::VectorXd a = parse_vector(require_field(j, path, "a"), path + "/a");
    const double b = parse_number(require_field(j, path, "b"), path + "/b");
    return checked(path, [&] { return ConvexFunction(Affine{std::move(a), b}); });
  }
  if (type == "quadratic") {
    Eigen::MatrixXd P = parse_matrix(require_field(j, path, "P"), path + "/P");
    Eigen::VectorXd q = parse_vector(require_field(j, path, "q"), path + "/q");
    const double r = parse_number(require_field(j, path, "r"), path + "/r");
    return checked(path,
                   [&] { return ConvexFunction(Quadratic{std::move(P), std::move(q), r}); });
  }
  if (type == "absdev") {
    Eigen::VectorXd c = parse_vector(require_field(j, path, "center"), path + "/center");
    const double w = parse_number(require_field(j, path, "weight"), path + "/weight");
    return checked(path, [&] { return ConvexFunction(AbsDev{std::move(c), w}); });
  }
  if (type == "maxaffine") {
    const json& pieces = require_field(j, path, "pieces");
    if (!pieces.is_array() || pieces.empty())
      fail(path + "/pieces", "expected a nonempty array of {a, b} pieces");
    MaxAffine f;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
      const std::string p = path + "/pieces/" + std::to_string(i);
      Eigen::VectorXd a = parse_vector(require_field(pieces[i], p, "a"), p + "/a");
      const double b = parse_number(require_field(pieces[i], p, "b"), p + "/b");
      f.pieces.push_back({std::move(a), b});
    }
    return checked(path, [&] { return ConvexFunction(std::move(f)); });
  }
  if (type == "sum") {
    const json& members = require_field(j, path, "members");
    if (!members.is_array() || members.empty())
      fail(path + "/members", "expected a nonempty array of functions");
    FuncSum s;
    for (std::size_t i = 0; i < members.size(); ++i)
      s.members.push_back(parse_function(members[i], path + "/members/" + std::to_string(i)));
    return checked(path, [&] { return ConvexFunction(std::move(s)); });
  }
  if (type == "scaled") {
    const double kappa = parse_number(require_field(j, path, "kappa"), path + "/kappa");
    ConvexFunction inner = parse_function(require_field(j, path, "inner"), path + "/inner");
    return checked(path, [&] { return ConvexFunction(Scaled{kappa, std::move(inner)}); });
  }
  fail(path + "/type", "unknown function type \"" + type + "\"");
}

RunParams parse_params(const json& j, const std::string& path) {
  RunParams p;
  if (j.is_null()) return p;
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, val] : j.items()) {
    const std::string kpath = path + "/" + key;
    if (key == "alpha") {
      p.alpha = parse_number(val, kpath);
      if (!(p.alpha > 0.0)) fail(kpath, "alpha must be positive");
    } else if (key == "h") {
      p.h = parse_number(val, kpath);
      if (!(p.h > 0.0)) fail(kpath, "step size must be positive");
    } else if (key == "t_end") {
      p.t_end = parse_number(val, kpath);
      if (!(p.t_end > 0.0)) fail(kpath, "time horizon must be positive");
    } else if (key == "stop_tol") {
      p.stop_tol = parse_number(val, kpath);
      if (p.stop_tol < 0.0) fail(kpath, "stop tolerance must be nonnegative");
    } else if (key == "k_fraction") {
      p.k_fraction = parse_number(val, kpath);
      if (!(p.k_fraction > 0.0 && p.k_fraction < 1.0))
        fail(kpath, "k_fraction must lie strictly in (0, 1)");
    } else if (key == "scheme") {
      if (!val.is_string()) fail(kpath, "expected a string");
      try {
        p.scheme = parse_scheme(val.get<std::string>());
      } catch (const Error& e) {
        fail(kpath, e.what());
      }
    } else if (key == "record_stride") {
      if (!val.is_number_integer() || val.get<long long>() < 1)
        fail(kpath, "expected a positive integer");
      p.record_stride = val.get<std::size_t>();
    } else if (key == "seed") {
      if (!val.is_number_integer() || val.get<long long>() < 0)
        fail(kpath, "expected a nonnegative integer");
      p.seed = val.get<std::uint64_t>();
    } else {
      fail(kpath, "unknown parameter");
    }
  }
  return p;
}

OutputOptions parse_outputs(const json& j, const std::string& path) {
  OutputOptions o;
  if (j.is_null()) return o;
  if (!j.is_object()) fail(path, "expected an object");
  for (const auto& [key, val] : j.items()) {
    const std::string kpath = path + "/" + key;
    if (key == "dir") {
      if (!val.is_string()) fail(kpath, "expected a string");
      o.dir = val.get<std::string>();
    } else if (key == "emit_svg") {
      if (!val.is_boolean()) fail(kpath, "expected a boolean");
      o.emit_svg = val.get<bool>();
    } else if (key == "emit_lyapunov") {
      if (!val.is_boolean()) fail(kpath, "expected a boolean");
      o.emit_lyapunov = val.get<bool>();
    } else {
      fail(kpath, "unknown output option");
    }
  }
  return o;
}

}  // namespace

ExperimentConfig parse_config(const std::string& json_text) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    fail("", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) fail("", "expected a top-level object");

  ExperimentConfig cfg;
  const json& agents = require_field(root, "", "agents");
  if (!agents.is_array() || agents.empty())
    fail("/agents", "expected a nonempty array of agents");
  for (std::size_t i = 0; i < agents.size(); ++i) {
    const std::string apath = "/agents/" + std::to_string(i);
    const json& a = agents[i];
    ConvexFunction cost = parse_function(require_field(a, apath, "cost"), apath + "/cost");
    ConvexSet set = parse_set(require_field(a, apath, "set"), apath + "/set");
    Eigen::VectorXd x0 = parse_vector(require_field(a, apath, "x0"), apath + "/x0");
    Eigen::VectorXd lambda0 = a.contains("lambda0")
                                  ? parse_vector(a["lambda0"], apath + "/lambda0")
                                  : Eigen::VectorXd::Zero(x0.size());
    if (cost.dim() != set.dim())
      fail(apath, "cost dimension " + std::to_string(cost.dim()) +
                      " does not match set dimension " + std::to_string(set.dim()));
    if (x0.size() != set.dim())
      fail(apath + "/x0", "expected " + std::to_string(set.dim()) + " components");
    if (lambda0.size() != set.dim())
      fail(apath + "/lambda0", "expected " + std::to_string(set.dim()) + " components");
    if (!contains(set, x0, 1e-12))
      fail(apath + "/x0", "initial point of agent " + std::to_string(i) +
                              " is not in its constraint set");
    cfg.agents.push_back(
        AgentSpec{std::move(cost), std::move(set), std::move(x0), std::move(lambda0)});
  }

  const Eigen::Index q = cfg.agents.front().constraint.dim();
  for (std::size_t i = 1; i < cfg.agents.size(); ++i) {
    if (cfg.agents[i].constraint.dim() != q)
      fail("/agents/" + std::to_string(i),
           "all agents must share one state dimension (agent 0 has " + std::to_string(q) + ")");
  }

  const json& graph = require_field(root, "", "graph");
  cfg.adjacency = parse_matrix(require_field(graph, "/graph", "adjacency"), "/graph/adjacency");
  if (cfg.adjacency.rows() != static_cast<Eigen::Index>(cfg.agents.size()))
    fail("/graph/adjacency", "expected " + std::to_string(cfg.agents.size()) +
                                 " rows to match the agent count");

  cfg.params = parse_params(root.contains("params") ? root["params"] : json(), "/params");
  cfg.outputs = parse_outputs(root.contains("outputs") ? root["outputs"] : json(), "/outputs");

  for (const auto& [key, val] : root.items()) {
    (void)val;
    if (key != "agents" && key != "graph" && key != "params" && key != "outputs")
      fail("/" + key, "unknown top-level field");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open config file '" + path + "'", "/");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_config(buf.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), e.path);
  }
}

ProblemInstance build_instance(const ExperimentConfig& config) {
  Network net = [&] {
    try {
      return build_network(config.adjacency, config.agents.front().constraint.dim());
    } catch (const Error& e) {
      throw ConfigError(e.what(), "/graph/adjacency");
    }
  }();
  try {
    return ProblemInstance(config.agents, std::move(net), config.params.alpha);
  } catch (const Error& e) {
    throw ConfigError(e.what(), "/agents");
  }
}

}  // namespace consensusflow
