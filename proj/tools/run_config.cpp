#include "run_config.hpp"

#include <fmt/format.h>

#include <fstream>
#include <set>

#include "topoflow/errors.hpp"

namespace topoflow::cli {

using nlohmann::json;

namespace {

void only_keys(const json& j, const std::string& where, std::set<std::string> allowed) {
  if (!j.is_object()) throw ConfigError(fmt::format("{} must be an object", where));
  for (const auto& [k, v] : j.items())
    if (!allowed.count(k)) throw ConfigError(fmt::format("unknown key '{}' in {}", k, where));
}

template <class T>
T get(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("bad value for '{}': {}", key, e.what()));
  }
}

Orientation orientation(const json& j) {
  const auto s = get<std::string>(j, "orientation", "positive");
  if (s == "positive") return Orientation::Positive;
  if (s == "negative") return Orientation::Negative;
  throw ConfigError(fmt::format("orientation must be positive or negative, got '{}'", s));
}

AnyLoop parse_loop(const json& j) {
  if (!j.is_object() || !j.contains("kind")) throw ConfigError("each loop needs a 'kind'");
  const auto kind = j.at("kind").get<std::string>();
  const int samples = get(j, "samples", 512);
  if (kind == "circle") {
    only_keys(j, "circle loop", {"kind", "R", "samples", "orientation"});
    return LoopSpec::circle(get(j, "R", 1.0), samples, orientation(j));
  }
  if (kind == "around_puncture") {
    only_keys(j, "around_puncture loop", {"kind", "samples", "orientation"});
    return LoopSpec::around_puncture(samples, orientation(j));
  }
  if (kind == "fixed_kx") {
    only_keys(j, "fixed_kx loop", {"kind", "kx", "samples", "orientation"});
    if (!j.contains("kx")) throw ConfigError("fixed_kx loop needs kx");
    return LoopSpec::fixed_kx(j.at("kx").get<double>(), samples, orientation(j));
  }
  if (kind == "polyline") {
    only_keys(j, "polyline loop", {"kind", "points", "samples"});
    std::vector<CylinderPoint> pts;
    for (const auto& q : j.at("points")) {
      const auto v = q.get<std::vector<double>>();
      if (v.size() != 2) throw ConfigError("polyline points are [kx, a]");
      pts.emplace_back(v[0], v[1]);
    }
    return LoopSpec::polyline(std::move(pts), samples);
  }
  scatter::ScatterLoop s;
  if (kind == "c_r_eps") {
    only_keys(j, "c_r_eps loop", {"kind", "R", "eps", "samples"});
    s = scatter::ScatterLoop::c_r_eps(get(j, "R", 1.0), get(j, "eps", 0.05), samples);
  } else if (kind == "gamma") {
    only_keys(j, "gamma loop", {"kind", "delta", "a0", "samples"});
    s = scatter::ScatterLoop::gamma(get(j, "delta", 0.5), get(j, "a0", -1.0), samples);
  } else if (kind == "ell_alpha") {
    only_keys(j, "ell_alpha loop", {"kind", "alpha", "samples"});
    s = scatter::ScatterLoop::ell_alpha(get(j, "alpha", 0.1), samples);
  } else if (kind == "scatter_polyline") {
    only_keys(j, "scatter_polyline loop", {"kind", "points", "samples"});
    std::vector<std::array<double, 3>> pts;
    for (const auto& q : j.at("points")) {
      const auto v = q.get<std::vector<double>>();
      if (v.size() != 3) throw ConfigError("scatter_polyline points are [kx, kappa, a]");
      pts.push_back({v[0], v[1], v[2]});
    }
    s = scatter::ScatterLoop::polyline(std::move(pts), samples);
  } else {
    throw ConfigError(fmt::format("unknown loop kind '{}'", kind));
  }
  return s;
}

}  // namespace

fd::PerturbationSpec PerturbationConfig::spec() const {
  if (kind == "none") return fd::PerturbationSpec::none();
  if (kind == "exponential_identity") return fd::PerturbationSpec::exponential_identity(c);
  throw ConfigError(fmt::format("unknown perturbation '{}'", kind));
}

RunConfig parse_config(const json& j) {
  only_keys(j, "config",
            {"params", "backend", "fd", "loops", "gap", "fiducial", "perturbation", "bulk", "robin", "outputs", "seed",
             "workers"});
  RunConfig c;
  if (j.contains("params")) {
    const auto& p = j.at("params");
    only_keys(p, "params", {"f", "nu"});
    c.params = model::ModelParams(get(p, "f", 1.0), get(p, "nu", 0.2));
  }
  const auto backend = get<std::string>(j, "backend", "semi");
  if (backend == "semi") c.backend = flow::Backend::SemiAnalytic;
  else if (backend == "fd") c.backend = flow::Backend::FdOracle;
  else throw ConfigError(fmt::format("backend must be semi or fd, got '{}'", backend));
  if (j.contains("fd")) {
    only_keys(j.at("fd"), "fd", {"L", "n"});
    c.fd.L = get(j.at("fd"), "L", c.fd.L);
    c.fd.n = get(j.at("fd"), "n", c.fd.n);
  }
  if (j.contains("loops")) {
    if (!j.at("loops").is_array()) throw ConfigError("loops must be a list");
    for (const auto& l : j.at("loops")) c.loops.push_back(parse_loop(l));
  }
  const auto gap = get<std::string>(j, "gap", "upper");
  if (gap == "upper") c.gap = flow::Gap::Upper;
  else if (gap == "lower") c.gap = flow::Gap::Lower;
  else throw ConfigError(fmt::format("gap must be upper or lower, got '{}'", gap));
  if (j.contains("fiducial")) {
    const auto& f = j.at("fiducial");
    only_keys(f, "fiducial", {"kind", "value", "amplitude"});
    const auto kind = get<std::string>(f, "kind", "default");
    if (kind == "default") c.fiducial = {};
    else if (kind == "constant") c.fiducial = flow::Fiducial::constant(get(f, "value", 0.5));
    else if (kind == "sinusoid") c.fiducial = flow::Fiducial::sinusoid(get(f, "amplitude", 0.2));
    else throw ConfigError(fmt::format("unknown fiducial '{}'", kind));
  }
  if (j.contains("perturbation")) {
    const auto& p = j.at("perturbation");
    only_keys(p, "perturbation", {"kind", "c"});
    c.perturbation.kind = get<std::string>(p, "kind", "none");
    c.perturbation.c = get(p, "c", 0.0);
  }
  if (j.contains("bulk")) {
    const auto& b = j.at("bulk");
    only_keys(b, "bulk", {"chern_grid", "band_grid", "k_max"});
    c.bulk.chern_grid = get(b, "chern_grid", c.bulk.chern_grid);
    c.bulk.band_grid = get(b, "band_grid", c.bulk.band_grid);
    c.bulk.k_max = get(b, "k_max", c.bulk.k_max);
  }
  if (j.contains("robin")) {
    const auto& r = j.at("robin");
    only_keys(r, "robin", {"L", "n", "samples", "mu", "curve_points"});
    c.robin.fd.L = get(r, "L", c.robin.fd.L);
    c.robin.fd.n = get(r, "n", c.robin.fd.n);
    c.robin.samples = get(r, "samples", c.robin.samples);
    c.robin.mu = get(r, "mu", c.robin.mu);
    c.robin.curve_points = get(r, "curve_points", c.robin.curve_points);
  }
  c.outputs = get<std::string>(j, "outputs", c.outputs.string());
  c.seed = get<std::uint64_t>(j, "seed", c.seed);
  c.workers = get(j, "workers", c.workers);
  c.validate();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config {}", path.string()));
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("config {} is not valid JSON: {}", path.string(), e.what()));
  }
  return parse_config(j);
}

void RunConfig::validate() const {
  // ModelParams validates itself on construction
  if (workers < 1) throw ConfigError("workers must be >= 1");
  if (backend == flow::Backend::FdOracle) fd.validate(params);
  const auto pert = perturbation.spec();
  if (pert.kind != fd::PerturbationSpec::Kind::None) {
    if (backend != flow::Backend::FdOracle) throw ConfigError("a perturbation needs the fd backend");
    pert.validate(fd);
  }
  if (fiducial.kind == flow::Fiducial::Kind::Constant && !(fiducial.value > 0.0 && fiducial.value < 1.0))
    throw ConfigError("constant fiducial must lie in (0, 1) in units of f");
  if (fiducial.kind == flow::Fiducial::Kind::Sinusoid && !(std::abs(fiducial.amplitude) < 0.5))
    throw ConfigError("sinusoid fiducial amplitude must be below 1/2");
  if (bulk.chern_grid < 4) throw ConfigError("bulk.chern_grid must be >= 4");
  if (bulk.band_grid < 2) throw ConfigError("bulk.band_grid must be >= 2");
  if (!(bulk.k_max > 0.0)) throw ConfigError("bulk.k_max must be positive");
  robin.fd.validate_basic();
  if (robin.samples < 64) throw ConfigError("robin.samples must be >= 64");
  if (robin.curve_points < 2) throw ConfigError("robin.curve_points must be >= 2");
  for (double m : robin.mu)
    if (!(m < 0.0)) throw ConfigError("robin.mu levels must be negative");
  for (const auto& l : loops) std::visit([](const auto& x) { x.validate(); }, l);
}

flow::FlowContext RunConfig::flow_context() const {
  flow::FlowContext ctx(params);
  ctx.backend = backend;
  ctx.fd = fd;
  ctx.pert = perturbation.spec();
  ctx.workers = workers;
  return ctx;
}

std::vector<LoopSpec> cylinder_loops(const RunConfig& c) {
  std::vector<LoopSpec> out;
  for (const auto& l : c.loops)
    if (const auto* x = std::get_if<LoopSpec>(&l)) out.push_back(*x);
  return out;
}

std::vector<scatter::ScatterLoop> scatter_loops(const RunConfig& c) {
  std::vector<scatter::ScatterLoop> out;
  for (const auto& l : c.loops)
    if (const auto* x = std::get_if<scatter::ScatterLoop>(&l)) out.push_back(*x);
  return out;
}

}  // namespace topoflow::cli
