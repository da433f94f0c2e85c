#include <CLI11.hpp>
#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <unistd.h>

#include "run_config.hpp"
#include "topoflow/errors.hpp"
#include "topoflow/fd_loops.hpp"
#include "topoflow/halfline.hpp"
#include "topoflow/verify.hpp"

using namespace topoflow;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0, kExitConfig = 2, kExitNumerical = 3, kExitAcceptance = 4;

struct Overrides {
  std::string config;
  std::string out;
  std::string backend;
  std::optional<int> workers;
  std::optional<std::uint64_t> seed;
};

std::string num(double x) { return fmt::format("{:.17g}", x); }

// write to a sibling temp file then rename, so a failed run leaves no partial file
void write_atomic(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  const fs::path tmp = path.string() + fmt::format(".tmp{}", ::getpid());
  {
    std::ofstream out(tmp, std::ios::binary);
    out << content;
    out.flush();
    if (!out) {
      std::error_code ec;
      fs::remove(tmp, ec);
      throw std::runtime_error(fmt::format("cannot write {}", tmp.string()));
    }
  }
  fs::rename(tmp, path);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

cli::RunConfig resolve(const Overrides& o) {
  try {
    cli::RunConfig c = o.config.empty() ? cli::parse_config(json::object()) : cli::load_config(o.config);
    if (!o.out.empty()) c.outputs = o.out;
    if (o.backend == "semi") c.backend = flow::Backend::SemiAnalytic;
    if (o.backend == "fd") c.backend = flow::Backend::FdOracle;
    if (o.workers) c.workers = *o.workers;
    if (o.seed) c.seed = *o.seed;
    c.validate();
    return c;
  } catch (const ConfigError&) {
    throw;
  } catch (const error& e) {
    // anything thrown while building the config is a config problem
    throw ConfigError(e.what());
  }
}

std::string loop_label(const LoopSpec& l) {
  const char* o = l.orientation == Orientation::Positive ? "" : " reversed";
  switch (l.kind) {
    case LoopSpec::Kind::CircleCR: return fmt::format("circle R={}{}", l.R, o);
    case LoopSpec::Kind::FixedKx: return fmt::format("fixed_kx kx={}{}", l.kx, o);
    case LoopSpec::Kind::AroundPuncture: return fmt::format("around_puncture{}", o);
    case LoopSpec::Kind::Polyline: return fmt::format("polyline {} points", l.points.size());
  }
  return "?";
}

const char* gap_name(flow::Gap g) { return g == flow::Gap::Upper ? "upper" : "lower"; }

int cmd_bulk(const cli::RunConfig& c) {
  const auto& b = c.bulk;
  std::string csv = "kx,ky,omega_minus,omega_zero,omega_plus\n";
  for (int i = 0; i < b.band_grid; ++i)
    for (int j = 0; j < b.band_grid; ++j) {
      const double kx = -b.k_max + 2.0 * b.k_max * i / (b.band_grid - 1);
      const double ky = -b.k_max + 2.0 * b.k_max * j / (b.band_grid - 1);
      const auto e = model::bulk_bands(c.params, model::BulkMomentum::finite(kx, ky));
      csv += fmt::format("{},{},{},{},{}\n", num(kx), num(ky), num(e.minus), num(e.zero), num(e.plus));
    }
  json chern = {{"grid_n", b.chern_grid},
                {"minus", model::chern_number(c.params, model::BandIndex::Minus, b.chern_grid)},
                {"zero", model::chern_number(c.params, model::BandIndex::Zero, b.chern_grid)},
                {"plus", model::chern_number(c.params, model::BandIndex::Plus, b.chern_grid)}};
  write_atomic(c.outputs / "bands.csv", csv);
  write_atomic(c.outputs / "chern.json", dump(chern));
  fmt::print("chern numbers (-, 0, +) = ({}, {}, {})\n", chern["minus"].get<int>(), chern["zero"].get<int>(),
             chern["plus"].get<int>());
  return kExitOk;
}

int cmd_edge_spectrum(const cli::RunConfig& c) {
  const auto loops = cli::cylinder_loops(c);
  if (loops.empty()) throw ConfigError("edge-spectrum needs at least one cylinder loop in 'loops'");
  const auto ctx = c.flow_context();
  const double f = c.params.f();
  // branch ids run across all loops; edge_index.json maps each loop to its id range
  std::string branches = "theta,omega,branch_id,backend\n";
  std::size_t next_id = 0;
  std::string edges = "loop,theta,kx,a,omega_edge_plus,omega_edge_minus\n";
  json index = json::array();
  for (const auto& loop : loops) {
    const auto label = loop_label(loop);
    const auto br = flow::trace_branches(ctx, loop, c.gap);
    const double t0 = loop.param(0.0), period = loop.period();
    for (std::size_t id = 0; id < br.size(); ++id)
      for (const auto& [s, w] : br[id].points) {
        const double theta = t0 + std::fmod(std::fmod(s - t0, period) + period, period);
        branches += fmt::format("{},{},{},{}\n", num(theta), num(w), next_id + id, flow::backend_name(ctx.backend));
      }
    for (int k = 0; k <= loop.samples; ++k) {
      const double t = double(k) / loop.samples;
      const auto pt = loop.point(t);
      const double e = halfline::essential_gap_edge(c.params, pt.kx());
      edges += fmt::format("{},{},{},{},{},{}\n", label, num(loop.param(t)), num(pt.kx()), num(pt.a()), num(e), num(-e));
    }
    json entry = {{"loop", label},
                  {"gap", gap_name(c.gap)},
                  {"backend", flow::backend_name(ctx.backend)},
                  {"branch_ids", {next_id, next_id + br.size()}}};
    next_id += br.size();
    json cross = json::array();
    for (double mu : {0.25, 0.5, 0.75}) {
      const double m = c.gap == flow::Gap::Upper ? mu * f : -mu * f;
      cross.push_back({{"mu", m}, {"value", flow::edge_index_crossings(br, m, f).value}});
    }
    entry["crossings"] = cross;
    entry["merges_upper_band"] = flow::edge_index_merges(br, flow::BandEdge::UpperBand).value;
    entry["merges_flat_band"] = flow::edge_index_merges(br, flow::BandEdge::FlatBand).value;
    json ends = json::array();
    for (const auto& b : br) ends.push_back({flow::branch_end_name(b.start), flow::branch_end_name(b.end)});
    entry["branch_ends"] = ends;
    index.push_back(entry);
    fmt::print("{}: {} branches, crossings at mu = f/2: {}\n", label, br.size(), cross[1]["value"].get<int>());
  }
  write_atomic(c.outputs / "branches.csv", branches);
  write_atomic(c.outputs / "ess_edges.csv", edges);
  write_atomic(c.outputs / "edge_index.json", dump(index));
  return kExitOk;
}

int cmd_spectral_flow(const cli::RunConfig& c) {
  const auto loops = cli::cylinder_loops(c);
  if (loops.empty()) throw ConfigError("spectral-flow needs at least one cylinder loop in 'loops'");
  const auto ctx = c.flow_context();
  json out = json::array();
  for (const auto& loop : loops) {
    const auto r = flow::spectral_flow(ctx, loop, c.gap, c.fiducial);
    json cross = json::array();
    for (const auto& x : r.crossings) cross.push_back({{"theta", x.theta}, {"omega", x.omega}, {"sign", x.sign}});
    out.push_back({{"loop", loop_label(loop)},
                   {"gap", gap_name(c.gap)},
                   {"backend", flow::backend_name(ctx.backend)},
                   {"perturbation", {{"kind", c.perturbation.kind}, {"c", c.perturbation.c}}},
                   {"value", r.value},
                   {"method", flow::method_name(r.method)},
                   {"crossings", cross}});
    fmt::print("{}: spectral flow {}\n", loop_label(loop), r.value);
  }
  write_atomic(c.outputs / "flow.json", dump(out));
  return kExitOk;
}

int cmd_scattering(const cli::RunConfig& c) {
  const auto loops = cli::scatter_loops(c);
  if (loops.empty()) throw ConfigError("scattering needs at least one scattering loop in 'loops'");
  std::string csv = "loop,t,param,kx,kappa,a,re_S,im_S,arg_S_unwrapped\n";
  json out = json::array();
  for (const auto& loop : loops) {
    const auto w = scatter::winding_number(c.params, loop, c.workers);
    const auto label = loop.name();
    for (const auto& s : w.trace)
      csv += fmt::format("{},{},{},{},{},{},{},{},{}\n", label, num(s.t), num(loop.param(s.t)), num(s.pt.kx),
                         num(s.pt.kappa), num(s.pt.a), num(s.S.real()), num(s.S.imag()), num(s.arg_unwrapped));
    out.push_back({{"loop", label}, {"winding", w.value}, {"total_phase", w.total_phase}, {"max_step", w.max_step}});
    fmt::print("{}: winding {}\n", label, w.value);
  }
  write_atomic(c.outputs / "scattering.csv", csv);
  write_atomic(c.outputs / "winding.json", dump(out));
  return kExitOk;
}

int cmd_robin_demo(const cli::RunConfig& c) {
  const auto& r = c.robin;
  std::string csv = "phi,a,lowest_eigenvalue\n";
  for (int k = 0; k < r.curve_points; ++k) {
    // open interval so both ends stay finite a
    const double phi = -M_PI / 2 + M_PI * (k + 0.5) / r.curve_points;
    const auto bc = BoundaryParam::from_angle(phi);
    csv += fmt::format("{},{},{}\n", num(phi), num(bc.a()), num(fd::robin_lowest_eigenvalue(bc, r.fd)));
  }
  json flows = json::array();
  for (double mu : r.mu) {
    const int sf = fd::robin_spectral_flow(mu, r.fd, r.samples);
    const int rev = fd::robin_spectral_flow(mu, r.fd, r.samples, Orientation::Negative);
    flows.push_back({{"mu", mu}, {"value", sf}, {"reversed", rev}});
    fmt::print("robin flow across {}: {} (reversed {})\n", mu, sf, rev);
  }
  write_atomic(c.outputs / "robin_curve.csv", csv);
  write_atomic(c.outputs / "robin_flow.json", dump(flows));
  return kExitOk;
}

int cmd_verify(const cli::RunConfig& c) {
  verify::Options opt;
  opt.params = c.params;
  opt.workers = c.workers;
  opt.seed = c.seed;
  bool all = true;
  json crit = json::array();
  verify::run_all(opt, [&](const verify::CriterionResult& r) {
    fmt::print("{}\n", verify::format_line(r));
    std::fflush(stdout);
    all = all && r.pass;
    crit.push_back({{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
  });
  json report = {{"params", {{"f", c.params.f()}, {"nu", c.params.nu()}}},
                 {"seed", c.seed},
                 {"passed", all},
                 {"criteria", crit}};
  write_atomic(c.outputs / "report.json", dump(report));
  return all ? kExitOk : kExitAcceptance;
}

void setup_logging() {
  spdlog::set_pattern("[%l] %v");
  auto level = spdlog::level::info;
  if (const char* env = std::getenv("TOPOFLOW_LOG")) {
    const std::string s = env;
    if (s == "error") level = spdlog::level::err;
    else if (s == "info") level = spdlog::level::info;
    else if (s == "debug") level = spdlog::level::debug;
    else throw ConfigError(fmt::format("TOPOFLOW_LOG must be error, info or debug, got '{}'", s));
  }
  spdlog::set_level(level);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"edge spectra, spectral flow and scattering windings for the shallow-water half-plane"};
  app.require_subcommand(1);
  Overrides o;
  std::string workers, seed;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "JSON run configuration")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory");
    sub->add_option("--backend", o.backend, "semi or fd")->check(CLI::IsMember({"semi", "fd"}));
    sub->add_option("--workers", workers, "worker threads");
    sub->add_option("--seed", seed, "seed for randomized checks");
  };
  struct Cmd {
    const char* name;
    const char* help;
    int (*run)(const cli::RunConfig&);
  };
  const Cmd cmds[] = {{"bulk", "bulk bands and Chern numbers", cmd_bulk},
                      {"edge-spectrum", "edge branches along cylinder loops", cmd_edge_spectrum},
                      {"spectral-flow", "Phillips spectral flow along cylinder loops", cmd_spectral_flow},
                      {"scattering", "scattering amplitude phase and winding", cmd_scattering},
                      {"robin-demo", "Robin Laplacian eigenvalue curve and pump", cmd_robin_demo},
                      {"verify", "run the acceptance suite", cmd_verify}};
  for (const auto& c : cmds) common(app.add_subcommand(c.name, c.help));
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  try {
    setup_logging();
    try {
      if (!workers.empty()) o.workers = std::stoi(workers);
      if (!seed.empty()) o.seed = std::stoull(seed);
    } catch (const std::exception&) {
      throw ConfigError("--workers and --seed take non-negative integers");
    }
    const auto cfg = resolve(o);
    for (const auto& c : cmds)
      if (app.got_subcommand(c.name)) return c.run(cfg);
  } catch (const ConfigError& e) {
    spdlog::error("config error: {}", e.what());
    return kExitConfig;
  } catch (const NumericalFailure& e) {
    spdlog::error("numerical failure: {}", e.what());
    return kExitNumerical;
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return kExitOk;
}
