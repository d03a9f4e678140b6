#include "lvlingam/cli.hpp"

#include <omp.h>

#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "lvlingam/errors.hpp"
#include "lvlingam/experiments.hpp"
#include "lvlingam/graph_analysis.hpp"
#include "lvlingam/io.hpp"
#include "lvlingam/pipeline.hpp"

namespace lvlingam {

namespace {

namespace fs = std::filesystem;
using io::Json;

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Io: return 3;
    case ErrorKind::DegenerateCovariance:
    case ErrorKind::NonConvergence:
    case ErrorKind::IllConditioned: return 4;
    case ErrorKind::InconsistentVerdicts: return 5;
    case ErrorKind::Parse:
    case ErrorKind::InvalidArgument:
    case ErrorKind::ShapeMismatch:
    case ErrorKind::CycleDetected:
    case ErrorKind::NonPositivePrice: return 2;
    default: return 1;
  }
}

std::string remedy(ErrorKind k) {
  switch (k) {
    case ErrorKind::DegenerateCovariance: return "drop or merge the near-constant or collinear variable and rerun";
    case ErrorKind::NonConvergence: return "raise --max-iters or --restarts, or supply more samples";
    case ErrorKind::NonPositivePrice: return "prices must be strictly positive";
    default: return "";
  }
}

struct Seed {
  std::uint64_t value = 0;
  bool generated = false;
};

Seed resolve_seed(const std::optional<std::uint64_t>& given) {
  if (given) return {*given, false};
  std::random_device rd;
  return {(static_cast<std::uint64_t>(rd()) << 32) ^ rd(), true};
}

class Outputs {
 public:
  explicit Outputs(fs::path dir) : dir_(std::move(dir)) {}

  void prepare() const {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) throw Error(ErrorKind::Io, "cannot create " + dir_.string() + ": " + ec.message());
  }

  void write(const std::string& name, const std::string& contents) {
    io::write_file(dir_ / name, contents);
    files_.push_back({{"file", name}, {"sha256", io::sha256_hex(contents)}});
  }

  Json listing() const { return files_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  Json files_ = Json::array();
};

struct Manifest {
  std::string command;
  Seed seed;
  Json config = Json::object();
  Json inputs = Json::array();
  std::string started = io::utc_timestamp();

  void input(const fs::path& path, const std::string& bytes) {
    inputs.push_back({{"path", path.string()}, {"sha256", io::sha256_hex(bytes)}});
  }

  std::string render(const Outputs& out) const {
    return io::dump(Json{{"command", command},
                         {"version", kVersion},
                         {"seed", seed.value},
                         {"seed_generated", seed.generated},
                         {"config", config},
                         {"inputs", inputs},
                         {"outputs", out.listing()},
                         {"started", started},
                         {"finished", io::utc_timestamp()}});
  }
};

void finish(Outputs& out, const Manifest& m) { io::write_file(out.dir() / "manifest.json", m.render(out)); }

struct IcaFlags {
  std::optional<double> lambda;
  std::optional<int> k_min, k_max;
  double holdout_frac = 0.25;
  int restarts = 5;
  int max_iters = 5000;
  double grad_tol = 1e-6;
  std::optional<std::uint64_t> seed;
};

void add_ica_flags(CLI::App* app, IcaFlags& f) {
  app->add_option("--lambda", f.lambda, "Reconstruction penalty weight (default 1/p_o)")->check(CLI::PositiveNumber);
  app->add_option("--k-min", f.k_min, "Smallest column count tried (default p_o)")->check(CLI::PositiveNumber);
  app->add_option("--k-max", f.k_max, "Largest column count tried (default 2 p_o)")->check(CLI::PositiveNumber);
  app->add_option("--holdout-frac", f.holdout_frac, "Fraction of samples held out to choose k")
      ->capture_default_str()
      ->check(CLI::Range(0.0, 1.0));
  app->add_option("--restarts", f.restarts, "Random restarts per fit")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--max-iters", f.max_iters, "Iteration cap per restart")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--grad-tol", f.grad_tol, "Gradient max-norm stopping tolerance")->capture_default_str();
  app->add_option("--seed", f.seed, "Random seed (generated and recorded when absent)");
}

// Keys of an optional --config JSON that the matching flag did not set.
void apply_config(const Json& j, CLI::App* app, IcaFlags& f, int& bootstrap, double& alpha) {
  auto given = [&](const char* flag) { return app->count(flag) > 0; };
  auto num = [&](const char* key) {
    const auto& v = j.at(key);
    if (!v.is_number()) throw Error(ErrorKind::Parse, std::string("config.") + key + ": expected a number");
    return v;
  };
  if (j.contains("lambda") && !given("--lambda")) f.lambda = num("lambda").get<double>();
  if (j.contains("k_min") && !given("--k-min")) f.k_min = num("k_min").get<int>();
  if (j.contains("k_max") && !given("--k-max")) f.k_max = num("k_max").get<int>();
  if (j.contains("holdout_frac") && !given("--holdout-frac")) f.holdout_frac = num("holdout_frac").get<double>();
  if (j.contains("restarts") && !given("--restarts")) f.restarts = num("restarts").get<int>();
  if (j.contains("max_iters") && !given("--max-iters")) f.max_iters = num("max_iters").get<int>();
  if (j.contains("grad_tol") && !given("--grad-tol")) f.grad_tol = num("grad_tol").get<double>();
  if (j.contains("seed") && !given("--seed")) f.seed = num("seed").get<std::uint64_t>();
  if (j.contains("bootstrap") && !given("--bootstrap")) bootstrap = num("bootstrap").get<int>();
  if (j.contains("alpha") && !given("--alpha")) alpha = num("alpha").get<double>();
}

IcaConfig ica_config(const IcaFlags& f, std::uint64_t seed) {
  IcaConfig c;
  c.lambda = f.lambda;
  c.k_min = f.k_min;
  c.k_max = f.k_max;
  c.holdout_frac = f.holdout_frac;
  c.restarts = f.restarts;
  c.max_iters = f.max_iters;
  c.grad_tol = f.grad_tol;
  c.seed = seed;
  return c;
}

Json ica_json(const IcaConfig& c) {
  auto opt = [](const auto& o) { return o ? Json(*o) : Json(nullptr); };
  return Json{{"lambda", opt(c.lambda)},       {"k_min", opt(c.k_min)},         {"k_max", opt(c.k_max)},
              {"holdout_frac", c.holdout_frac}, {"restarts", c.restarts},       {"max_iters", c.max_iters},
              {"grad_tol", c.grad_tol},         {"coherence_limit", c.coherence_limit}};
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Causal discovery with latent variables in linear non-Gaussian models", "lvlingam"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Cap on worker threads (default: OpenMP's choice)")->check(CLI::PositiveNumber);

  // simulate
  auto* sim = app.add_subcommand("simulate", "Draw a random SEM with latents and sample its observed variables");
  std::optional<int> sim_p;
  double edge_prob = 0.3, weight = 0.9, latent_frac = 0.5;
  int sim_n = 1000;
  std::optional<std::uint64_t> sim_seed;
  std::string sim_graph, sim_out;
  sim->add_option("--p", sim_p, "Number of variables, latents included")->check(CLI::Range(2, 1000));
  sim->add_option("--graph", sim_graph, "Sample from this graph JSON instead of drawing one")->check(CLI::ExistingFile);
  sim->add_option("--edge-prob", edge_prob, "Edge probability between ordered pairs")->capture_default_str();
  sim->add_option("--weight", weight, "Weight of every edge")->capture_default_str();
  sim->add_option("--latent-frac", latent_frac, "Fraction of variables hidden")->capture_default_str();
  sim->add_option("--n", sim_n, "Sample count")->capture_default_str()->check(CLI::PositiveNumber);
  sim->add_option("--seed", sim_seed, "Random seed (generated and recorded when absent)");
  sim->add_option("--out-dir", sim_out, "Output directory")->required();

  // discover
  auto* disc = app.add_subcommand("discover", "Estimate mixing, test support, and infer paths and total effects");
  std::string data_path, disc_out, config_path;
  IcaFlags ica;
  int bootstrap = 10;
  double alpha = 0.05;
  bool enumerate = false, break_cycles = false, shuffle_holdout = false;
  std::string stderr_mode = "bootstrap", match = "optimal";
  disc->add_option("--data", data_path, "Samples CSV, header row of names, one sample per line")->required();
  disc->add_option("--out-dir", disc_out, "Output directory")->required();
  disc->add_option("--config", config_path, "JSON with any of lambda, k_min, k_max, holdout_frac, restarts, "
                                            "max_iters, grad_tol, seed, bootstrap, alpha; flags win");
  add_ica_flags(disc, ica);
  disc->add_option("--bootstrap", bootstrap, "Bootstrap replicates")->capture_default_str()->check(CLI::Range(2, 100000));
  disc->add_option("--alpha", alpha, "Two-sided t-test level for zero entries")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  disc->add_option("--stderr", stderr_mode, "Test scale: replicate spread (bootstrap) or spread / sqrt(B) (mean)")
      ->capture_default_str()
      ->check(CLI::IsMember({"bootstrap", "mean"}));
  disc->add_option("--match", match, "Column matching across replicates")->capture_default_str()->check(CLI::IsMember({"optimal", "greedy"}));
  disc->add_flag("--enumerate", enumerate, "List every compatible total-effect matrix");
  disc->add_flag("--break-cycles", break_cycles, "Drop the weakest path verdict on each cycle instead of failing");
  disc->add_flag("--shuffle-holdout", shuffle_holdout, "Hold out a random subset instead of the trailing samples");

  // analyze
  auto* ana = app.add_subcommand("analyze", "Report absorbable latents and a minimal reduction of a graph");
  std::string ana_graph, ana_out;
  ana->add_option("--graph", ana_graph, "Graph JSON")->required();
  ana->add_option("--out", ana_out, "Write the report here instead of stdout");

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "Normalized path-verdict error over random graphs");
  std::vector<int> bench_p{6}, samples{1000};
  int graphs = 50, bench_boot = 10;
  double bench_edge = 0.3, bench_weight = 0.9, bench_latent = 0.5, bench_alpha = 0.05;
  std::optional<std::uint64_t> bench_seed;
  std::string bench_out;
  bench->add_option("--p", bench_p, "Graph sizes, comma separated")->delimiter(',')->capture_default_str();
  bench->add_option("--samples", samples, "Sample sizes, comma separated and ascending")->delimiter(',')->capture_default_str();
  bench->add_option("--graphs", graphs, "Graphs per cell")->capture_default_str()->check(CLI::NonNegativeNumber);
  bench->add_option("--edge-prob", bench_edge, "Edge probability")->capture_default_str();
  bench->add_option("--weight", bench_weight, "Edge weight")->capture_default_str();
  bench->add_option("--latent-frac", bench_latent, "Fraction of variables hidden")->capture_default_str();
  bench->add_option("--bootstrap", bench_boot, "Bootstrap replicates")->capture_default_str()->check(CLI::Range(2, 100000));
  bench->add_option("--alpha", bench_alpha, "Zero-test level")->capture_default_str();
  bench->add_option("--seed", bench_seed, "Random seed (generated and recorded when absent)");
  bench->add_option("--out-dir", bench_out, "Write benchmark.csv and manifest.json here instead of stdout");

  // returns
  auto* ret = app.add_subcommand("returns", "Daily returns from a price table");
  std::string prices_path, ret_out;
  ret->add_option("--prices", prices_path, "CSV: date column then one price column per series")->required();
  ret->add_option("--out-dir", ret_out, "Write returns.csv and manifest.json here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 2;
  }
  if (threads > 0) omp_set_num_threads(threads);

  try {
    if (sim->parsed()) {
      if (!sim_p && sim_graph.empty()) {
        err << "simulate: give --p or --graph\n" << sim->help();
        return 2;
      }
      Manifest m{"simulate", resolve_seed(sim_seed)};
      std::optional<LinearSem> sem;
      if (!sim_graph.empty()) {
        const auto bytes = io::read_file(sim_graph);
        m.input(sim_graph, bytes);
        Json j;
        try {
          j = Json::parse(bytes);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorKind::Parse, sim_graph + ": " + e.what());
        }
        sem = io::sem_from_json(j);
      } else {
        if (!(edge_prob >= 0 && edge_prob <= 1)) throw Error(ErrorKind::InvalidArgument, "--edge-prob must be in [0, 1]");
        sem = random_latent_sem(*sim_p, edge_prob, weight, latent_frac, m.seed.value);
      }
      m.config = Json{{"p", sim_p ? Json(*sim_p) : Json(nullptr)}, {"graph", sim_graph.empty() ? Json(nullptr) : Json(sim_graph)},
                      {"edge_prob", edge_prob}, {"weight", weight}, {"latent_frac", latent_frac}, {"n", sim_n}};
      const auto data = simulate_samples(*sem, sim_n, derive_seed(m.seed.value, {0x5a}));
      Outputs o(sim_out);
      o.prepare();
      o.write("graph.json", io::dump(io::to_json(*sem)));
      o.write("samples.csv", io::samples_csv(data));
      finish(o, m);
      return 0;
    }

    if (disc->parsed()) {
      Manifest m{"discover", {}};
      if (!config_path.empty()) {
        const auto bytes = io::read_file(config_path);
        m.input(config_path, bytes);
        Json j;
        try {
          j = Json::parse(bytes);
        } catch (const nlohmann::json::parse_error& e) {
          throw Error(ErrorKind::Parse, config_path + ": " + e.what());
        }
        if (!j.is_object()) throw Error(ErrorKind::Parse, config_path + ": expected an object");
        apply_config(j, disc, ica, bootstrap, alpha);
      }
      m.seed = resolve_seed(ica.seed);
      const auto bytes = io::read_file(data_path);
      m.input(data_path, bytes);
      auto data = io::parse_samples_csv(bytes);
      data.iid = !shuffle_holdout;

      DiscoveryConfig dc;
      dc.ica = ica_config(ica, m.seed.value);
      dc.bootstrap.reps = bootstrap;
      dc.bootstrap.match = match == "greedy" ? MatchMethod::Greedy : MatchMethod::Optimal;
      dc.alpha = alpha;
      dc.stderr_mode = stderr_mode == "mean" ? StderrMode::Mean : StderrMode::Bootstrap;
      dc.enumerate = enumerate;
      dc.break_cycles = break_cycles;
      m.config = Json{{"ica", ica_json(dc.ica)},          {"bootstrap", bootstrap},       {"alpha", alpha},
                      {"stderr", stderr_mode},            {"match", match},               {"enumerate", enumerate},
                      {"break_cycles", break_cycles},     {"shuffle_holdout", shuffle_holdout}};

      const auto r = discover(data, dc);
      Outputs o(disc_out);
      o.prepare();
      o.write("mixing.json", io::dump(io::mixing_json(r.estimate, data.names)));
      o.write("support.json", io::dump(io::to_json(r.support)));
      o.write("verdicts.json", io::dump(io::to_json(r.verdicts, data.names)));
      o.write("effects.json", io::dump(io::effects_json(r, data.names)));
      finish(o, m);
      for (const auto& w : r.warnings) err << "warning: " << w << "\n";
      return 0;
    }

    if (ana->parsed()) {
      const auto sem = io::sem_from_json(io::read_json(ana_graph));
      const auto red = minimal_reduction(sem);
      const auto text = io::dump(io::report_json(sem, red.report, red));
      if (ana_out.empty()) out << text;
      else io::write_file(ana_out, text);
      return 0;
    }

    if (bench->parsed()) {
      Manifest m{"benchmark", resolve_seed(bench_seed)};
      BenchmarkConfig bc;
      bc.p = bench_p;
      bc.sample_sizes = samples;
      bc.num_graphs = graphs;
      bc.edge_prob = bench_edge;
      bc.weight = bench_weight;
      bc.latent_fraction = bench_latent;
      bc.seed = m.seed.value;
      bc.discovery.bootstrap.reps = bench_boot;
      bc.discovery.alpha = bench_alpha;
      m.config = Json{{"p", bench_p},          {"samples", samples},         {"graphs", graphs},
                      {"edge_prob", bench_edge}, {"weight", bench_weight},    {"latent_frac", bench_latent},
                      {"bootstrap", bench_boot}, {"alpha", bench_alpha},      {"ica", ica_json(bc.discovery.ica)}};
      const auto csv = io::benchmark_csv(run_benchmark(bc));
      if (bench_out.empty()) {
        out << csv;
      } else {
        Outputs o(bench_out);
        o.prepare();
        o.write("benchmark.csv", csv);
        finish(o, m);
      }
      return 0;
    }

    if (ret->parsed()) {
      const auto bytes = io::read_file(prices_path);
      const auto csv = io::returns_csv(returns_from_prices(io::parse_prices_csv(bytes)));
      if (ret_out.empty()) {
        out << csv;
      } else {
        Manifest m{"returns", {}};
        m.input(prices_path, bytes);
        Outputs o(ret_out);
        o.prepare();
        o.write("returns.csv", csv);
        finish(o, m);
      }
      return 0;
    }
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    const auto hint = remedy(e.kind());
    if (!hint.empty()) err << "hint: " << hint << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace lvlingam
