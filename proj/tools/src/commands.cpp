#include "lpcn_cli/commands.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "lpcn/accounting.hpp"
#include "lpcn/data_structuring.hpp"
#include "lpcn/islandization.hpp"
#include "lpcn/octree.hpp"
#include "lpcn/scheduling.hpp"
#include "lpcn/synth.hpp"
#include "lpcn_cli/point_file.hpp"

namespace lpcn::cli {

using Json = nlohmann::ordered_json;

ModelSpec default_model_spec(std::size_t feat_dim, std::uint64_t seed) {
  ModelSpec spec;
  spec.seed = seed;
  spec.layers = {{3 + feat_dim, 64, Activation::kRelu},
                 {64, 64, Activation::kRelu},
                 {64, 128, Activation::kRelu}};
  return spec;
}

void parse_neighbor(const std::string& text, RunConfig& config) {
  if (text == "knn") {
    config.neighbor_method = NeighborMethod::kKnn;
    return;
  }
  if (text.rfind("bq:", 0) == 0) {
    const std::string r = text.substr(3);
    std::size_t pos = 0;
    double radius = 0.0;
    try {
      radius = std::stod(r, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != r.size() || !(radius > 0.0)) {
      throw Error("bad ball query radius in '" + text + "'");
    }
    config.neighbor_method = NeighborMethod::kBallQuery;
    config.ball_radius = radius;
    return;
  }
  throw Error("unknown neighbor method '" + text + "' (expected knn or bq:<radius>)");
}

std::size_t parse_cache_entries(const std::string& text, std::size_t subset_size) {
  if (text == "unbounded" || text == "inf") return kUnboundedCache;
  std::string digits = text;
  std::size_t multiplier = 1;
  if (!digits.empty() && (digits.back() == 'K' || digits.back() == 'k')) {
    multiplier = subset_size;
    digits.pop_back();
    if (digits.empty()) digits = "1";
  }
  std::size_t pos = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(digits, &pos);
  } catch (const std::exception&) {
    pos = 0;
  }
  if (pos == 0 || pos != digits.size() || digits[0] == '-') {
    throw Error("bad cache capacity '" + text + "' (expected a count, <m>K, or unbounded)");
  }
  return static_cast<std::size_t>(v) * multiplier;
}

namespace {

struct Options {
  std::string input;
  std::string synth;
  std::size_t feat_dim = 3;
  std::size_t k = 32;
  std::size_t centrals = 0;  // 0: half the cloud, rounded up
  std::size_t island_size = 32;
  std::string cache_entries = "2K";
  std::string neighbor = "knn";
  int depth = 6;
  std::uint64_t seed = 1;
  std::string mode = "compensated";
  std::string model_path;
  std::string out_path;
  std::string sweep;
  std::string dump_subsets;
  bool parallel_islands = false;
};

void add_cloud_options(CLI::App& sub, Options& o) {
  sub.add_option("--input", o.input, "Point file (# dims F header, then x y z f...)");
  sub.add_option("--synth", o.synth,
                 "Synthetic cloud: uniform_cube:N | sphere_surface:N | gaussian_clusters:N:K:SIGMA | grid:NX:NY:NZ");
  sub.add_option("--feat-dim", o.feat_dim, "Feature width for --synth clouds")->capture_default_str();
  sub.add_option("--seed", o.seed, "Seed for every random draw")->capture_default_str();
  sub.add_option("--out", o.out_path, "Write the report to this file instead of stdout");
}

void add_config_options(CLI::App& sub, Options& o) {
  sub.add_option("--k", o.k, "Subset size K")->capture_default_str();
  sub.add_option("--centrals", o.centrals, "Number of central points M (default: ceil(n/2))");
  sub.add_option("--island-size", o.island_size, "Target subsets per island S")->capture_default_str();
  sub.add_option("--cache-entries", o.cache_entries, "Hub cache capacity: N, <m>K, or unbounded")
      ->capture_default_str();
  sub.add_option("--neighbor", o.neighbor, "knn | bq:<radius>")->capture_default_str();
  sub.add_option("--depth", o.depth, "Octree depth")->capture_default_str();
}

void add_run_options(CLI::App& sub, Options& o) {
  sub.add_option("--mode", o.mode, "baseline | exact | compensated")->capture_default_str();
  sub.add_option("--model", o.model_path, "Model spec file (seed + layer lines)");
  sub.add_flag("--parallel-islands", o.parallel_islands, "Schedule islands on concurrent workers");
}

std::shared_ptr<const PointCloud> load_cloud(const Options& o) {
  if (o.input.empty() == o.synth.empty()) throw Error("exactly one of --input or --synth is required");
  if (!o.input.empty()) return std::make_shared<const PointCloud>(load_point_file(o.input));
  return std::make_shared<const PointCloud>(generate(parse_cloud_spec(o.synth, o.feat_dim, o.seed)));
}

RunConfig make_config(const Options& o, std::size_t n) {
  RunConfig c;
  c.subset_size = o.k;
  c.num_centrals = o.centrals == 0 ? (n + 1) / 2 : o.centrals;
  c.island_size = o.island_size;
  c.hub_cache_entries = parse_cache_entries(o.cache_entries, o.k);
  parse_neighbor(o.neighbor, c);
  c.octree_depth = o.depth;
  c.seed = o.seed;
  c.reuse_mode = parse_reuse_mode(o.mode);
  c.parallel_islands = o.parallel_islands;
  c.validate(n);
  return c;
}

MlpModel load_model(const Options& o, const PointCloud& cloud) {
  if (o.model_path.empty()) return MlpModel::random(default_model_spec(cloud.feat_dim(), o.seed));
  std::ifstream in(o.model_path);
  if (!in) throw Error("cannot open model spec '" + o.model_path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return MlpModel::random(parse_model_spec(text.str()));
}

std::string format_checksum(const std::vector<SubsetResult>& results) {
  double sum = 0.0;
  for (const auto& r : results) {
    for (double v : r.pooled) sum += v;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.9e", sum);
  return buf;
}

Json counters_to_json(const WorkloadCounters& c) {
  Json j;
  j["feature_fetches"] = c.feature_fetches;
  j["weight_fetches"] = c.weight_fetches;
  j["mac_count"] = c.mac_count;
  j["cache_hits"] = c.cache_hits;
  j["cache_misses"] = c.cache_misses;
  j["cache_bypasses"] = c.cache_bypasses;
  j["octree_search_steps"] = c.octree_search_steps;
  j["compensation_forwards"] = c.compensation_forwards;
  return j;
}

Json savings_to_json(const SavingsReport& s) {
  Json j;
  j["feature_fetch_reduction"] = s.feature_fetch_reduction;
  j["overall_memory_reduction"] = s.overall_memory_reduction;
  j["computation_reduction"] = s.computation_reduction;
  return j;
}

Json error_to_json(const ReuseErrorReport& e) {
  Json j;
  j["max_rel_error"] = e.max_rel_error;
  j["mean_rel_error"] = e.mean_rel_error;
  j["reused_argmax_fraction"] = e.reused_argmax_fraction;
  return j;
}

std::string neighbor_text(const RunConfig& c) {
  if (c.neighbor_method == NeighborMethod::kKnn) return "knn";
  std::ostringstream os;
  os << "bq:" << c.ball_radius;
  return os.str();
}

Json config_to_json(const RunConfig& c) {
  Json j;
  j["k"] = c.subset_size;
  j["centrals"] = c.num_centrals;
  j["island_size"] = c.island_size;
  if (c.hub_cache_entries == kUnboundedCache) j["cache_entries"] = "unbounded";
  else j["cache_entries"] = c.hub_cache_entries;
  j["neighbor"] = neighbor_text(c);
  j["depth"] = c.octree_depth;
  j["seed"] = c.seed;
  return j;
}

Json cloud_to_json(const PointCloud& cloud) {
  Json j;
  j["n"] = cloud.size();
  j["feat_dim"] = cloud.feat_dim();
  return j;
}

Json model_to_json(const MlpModel& m) {
  Json j;
  Json layers = Json::array();
  for (const auto& l : m.layers()) {
    layers.push_back(Json{{"in", l.in_dim}, {"out", l.out_dim},
                          {"activation", l.activation == Activation::kRelu ? "relu" : "none"}});
  }
  j["layers"] = std::move(layers);
  j["macs_per_point"] = m.macs_per_point();
  return j;
}

void emit(const Options& o, std::ostream& out, const std::string& text) {
  if (o.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(o.out_path, std::ios::binary);
  if (!f) throw Error("cannot write report to '" + o.out_path + "'");
  f << text;
}

std::string cmd_synth(const Options& o) {
  const auto cloud = load_cloud(o);
  std::ostringstream os;
  write_point_file(os, *cloud);
  return os.str();
}

std::string cmd_structure(const Options& o) {
  const auto cloud = load_cloud(o);
  const RunConfig config = make_config(o, cloud->size());
  const Octree input = Octree::build(*cloud, compute_bounds(*cloud), config.octree_depth);
  const StructuredCloud s = structure(cloud, input, config);

  std::size_t min_real = config.subset_size, max_real = 0, padded = 0, total_real = 0;
  Json subsets = Json::array();
  for (const auto& sub : s.subsets) {
    const std::size_t real = sub.distinct_count();
    min_real = std::min(min_real, real);
    max_real = std::max(max_real, real);
    total_real += real;
    if (real < sub.size()) ++padded;
    subsets.push_back(Json{{"central", sub.central_id}, {"members", sub.member_ids}});
  }
  if (!o.dump_subsets.empty()) {
    std::ofstream f(o.dump_subsets);
    if (!f) throw Error("cannot write subset dump '" + o.dump_subsets + "'");
    for (const auto& sub : s.subsets) {
      f << sub.central_id << ':';
      for (PointId id : sub.member_ids) f << ' ' << id;
      f << '\n';
    }
  }

  Json j;
  j["command"] = "structure";
  j["cloud"] = cloud_to_json(*cloud);
  j["config"] = config_to_json(config);
  j["m"] = s.subsets.size();
  j["k"] = config.subset_size;
  j["real_members"] = Json{{"min", min_real},
                           {"max", max_real},
                           {"mean", static_cast<double>(total_real) / static_cast<double>(s.subsets.size())}};
  j["padded_subsets"] = padded;
  j["sampled_octree_nodes"] = s.sampled_octree.node_count();
  j["subsets"] = std::move(subsets);
  return j.dump(2) + "\n";
}

std::string cmd_islandize(const Options& o) {
  const auto cloud = load_cloud(o);
  const RunConfig config = make_config(o, cloud->size());
  const Octree input = Octree::build(*cloud, compute_bounds(*cloud), config.octree_depth);
  const StructuredCloud s = structure(cloud, input, config);
  return dump_partition(islandize(s, config));
}

std::string cmd_run(const Options& o) {
  const auto cloud = load_cloud(o);
  const RunConfig config = make_config(o, cloud->size());
  const MlpModel model = load_model(o, *cloud);

  const PipelineResult run = run_pipeline(cloud, config, model);
  WorkloadCounters baseline = run.counters;
  if (config.reuse_mode != ReuseMode::kBaseline) {
    RunConfig base_config = config;
    base_config.reuse_mode = ReuseMode::kBaseline;
    baseline = run_pipeline(cloud, base_config, model).counters;
  }

  Json j;
  j["command"] = "run";
  j["mode"] = to_string(config.reuse_mode);
  j["cloud"] = cloud_to_json(*cloud);
  j["config"] = config_to_json(config);
  j["model"] = model_to_json(model);
  j["islands"] = run.partition.islands.size();
  j["counters"] = counters_to_json(run.counters);
  j["baseline_counters"] = counters_to_json(baseline);
  j["savings"] = savings_to_json(savings_report(baseline, run.counters, model));
  j["results"] = Json{{"subsets", run.results.size()}, {"pooled_checksum", format_checksum(run.results)}};
  return j.dump(2) + "\n";
}

std::string cmd_analyze_overlap(const Options& o) {
  const auto cloud = load_cloud(o);
  const RunConfig config = make_config(o, cloud->size());
  const Octree input = Octree::build(*cloud, compute_bounds(*cloud), config.octree_depth);
  return histogram_csv(overlap_histogram(structure(cloud, input, config)));
}

Json compare_mode(const std::shared_ptr<const PointCloud>& cloud, RunConfig config, ReuseMode mode,
                  const MlpModel& model, const PipelineResult& base) {
  config.reuse_mode = mode;
  const PipelineResult run = run_pipeline(cloud, config, model);
  Json j;
  j["counters"] = counters_to_json(run.counters);
  j["savings"] = savings_to_json(savings_report(base.counters, run.counters, model));
  j["reuse_error"] = error_to_json(reuse_error_report(base.results, run.results));
  j["pooled_checksum"] = format_checksum(run.results);
  return j;
}

std::string cmd_compare(const Options& o) {
  const auto cloud = load_cloud(o);
  const RunConfig config = make_config(o, cloud->size());
  const MlpModel model = load_model(o, *cloud);
  RunConfig base_config = config;
  base_config.reuse_mode = ReuseMode::kBaseline;
  const PipelineResult base = run_pipeline(cloud, base_config, model);

  if (o.sweep.empty()) {
    Json j;
    j["command"] = "compare";
    j["cloud"] = cloud_to_json(*cloud);
    j["config"] = config_to_json(config);
    j["model"] = model_to_json(model);
    j["baseline"] = Json{{"counters", counters_to_json(base.counters)},
                         {"pooled_checksum", format_checksum(base.results)}};
    j["exact"] = compare_mode(cloud, config, ReuseMode::kExactReuse, model, base);
    j["compensated"] = compare_mode(cloud, config, ReuseMode::kCompensatedReuse, model, base);
    return j.dump(2) + "\n";
  }

  const auto eq = o.sweep.find('=');
  if (eq == std::string::npos) throw Error("--sweep expects <param>=<v1,v2,...>");
  const std::string param = o.sweep.substr(0, eq);
  std::vector<std::string> values;
  {
    std::istringstream in(o.sweep.substr(eq + 1));
    for (std::string v; std::getline(in, v, ',');) values.push_back(v);
  }
  if (values.empty()) throw Error("--sweep needs at least one value");
  const ReuseMode mode =
      config.reuse_mode == ReuseMode::kBaseline ? ReuseMode::kCompensatedReuse : config.reuse_mode;

  std::ostringstream os;
  os << "param,value,mode,islands,feature_fetch_reduction,overall_memory_reduction,computation_reduction,"
        "cache_hits,cache_misses,cache_bypasses,max_rel_error,mean_rel_error\n";
  for (const auto& v : values) {
    RunConfig c = config;
    c.reuse_mode = mode;
    if (param == "island_size" || param == "island-size" || param == "S") {
      c.island_size = parse_cache_entries(v, 1);  // plain count
      if (c.island_size == 0 || c.island_size == kUnboundedCache) throw Error("bad island size '" + v + "'");
    } else if (param == "cache_entries" || param == "cache-entries" || param == "C") {
      c.hub_cache_entries = parse_cache_entries(v, c.subset_size);
    } else {
      throw Error("unknown sweep parameter '" + param + "' (expected island_size or cache_entries)");
    }
    c.validate(cloud->size());
    const PipelineResult run = run_pipeline(cloud, c, model);
    const SavingsReport s = savings_report(base.counters, run.counters, model);
    const ReuseErrorReport e = reuse_error_report(base.results, run.results);
    char buf[512];
    std::snprintf(buf, sizeof buf, "%s,%s,%s,%zu,%.6f,%.6f,%.6f,%llu,%llu,%llu,%.6e,%.6e\n", param.c_str(),
                  v.c_str(), to_string(mode), run.partition.islands.size(), s.feature_fetch_reduction,
                  s.overall_memory_reduction, s.computation_reduction,
                  static_cast<unsigned long long>(run.counters.cache_hits),
                  static_cast<unsigned long long>(run.counters.cache_misses),
                  static_cast<unsigned long long>(run.counters.cache_bypasses), e.max_rel_error, e.mean_rel_error);
    os << buf;
  }
  return os.str();
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"lpcn: octree islandization and hub-based scheduling for point-cloud networks", "lpcn"};
  app.require_subcommand(1);
  Options o;

  auto* synth = app.add_subcommand("synth", "Write a synthetic cloud as a point file");
  add_cloud_options(*synth, o);

  auto* structure_cmd = app.add_subcommand("structure", "Sample centrals and gather subsets");
  add_cloud_options(*structure_cmd, o);
  add_config_options(*structure_cmd, o);
  structure_cmd->add_option("--dump-subsets", o.dump_subsets, "Write one 'central: members' line per subset");

  auto* islandize_cmd = app.add_subcommand("islandize", "Print the island partition");
  add_cloud_options(*islandize_cmd, o);
  add_config_options(*islandize_cmd, o);

  auto* run_cmd = app.add_subcommand("run", "Run the pipeline and report workload counters");
  add_cloud_options(*run_cmd, o);
  add_config_options(*run_cmd, o);
  add_run_options(*run_cmd, o);

  auto* overlap_cmd = app.add_subcommand("analyze-overlap", "Overlap-vs-distance histogram as CSV");
  add_cloud_options(*overlap_cmd, o);
  add_config_options(*overlap_cmd, o);

  auto* compare_cmd = app.add_subcommand("compare", "Compare reuse modes against the baseline");
  add_cloud_options(*compare_cmd, o);
  add_config_options(*compare_cmd, o);
  add_run_options(*compare_cmd, o);
  compare_cmd->add_option("--sweep", o.sweep, "island_size=<v,...> or cache_entries=<v,...> (CSV output)");

  // CLI11 wants argv order reversed when given a vector.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }

  try {
    std::string report;
    if (synth->parsed()) report = cmd_synth(o);
    else if (structure_cmd->parsed()) report = cmd_structure(o);
    else if (islandize_cmd->parsed()) report = cmd_islandize(o);
    else if (run_cmd->parsed()) report = cmd_run(o);
    else if (overlap_cmd->parsed()) report = cmd_analyze_overlap(o);
    else report = cmd_compare(o);
    emit(o, out, report);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

}  // namespace lpcn::cli
