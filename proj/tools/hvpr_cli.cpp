// hvpr: batch command-line front end. One subcommand per pipeline stage;
// every artifact carries the run manifest that produced it (inline for JSON
// documents, JSONL and text tables, as a .manifest.json sidecar otherwise).
//
// Exit codes: 0 success, 1 usage error, 2 data error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hvpr/binary_io.hpp"
#include "hvpr/error.hpp"
#include "hvpr/evaluation.hpp"
#include "hvpr/hdc.hpp"
#include "hvpr/lpg.hpp"
#include "hvpr/parallel.hpp"
#include "hvpr/postproc.hpp"
#include "hvpr/retrieval.hpp"
#include "hvpr/store_io.hpp"
#include "hvpr/synthetic.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace hvpr {

struct PostprocessParams {
  int patch_size = kDefaultPatchSize;
  std::size_t max_features = 200;  // 0: keep every keypoint
  std::size_t d_loc = 1024;        // PCA output length when fitting
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(PostprocessParams, patch_size, max_features, d_loc)

struct AggregateParams {
  std::uint64_t hdc_seed = 0;
  std::size_t hdc_dim = kDefaultHdcDim;
  std::size_t n_x = kDefaultAnchorsX;
  std::size_t n_y = kDefaultAnchorsY;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(AggregateParams, hdc_seed, hdc_dim, n_x, n_y)

struct GraphParams {
  double h = kDefaultWindow;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(GraphParams, h)

struct ScorerParams {
  double sigma = kDefaultSigma;
  double h = kDefaultWindow;
  bool lpg_exact = false;
  int ransac_iterations = RansacParams{}.max_iterations;
  double ransac_threshold = RansacParams{}.inlier_threshold;
  double ransac_confidence = RansacParams{}.confidence;
  std::uint64_t ransac_seed = 0;
};

struct RetrieveParams : ScorerParams {
  std::string reranker = "lpg";
  std::size_t topk = kDefaultTopK;  // 0: exhaustive
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(RetrieveParams, reranker, topk, sigma, h, lpg_exact,
                                                ransac_iterations, ransac_threshold, ransac_confidence,
                                                ransac_seed)

struct EvaluateParams {
  std::vector<std::size_t> ks{1, 5, 10, 100};
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(EvaluateParams, ks)

struct SweepParams {
  std::vector<double> sigmas{0.5, 1.0, 2.0, 4.0};
  std::vector<double> hs{20.0, 40.0, 60.0, 80.0};
  bool lpg_exact = false;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(SweepParams, sigmas, hs, lpg_exact)

struct BenchParams : ScorerParams {
  std::vector<std::string> rerankers{"mm", "lpg", "ransac"};
  std::size_t topk = kDefaultTopK;
  std::size_t repetitions = 3;
};
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE_WITH_DEFAULT(BenchParams, rerankers, topk, repetitions, sigma, h, lpg_exact,
                                                ransac_iterations, ransac_threshold, ransac_confidence,
                                                ransac_seed)

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;
constexpr const char* kVersion = "0.1.0";

unsigned hardware_threads() { return std::max(1u, std::thread::hardware_concurrency()); }

// Keys of `config` replace the matching parameters; unknown keys are a usage error.
template <typename Params>
void apply_config(Params& params, const std::string& config_path) {
  if (config_path.empty()) return;
  json config;
  try {
    std::ifstream in(config_path);
    if (!in) throw Error(ErrorCode::kInvalidArgument, "cannot open config file " + config_path);
    config = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, "config file " + config_path + ": " + e.what());
  }
  if (!config.is_object()) throw Error(ErrorCode::kInvalidArgument, "config file must hold a JSON object");
  json current = params;
  for (const auto& [key, value] : config.items()) {
    if (!current.contains(key)) throw Error(ErrorCode::kInvalidArgument, "unknown config key '" + key + "'");
    current[key] = value;
  }
  try {
    params = current.get<Params>();
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidArgument, std::string("config value has the wrong type: ") + e.what());
  }
}

json make_manifest(const std::string& subcommand, json inputs, json parameters, json outputs, unsigned threads) {
  return json{{"tool", "hvpr"},          {"version", kVersion},         {"subcommand", subcommand},
              {"inputs", std::move(inputs)}, {"parameters", std::move(parameters)},
              {"outputs", std::move(outputs)}, {"threads", threads}};
}

void write_json(const fs::path& path, const json& doc) { write_file_atomic(path, doc.dump(2) + "\n"); }

void write_sidecar(const fs::path& path, const json& manifest) {
  write_json(fs::path(path.string() + ".manifest.json"), manifest);
}

std::string comment_line(const json& manifest) { return "# manifest: " + manifest.dump() + "\n"; }

RerankerChoice make_choice(const std::string& name, const ScorerParams& p) {
  if (name == "mm") return MmReranker{};
  if (name == "lpg") return LpgReranker{p.sigma, p.h, p.lpg_exact};
  if (name == "ransac") {
    RansacParams rp;
    rp.max_iterations = p.ransac_iterations;
    rp.inlier_threshold = p.ransac_threshold;
    rp.confidence = p.ransac_confidence;
    rp.validate();
    return RansacReranker{rp, p.ransac_seed};
  }
  throw Error(ErrorCode::kInvalidArgument, "unknown reranker '" + name + "' (expected mm, lpg or ransac)");
}

void require_holistic(std::span<const ImageFeatureSet> sets, const std::string& what) {
  for (const auto& s : sets) {
    if (!s.holistic) {
      throw Error(ErrorCode::kMalformed,
                  what + " has no holistic descriptors; run `hvpr aggregate` first or pass --topk 0");
    }
  }
}

const char* stage_name(Stage s) { return s == Stage::kHolistic ? "holistic" : "reranked"; }

std::string result_line(const RetrievalResult& r) {
  json ranking = json::array();
  for (const auto& e : r.ranking) {
    ranking.push_back({{"db_id", e.db_id}, {"index", e.db_index}, {"score", e.score}, {"stage", stage_name(e.stage)}});
  }
  return json{{"query_id", r.query_id}, {"ranking", std::move(ranking)}}.dump() + "\n";
}

std::vector<RetrievalResult> read_results(const fs::path& path) {
  const auto bytes = read_file(path);
  std::istringstream in(std::string(bytes.begin(), bytes.end()));
  std::vector<RetrievalResult> results;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const json j = json::parse(line);
      if (j.contains("manifest")) continue;
      RetrievalResult r;
      r.query_id = j.at("query_id").get<std::string>();
      for (const auto& e : j.at("ranking")) {
        const std::string stage = e.at("stage").get<std::string>();
        if (stage != "holistic" && stage != "reranked") throw Error(ErrorCode::kMalformed, "unknown stage " + stage);
        r.ranking.push_back({e.at("index").get<std::size_t>(), e.at("db_id").get<std::string>(),
                             e.at("score").get<double>(), stage == "holistic" ? Stage::kHolistic : Stage::kReranked});
      }
      results.push_back(std::move(r));
    } catch (const json::exception& e) {
      throw Error(ErrorCode::kMalformed, path.string() + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return results;
}

FeatureDatabase load_database(const fs::path& db_path) { return FeatureDatabase(read_store(db_path)); }

// ---------------------------------------------------------------------------

int run_gen(const WorldConfig& cfg, const fs::path& out_dir, unsigned threads) {
  const World world = gen_world(cfg, threads);
  fs::create_directories(out_dir);
  const fs::path db = out_dir / "db.vprf";
  const fs::path queries = out_dir / "queries.vprf";
  const fs::path gt = out_dir / "gt.json";
  const json manifest = make_manifest("gen", json::object(), json(cfg),
                                      {{"db", db.string()}, {"queries", queries.string()}, {"gt", gt.string()}},
                                      threads);
  write_store(world.db, db);
  write_store(world.queries, queries);
  write_ground_truth(world.gt, gt);
  for (const auto& p : {db, queries, gt}) write_sidecar(p, manifest);
  std::cerr << "gen: " << world.db.size() << " database and " << world.queries.size() << " query images\n";
  return kExitOk;
}

int run_postprocess(const PostprocessParams& p, const fs::path& input, const std::string& pca_in,
                    const std::string& pca_out, const fs::path& out, unsigned threads) {
  if (pca_in.empty() == pca_out.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "give exactly one of --pca (existing model) or --fit-pca (output)");
  }
  const auto maps = read_dense_maps(input);
  const std::optional<std::size_t> max_features =
      p.max_features == 0 ? std::nullopt : std::optional<std::size_t>(p.max_features);
  const PcaModel model =
      pca_in.empty() ? pca_fit(collect_patch_samples(maps, p.patch_size, max_features), p.d_loc) : read_pca_model(pca_in);
  std::vector<ImageFeatureSet> sets(maps.size());
  parallel_for(maps.size(), threads,
               [&](std::size_t i) { sets[i] = build_feature_set(maps[i], model, p.patch_size, max_features); });

  json inputs{{"dense", input.string()}};
  json outputs{{"store", out.string()}};
  if (!pca_in.empty()) inputs["pca"] = pca_in;
  if (!pca_out.empty()) outputs["pca"] = pca_out;
  const json manifest = make_manifest("postprocess", inputs, json(p), outputs, threads);
  if (!pca_out.empty()) {
    write_pca_model(model, pca_out);
    write_sidecar(pca_out, manifest);
  }
  write_store(sets, out);
  write_sidecar(out, manifest);
  std::size_t features = 0;
  for (const auto& s : sets) features += s.size();
  std::cerr << "postprocess: " << sets.size() << " images, " << features << " features\n";
  return kExitOk;
}

int run_aggregate(const AggregateParams& p, const fs::path& input, const fs::path& out, unsigned threads) {
  auto sets = read_store(input);
  const std::size_t d_loc = decode_store_header(read_file(input)).d_loc;
  std::size_t empty = 0;
  if (!sets.empty()) {
    const HdcCodebook cb = hdc_init(p.hdc_seed, p.hdc_dim, p.n_x, p.n_y, d_loc);
    std::vector<char> was_empty(sets.size(), 0);
    parallel_for(sets.size(), threads, [&](std::size_t i) {
      const HolisticDescriptor h = hdc_aggregate(cb, sets[i]);
      sets[i].holistic = std::vector<float>(h.values.begin(), h.values.end());
      was_empty[i] = h.empty;
    });
    for (char e : was_empty) empty += e != 0;
  }
  const json manifest = make_manifest("aggregate", {{"store", input.string()}}, json(p), {{"store", out.string()}},
                                      threads);
  write_store(sets, out);
  write_sidecar(out, manifest);
  if (empty > 0) std::cerr << "aggregate: warning: " << empty << " empty feature sets got zero descriptors\n";
  return kExitOk;
}

int run_graphs(const GraphParams& p, const fs::path& input, const fs::path& out, unsigned threads) {
  FeatureDatabase db = load_database(input);
  db.build_graphs(p.h, threads);
  const json manifest = make_manifest("graphs", {{"store", input.string()}}, json(p), {{"graphs", out.string()}},
                                      threads);
  write_graph_cache(db.graphs(), out);
  write_sidecar(out, manifest);
  return kExitOk;
}

int run_retrieve(const RetrieveParams& p, const fs::path& db_path, const fs::path& query_path,
                 const std::string& graphs_path, const fs::path& out, unsigned threads) {
  const RerankerChoice choice = make_choice(p.reranker, p);
  FeatureDatabase db = load_database(db_path);
  const auto queries = read_store(query_path);
  if (p.topk > 0) {
    require_holistic(db.images(), "database store");
    require_holistic(queries, "query store");
  }
  if (std::holds_alternative<LpgReranker>(choice)) {
    if (graphs_path.empty()) {
      db.build_graphs(p.h, threads);
    } else {
      auto graphs = read_graph_cache(graphs_path);
      db.set_graphs(std::move(graphs));
    }
  }
  const PairScorer scorer(db, choice);
  QueryOptions options;
  options.k_top = p.topk == 0 ? std::nullopt : std::optional<std::size_t>(p.topk);
  options.threads = threads;
  const BatchResult batch = run_queries(queries, scorer, options);

  json inputs{{"db", db_path.string()}, {"queries", query_path.string()}};
  if (!graphs_path.empty()) inputs["graphs"] = graphs_path;
  const json manifest = make_manifest("retrieve", inputs, json(p), {{"results", out.string()}}, threads);
  std::string text = json{{"manifest", manifest}}.dump() + "\n";
  for (const auto& r : batch.results) text += result_line(r);
  write_file_atomic(out, text);
  return kExitOk;
}

int run_evaluate(const EvaluateParams& p, const fs::path& results_path, const fs::path& gt_path,
                 const fs::path& out, const std::string& curve_path, const std::string& csv_path) {
  const auto results = read_results(results_path);
  const GroundTruth gt = read_ground_truth(gt_path);
  const RecallReport recall = recall_at_k(results, gt, p.ks);
  const PrCurve curve = pr_auc(results, gt);

  json outputs{{"metrics", out.string()}};
  if (!curve_path.empty()) outputs["pr_curve"] = curve_path;
  if (!csv_path.empty()) outputs["recall_csv"] = csv_path;
  const json manifest =
      make_manifest("evaluate", {{"results", results_path.string()}, {"gt", gt_path.string()}}, json(p), outputs, 1);
  json doc = recall_to_json(recall);
  doc["auc"] = curve.auc;
  doc["pairs"] = curve.points.size();
  doc["manifest"] = manifest;
  if (!curve_path.empty()) write_file_atomic(curve_path, comment_line(manifest) + pr_curve_to_dat(curve));
  if (!csv_path.empty()) write_file_atomic(csv_path, comment_line(manifest) + recall_to_csv(recall));
  write_json(out, doc);
  if (recall.skipped > 0) std::cerr << "evaluate: warning: " << recall.skipped << " queries missing from gt\n";
  std::cout << "AUC " << curve.auc;
  for (const auto& v : recall.values) std::cout << "  R@" << v.k << " " << v.recall;
  std::cout << "\n";
  return kExitOk;
}

int run_sweep(const SweepParams& p, const fs::path& db_path, const fs::path& query_path, const fs::path& gt_path,
              const fs::path& out, const std::string& csv_path, unsigned threads) {
  FeatureDatabase db = load_database(db_path);
  const auto queries = read_store(query_path);
  const GroundTruth gt = read_ground_truth(gt_path);
  const SweepGrid grid = sweep_lpg(db, queries, gt, p.sigmas, p.hs, p.lpg_exact, threads);

  json outputs{{"grid", out.string()}};
  if (!csv_path.empty()) outputs["csv"] = csv_path;
  const json manifest = make_manifest(
      "sweep", {{"db", db_path.string()}, {"queries", query_path.string()}, {"gt", gt_path.string()}}, json(p),
      outputs, threads);
  json doc = sweep_to_json(grid);
  doc["manifest"] = manifest;
  if (!csv_path.empty()) write_file_atomic(csv_path, comment_line(manifest) + sweep_to_csv(grid));
  write_json(out, doc);
  std::cout << sweep_to_csv(grid);
  return kExitOk;
}

int run_bench(const BenchParams& p, const fs::path& db_path, const fs::path& query_path, const fs::path& out,
              const std::string& csv_path) {
  std::vector<RerankerChoice> choices;
  bool need_graphs = false;
  for (const auto& name : p.rerankers) {
    choices.push_back(make_choice(name, p));
    need_graphs = need_graphs || std::holds_alternative<LpgReranker>(choices.back());
  }
  if (choices.empty()) throw Error(ErrorCode::kInvalidArgument, "bench needs at least one reranker");
  FeatureDatabase db = load_database(db_path);
  const auto queries = read_store(query_path);
  if (p.topk > 0) {
    require_holistic(db.images(), "database store");
    require_holistic(queries, "query store");
  }
  if (need_graphs) db.build_graphs(p.h, hardware_threads());  // offline, not timed
  const auto reports = bench_compare(db, queries, p.topk == 0 ? std::nullopt : std::optional<std::size_t>(p.topk),
                                     choices, p.repetitions);

  json outputs{{"timing", out.string()}};
  if (!csv_path.empty()) outputs["csv"] = csv_path;
  const json manifest =
      make_manifest("bench", {{"db", db_path.string()}, {"queries", query_path.string()}}, json(p), outputs, 1);
  json doc{{"reports", timing_to_json(reports)}, {"manifest", manifest}};
  if (!csv_path.empty()) write_file_atomic(csv_path, comment_line(manifest) + timing_to_csv(reports));
  write_json(out, doc);
  std::cout << timing_to_csv(reports);
  return kExitOk;
}

}  // namespace
}  // namespace hvpr

int main(int argc, char** argv) {
  using namespace hvpr;
  CLI::App app{"hvpr: hierarchical visual place recognition with local-feature re-ranking"};
  app.set_help_flag("--help", "print this help and exit");
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string("hvpr ") + kVersion);

  std::string config;
  unsigned threads = 0;  // 0: subcommand default
  const auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON object whose keys override the parameter flags");
    sub->add_option("--threads", threads, "worker threads (default: all cores)");
  };
  const auto add_scorer = [](CLI::App* sub, ScorerParams& s) {
    sub->add_option("--sigma", s.sigma, "LPG Gaussian width")->capture_default_str();
    sub->add_option("--h", s.h, "LPG window size")->capture_default_str();
    sub->add_flag("--lpg-exact", s.lpg_exact, "evaluate the Gaussian exactly instead of via the look-up table");
    sub->add_option("--ransac-iters", s.ransac_iterations, "RANSAC iteration cap")->capture_default_str();
    sub->add_option("--ransac-tau", s.ransac_threshold, "RANSAC Sampson distance threshold")->capture_default_str();
    sub->add_option("--ransac-confidence", s.ransac_confidence, "RANSAC early-exit confidence")->capture_default_str();
    sub->add_option("--ransac-seed", s.ransac_seed, "RANSAC seed")->capture_default_str();
  };

  WorldConfig world;
  std::string out_dir;
  auto* gen = app.add_subcommand("gen", "write a synthetic database, query store and ground truth");
  add_common(gen);
  gen->add_option("--seed", world.seed)->capture_default_str();
  gen->add_option("--db-size", world.db_size)->capture_default_str();
  gen->add_option("--query-size", world.query_size)->capture_default_str();
  gen->add_option("--features", world.features_per_image, "features per image")->capture_default_str();
  gen->add_option("--d-loc", world.d_loc, "descriptor length")->capture_default_str();
  gen->add_option("--noise", world.descriptor_noise, "descriptor noise level")->capture_default_str();
  gen->add_option("--jitter", world.position_jitter, "position jitter half-width")->capture_default_str();
  gen->add_option("--outliers", world.outlier_fraction, "fraction of replaced query features")->capture_default_str();
  gen->add_option("--out-dir", out_dir, "directory for db.vprf, queries.vprf and gt.json")->required();

  PostprocessParams post;
  std::string dense_in, pca_in, pca_out, store_out;
  auto* postprocess = app.add_subcommand("postprocess", "dense maps (VPRD) + PCA -> local feature store (VPRF)");
  add_common(postprocess);
  postprocess->add_option("--input", dense_in, "VPRD file")->required();
  postprocess->add_option("--pca", pca_in, "existing PCA model (VPRP)");
  postprocess->add_option("--fit-pca", pca_out, "fit a PCA model on the input and write it here");
  postprocess->add_option("--patch", post.patch_size, "odd patch window size")->capture_default_str();
  postprocess->add_option("--max-features", post.max_features, "keypoints per image, 0 = all")->capture_default_str();
  postprocess->add_option("--d-loc", post.d_loc, "PCA output length when fitting")->capture_default_str();
  postprocess->add_option("--out", store_out, "output VPRF store")->required();

  AggregateParams agg;
  std::string agg_in, agg_out;
  auto* aggregate = app.add_subcommand("aggregate", "fill the holistic slot of a store with HDC descriptors");
  add_common(aggregate);
  aggregate->add_option("--input", agg_in)->required();
  aggregate->add_option("--out", agg_out)->required();
  aggregate->add_option("--hdc-seed", agg.hdc_seed)->capture_default_str();
  aggregate->add_option("--hdc-dim", agg.hdc_dim)->capture_default_str();
  aggregate->add_option("--nx", agg.n_x)->capture_default_str();
  aggregate->add_option("--ny", agg.n_y)->capture_default_str();

  GraphParams gp;
  std::string graphs_in, graphs_out;
  auto* graphs = app.add_subcommand("graphs", "precompute star graphs of a database store (VPRG)");
  add_common(graphs);
  graphs->add_option("--input", graphs_in)->required();
  graphs->add_option("--out", graphs_out)->required();
  graphs->add_option("--h", gp.h, "window size")->capture_default_str();

  RetrieveParams rp;
  std::string r_db, r_q, r_graphs, r_out;
  auto* retrieve = app.add_subcommand("retrieve", "rank the database for every query (JSON lines)");
  add_common(retrieve);
  retrieve->add_option("--db", r_db)->required();
  retrieve->add_option("--queries", r_q)->required();
  retrieve->add_option("--graphs", r_graphs, "precomputed VPRG cache for LPG");
  retrieve->add_option("--reranker", rp.reranker, "mm, lpg or ransac")->capture_default_str();
  retrieve->add_option("--topk", rp.topk, "holistic candidates to re-rank, 0 = exhaustive")->capture_default_str();
  add_scorer(retrieve, rp);
  retrieve->add_option("--out", r_out)->required();

  EvaluateParams ep;
  std::string e_results, e_gt, e_out, e_curve, e_csv;
  auto* evaluate = app.add_subcommand("evaluate", "PR-AUC and Recall@K of a result file");
  add_common(evaluate);
  evaluate->add_option("--results", e_results)->required();
  evaluate->add_option("--gt", e_gt)->required();
  evaluate->add_option("--k", ep.ks, "Recall@K cut-offs")->delimiter(',');
  evaluate->add_option("--out", e_out, "metrics JSON")->required();
  evaluate->add_option("--pr-curve", e_curve, "gnuplot-readable PR curve");
  evaluate->add_option("--csv", e_csv, "recall table");

  SweepParams sp;
  std::string s_db, s_q, s_gt, s_out, s_csv;
  auto* sweep = app.add_subcommand("sweep", "exhaustive LPG AUC over a sigma × h grid");
  add_common(sweep);
  sweep->add_option("--db", s_db)->required();
  sweep->add_option("--queries", s_q)->required();
  sweep->add_option("--gt", s_gt)->required();
  sweep->add_option("--sigmas", sp.sigmas)->delimiter(',');
  sweep->add_option("--hs", sp.hs)->delimiter(',');
  sweep->add_flag("--lpg-exact", sp.lpg_exact);
  sweep->add_option("--out", s_out, "grid JSON")->required();
  sweep->add_option("--csv", s_csv, "grid table");

  BenchParams bp;
  std::string b_db, b_q, b_out, b_csv;
  auto* bench = app.add_subcommand("bench", "time the feature comparison of each reranker");
  add_common(bench);
  bench->add_option("--db", b_db)->required();
  bench->add_option("--queries", b_q)->required();
  bench->add_option("--rerankers", bp.rerankers)->delimiter(',');
  bench->add_option("--topk", bp.topk, "0 = exhaustive")->capture_default_str();
  bench->add_option("--repetitions", bp.repetitions)->capture_default_str();
  add_scorer(bench, bp);
  bench->add_option("--out", b_out, "timing JSON")->required();
  bench->add_option("--csv", b_csv, "timing table");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  const unsigned workers = threads == 0 ? hardware_threads() : threads;
  try {
    if (*gen) {
      apply_config(world, config);
      return run_gen(world, out_dir, workers);
    }
    if (*postprocess) {
      apply_config(post, config);
      return run_postprocess(post, dense_in, pca_in, pca_out, store_out, workers);
    }
    if (*aggregate) {
      apply_config(agg, config);
      return run_aggregate(agg, agg_in, agg_out, workers);
    }
    if (*graphs) {
      apply_config(gp, config);
      return run_graphs(gp, graphs_in, graphs_out, workers);
    }
    if (*retrieve) {
      apply_config(rp, config);
      return run_retrieve(rp, r_db, r_q, r_graphs, r_out, workers);
    }
    if (*evaluate) {
      apply_config(ep, config);
      return run_evaluate(ep, e_results, e_gt, e_out, e_curve, e_csv);
    }
    if (*sweep) {
      apply_config(sp, config);
      return run_sweep(sp, s_db, s_q, s_gt, s_out, s_csv, workers);
    }
    if (*bench) {
      apply_config(bp, config);
      return run_bench(bp, b_db, b_q, b_out, b_csv);
    }
  } catch (const Error& e) {
    std::cerr << "hvpr: " << e.what() << " [" << to_string(e.code()) << "]\n";
    return e.code() == ErrorCode::kInvalidArgument ? kExitUsage : kExitData;
  } catch (const std::exception& e) {
    std::cerr << "hvpr: error: " << e.what() << "\n";
    return kExitData;
  }
  return kExitUsage;
}
