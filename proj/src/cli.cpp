#include "coursemi/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <optional>
#include <ostream>

#include "coursemi/config.hpp"
#include "coursemi/error.hpp"
#include "coursemi/eval.hpp"
#include "coursemi/hin.hpp"
#include "coursemi/io.hpp"
#include "coursemi/metapath.hpp"
#include "coursemi/synth.hpp"
#include "coursemi/trainer.hpp"
#include "coursemi/version.hpp"

namespace coursemi::cli {

namespace fs = std::filesystem;

namespace {

struct Options {
  std::string config;
  std::vector<std::string> sets;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs;
  std::string data_dir;
  std::string out;
  std::string embeddings;
  std::string dump_adjacency;
  std::vector<std::string> noise_views;
  std::size_t jobs = 1;
  bool report_attention = false;
  bool quiet = false;
};

RunConfig resolve_config(const Options& o) {
  RunConfig cfg = o.config.empty() ? RunConfig{} : load_config(o.config);
  for (const auto& kv : o.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ConfigError("--set expects key=value, got '" + kv + "'");
    std::string key = kv.substr(0, eq);
    while (!key.empty() && key.back() == ' ') key.pop_back();
    cfg.set(key, std::string_view(kv).substr(eq + 1));
  }
  if (o.seed) {
    cfg.train.seed = *o.seed;
    cfg.synth.seed = *o.seed;
    cfg.eval.split_seed = *o.seed;
    cfg.eval.classifier.seed = *o.seed;
  }
  if (o.epochs) cfg.train.epochs = *o.epochs;
  return cfg;
}

// Keeps every artifact inside --out.
fs::path under_out(const Options& o, const std::string& rel) {
  const fs::path p = fs::path(rel).lexically_normal();
  if (p.is_absolute() || p.empty() || *p.begin() == "..") {
    throw ConfigError("'" + rel + "' must be a relative path inside --out");
  }
  return fs::path(o.out) / p;
}

void write_manifest(const Options& o, const std::string& command, const RunConfig& cfg,
                    const std::string& extra = "") {
  std::string m = "# coursemi run manifest\n";
  m += "command = " + command + '\n';
  m += std::string("version = ") + kVersion + '\n';
  m += "compiler = " __VERSION__ "\n";
  m += "cplusplus = " + std::to_string(__cplusplus) + '\n';
  if (!o.data_dir.empty()) m += "data_dir = " + o.data_dir + '\n';
  if (!o.config.empty()) m += "config_file = " + o.config + '\n';
  m += extra;
  m += "# effective configuration\n";
  m += cfg.echo();
  io::write_atomic((fs::path(o.out) / "manifest.txt").string(), m);
}

struct Dataset {
  HinGraph graph;
  FeatureMatrix features;
  CourseLabels labels;
};

Dataset load_dataset(const Options& o, const RunConfig& cfg, bool features, bool labels) {
  if (o.data_dir.empty()) throw ConfigError("--data-dir is required");
  const fs::path dir(o.data_dir);
  Dataset d;
  d.graph = load_hin((dir / "nodes.tsv").string(), (dir / "edges.tsv").string());
  if (cfg.min_links > 0) d.graph = degree_filter(d.graph, cfg.min_links, cfg.filter_teachers);
  if (features) {
    d.features = load_features((dir / "features.tsv").string(), d.graph);
  }
  if (labels) d.labels = load_labels((dir / "labels.tsv").string(), d.graph);
  return d;
}

void require_out(const Options& o) {
  if (o.out.empty()) throw ConfigError("--out is required");
  fs::create_directories(o.out);
}

std::string view_summary(const std::vector<ViewGraph>& views) {
  std::string s = "metapath\tcourses\tedges\tdensity\n";
  for (const auto& v : views) {
    const double n = static_cast<double>(v.num_courses());
    const double pairs = n * (n - 1) / 2;
    s += v.metapath.label + '\t' + std::to_string(v.num_courses()) + '\t' +
         std::to_string(v.edges.size()) + '\t' +
         io::format_double(pairs > 0 ? static_cast<double>(v.edges.size()) / pairs : 0.0) + '\n';
  }
  return s;
}

void maybe_dump(const Options& o, const std::vector<ViewGraph>& views) {
  if (!o.dump_adjacency.empty()) dump_adjacency(views, under_out(o, o.dump_adjacency).string());
}

int cmd_generate(const Options& o, std::ostream& out) {
  auto cfg = resolve_config(o);
  require_out(o);
  SynthConfig sc = cfg.synth;
  for (const auto& v : o.noise_views) sc = make_noise_view_config(sc, MetaPath::parse(v));
  cfg.synth = sc;
  const auto data = generate(sc);
  write_synth(data, sc, o.out);
  write_manifest(o, "generate", cfg);
  out << "wrote " << data.graph.num_nodes() << " nodes, " << data.graph.num_edges() << " edges to "
      << o.out << '\n';
  return kOk;
}

int cmd_project(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  require_out(o);
  const auto data = load_dataset(o, cfg, false, false);
  const auto views = project_all(data.graph, cfg.metapaths, cfg.projection);
  maybe_dump(o, views);
  const auto summary = view_summary(views);
  io::write_atomic((fs::path(o.out) / "projection.tsv").string(), summary);
  write_manifest(o, "project", cfg);
  out << summary;
  return kOk;
}

TrainResult run_training(const Options& o, RunConfig& cfg, const Dataset& data,
                         std::ostream& out, std::ostream& err) {
  cfg.train.feature_dim = data.features.cols();
  const auto views = project_all(data.graph, cfg.metapaths, cfg.projection);
  maybe_dump(o, views);

  TrainHooks hooks;
  hooks.checkpoint_path = (fs::path(o.out) / "model.ckpt").string();
  const std::size_t every = std::max<std::size_t>(1, cfg.train.epochs / 10);
  if (!o.quiet) {
    hooks.on_epoch = [&err, every](const EpochLosses& e) {
      if (e.epoch == 1 || e.epoch % every == 0) {
        err << "epoch " << e.epoch << " total " << io::format_double(e.losses.total) << '\n';
      }
    };
  }
  auto result = train(views, data.features, cfg.train, hooks);
  const fs::path dir(o.out);
  result.model.params().save(hooks.checkpoint_path);
  save_embeddings(result.embeddings.unified, data.graph, (dir / "embeddings.tsv").string());
  for (std::size_t v = 0; v < result.embeddings.views.size(); ++v) {
    save_embeddings(result.embeddings.views[v], data.graph,
                  (dir / "view_embeddings" / (result.embeddings.view_labels[v] + ".tsv")).string());
  }
  io::write_atomic((dir / "train_log.tsv").string(), result.report.log_tsv());
  io::write_atomic((dir / "attention.tsv").string(), result.report.attention_tsv());
  if (o.report_attention) out << result.report.attention_tsv();
  return result;
}

void write_metrics(const Options& o, const MetricsRow& row, std::ostream& out) {
  io::write_atomic((fs::path(o.out) / "metrics.tsv").string(), metrics_tsv({row}));
  out << render_table({row}, "setting");
}

int cmd_train(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = resolve_config(o);
  require_out(o);
  const auto data = load_dataset(o, cfg, true, false);
  const auto result = run_training(o, cfg, data, out, err);
  write_manifest(o, "train", cfg,
                 "wall_seconds = " + io::format_double(result.report.wall_seconds) + '\n');
  return kOk;
}

int cmd_eval(const Options& o, std::ostream& out) {
  const auto cfg = resolve_config(o);
  require_out(o);
  if (o.embeddings.empty()) throw ConfigError("--embeddings is required");
  const auto data = load_dataset(o, cfg, false, true);
  EmbeddingSet emb;
  emb.unified = load_embeddings(o.embeddings, data.graph);
  if (cfg.eval.concat_views) {
    const auto dir = fs::path(o.embeddings).parent_path() / "view_embeddings";
    for (const auto& mp : cfg.metapaths) {
      emb.views.push_back(load_embeddings((dir / (mp.label + ".tsv")).string(), data.graph));
      emb.view_labels.push_back(mp.label);
    }
  }
  const auto row = evaluate_embeddings(emb, data.labels, cfg.eval, "unified");
  write_metrics(o, row, out);
  write_manifest(o, "eval", cfg, "embeddings = " + o.embeddings + '\n');
  return kOk;
}

int cmd_pipeline(const Options& o, std::ostream& out, std::ostream& err) {
  auto cfg = resolve_config(o);
  require_out(o);
  const auto data = load_dataset(o, cfg, true, true);
  const auto result = run_training(o, cfg, data, out, err);
  const auto row = evaluate_embeddings(result.embeddings, data.labels, cfg.eval, "unified");
  write_metrics(o, row, out);
  write_manifest(o, "pipeline", cfg,
                 "wall_seconds = " + io::format_double(result.report.wall_seconds) + '\n');
  return kOk;
}

int cmd_ablate(const Options& o, bool metapaths, std::ostream& out) {
  auto cfg = resolve_config(o);
  require_out(o);
  const auto data = load_dataset(o, cfg, true, true);
  cfg.train.feature_dim = data.features.cols();
  AblationOptions ab;
  ab.train = cfg.train;
  ab.eval = cfg.eval;
  ab.projection = cfg.projection;
  ab.seeds = cfg.ablation_seeds;
  ab.jobs = o.jobs;
  ab.metapaths = cfg.metapaths;
  ab.include_base = cfg.include_base;
  const auto rows = metapaths ? ablate_metapaths(data.graph, data.features, data.labels, ab)
                              : ablate_losses(data.graph, data.features, data.labels, ab);
  const std::string name = metapaths ? "ablation_metapaths" : "ablation_losses";
  io::write_atomic((fs::path(o.out) / (name + ".tsv")).string(), metrics_tsv(rows));
  const auto table = render_table(rows, metapaths ? "metapaths" : "losses");
  io::write_atomic((fs::path(o.out) / (name + ".txt")).string(), table);
  write_manifest(o, metapaths ? "ablate-metapaths" : "ablate-losses", cfg,
                 "jobs = " + std::to_string(o.jobs) + '\n');
  out << table;
  return kOk;
}

void add_common(CLI::App* c, Options& o, bool data, bool out_dir) {
  c->add_option("--config", o.config, "flat key = value configuration file");
  c->add_option("--set", o.sets, "override one config key (key=value); repeatable, wins over --config");
  c->add_option("--seed", o.seed, "seed for training, split and generation");
  if (data) c->add_option("--data-dir", o.data_dir, "directory with nodes/edges/features/labels TSVs");
  if (out_dir) c->add_option("--out", o.out, "output directory")->required();
  c->add_flag("--quiet", o.quiet, "no progress lines on stderr");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multi-view course embeddings from a typed course network", "coursemi"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  Options o;

  auto* gen = app.add_subcommand("generate", "write a planted-partition synthetic dataset");
  add_common(gen, o, false, true);
  gen->add_option("--noise-view", o.noise_views, "meta-path whose intermediates ignore classes; repeatable");

  auto* proj = app.add_subcommand("project", "build meta-path views and report their sizes");
  add_common(proj, o, true, true);
  proj->add_option("--dump-adjacency", o.dump_adjacency, "write edge lists to this directory under --out");

  auto* tr = app.add_subcommand("train", "train embeddings");
  add_common(tr, o, true, true);
  tr->add_option("--epochs", o.epochs, "override epochs");
  tr->add_option("--dump-adjacency", o.dump_adjacency, "write edge lists to this directory under --out");
  tr->add_flag("--report-attention", o.report_attention, "print learned view weights");

  auto* ev = app.add_subcommand("eval", "classify courses from saved embeddings");
  add_common(ev, o, true, true);
  ev->add_option("--embeddings", o.embeddings, "embeddings TSV written by train")->required();

  auto* pipe = app.add_subcommand("pipeline", "project, train and evaluate in one run");
  add_common(pipe, o, true, true);
  pipe->add_option("--epochs", o.epochs, "override epochs");
  pipe->add_option("--dump-adjacency", o.dump_adjacency, "write edge lists to this directory under --out");
  pipe->add_flag("--report-attention", o.report_attention, "print learned view weights");

  auto* abm = app.add_subcommand("ablate-metapaths", "train on every meta-path subset");
  auto* abl = app.add_subcommand("ablate-losses", "train every loss-term variant");
  for (auto* c : {abm, abl}) {
    add_common(c, o, true, true);
    c->add_option("--epochs", o.epochs, "override epochs");
    c->add_option("--jobs", o.jobs, "parallel workers")->check(CLI::PositiveNumber);
  }

  try {
    std::vector<std::string> rev(args.rbegin(), args.rend());
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (gen->parsed()) return cmd_generate(o, out);
    if (proj->parsed()) return cmd_project(o, out);
    if (tr->parsed()) return cmd_train(o, out, err);
    if (ev->parsed()) return cmd_eval(o, out);
    if (pipe->parsed()) return cmd_pipeline(o, out, err);
    if (abm->parsed()) return cmd_ablate(o, true, out);
    if (abl->parsed()) return cmd_ablate(o, false, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const NumericFault& e) {
    err << "numeric fault: " << e.what() << '\n';
    return kNumeric;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}

}  // namespace coursemi::cli
