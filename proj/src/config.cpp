#include "coursemi/config.hpp"

#include <charconv>

#include "coursemi/error.hpp"
#include "coursemi/io.hpp"

namespace coursemi {

namespace {

std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  return s.substr(b, s.find_last_not_of(ws) - b + 1);
}

[[noreturn]] void bad(std::string_view key, std::string_view value, const char* want) {
  throw ConfigError("bad value '" + std::string(value) + "' for '" + std::string(key) + "': expected " +
                    want);
}

double to_double(std::string_view key, std::string_view v) {
  double out = 0.0;
  if (!io::parse_double(v, out)) bad(key, v, "a number");
  return out;
}

std::size_t to_size(std::string_view key, std::string_view v) {
  std::size_t out = 0;
  if (!io::parse_size(v, out)) bad(key, v, "a non-negative integer");
  return out;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t out = 0;
  const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || p != v.data() + v.size() || v.empty()) bad(key, v, "a non-negative integer");
  return out;
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  bad(key, v, "true or false");
}

const char* b(bool v) { return v ? "true" : "false"; }

}  // namespace

void RunConfig::set(std::string_view key, std::string_view raw) {
  const auto v = trim(raw);
  auto& t = train;
  if (key == "lambda_q") t.lambda.q = to_double(key, v);
  else if (key == "lambda_j") t.lambda.j = to_double(key, v);
  else if (key == "lambda_s") t.lambda.s = to_double(key, v);
  else if (key == "lambda_y") t.lambda.y = to_double(key, v);
  else if (key == "epochs") t.epochs = to_size(key, v);
  else if (key == "lr") t.lr = to_double(key, v);
  else if (key == "weight_decay") t.weight_decay = to_double(key, v);
  else if (key == "dropout") t.dropout = to_double(key, v);
  else if (key == "embed_dim") t.embed_dim = to_size(key, v);
  else if (key == "feature_dim") t.feature_dim = to_size(key, v);
  else if (key == "attention_dim") t.attention_dim = to_size(key, v);
  else if (key == "encoder_depth") t.encoder_depth = to_size(key, v);
  else if (key == "seed") t.seed = to_u64(key, v);
  else if (key == "max_pos") t.max_pos = to_size(key, v);
  else if (key == "checkpoint_interval") t.checkpoint_interval = to_size(key, v);
  else if (key == "optimizer") {
    if (v == "adam") t.optimizer = OptimizerKind::Adam;
    else if (v == "sgd") t.optimizer = OptimizerKind::Sgd;
    else bad(key, v, "adam or sgd");
  }
  else if (key == "share_encoder") t.share_encoder = to_bool(key, v);
  else if (key == "share_agreement_discriminator") t.share_agreement_discriminator = to_bool(key, v);
  else if (key == "attention_pooling") t.pooling = parse_attention_pooling(v);
  else if (key == "metapaths") metapaths = MetaPath::parse_list(std::string(v));
  else if (key == "weighted") projection.weighted = to_bool(key, v);
  else if (key == "min_links") min_links = to_size(key, v);
  else if (key == "filter_teachers") filter_teachers = to_bool(key, v);
  else if (key == "split_ratio") eval.split_ratio = to_double(key, v);
  else if (key == "split_seed") eval.split_seed = to_u64(key, v);
  else if (key == "classifier_epochs") eval.classifier.epochs = to_size(key, v);
  else if (key == "classifier_lr") eval.classifier.lr = to_double(key, v);
  else if (key == "concat_views") eval.concat_views = to_bool(key, v);
  else if (key == "include_base") include_base = to_bool(key, v);
  else if (key == "ablation_seeds") {
    ablation_seeds.clear();
    for (const auto f : io::split(v, ',')) ablation_seeds.push_back(to_u64(key, trim(f)));
    if (ablation_seeds.empty()) bad(key, v, "a comma-separated seed list");
  }
  else if (key == "synth.n_courses") synth.n_courses = to_size(key, v);
  else if (key == "synth.n_students") synth.n_students = to_size(key, v);
  else if (key == "synth.n_teachers") synth.n_teachers = to_size(key, v);
  else if (key == "synth.n_subjects") synth.n_subjects = to_size(key, v);
  else if (key == "synth.n_classes") synth.n_classes = to_size(key, v);
  else if (key == "synth.d") synth.d = to_size(key, v);
  else if (key == "synth.p_in") synth.p_in = to_double(key, v);
  else if (key == "synth.p_out") synth.p_out = to_double(key, v);
  else if (key == "synth.sigma_f") synth.sigma_f = to_double(key, v);
  else if (key == "synth.feature_signal") synth.feature_signal = to_double(key, v);
  else if (key == "synth.seed") synth.seed = to_u64(key, v);
  else if (key == "synth.noise_students") synth.noise_students = to_bool(key, v);
  else if (key == "synth.noise_teachers") synth.noise_teachers = to_bool(key, v);
  else if (key == "synth.noise_subjects") synth.noise_subjects = to_bool(key, v);
  else throw ConfigError("unknown config key '" + std::string(key) + "'");
}

std::string RunConfig::echo() const {
  std::string o = train.echo();
  std::string mps;
  for (const auto& mp : metapaths) mps += (mps.empty() ? "" : ",") + mp.label;
  o += "metapaths = " + mps + '\n';
  o += std::string("weighted = ") + b(projection.weighted) + '\n';
  o += "min_links = " + std::to_string(min_links) + '\n';
  o += std::string("filter_teachers = ") + b(filter_teachers) + '\n';
  o += "split_ratio = " + io::format_double(eval.split_ratio) + '\n';
  o += "split_seed = " + std::to_string(eval.split_seed) + '\n';
  o += "classifier_epochs = " + std::to_string(eval.classifier.epochs) + '\n';
  o += "classifier_lr = " + io::format_double(eval.classifier.lr) + '\n';
  o += std::string("concat_views = ") + b(eval.concat_views) + '\n';
  o += std::string("include_base = ") + b(include_base) + '\n';
  std::string seeds;
  for (const auto s : ablation_seeds) seeds += (seeds.empty() ? "" : ",") + std::to_string(s);
  o += "ablation_seeds = " + seeds + '\n';
  const std::string synth_echo = synth.echo();
  for (const auto line : io::split(synth_echo, '\n')) {
    if (!line.empty()) o += "synth." + std::string(line) + '\n';
  }
  return o;
}

void parse_config(std::string_view text, const std::string& source, RunConfig& cfg) {
  std::size_t lineno = 0;
  for (const auto raw : io::split(text, '\n')) {
    ++lineno;
    const auto line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
    const auto key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError(source + ":" + std::to_string(lineno) + ": empty key");
    try {
      cfg.set(key, line.substr(eq + 1));
    } catch (const Error& e) {
      throw ConfigError(source + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

RunConfig load_config(const std::string& path) {
  RunConfig cfg;
  parse_config(io::read_file(path), path, cfg);
  return cfg;
}

}  // namespace coursemi
