#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "coursemi/eval.hpp"
#include "coursemi/metapath.hpp"
#include "coursemi/synth.hpp"
#include "coursemi/trainer.hpp"

namespace coursemi {

// Everything a CLI run needs, loaded from a flat `key = value` file and then
// overridden by command-line flags.
struct RunConfig {
  TrainConfig train;
  std::vector<MetaPath> metapaths = MetaPath::all();
  ProjectionOptions projection;
  // Degree filter on students (and teachers if filter_teachers); 0 disables it.
  std::size_t min_links = 0;
  bool filter_teachers = false;
  EvalOptions eval;
  std::vector<std::uint64_t> ablation_seeds{0, 1, 2, 3, 4};
  bool include_base = false;
  // Keys prefixed `synth.`.
  SynthConfig synth;

  // Sets one key. Throws ConfigError naming the key on unknown keys or bad values.
  void set(std::string_view key, std::string_view value);
  // `key = value` lines for every key, loadable by parse_config.
  std::string echo() const;
};

// Applies every `key = value` line of `text` to `cfg`. Blank lines and lines
// starting with '#' are skipped. Errors carry `source:line`.
void parse_config(std::string_view text, const std::string& source, RunConfig& cfg);
RunConfig load_config(const std::string& path);

}  // namespace coursemi
