#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>

namespace sal {

struct CommandOptions {
  std::string config_path;
  /// Overrides output.dir when set.
  std::string out_dir;
  /// eval: model to load. train-*: overrides the model output path.
  std::string model_path;
  std::optional<std::uint64_t> seed;
};

/// Each command returns the process exit status and writes its outputs
/// (CSV, model, resolved config, run.log) under the output directory.
/// Progress lines go to `log` as well as run.log.
int cmd_train_sal(const CommandOptions& opts, std::ostream& log);
int cmd_train_ssg(const CommandOptions& opts, std::ostream& log);
int cmd_compare(const CommandOptions& opts, std::ostream& log);
int cmd_eval(const CommandOptions& opts, std::ostream& log);

/// Writes OscillatoryCoeffs::generate(seed) to `path`.
int cmd_coeffs(std::uint64_t seed, const std::string& path, std::ostream& log);

}  // namespace sal
