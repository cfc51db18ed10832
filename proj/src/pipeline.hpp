#pragma once

#include <filesystem>

#include "config.hpp"

namespace coatline {

/// Identified model bundle as written to / read from model.json.
struct IdentifiedModel {
  ScalarSurrogate scalar;
  CrossGain gain;
  double sample_time = 0.0;
  FitReport fit;
};

void write_model_json(const IdentifiedModel &model, const std::filesystem::path &path);
IdentifiedModel read_model_json(const std::filesystem::path &path);

/// Operating point persisted in meta.json (config echo plus the measured
/// steady h0) or any JSON with top-level q0_m3ps / h0_m arrays.
void write_meta_json(const RunConfig &cfg, const OperatingPoint &op,
                     const std::filesystem::path &path);
OperatingPoint read_operating_point_json(const std::filesystem::path &path);

// Pipeline stages behind the CLI subcommands. Each reads/writes the file
// formats above and returns the paths it produced via the out directory.
void cmd_simulate(const RunConfig &cfg, const std::filesystem::path &out_dir);
void cmd_identify(const RunConfig &cfg, const std::filesystem::path &log_csv,
                  const std::filesystem::path &op_json, const std::filesystem::path &out_dir);
void cmd_calibrate(const RunConfig &cfg, const std::filesystem::path &model_json,
                   const std::filesystem::path &out_dir);
void cmd_design(const RunConfig &cfg, const std::filesystem::path &model_json,
                const std::filesystem::path &out_dir);
void cmd_closed_loop(const RunConfig &cfg, const std::filesystem::path &model_json,
                     const std::filesystem::path &controller_json,
                     const std::filesystem::path &op_json, const std::filesystem::path &out_dir);
void cmd_validate(const RunConfig &cfg, const std::filesystem::path &log_csv,
                  const std::filesystem::path &model_json, const std::filesystem::path &op_json,
                  const std::filesystem::path &out_dir);

} // namespace coatline
