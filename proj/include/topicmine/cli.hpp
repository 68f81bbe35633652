#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "topicmine/run_config.hpp"

namespace topicmine::cli {

// Stage entry points. Each reads its inputs from and writes its artifacts
// to config.out, then refreshes run_config.json and manifest.json there.
void preprocess(const RunConfig& config, std::ostream& log);
void train_mlm(const RunConfig& config, std::ostream& log);
void embed(const RunConfig& config, std::ostream& log);
void senses(const RunConfig& config, std::ostream& log);
void sweep_k(const RunConfig& config, std::ostream& log);
void fit(const RunConfig& config, std::ostream& log);
void coherence(const RunConfig& config, std::ostream& log);
void tsne(const RunConfig& config, std::ostream& log);
/// preprocess, train-mlm, embed, [senses], sweep-k, fit, coherence, tsne.
void pipeline(const RunConfig& config, std::ostream& log);

/// Writes run_config.json and a manifest of every artifact present.
void write_run_records(const RunConfig& config);

/// Artifact file names a run directory may contain, in manifest order.
const std::vector<std::string>& artifact_names();

/// Parses arguments and runs a subcommand. Returns 0, 2 (input or config
/// error) or 3 (numerical abort).
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace topicmine::cli
