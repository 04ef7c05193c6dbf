#pragma once

#include <string>
#include <vector>

namespace ibge::cli {

/// Entry point of the `ibge` tool. Returns the process exit code: 0 iff every
/// requested output was written.
///
///   ibge simulate  --seed S --out DIR [...]
///   ibge learn map|mcmc --data F --design F --seed S --out DIR [...]
///   ibge effects   --samples F --data F --design F --seed S --out DIR [...]
///   ibge benchmark --config F --out DIR [--learners a,b] [--jobs J]
///   ibge rerun     CONFIG --out DIR
///
/// Every command writes config.json next to its outputs; `rerun` replays it.
int run(int argc, const char* const* argv);
int run(const std::vector<std::string>& args);

}  // namespace ibge::cli
