#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibge/core.hpp"
#include "ibge/dag.hpp"
#include "ibge/effects.hpp"
#include "ibge/evaluate.hpp"
#include "ibge/search.hpp"
#include "ibge/simulate.hpp"

// Text formats. Every writer is deterministic and every reader accepts what
// the matching writer produced, so write -> read -> write is byte-identical.
namespace ibge::io {

class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);
/// Writes atomically enough for our purposes: to path.tmp, then renamed.
void write_file(const std::string& path, const std::string& contents);

/// Header of variable names, one observation per line, 17 significant digits.
std::string data_to_csv(const ObservedDataset& data);
ObservedDataset data_from_csv(const std::string& text);

/// {"m", "labels", "row_states", optional "known_targets": {label: [names]}}.
std::string design_to_json(const InterventionDesign& design, const std::vector<std::string>& var_names);
InterventionDesign design_from_json(const std::string& text, const std::vector<std::string>& var_names);

/// {"nodes", "interventions", "obs_edges": [[from, to]], "int_edges": [[label, to]]}
/// with an optional "log_score".
std::string dag_to_json(const Dag& dag, const std::vector<std::string>& var_names,
                        const std::vector<std::string>& labels, std::optional<double> log_score = std::nullopt);
struct NamedDag {
  Dag dag;
  std::vector<std::string> var_names;
  std::vector<std::string> labels;
  std::optional<double> log_score;
};
NamedDag dag_from_json(const std::string& text);

std::string truth_to_json(const GroundTruth& truth);
GroundTruth truth_from_json(const std::string& text);

struct SampleFile {
  std::vector<std::string> var_names;
  std::vector<std::string> labels;
  DagSampleSet samples;
};
std::string samples_to_json(const SampleFile& file);
SampleFile samples_from_json(const std::string& text);

/// Rows: observed then intervention sources; columns: observed targets.
std::string edge_posterior_to_csv(const Eigen::MatrixXd& posterior, const std::vector<std::string>& var_names,
                                  const std::vector<std::string>& labels);

/// source,target,mean,lower,upper,excludes_zero
std::string effects_to_csv(const EffectResult& result, const std::vector<std::string>& var_names);
/// One column per ordered pair "source->target", one row per draw.
std::string draws_to_csv(const EffectResult& result, const std::vector<std::string>& var_names);

std::string roc_header();
std::string roc_row_to_csv(const RocRow& row);
std::string roc_to_csv(const std::vector<RocRow>& rows);

/// 17 significant digits; parses back to the same double.
std::string format_double(double x);

}  // namespace ibge::io
