#include "ibge/io.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

namespace ibge::io {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

std::map<std::string, int> index_of(const std::vector<std::string>& names, const char* what) {
  std::map<std::string, int> out;
  for (int i = 0; i < static_cast<int>(names.size()); ++i) {
    if (!out.emplace(names[i], i).second) throw FormatError(std::string("duplicate ") + what + " name: " + names[i]);
  }
  return out;
}

int lookup(const std::map<std::string, int>& index, const std::string& name, const char* what) {
  auto it = index.find(name);
  if (it == index.end()) throw FormatError(std::string("unknown ") + what + ": " + name);
  return it->second;
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  if (s.empty()) throw FormatError("empty numeric field");
  errno = 0;
  char* end = nullptr;
  const double x = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE) throw FormatError("not a number: " + s);
  return x;
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> lines;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) lines.push_back(line);
  }
  return lines;
}

ordered_json parse_json(const std::string& text) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("invalid JSON: ") + e.what());
  }
}

std::string dump(const ordered_json& j) { return j.dump(2) + "\n"; }

ordered_json edges_json(const Dag& dag, const std::vector<std::string>& names, const std::vector<std::string>& labels,
                        ordered_json& int_edges) {
  ordered_json obs = ordered_json::array();
  for (auto [u, v] : dag.edges()) obs.push_back({names[u], names[v]});
  int_edges = ordered_json::array();
  for (auto [j, v] : dag.int_edges()) int_edges.push_back({labels[j], names[v]});
  return obs;
}

Dag dag_from_edges(const ordered_json& obs, const ordered_json& ints, const std::map<std::string, int>& nodes,
                   const std::map<std::string, int>& labels) {
  Dag dag(static_cast<int>(nodes.size()), static_cast<int>(labels.size()));
  for (const auto& e : obs) {
    if (!e.is_array() || e.size() != 2) throw FormatError("edge must be a [from, to] pair");
    dag.add_edge(lookup(nodes, e[0].get<std::string>(), "node"), lookup(nodes, e[1].get<std::string>(), "node"));
  }
  for (const auto& e : ints) {
    if (!e.is_array() || e.size() != 2) throw FormatError("intervention edge must be a [label, to] pair");
    dag.add_int_edge(lookup(labels, e[0].get<std::string>(), "intervention"),
                     lookup(nodes, e[1].get<std::string>(), "node"));
  }
  return dag;
}

template <typename T>
T field(const ordered_json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(std::string("missing field: ") + key);
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("bad field ") + key + ": " + e.what());
  }
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::string& path, const std::string& contents) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << contents;
    if (!out.flush()) throw std::runtime_error("write failed: " + path);
  }
  std::filesystem::rename(tmp, path);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string data_to_csv(const ObservedDataset& data) {
  std::string out;
  for (int j = 0; j < data.cols(); ++j) {
    if (j) out += ',';
    out += data.var_names[j];
  }
  out += '\n';
  for (int r = 0; r < data.rows(); ++r) {
    for (int j = 0; j < data.cols(); ++j) {
      if (j) out += ',';
      out += format_double(data.values(r, j));
    }
    out += '\n';
  }
  return out;
}

ObservedDataset data_from_csv(const std::string& text) {
  const auto lines = lines_of(text);
  if (lines.empty()) throw FormatError("data CSV is empty");
  ObservedDataset data;
  data.var_names = split_line(lines[0]);
  index_of(data.var_names, "variable");
  const int n = static_cast<int>(data.var_names.size());
  const int rows = static_cast<int>(lines.size()) - 1;
  data.values.resize(rows, n);
  for (int r = 0; r < rows; ++r) {
    const auto fields = split_line(lines[r + 1]);
    if (static_cast<int>(fields.size()) != n) {
      throw FormatError("data row " + std::to_string(r + 1) + " has " + std::to_string(fields.size()) +
                        " fields, expected " + std::to_string(n));
    }
    for (int j = 0; j < n; ++j) data.values(r, j) = parse_double(fields[j]);
  }
  return data;
}

std::string design_to_json(const InterventionDesign& design, const std::vector<std::string>& var_names) {
  ordered_json j;
  j["m"] = design.m;
  j["labels"] = design.labels;
  ordered_json rows = ordered_json::array();
  for (int r = 0; r < design.rows(); ++r) {
    ordered_json row = ordered_json::array();
    for (int k = 0; k < design.m; ++k) row.push_back(static_cast<int>(design.state(r, k)));
    rows.push_back(std::move(row));
  }
  j["row_states"] = std::move(rows);
  if (design.known_targets) {
    ordered_json targets = ordered_json::object();
    for (int k = 0; k < design.m; ++k) {
      ordered_json names = ordered_json::array();
      for (int v : (*design.known_targets)[k]) names.push_back(var_names.at(v));
      targets[design.labels[k]] = std::move(names);
    }
    j["known_targets"] = std::move(targets);
  }
  // One row per line keeps large designs readable.
  std::string out = "{\n  \"m\": " + std::to_string(design.m) + ",\n  \"labels\": " + j["labels"].dump() +
                    ",\n  \"row_states\": [";
  for (std::size_t r = 0; r < j["row_states"].size(); ++r) {
    out += r ? ",\n    " : "\n    ";
    out += j["row_states"][r].dump();
  }
  out += j["row_states"].empty() ? "]" : "\n  ]";
  if (j.contains("known_targets")) out += ",\n  \"known_targets\": " + j["known_targets"].dump();
  out += "\n}\n";
  return out;
}

InterventionDesign design_from_json(const std::string& text, const std::vector<std::string>& var_names) {
  const auto j = parse_json(text);
  InterventionDesign d;
  d.m = field<int>(j, "m");
  d.labels = field<std::vector<std::string>>(j, "labels");
  if (static_cast<int>(d.labels.size()) != d.m) throw FormatError("labels length differs from m");
  const auto label_index = index_of(d.labels, "intervention");
  const auto states = field<std::vector<std::vector<int>>>(j, "row_states");
  d.n_rows = static_cast<int>(states.size());
  d.row_states.reserve(states.size() * d.m);
  for (std::size_t r = 0; r < states.size(); ++r) {
    if (static_cast<int>(states[r].size()) != d.m) {
      throw FormatError("row_states row " + std::to_string(r) + " has wrong length");
    }
    for (int s : states[r]) {
      if (s != 0 && s != 1) throw FormatError("row_states entries must be 0 or 1");
      d.row_states.push_back(static_cast<std::uint8_t>(s));
    }
  }
  if (j.contains("known_targets")) {
    const auto node_index = index_of(var_names, "variable");
    std::vector<NodeSet> targets(d.m);
    for (const auto& [label, names] : j["known_targets"].items()) {
      const int k = lookup(label_index, label, "intervention");
      for (const auto& name : names) targets[k].push_back(lookup(node_index, name.get<std::string>(), "node"));
      std::sort(targets[k].begin(), targets[k].end());
    }
    d.known_targets = std::move(targets);
  }
  return d;
}

std::string dag_to_json(const Dag& dag, const std::vector<std::string>& var_names,
                        const std::vector<std::string>& labels, std::optional<double> log_score) {
  ordered_json j;
  j["nodes"] = var_names;
  j["interventions"] = labels;
  ordered_json ints;
  j["obs_edges"] = edges_json(dag, var_names, labels, ints);
  j["int_edges"] = std::move(ints);
  if (log_score) j["log_score"] = *log_score;
  return dump(j);
}

NamedDag dag_from_json(const std::string& text) {
  const auto j = parse_json(text);
  NamedDag out;
  out.var_names = field<std::vector<std::string>>(j, "nodes");
  out.labels = field<std::vector<std::string>>(j, "interventions");
  out.dag = dag_from_edges(j.at("obs_edges"), j.value("int_edges", ordered_json::array()),
                           index_of(out.var_names, "variable"), index_of(out.labels, "intervention"));
  if (j.contains("log_score")) out.log_score = j["log_score"].get<double>();
  return out;
}

std::string truth_to_json(const GroundTruth& truth) {
  ordered_json j;
  j["regime"] = regime_name(truth.regime);
  j["nodes"] = truth.var_names;
  j["interventions"] = truth.labels;
  ordered_json edges = ordered_json::array();
  for (auto [u, v] : truth.dag.edges()) {
    edges.push_back({{"from", truth.var_names[u]}, {"to", truth.var_names[v]}, {"weight", truth.weights(u, v)}});
  }
  j["edges"] = std::move(edges);
  ordered_json specs = ordered_json::array();
  for (int k = 0; k < truth.m(); ++k) {
    const auto& spec = truth.interventions[k];
    ordered_json targets = ordered_json::array();
    for (int v : spec.targets) targets.push_back(truth.var_names[v]);
    specs.push_back({{"label", truth.labels[k]}, {"targets", targets}, {"shift", spec.shift}, {"damping", spec.damping}});
  }
  j["intervention_specs"] = std::move(specs);
  return dump(j);
}

GroundTruth truth_from_json(const std::string& text) {
  const auto j = parse_json(text);
  GroundTruth t;
  const auto regime = field<std::string>(j, "regime");
  if (regime == "soft") t.regime = Regime::Soft;
  else if (regime == "perfect") t.regime = Regime::Perfect;
  else throw FormatError("unknown regime: " + regime);
  t.var_names = field<std::vector<std::string>>(j, "nodes");
  t.labels = field<std::vector<std::string>>(j, "interventions");
  const auto nodes = index_of(t.var_names, "variable");
  const auto labels = index_of(t.labels, "intervention");
  const int n = static_cast<int>(t.var_names.size());
  const int m = static_cast<int>(t.labels.size());
  t.dag = Dag(n, m);
  t.weights = Eigen::MatrixXd::Zero(n, n);
  for (const auto& e : j.at("edges")) {
    const int u = lookup(nodes, field<std::string>(e, "from"), "node");
    const int v = lookup(nodes, field<std::string>(e, "to"), "node");
    t.dag.add_edge(u, v);
    t.weights(u, v) = field<double>(e, "weight");
  }
  const auto& specs = j.at("intervention_specs");
  if (static_cast<int>(specs.size()) != m) throw FormatError("intervention_specs length differs from interventions");
  t.interventions.resize(m);
  for (const auto& s : specs) {
    const int k = lookup(labels, field<std::string>(s, "label"), "intervention");
    auto& spec = t.interventions[k];
    for (const auto& name : s.at("targets")) {
      const int v = lookup(nodes, name.get<std::string>(), "node");
      spec.targets.push_back(v);
      t.dag.add_int_edge(k, v);
    }
    spec.shift = field<std::vector<double>>(s, "shift");
    spec.damping = field<std::vector<double>>(s, "damping");
  }
  try {
    t.validate();
  } catch (const std::exception& e) {
    throw FormatError(std::string("invalid truth: ") + e.what());
  }
  return t;
}

std::string samples_to_json(const SampleFile& file) {
  ordered_json j;
  j["nodes"] = file.var_names;
  j["interventions"] = file.labels;
  ordered_json chains = ordered_json::array();
  for (const auto& c : file.samples.chains) {
    chains.push_back({{"proposed", c.proposed},
                      {"accepted", c.accepted},
                      {"max_check_error", c.max_check_error},
                      {"swaps_proposed", c.swaps_proposed},
                      {"swaps_accepted", c.swaps_accepted}});
  }
  j["chains"] = std::move(chains);
  ordered_json samples = ordered_json::array();
  for (const auto& s : file.samples.samples) {
    ordered_json ints;
    ordered_json obs = edges_json(s.dag, file.var_names, file.labels, ints);
    samples.push_back({{"chain", s.chain},
                       {"iteration", s.iteration},
                       {"log_score", s.log_score},
                       {"obs_edges", std::move(obs)},
                       {"int_edges", std::move(ints)}});
  }
  j["samples"] = std::move(samples);
  return dump(j);
}

SampleFile samples_from_json(const std::string& text) {
  const auto j = parse_json(text);
  SampleFile f;
  f.var_names = field<std::vector<std::string>>(j, "nodes");
  f.labels = field<std::vector<std::string>>(j, "interventions");
  const auto nodes = index_of(f.var_names, "variable");
  const auto labels = index_of(f.labels, "intervention");
  for (const auto& c : j.value("chains", ordered_json::array())) {
    ChainStats stats;
    stats.proposed = field<long>(c, "proposed");
    stats.accepted = field<long>(c, "accepted");
    stats.max_check_error = field<double>(c, "max_check_error");
    if (c.contains("swaps_proposed")) stats.swaps_proposed = field<long>(c, "swaps_proposed");
    if (c.contains("swaps_accepted")) stats.swaps_accepted = field<long>(c, "swaps_accepted");
    f.samples.chains.push_back(std::move(stats));
  }
  for (const auto& s : j.at("samples")) {
    DagSample sample;
    sample.chain = field<int>(s, "chain");
    sample.iteration = field<long>(s, "iteration");
    sample.log_score = field<double>(s, "log_score");
    sample.dag = dag_from_edges(s.at("obs_edges"), s.at("int_edges"), nodes, labels);
    if (sample.chain >= 0 && sample.chain < static_cast<int>(f.samples.chains.size())) {
      f.samples.chains[sample.chain].trace.push_back(sample.log_score);
    }
    f.samples.samples.push_back(std::move(sample));
  }
  if (f.samples.samples.empty()) throw FormatError("sample file holds no samples");
  return f;
}

std::string edge_posterior_to_csv(const Eigen::MatrixXd& posterior, const std::vector<std::string>& var_names,
                                  const std::vector<std::string>& labels) {
  std::string out = "source";
  for (const auto& name : var_names) out += "," + name;
  out += '\n';
  for (int r = 0; r < posterior.rows(); ++r) {
    out += r < static_cast<int>(var_names.size()) ? var_names[r] : labels.at(r - var_names.size());
    for (int c = 0; c < posterior.cols(); ++c) out += "," + format_double(posterior(r, c));
    out += '\n';
  }
  return out;
}

std::string effects_to_csv(const EffectResult& result, const std::vector<std::string>& var_names) {
  std::string out = "source,target,mean,lower,upper,excludes_zero\n";
  for (const auto& s : result.summaries) {
    out += var_names[s.source] + "," + var_names[s.target] + "," + format_double(s.mean) + "," +
           format_double(s.lower) + "," + format_double(s.upper) + "," + (s.excludes_zero ? "true" : "false") + "\n";
  }
  return out;
}

std::string draws_to_csv(const EffectResult& result, const std::vector<std::string>& var_names) {
  const int n = static_cast<int>(var_names.size());
  std::vector<int> cols;
  std::string out;
  for (int u = 0; u < n; ++u)
    for (int v = 0; v < n; ++v) {
      if (u == v) continue;
      if (!cols.empty()) out += ',';
      out += var_names[u] + "->" + var_names[v];
      cols.push_back(u * n + v);
    }
  out += '\n';
  for (int d = 0; d < result.draws.rows(); ++d) {
    for (std::size_t k = 0; k < cols.size(); ++k) {
      if (k) out += ',';
      out += format_double(result.draws(d, cols[k]));
    }
    out += '\n';
  }
  return out;
}

std::string roc_header() { return "dataset_id,seed,alpha_mu,regime,learner,TP,FP,FN,P,SHD,TPR,FPRp\n"; }

std::string roc_row_to_csv(const RocRow& row) {
  const auto& m = row.metrics;
  return row.dataset_id + "," + std::to_string(row.seed) + "," + format_double(row.alpha_mu) + "," + row.regime +
         "," + row.learner + "," + format_double(m.tp) + "," + format_double(m.fp) + "," + format_double(m.fn) + "," +
         std::to_string(m.p) + "," + format_double(m.shd) + "," + format_double(m.tpr) + "," +
         format_double(m.fprp) + "\n";
}

std::string roc_to_csv(const std::vector<RocRow>& rows) {
  std::string out = roc_header();
  for (const auto& r : rows) out += roc_row_to_csv(r);
  return out;
}

}  // namespace ibge::io
