//
// Copyright 2026 The PrivTree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "privtree/cli.h"

#include <chrono>
#include <cstdint>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "absl/status/statusor.h"
#include "absl/strings/numbers.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"
#include "absl/strings/str_replace.h"
#include "absl/strings/str_split.h"
#include "json.hpp"
#include "privtree/evalbench.h"
#include "privtree/markov.h"
#include "privtree/random.h"
#include "privtree/spatial.h"
#include "privtree/spatial_io.h"
#include "privtree/status_macros.h"
#include "privtree/svt_audit.h"

namespace privtree {

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kExitOk;
    case absl::StatusCode::kInvalidArgument:
      return kExitConfigError;
    case absl::StatusCode::kDataLoss:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kNotFound:
    case absl::StatusCode::kOutOfRange:
      return kExitDataError;
    default:
      return kExitNumericError;
  }
}

namespace {

struct RunConfig {
  std::string command;
  std::optional<double> epsilon;
  std::optional<double> theta;
  std::optional<int> fanout;
  int depth_cap = 40;
  std::optional<double> budget_split;
  std::optional<int> lmax;
  uint64_t seed = 0;
  bool noiseless = false;
  std::string format = "json";
  int jobs = 1;

  std::string input;
  std::string output;
  std::string tree;
  std::string workload;
  std::string data;
  std::string model;
  std::string domain;
  std::string alphabet;
  std::string config;
  double delta = 0;

  std::optional<int> k;
  int count = 1000;

  std::string variant = "all";
  double lambda = 2;
  int t = 1;

  std::string size_class = "medium";
  int queries = 1000;
  int trials = 20;
  int64_t synthetic_n = 0;
};

absl::Status ApplyConfigFile(const std::string& path, RunConfig& c) {
  std::ifstream in(path);
  if (!in) {
    return absl::InvalidArgumentError(
        absl::StrCat("cannot open config file ", path));
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("config file ", path, " is not valid JSON: ", e.what()));
  }
  if (!j.is_object()) {
    return absl::InvalidArgumentError("config file must hold a JSON object");
  }
  try {
    for (const auto& [raw_key, v] : j.items()) {
      const std::string key = absl::StrReplaceAll(raw_key, {{"-", "_"}});
      if (key == "epsilon") c.epsilon = v.get<double>();
      else if (key == "theta") c.theta = v.get<double>();
      else if (key == "fanout") c.fanout = v.get<int>();
      else if (key == "depth_cap") c.depth_cap = v.get<int>();
      else if (key == "budget_split") c.budget_split = v.get<double>();
      else if (key == "lmax") c.lmax = v.get<int>();
      else if (key == "seed") c.seed = v.get<uint64_t>();
      else if (key == "noiseless") c.noiseless = v.get<bool>();
      else if (key == "format") c.format = v.get<std::string>();
      else if (key == "jobs") c.jobs = v.get<int>();
      else if (key == "input") c.input = v.get<std::string>();
      else if (key == "output") c.output = v.get<std::string>();
      else if (key == "tree") c.tree = v.get<std::string>();
      else if (key == "workload") c.workload = v.get<std::string>();
      else if (key == "data") c.data = v.get<std::string>();
      else if (key == "model") c.model = v.get<std::string>();
      else if (key == "domain") c.domain = v.get<std::string>();
      else if (key == "alphabet") c.alphabet = v.get<std::string>();
      else if (key == "delta") c.delta = v.get<double>();
      else if (key == "k") c.k = v.get<int>();
      else if (key == "count") c.count = v.get<int>();
      else if (key == "variant") c.variant = v.get<std::string>();
      else if (key == "lambda") c.lambda = v.get<double>();
      else if (key == "t") c.t = v.get<int>();
      else if (key == "size_class") c.size_class = v.get<std::string>();
      else if (key == "queries") c.queries = v.get<int>();
      else if (key == "trials") c.trials = v.get<int>();
      else if (key == "synthetic_n") c.synthetic_n = v.get<int64_t>();
      else {
        return absl::InvalidArgumentError(
            absl::StrCat("unknown config key '", raw_key, "'"));
      }
    }
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("bad value in config file: ", e.what()));
  }
  return absl::OkStatus();
}

absl::Status Require(bool ok, absl::string_view message) {
  return ok ? absl::OkStatus() : absl::InvalidArgumentError(message);
}

absl::Status CheckEpsilon(const RunConfig& c) {
  if (!c.epsilon.has_value()) {
    return absl::InvalidArgumentError("--epsilon is required");
  }
  return Require(*c.epsilon > 0 && std::isfinite(*c.epsilon),
                 absl::StrCat("--epsilon must be positive, got ", *c.epsilon));
}

absl::Status CheckCommon(const RunConfig& c) {
  RETURN_IF_ERROR(Require(c.format == "json" || c.format == "table",
                          "--format must be json or table"));
  RETURN_IF_ERROR(Require(c.jobs >= 1, "--jobs must be at least 1"));
  RETURN_IF_ERROR(Require(c.depth_cap >= 0, "--depth-cap must be >= 0"));
  if (c.budget_split.has_value()) {
    RETURN_IF_ERROR(Require(*c.budget_split > 0 && *c.budget_split < 1,
                            "--budget-split must lie strictly in (0, 1)"));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::optional<SpatialDomain>> ParseDomain(
    const std::string& text) {
  if (text.empty()) return std::optional<SpatialDomain>();
  std::vector<double> v;
  for (absl::string_view f : absl::StrSplit(text, ',')) {
    double x;
    if (!absl::SimpleAtod(f, &x)) {
      return absl::InvalidArgumentError(
          absl::StrCat("bad number '", f, "' in --domain"));
    }
    v.push_back(x);
  }
  if (v.empty() || v.size() % 2 != 0) {
    return absl::InvalidArgumentError(
        "--domain takes lo1,...,lod,hi1,...,hid");
  }
  const size_t d = v.size() / 2;
  ASSIGN_OR_RETURN(Box b, Box::Create({v.begin(), v.begin() + d},
                                      {v.begin() + d, v.end()}));
  return std::optional<SpatialDomain>(std::move(b));
}

// Split dimensions per level for a requested fanout 2^s.
absl::StatusOr<int> SplitDimsFor(const std::optional<int>& fanout) {
  if (!fanout.has_value()) return 0;
  const int f = *fanout;
  if (f < 2 || (f & (f - 1)) != 0) {
    return absl::InvalidArgumentError(
        absl::StrCat("--fanout must be a power of two >= 2, got ", f));
  }
  int s = 0;
  while ((1 << s) < f) ++s;
  return s;
}

class Output {
 public:
  Output(const std::string& path, std::ostream& fallback)
      : path_(path), fallback_(fallback) {}

  absl::Status Write(const std::string& text) {
    if (path_.empty()) {
      fallback_ << text;
      return absl::OkStatus();
    }
    std::ofstream f(path_, std::ios::binary);
    if (!f) {
      return absl::InvalidArgumentError(
          absl::StrCat("cannot open ", path_, " for writing"));
    }
    f << text;
    if (!f) return absl::InternalError(absl::StrCat("write to ", path_, " failed"));
    return absl::OkStatus();
  }

 private:
  std::string path_;
  std::ostream& fallback_;
};

void WarnNoiseless(const RunConfig& c, std::ostream& err) {
  if (c.noiseless) {
    err << "WARNING: --noiseless disables all noise. The output is NOT "
           "differentially private and must not be released.\n";
  }
}

// ---- spatial ----------------------------------------------------------------

absl::Status SpatialBuild(const RunConfig& c, std::ostream& out,
                          std::ostream& err) {
  RETURN_IF_ERROR(CheckEpsilon(c));
  RETURN_IF_ERROR(Require(!c.input.empty(), "--input is required"));
  ASSIGN_OR_RETURN(const int split_dims, SplitDimsFor(c.fanout));
  ASSIGN_OR_RETURN(const std::optional<SpatialDomain> domain,
                   ParseDomain(c.domain));
  WarnNoiseless(c, err);

  ASSIGN_OR_RETURN(const SpatialDataset data,
                   ReadPointsCsvFile(c.input, domain));
  if (split_dims > static_cast<int>(data.dims())) {
    return absl::InvalidArgumentError(absl::StrCat(
        "--fanout ", *c.fanout, " needs more than ", data.dims(),
        " dimensions"));
  }
  ReleaseOptions options;
  options.theta = c.theta.value_or(0.0);
  options.budget_split = c.budget_split.value_or(0.5);
  options.build.depth_cap = c.depth_cap;
  options.build.split_dims = split_dims;
  options.build.noiseless = c.noiseless;
  Rng rng(c.seed);
  const auto start = std::chrono::steady_clock::now();
  ASSIGN_OR_RETURN(const DecompTree tree,
                   ReleasePrivTree(data, *c.epsilon, rng, options));
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
          .count();
  nlohmann::json j = TreeToJson(tree);
  if (c.noiseless) j["noiseless"] = true;
  Output o(c.output, out);
  RETURN_IF_ERROR(o.Write(j.dump(2) + "\n"));
  err << absl::StrFormat("nodes: %d  leaves: %d  build time: %.3f s\n",
                         tree.size(), tree.NumLeaves(), seconds);
  return absl::OkStatus();
}

absl::StatusOr<nlohmann::json> ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", path));
  try {
    nlohmann::json j;
    in >> j;
    return j;
  } catch (const nlohmann::json::exception& e) {
    return absl::DataLossError(
        absl::StrCat(path, " is not valid JSON: ", e.what()));
  }
}

std::string FormatDouble(double x) { return absl::StrFormat("%.6g", x); }

absl::Status RangeQueryCmd(const RunConfig& c, std::ostream& out,
                           std::ostream& err) {
  (void)err;
  RETURN_IF_ERROR(Require(!c.tree.empty(), "--tree is required"));
  RETURN_IF_ERROR(Require(!c.workload.empty(), "--workload is required"));
  RETURN_IF_ERROR(Require(c.delta >= 0, "--delta must be >= 0"));
  ASSIGN_OR_RETURN(const nlohmann::json tj, ReadJsonFile(c.tree));
  ASSIGN_OR_RETURN(const DecompTree tree, TreeFromJson(tj));
  ASSIGN_OR_RETURN(const std::vector<RangeQuery> workload,
                   ReadWorkloadCsvFile(c.workload, tree.domain().dims()));
  std::optional<SpatialDataset> data;
  if (!c.data.empty()) {
    ASSIGN_OR_RETURN(data, ReadPointsCsvFile(c.data, tree.domain()));
  }
  std::vector<double> estimates, exact;
  for (const RangeQuery& q : workload) {
    ASSIGN_OR_RETURN(const double a, RangeCount(tree, q));
    estimates.push_back(a);
    if (data.has_value()) {
      ASSIGN_OR_RETURN(const int64_t e, ExactRangeCount(*data, q));
      exact.push_back(static_cast<double>(e));
    }
  }
  std::optional<EvalReport> report;
  if (data.has_value()) {
    const double delta = c.delta > 0 ? c.delta : DefaultSmoothing(data->size());
    ASSIGN_OR_RETURN(report, ScoreEstimates(estimates, exact, delta));
  }

  Output o(c.output, out);
  if (c.format == "table") {
    std::vector<std::string> header = {"query", "lo", "hi", "estimate"};
    if (report) {
      header.push_back("exact");
      header.push_back("relative_error");
    }
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < workload.size(); ++i) {
      std::vector<std::string> row = {
          absl::StrCat(i), absl::StrJoin(workload[i].lo, ","),
          absl::StrJoin(workload[i].hi, ","), FormatDouble(estimates[i])};
      if (report) {
        row.push_back(FormatDouble(exact[i]));
        row.push_back(FormatDouble(report->errors[i]));
      }
      rows.push_back(std::move(row));
    }
    std::string text = FormatTable(header, rows);
    if (report) {
      absl::StrAppend(&text, "mean relative error ",
                      FormatDouble(report->mean_error),
                      ", median relative error ",
                      FormatDouble(report->median_error), "\n");
    }
    return o.Write(text);
  }
  nlohmann::json queries = nlohmann::json::array();
  for (size_t i = 0; i < workload.size(); ++i) {
    nlohmann::json q = {{"lo", workload[i].lo},
                        {"hi", workload[i].hi},
                        {"estimate", estimates[i]}};
    if (report) {
      q["exact"] = exact[i];
      q["relative_error"] = report->errors[i];
    }
    queries.push_back(std::move(q));
  }
  nlohmann::json j = {{"queries", std::move(queries)}};
  if (report && !workload.empty()) {
    j["mean_relative_error"] = report->mean_error;
    j["median_relative_error"] = report->median_error;
  }
  return o.Write(j.dump(2) + "\n");
}

// ---- sequences --------------------------------------------------------------

absl::StatusOr<SequenceDataset> LoadSequences(const RunConfig& c) {
  std::ifstream in(c.input);
  if (!in) return absl::NotFoundError(absl::StrCat("cannot open ", c.input));
  ASSIGN_OR_RETURN(const auto raw, ReadTokenSequences(in));
  Alphabet alphabet;
  std::vector<std::vector<int>> encoded;
  if (c.alphabet.empty()) {
    ASSIGN_OR_RETURN(auto enc, EncodeSequences(raw));
    alphabet = std::move(enc.first);
    encoded = std::move(enc.second);
  } else {
    ASSIGN_OR_RETURN(
        alphabet, Alphabet::Create(absl::StrSplit(c.alphabet, ',',
                                                  absl::SkipEmpty())));
    for (size_t i = 0; i < raw.size(); ++i) {
      std::vector<int> ids;
      for (const std::string& t : raw[i]) {
        auto id = alphabet.Id(t);
        if (!id.ok()) {
          return absl::DataLossError(absl::StrCat(
              c.input, ": record ", i + 1, ": ", id.status().message()));
        }
        ids.push_back(*id);
      }
      encoded.push_back(std::move(ids));
    }
  }
  return TruncateSequences(std::move(alphabet), encoded, *c.lmax);
}

absl::Status CheckSeqBuildConfig(const RunConfig& c) {
  RETURN_IF_ERROR(CheckEpsilon(c));
  RETURN_IF_ERROR(Require(!c.input.empty(), "--input is required"));
  RETURN_IF_ERROR(Require(c.lmax.has_value(), "--lmax is required"));
  return Require(*c.lmax >= 1, "--lmax must be at least 1");
}

absl::StatusOr<Pst> BuildFromInput(const RunConfig& c) {
  ASSIGN_OR_RETURN(const SequenceDataset data, LoadSequences(c));
  PstBuildOptions options;
  options.tree_budget_ratio = c.budget_split.value_or(0.0);
  options.theta = c.theta.value_or(0.0);
  options.depth_cap = c.depth_cap;
  options.noiseless = c.noiseless;
  Rng rng(c.seed);
  return BuildPrivatePst(data, *c.epsilon, rng, options);
}

// The model comes from --model or is built from --input.
absl::StatusOr<Pst> LoadOrBuildPst(const RunConfig& c) {
  if (!c.model.empty()) {
    ASSIGN_OR_RETURN(const nlohmann::json j, ReadJsonFile(c.model));
    return PstFromJson(j);
  }
  return BuildFromInput(c);
}

absl::Status CheckModelSource(const RunConfig& c) {
  if (!c.model.empty()) return absl::OkStatus();
  RETURN_IF_ERROR(Require(!c.input.empty(), "--model or --input is required"));
  return CheckSeqBuildConfig(c);
}

absl::Status SeqBuild(const RunConfig& c, std::ostream& out,
                      std::ostream& err) {
  RETURN_IF_ERROR(CheckSeqBuildConfig(c));
  WarnNoiseless(c, err);
  ASSIGN_OR_RETURN(const Pst pst, BuildFromInput(c));
  nlohmann::json j = PstToJson(pst);
  if (c.noiseless) j["noiseless"] = true;
  err << "nodes: " << pst.size() << "\n";
  return Output(c.output, out).Write(j.dump(2) + "\n");
}

absl::Status SeqTopK(const RunConfig& c, std::ostream& out,
                     std::ostream& err) {
  RETURN_IF_ERROR(CheckModelSource(c));
  const int k = c.k.value_or(10);
  RETURN_IF_ERROR(Require(k >= 1, "--k must be at least 1"));
  WarnNoiseless(c, err);
  ASSIGN_OR_RETURN(const Pst pst, LoadOrBuildPst(c));
  ASSIGN_OR_RETURN(const std::vector<ScoredString> top, TopKStrings(pst, k));
  Output o(c.output, out);
  if (c.format == "table") {
    std::vector<std::vector<std::string>> rows;
    for (size_t i = 0; i < top.size(); ++i) {
      rows.push_back({absl::StrCat(i + 1),
                      SymbolsToString(pst.alphabet(), top[i].symbols, " "),
                      FormatDouble(top[i].estimate)});
    }
    return o.Write(FormatTable({"rank", "string", "estimate"}, rows));
  }
  nlohmann::json list = nlohmann::json::array();
  for (const ScoredString& s : top) {
    std::vector<std::string> tokens;
    for (int x : s.symbols) tokens.push_back(pst.alphabet().Token(x));
    list.push_back({{"string", tokens}, {"estimate", s.estimate}});
  }
  return o.Write(nlohmann::json{{"top_k", std::move(list)}}.dump(2) + "\n");
}

absl::Status SeqSynth(const RunConfig& c, std::ostream& out,
                      std::ostream& err) {
  RETURN_IF_ERROR(CheckModelSource(c));
  RETURN_IF_ERROR(Require(c.count >= 0, "--count must be >= 0"));
  WarnNoiseless(c, err);
  ASSIGN_OR_RETURN(const Pst pst, LoadOrBuildPst(c));
  // Generation uses its own stream so it does not depend on how many draws
  // the build consumed.
  Rng rng = Rng(c.seed).Split(1);
  ASSIGN_OR_RETURN(const auto seqs, GenerateSequences(pst, c.count, rng));
  if (static_cast<int>(seqs.size()) < c.count) {
    err << c.count - seqs.size()
        << " sequences reached an empty node and were dropped\n";
  }
  Output o(c.output, out);
  if (c.format == "table") {
    std::string text;
    for (const auto& s : seqs) {
      absl::StrAppend(&text, SymbolsToString(pst.alphabet(), s, " "), "\n");
    }
    return o.Write(text);
  }
  nlohmann::json list = nlohmann::json::array();
  for (const auto& s : seqs) {
    std::vector<std::string> tokens;
    for (int x : s) tokens.push_back(pst.alphabet().Token(x));
    list.push_back(std::move(tokens));
  }
  return o.Write(nlohmann::json{{"sequences", std::move(list)}}.dump(2) +
                 "\n");
}

// ---- SVT audit --------------------------------------------------------------

absl::Status SvtAudit(const RunConfig& c, std::ostream& out,
                      std::ostream& err) {
  (void)err;
  const std::string& v = c.variant;
  RETURN_IF_ERROR(Require(
      v == "all" || v == "binary" || v == "vanilla" || v == "improved",
      absl::StrCat("unknown variant '", v,
                   "' (expected all, binary, vanilla or improved)")));
  RETURN_IF_ERROR(Require(c.lambda > 0, "--lambda must be positive"));
  RETURN_IF_ERROR(Require(c.t >= 1, "--t must be at least 1"));
  std::vector<AuditRecord> records;
  if (v == "all") {
    ASSIGN_OR_RETURN(records, DefaultAudit());
  } else if (v == "binary") {
    ASSIGN_OR_RETURN(AuditRecord r,
                     AuditBinary(c.k.value_or(16), c.theta.value_or(1.0),
                                 c.lambda));
    records.push_back(std::move(r));
  } else if (v == "vanilla") {
    ASSIGN_OR_RETURN(AuditRecord r, AuditVanilla(c.k.value_or(8), c.lambda));
    records.push_back(std::move(r));
  } else {
    ASSIGN_OR_RETURN(AuditRecord r, AuditImproved(c.lambda, c.t));
    records.push_back(std::move(r));
  }
  Output o(c.output, out);
  if (c.format == "table") {
    std::vector<std::vector<std::string>> rows;
    for (const AuditRecord& r : records) {
      rows.push_back({r.variant, absl::StrCat(r.k), FormatDouble(r.lambda),
                      FormatDouble(r.theta), absl::StrCat(r.t),
                      absl::StrFormat("%.10f", r.log_ratio),
                      FormatDouble(r.claimed_bound), r.verdict});
    }
    return o.Write(FormatTable({"variant", "k", "lambda", "theta", "t",
                                "log_ratio", "claimed_bound", "verdict"},
                               rows));
  }
  return o.Write(AuditToJson(records).dump(2) + "\n");
}

// ---- evaluation -------------------------------------------------------------

absl::Status Eval(const RunConfig& c, std::ostream& out, std::ostream& err) {
  RETURN_IF_ERROR(CheckEpsilon(c));
  RETURN_IF_ERROR(Require(c.input.empty() != (c.synthetic_n == 0),
                          "exactly one of --input and --synthetic-n is "
                          "required"));
  RETURN_IF_ERROR(Require(c.synthetic_n >= 0, "--synthetic-n must be >= 0"));
  RETURN_IF_ERROR(Require(c.queries >= 1, "--queries must be at least 1"));
  RETURN_IF_ERROR(Require(c.trials >= 1, "--trials must be at least 1"));
  RETURN_IF_ERROR(Require(c.delta >= 0, "--delta must be >= 0"));
  ASSIGN_OR_RETURN(const SizeClass size_class, ParseSizeClass(c.size_class));
  ASSIGN_OR_RETURN(const int split_dims, SplitDimsFor(c.fanout));
  ASSIGN_OR_RETURN(const std::optional<SpatialDomain> domain,
                   ParseDomain(c.domain));
  WarnNoiseless(c, err);

  std::optional<SpatialDataset> data;
  if (c.synthetic_n > 0) {
    ASSIGN_OR_RETURN(data, GaussianMixture2D(c.synthetic_n,
                                             MixSeed(c.seed ^ 0x5eedULL)));
  } else {
    ASSIGN_OR_RETURN(data, ReadPointsCsvFile(c.input, domain));
  }
  SpatialEvalOptions options;
  options.epsilon = *c.epsilon;
  options.size_class = size_class;
  options.num_queries = c.queries;
  options.trials = c.trials;
  options.jobs = c.jobs;
  options.seed = c.seed;
  options.delta = c.delta;
  options.privtree.theta = c.theta.value_or(0.0);
  options.privtree.budget_split = c.budget_split.value_or(0.5);
  options.privtree.build.depth_cap = c.depth_cap;
  options.privtree.build.split_dims = split_dims;
  options.privtree.build.noiseless = c.noiseless;
  ASSIGN_OR_RETURN(const SpatialEvalSummary summary,
                   EvaluateSpatial(*data, options));
  Output o(c.output, out);
  if (c.format == "table") return o.Write(SpatialEvalToTable(summary));
  return o.Write(SpatialEvalToJson(summary).dump(2) + "\n");
}

using Command = absl::Status (*)(const RunConfig&, std::ostream&,
                                 std::ostream&);

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err) {
  RunConfig c;
  CLI::App app{"Differentially private spatial decompositions, sequence "
               "models, and sparse-vector audits"};
  app.require_subcommand(1);
  app.set_config();  // disable CLI11's own config-file handling

  auto add_common = [&c](CLI::App* s) {
    s->add_option("--config", c.config,
                  "JSON file whose keys override command-line flags");
    s->add_option("--seed", c.seed, "Master RNG seed");
    s->add_option("--format", c.format, "Report format: json or table");
    s->add_option("--output", c.output, "Write the result here, not stdout");
    s->add_flag("--noiseless", c.noiseless,
                "TESTING ONLY: disable all noise (output is NOT private)");
  };
  auto add_privacy = [&c](CLI::App* s) {
    s->add_option("--epsilon", c.epsilon, "Total privacy budget");
    s->add_option("--theta", c.theta, "Split threshold (default 0)");
    s->add_option("--depth-cap", c.depth_cap, "Maximum tree depth");
    s->add_option("--budget-split", c.budget_split,
                  "Share of epsilon spent on the tree structure");
  };

  struct Sub {
    CLI::App* app;
    Command run;
  };
  std::vector<Sub> subs;

  CLI::App* sb = app.add_subcommand("spatial-build", "Release a PrivTree");
  add_common(sb);
  add_privacy(sb);
  sb->add_option("--input", c.input, "Points CSV, one point per line");
  sb->add_option("--domain", c.domain, "lo1,...,lod,hi1,...,hid");
  sb->add_option("--fanout", c.fanout, "Children per split (power of two)");
  subs.push_back({sb, SpatialBuild});

  CLI::App* rq = app.add_subcommand("range-query", "Answer range counts");
  add_common(rq);
  rq->add_option("--tree", c.tree, "Released tree JSON");
  rq->add_option("--workload", c.workload, "Query CSV lo1..lod,hi1..hid");
  rq->add_option("--data", c.data, "Points CSV for relative errors");
  rq->add_option("--delta", c.delta, "Smoothing (default 0.1% of n)");
  subs.push_back({rq, RangeQueryCmd});

  auto add_seq = [&](CLI::App* s) {
    add_common(s);
    add_privacy(s);
    s->add_option("--input", c.input, "Token sequences, one per line");
    s->add_option("--lmax", c.lmax, "Maximum sequence length");
    s->add_option("--alphabet", c.alphabet,
                  "Comma-separated symbols (default: tokens in the input)");
  };
  CLI::App* seqb = app.add_subcommand("seq-build", "Release a private PST");
  add_seq(seqb);
  subs.push_back({seqb, SeqBuild});

  CLI::App* topk = app.add_subcommand("seq-topk", "Top-k frequent strings");
  add_seq(topk);
  topk->add_option("--model", c.model, "Released PST JSON");
  topk->add_option("--k", c.k, "Number of strings (default 10)");
  subs.push_back({topk, SeqTopK});

  CLI::App* synth = app.add_subcommand("seq-synth", "Generate sequences");
  add_seq(synth);
  synth->add_option("--model", c.model, "Released PST JSON");
  synth->add_option("--count", c.count, "Number of sequences to draw");
  subs.push_back({synth, SeqSynth});

  CLI::App* svt = app.add_subcommand("svt-audit", "Audit SVT variants");
  add_common(svt);
  svt->add_option("--variant", c.variant,
                  "all, binary, vanilla or improved");
  svt->add_option("--k", c.k, "Query stream length");
  svt->add_option("--lambda", c.lambda, "Noise scale");
  svt->add_option("--theta", c.theta, "Threshold (binary only)");
  svt->add_option("--t", c.t, "Answer budget (improved only)");
  subs.push_back({svt, SvtAudit});

  CLI::App* ev = app.add_subcommand("eval", "PrivTree vs uniform grid");
  add_common(ev);
  add_privacy(ev);
  ev->add_option("--input", c.input, "Points CSV");
  ev->add_option("--domain", c.domain, "lo1,...,lod,hi1,...,hid");
  ev->add_option("--synthetic-n", c.synthetic_n,
                 "Use n Gaussian-mixture points instead of --input");
  ev->add_option("--fanout", c.fanout, "Children per split (power of two)");
  ev->add_option("--size-class", c.size_class, "small, medium or large");
  ev->add_option("--queries", c.queries, "Queries in the workload");
  ev->add_option("--trials", c.trials, "Seeded trials");
  ev->add_option("--jobs", c.jobs, "Worker threads");
  ev->add_option("--delta", c.delta, "Smoothing (default 0.1% of n)");
  subs.push_back({ev, Eval});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kExitConfigError;
  }

  for (const Sub& s : subs) {
    if (!s.app->parsed()) continue;
    absl::Status status;
    if (!c.config.empty()) status = ApplyConfigFile(c.config, c);
    if (status.ok()) status = CheckCommon(c);
    if (status.ok()) status = s.run(c, out, err);
    if (!status.ok()) {
      err << "error: " << status.message() << "\n";
      return ExitCodeFor(status);
    }
    return kExitOk;
  }
  return kExitConfigError;
}

}  // namespace privtree
