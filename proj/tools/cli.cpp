// Copyright 2026 The ppseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.hpp"

#include <bit>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ppseg/analysis.hpp"
#include "ppseg/error.hpp"
#include "ppseg/fusion.hpp"
#include "ppseg/metrics.hpp"
#include "ppseg/querysim.hpp"
#include "ppseg/report.hpp"
#include "ppseg/segmap.hpp"
#include "ppseg/taxonomy.hpp"

namespace ppseg::cli {
namespace {

namespace fs = std::filesystem;

// Thrown for inputs that do not exist; everything else maps to a format error.
struct MissingInput : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void RequireFile(const std::string& path) {
  if (!fs::is_regular_file(path)) throw MissingInput("no such file: " + path);
}

void RequireDir(const std::string& path) {
  if (!fs::is_directory(path)) throw MissingInput("no such directory: " + path);
}

Taxonomy LoadTaxonomy(const std::string& path) {
  RequireFile(path);
  return LoadTaxonomyFile(path);
}

std::set<std::string> PpsmNames(const std::string& dir) {
  std::set<std::string> names;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".ppsm") {
      names.insert(entry.path().filename().string());
    }
  }
  return names;
}

// Basenames present in every directory; any unpaired file is an error.
std::vector<std::string> PairedNames(const std::vector<std::string>& dirs) {
  for (const std::string& d : dirs) RequireDir(d);
  const std::set<std::string> first = PpsmNames(dirs.front());
  for (std::size_t k = 1; k < dirs.size(); ++k) {
    const std::set<std::string> other = PpsmNames(dirs[k]);
    for (const std::string& name : first) {
      if (!other.count(name)) throw MissingInput("missing pair: " + (fs::path(dirs[k]) / name).string());
    }
    for (const std::string& name : other) {
      if (!first.count(name)) throw MissingInput("missing pair: " + (fs::path(dirs[0]) / name).string());
    }
  }
  return {first.begin(), first.end()};
}

std::vector<PanopticPartMap> LoadMaps(const std::string& dir, const std::vector<std::string>& names) {
  std::vector<PanopticPartMap> maps;
  maps.reserve(names.size());
  for (const std::string& name : names) maps.push_back(ReadPpsmFile((fs::path(dir) / name).string()));
  return maps;
}

void WriteText(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << text;
    return;
  }
  std::ofstream file(path, std::ios::binary);
  if (!file) throw MissingInput("cannot write " + path);
  file << text;
}

std::uint64_t Fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void AppendF32(std::vector<std::uint8_t>& blob, const Eigen::MatrixXd& m) {
  // Row-major order regardless of Eigen's storage.
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(m(i, j)));
      for (int b = 0; b < 4; ++b) blob.push_back(static_cast<std::uint8_t>(bits >> (8 * b)));
    }
  }
}

std::string Hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string Summary(const MetricReport& r) {
  auto field = [](const char* name, const std::optional<double>& v) {
    return std::string(name) + " " + (v ? FormatPercent(*v) : std::string("n/a"));
  };
  return field("PQ", r.pq_all) + "  " + field("PartPQ", r.partpq_all) + "  " +
         field("PartPQ_P", r.partpq_p) + "  " + field("PWQ", r.pwq) + "  (" +
         std::to_string(r.image_count) + " images)\n";
}

struct EvalFlags {
  bool no_void_fp_rule = false;
  bool miou_full_label_set = false;

  EvalConfig Config() const { return {!no_void_fp_rule, miou_full_label_set}; }
};

void AddEvalFlags(CLI::App* cmd, EvalFlags& flags) {
  cmd->add_flag("--count-void-fp", flags.no_void_fp_rule,
                "Count unmatched predictions lying mostly on void as false positives");
  cmd->add_flag("--miou-full-label-set", flags.miou_full_label_set,
                "Average mIoU over every taxonomy label, absent ones scoring 0");
}

struct FusionFlags {
  bool keep_mismatched = false;
  bool void_unlabeled = false;

  FusionConfig Config() const { return {!keep_mismatched, !void_unlabeled}; }
};

void AddFusionFlags(CLI::App* cmd, FusionFlags& flags) {
  cmd->add_flag("--keep-mismatched-parts", flags.keep_mismatched,
                "Drop the part id instead of voiding pixels whose part class disagrees");
  cmd->add_flag("--void-unlabeled-parts", flags.void_unlabeled,
                "Void pixels of part-bearing instances that received no part label");
}

}  // namespace

int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Panoptic part segmentation evaluation and decoder simulation", "ppseg"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  // evaluate
  std::string gt_dir, pred_dir, taxonomy_path, out_path;
  unsigned threads = 1;
  EvalFlags eval_flags;
  CLI::App* evaluate = app.add_subcommand("evaluate", "Score predictions against ground truth");
  evaluate->add_option("--gt", gt_dir, "Directory of ground-truth .ppsm maps")->required();
  evaluate->add_option("--pred", pred_dir, "Directory of predicted .ppsm maps")->required();
  evaluate->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON")->required();
  evaluate->add_option("--out", out_path, "Report path (stdout when omitted)");
  evaluate->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  AddEvalFlags(evaluate, eval_flags);

  // merge
  std::string panoptic_path, parts_path;
  FusionFlags fusion_flags;
  CLI::App* merge = app.add_subcommand("merge", "Fuse a panoptic map with a part map");
  merge->add_option("--panoptic", panoptic_path, "Panoptic .ppsm without part ids")->required();
  merge->add_option("--parts", parts_path, "Part .ppsm (uids sid*100000+pid)")->required();
  merge->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON")->required();
  merge->add_option("--out", out_path, "Fused .ppsm")->required();
  AddFusionFlags(merge, fusion_flags);

  // oracle
  std::string pred_panoptic_dir, pred_part_dir;
  CLI::App* oracle = app.add_subcommand("oracle", "Upper-bound analysis with GT substitution");
  oracle->add_option("--gt", gt_dir, "Directory of ground-truth .ppsm maps")->required();
  oracle->add_option("--pred-panoptic", pred_panoptic_dir, "Directory of panoptic predictions")
      ->required();
  oracle->add_option("--pred-part", pred_part_dir, "Directory of part predictions")->required();
  oracle->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON")->required();
  oracle->add_option("--out", out_path, "Report path (stdout when omitted)");
  oracle->add_option("--threads", threads, "Worker threads")->check(CLI::Range(1u, 1024u));
  AddEvalFlags(oracle, eval_flags);
  AddFusionFlags(oracle, fusion_flags);

  // split
  std::string map_path, panoptic_out, parts_out;
  CLI::App* split = app.add_subcommand("split", "Split a map into panoptic and part components");
  split->add_option("--map", map_path, "Input .ppsm")->required();
  split->add_option("--taxonomy", taxonomy_path, "Taxonomy JSON")->required();
  split->add_option("--panoptic-out", panoptic_out, "Panoptic component .ppsm")->required();
  split->add_option("--parts-out", parts_out, "Part component .ppsm")->required();

  // simulate
  sim::SimulationConfig sim_config;
  std::string queries = "8,8,8", arch = "v2", dump_prefix;
  bool no_part_cross = false, no_positional_keys = false, binarized = false;
  CLI::App* simulate = app.add_subcommand("simulate", "Run the query decoder on synthetic features");
  simulate->add_option("--seed", sim_config.seed, "Random seed");
  simulate->add_option("--height", sim_config.height, "Feature height")->capture_default_str();
  simulate->add_option("--width", sim_config.width, "Feature width")->capture_default_str();
  simulate->add_option("--dim", sim_config.dim, "Channels")->capture_default_str();
  simulate->add_option("--heads", sim_config.heads, "Attention heads")->capture_default_str();
  simulate->add_option("--classes", sim_config.num_classes, "Class logits per query")
      ->capture_default_str();
  simulate->add_option("--queries", queries, "Thing,stuff,part query counts")->capture_default_str();
  simulate->add_option("--stages", sim_config.stages, "Decoder stages")->capture_default_str();
  simulate->add_option("--arch", arch, "Decoder variant")->check(CLI::IsMember({"v1", "v2"}));
  simulate->add_flag("--no-part-cross", no_part_cross, "Skip the part cross-attention step (v2)");
  simulate->add_flag("--no-positional-keys", no_positional_keys,
                     "Do not add positional encoding to attention keys (v2)");
  simulate->add_flag("--binarized-grouping", binarized, "Hard 0.5 mask grouping (v1)");
  simulate->add_option("--dump", dump_prefix, "Write PREFIX.json and PREFIX.bin tensors");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForVersion& e) {
    out << kToolVersion << "\n";
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ppseg: " << e.what() << "\n";
    return kExitUsage;
  }

  try {
    if (evaluate->parsed()) {
      const Taxonomy taxonomy = LoadTaxonomy(taxonomy_path);
      const std::vector<std::string> names = PairedNames({gt_dir, pred_dir});
      const std::vector<PanopticPartMap> gt = LoadMaps(gt_dir, names);
      const std::vector<PanopticPartMap> pred = LoadMaps(pred_dir, names);
      const EvalConfig config = eval_flags.Config();
      const MetricAccumulator acc = EvaluateDataset(gt, pred, taxonomy, config, threads);
      const MetricReport report = BuildReport(acc, taxonomy, config);
      WriteText(out_path, ReportToJson(MakeReportDocument(report, taxonomy, config)), out);
      if (!out_path.empty() && out_path != "-") out << Summary(report);
      return kExitOk;
    }

    if (merge->parsed()) {
      const Taxonomy taxonomy = LoadTaxonomy(taxonomy_path);
      RequireFile(panoptic_path);
      RequireFile(parts_path);
      const PanopticPartMap fused =
          MergePanopticParts(ReadPpsmFile(panoptic_path), ReadPpsmFile(parts_path), taxonomy,
                             fusion_flags.Config());
      WritePpsmFile(out_path, fused);
      return kExitOk;
    }

    if (oracle->parsed()) {
      const Taxonomy taxonomy = LoadTaxonomy(taxonomy_path);
      const std::vector<std::string> names =
          PairedNames({gt_dir, pred_panoptic_dir, pred_part_dir});
      const std::vector<PanopticPartMap> gt = LoadMaps(gt_dir, names);
      const std::vector<PanopticPartMap> panoptic = LoadMaps(pred_panoptic_dir, names);
      std::vector<PartLabelGrid> parts;
      for (const PanopticPartMap& m : LoadMaps(pred_part_dir, names)) {
        parts.push_back(PartLabelGrid::FromMap(m));
      }
      const EvalConfig config = eval_flags.Config();
      const std::vector<OracleRun> runs =
          RunOracle(gt, panoptic, parts, taxonomy, config, fusion_flags.Config(), threads);
      WriteText(out_path, OracleToJson(runs, taxonomy, config), out);
      if (!out_path.empty() && out_path != "-") {
        for (const OracleRun& run : runs) out << OracleSettingName(run.setting) << ": " << Summary(run.report);
      }
      return kExitOk;
    }

    if (split->parsed()) {
      const Taxonomy taxonomy = LoadTaxonomy(taxonomy_path);
      RequireFile(map_path);
      const MapComponents parts = SplitComponents(ReadPpsmFile(map_path), taxonomy);
      WritePpsmFile(panoptic_out, parts.panoptic);
      WritePpsmFile(parts_out, parts.parts.ToMap(taxonomy.void_uid()));
      return kExitOk;
    }

    if (simulate->parsed()) {
      std::vector<int> counts;
      std::stringstream ss(queries);
      for (std::string item; std::getline(ss, item, ',');) {
        try {
          counts.push_back(std::stoi(item));
        } catch (const std::exception&) {
          throw UsageError("--queries expects three integers, got '" + queries + "'");
        }
      }
      if (counts.size() != 3 || counts[0] < 0 || counts[1] < 0 || counts[2] < 0) {
        throw UsageError("--queries expects three non-negative counts, got '" + queries + "'");
      }
      sim_config.n_thing = counts[0];
      sim_config.n_stuff = counts[1];
      sim_config.n_part = counts[2];
      if (sim_config.height <= 0 || sim_config.width <= 0 || sim_config.dim <= 0 ||
          sim_config.heads <= 0 || sim_config.num_classes <= 0 || sim_config.stages < 0) {
        throw UsageError("dimensions must be positive");
      }
      if (sim_config.dim % 2 != 0) throw UsageError("--dim must be even");
      if (sim_config.dim % sim_config.heads != 0) throw UsageError("--dim must be divisible by --heads");
      sim_config.arch = arch == "v1" ? sim::Arch::kV1 : sim::Arch::kV2;
      sim_config.enable_part_cross = !no_part_cross;
      sim_config.positional_keys = !no_positional_keys;
      sim_config.grouping = binarized ? sim::GroupingMode::kBinarized : sim::GroupingMode::kSoft;

      const std::vector<sim::InvariantCheck> checks = sim::CheckInvariants(sim_config);
      bool ok = true;
      for (const sim::InvariantCheck& c : checks) {
        ok = ok && c.passed;
        char line[256];
        std::snprintf(line, sizeof(line), "%-26s %s  (worst %.3g, tolerance %.3g)", c.name.c_str(),
                      c.passed ? "pass" : "FAIL", c.value, c.tolerance);
        out << line;
        if (!c.note.empty()) out << "  " << c.note;
        out << "\n";
      }

      const sim::SimulationResult run = sim::RunSimulation(sim_config);
      const sim::DecoderState& last = run.states.back();
      std::vector<std::uint8_t> blob;
      AppendF32(blob, last.queries.rows);
      const std::size_t masks_offset = blob.size();
      AppendF32(blob, last.masks.logits);
      const std::size_t classes_offset = blob.size();
      AppendF32(blob, run.class_logits);
      out << "checksum " << Hex16(Fnv1a(blob)) << "\n";

      if (!dump_prefix.empty()) {
        const long n = last.queries.size();
        std::ostringstream header;
        header << "{\n  \"dtype\": \"float32\",\n  \"byte_order\": \"little\",\n"
               << "  \"sections\": [" << sim_config.n_thing << ", " << sim_config.n_stuff << ", "
               << sim_config.n_part << "],\n  \"tensors\": [\n"
               << "    {\"name\": \"queries\", \"shape\": [" << n << ", " << sim_config.dim
               << "], \"offset\": 0},\n"
               << "    {\"name\": \"mask_logits\", \"shape\": [" << n << ", " << sim_config.height
               << ", " << sim_config.width << "], \"offset\": " << masks_offset << "},\n"
               << "    {\"name\": \"class_logits\", \"shape\": [" << n << ", "
               << sim_config.num_classes << "], \"offset\": " << classes_offset << "}\n  ],\n"
               << "  \"checksum\": \"" << Hex16(Fnv1a(blob)) << "\"\n}\n";
        WriteText(dump_prefix + ".json", header.str(), out);
        std::ofstream bin(dump_prefix + ".bin", std::ios::binary);
        if (!bin) throw MissingInput("cannot write " + dump_prefix + ".bin");
        bin.write(reinterpret_cast<const char*>(blob.data()), static_cast<std::streamsize>(blob.size()));
      }
      return ok ? kExitOk : kExitInvariant;
    }
  } catch (const MissingInput& e) {
    err << "ppseg: " << e.what() << "\n";
    return kExitMissingInput;
  } catch (const UsageError& e) {
    err << "ppseg: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "ppseg: " << e.what() << "\n";
    return kExitFormat;
  }
  return kExitUsage;
}

}  // namespace ppseg::cli
