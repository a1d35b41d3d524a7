#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "reco/config.hpp"
#include "reco/curation.hpp"
#include "reco/dedup.hpp"
#include "reco/error.hpp"
#include "reco/evaluation.hpp"
#include "reco/io.hpp"
#include "reco/similarity.hpp"
#include "reco/synth.hpp"
#include "reco/taxonomy.hpp"
#include "reco/trainer.hpp"

namespace fs = std::filesystem;
using namespace reco;

namespace {

struct Common {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";

  RunConfig effective() const {
    RunConfig cfg = config_path.empty() ? RunConfig{} : RunConfig::load(config_path);
    if (seed) cfg.set_seed(*seed);
    return cfg;
  }
};

struct TaxonomyArgs {
  std::string edges;
  std::string nodes;
  Taxonomy load() const { return Taxonomy::load(edges, nodes); }
};

void add_common(CLI::App* cmd, Common& c, bool with_out = true) {
  cmd->add_option("--config", c.config_path, "run configuration file")->check(CLI::ExistingFile);
  cmd->add_option("--seed", c.seed, "overrides the seed from --config");
  if (with_out) cmd->add_option("--out", c.out, "output directory")->required();
}

void add_taxonomy(CLI::App* cmd, TaxonomyArgs& t) {
  cmd->add_option("--edges", t.edges, "parent<TAB>child edge list")->required();
  cmd->add_option("--nodes", t.nodes, "id<TAB>name<TAB>is_class<TAB>image_count<TAB>flags")->required();
}

fs::path prepare_out(const Common& c, const RunConfig& cfg) {
  fs::path dir(c.out);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) fail_config("cannot create output directory " + dir.string() + ": " + ec.message());
  io::write_file_atomic(dir / "effective_config.ini", cfg.to_text());
  return dir;
}

std::vector<std::string> read_id_list(const std::string& path) {
  std::vector<std::string> ids;
  if (path.empty()) return ids;
  for (const auto& line : io::read_lines(path)) {
    auto t = io::trim(line);
    if (t.empty() || t.front() == '#') continue;
    ids.emplace_back(t);
  }
  return ids;
}

std::string join(const std::vector<std::string>& v, const std::string& sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"reco: taxonomy-aware contrastive learning toolkit"};
  app.require_subcommand(1);

  Common common;
  TaxonomyArgs tax_args;

  // taxonomy
  auto* tax_cmd = app.add_subcommand("taxonomy", "load, validate and export class similarity");
  tax_cmd->require_subcommand(1);
  auto* tax_validate = tax_cmd->add_subcommand("validate", "check the DAG and print a summary");
  add_taxonomy(tax_validate, tax_args);
  add_common(tax_validate, common, false);
  auto* tax_sim = tax_cmd->add_subcommand("similarity", "write raw.csv, normalized.csv and accept_prob.csv");
  add_taxonomy(tax_sim, tax_args);
  add_common(tax_sim, common);
  std::string class_list;
  std::string norm_name;
  tax_sim->add_option("--classes", class_list, "file of class ids (default: every leaf)");
  tax_sim->add_option("--normalization", norm_name, "self_ratio|min_max (overrides config)");

  // curate
  auto* cur_cmd = app.add_subcommand("curate", "concept filtering, realm selection, de-duplication");
  cur_cmd->require_subcommand(1);
  auto* cur_filter = cur_cmd->add_subcommand("filter", "apply the concept rules");
  add_taxonomy(cur_filter, tax_args);
  add_common(cur_filter, common);
  auto* cur_realms = cur_cmd->add_subcommand("realms", "select realm subtrees");
  add_taxonomy(cur_realms, tax_args);
  add_common(cur_realms, common);
  std::string candidates_file, excluded_file, valid_file;
  cur_realms->add_option("--candidates", candidates_file, "file of candidate root ids")->required();
  cur_realms->add_option("--excluded", excluded_file, "file of excluded root ids");
  cur_realms->add_option("--valid", valid_file, "file of valid concept ids (default: run filter)");
  auto* cur_dedup = cur_cmd->add_subcommand("dedup", "drop candidates whose DHash matches a reference");
  add_common(cur_dedup, common);
  std::string cand_manifest;
  std::vector<std::string> ref_manifests;
  cur_dedup->add_option("--candidates", cand_manifest, "id,path manifest")->required();
  cur_dedup->add_option("--reference", ref_manifests, "id,path manifest (repeatable)")->required();

  // synth
  auto* syn_cmd = app.add_subcommand("synth", "synthetic hierarchical data");
  syn_cmd->require_subcommand(1);
  auto* syn_gen = syn_cmd->add_subcommand("generate", "write dataset.csv");
  add_taxonomy(syn_gen, tax_args);
  add_common(syn_gen, common);

  // train
  auto* train_cmd = app.add_subcommand("train", "train the encoder");
  add_taxonomy(train_cmd, tax_args);
  add_common(train_cmd, common);
  std::string data_path;
  std::string objective_name;
  train_cmd->add_option("--data", data_path, "dataset.csv")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--objective", objective_name, "overrides train.objective");

  // probe
  auto* probe_cmd = app.add_subcommand("probe", "linear probe per realm");
  add_common(probe_cmd, common);
  std::string checkpoint;
  probe_cmd->add_option("--data", data_path, "dataset.csv")->required()->check(CLI::ExistingFile);
  probe_cmd->add_option("--checkpoint", checkpoint, "encoder checkpoint (default: probe raw features)");

  // report
  auto* report_cmd = app.add_subcommand("report", "accuracy relative to a baseline");
  add_common(report_cmd, common);
  std::string cand_results, base_results, title = "top-1 relative to baseline";
  report_cmd->add_option("--candidate", cand_results, "results.csv")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--baseline", base_results, "results.csv")->required()->check(CLI::ExistingFile);
  report_cmd->add_option("--title", title, "chart title");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "error: " << to_string(ErrorKind::config) << ": " << e.what() << "\n";
    return static_cast<int>(ErrorKind::config);
  }

  try {
    const RunConfig cfg = common.effective();

    if (*tax_validate) {
      const auto tax = tax_args.load();
      std::cout << "nodes " << tax.size() << "\nedges " << tax.edges().size() << "\nroot "
                << tax.node(tax.root()).id << "\nmax_depth " << tax.max_depth() << "\nleaves "
                << tax.leaves().size() << "\n";
    } else if (*tax_sim) {
      const auto tax = tax_args.load();
      auto ids = read_id_list(class_list);
      if (ids.empty()) {
        for (auto l : tax.leaves()) ids.push_back(tax.node(l).id);
      }
      const auto norm = norm_name.empty() ? cfg.train.normalization : parse_normalization(norm_name);
      const auto table = build_similarity_table(tax, ids, norm);
      const auto dir = prepare_out(common, cfg);
      io::write_file_atomic(dir / "raw.csv", matrix_csv(ids, table.raw));
      io::write_file_atomic(dir / "normalized.csv", matrix_csv(ids, table.normalized));
      io::write_file_atomic(dir / "accept_prob.csv", matrix_csv(ids, table.accept_prob));
    } else if (*cur_filter) {
      const auto tax = tax_args.load();
      const auto res = filter_concepts(tax, cfg.curate.min_images);
      const auto dir = prepare_out(common, cfg);
      io::write_file_atomic(dir / "valid.txt", res.valid.empty() ? "" : join(res.valid, "\n") + "\n");
      io::write_file_atomic(dir / "filter_report.csv", filter_report_csv(res));
      std::cout << "valid " << res.valid.size() << "\nrejected " << res.rejected.size() << "\n";
    } else if (*cur_realms) {
      const auto tax = tax_args.load();
      auto valid = valid_file.empty() ? filter_concepts(tax, cfg.curate.min_images).valid : read_id_list(valid_file);
      const auto realms = select_realms(tax, valid, read_id_list(candidates_file), read_id_list(excluded_file),
                                        cfg.curate.min_classes);
      const auto dir = prepare_out(common, cfg);
      io::write_file_atomic(dir / "realms.csv", realms_csv(realms));
    } else if (*cur_dedup) {
      std::vector<std::vector<ManifestEntry>> refs;
      for (const auto& m : ref_manifests) refs.push_back(read_manifest(m));
      DedupOptions opts;
      opts.max_hamming = cfg.curate.max_hamming;
      const auto res = dedup(read_manifest(cand_manifest), refs, opts);
      const auto dir = prepare_out(common, cfg);
      std::string kept = "id\n";
      for (const auto& id : res.kept) kept += id + "\n";
      std::string removed = "id,matched_reference,reason\n";
      for (const auto& r : res.removed) removed += r.id + "," + r.matched_reference + "," + r.reason + "\n";
      io::write_file_atomic(dir / "kept.csv", kept);
      io::write_file_atomic(dir / "removed.csv", removed);
      io::write_file_atomic(dir / "hashes.csv", hashes_csv(res.candidate_hashes));
      for (const auto& w : res.warnings) std::cerr << "warning: " << w << "\n";
      std::cout << "kept " << res.kept.size() << "\nremoved " << res.removed.size() << "\n";
    } else if (*syn_gen) {
      const auto tax = tax_args.load();
      const auto ds = generate(tax, cfg.synth);
      const auto dir = prepare_out(common, cfg);
      io::write_file_atomic(dir / "dataset.csv", ds.to_csv());
    } else if (*train_cmd) {
      RunConfig run = cfg;
      if (!objective_name.empty()) run.train.objective = parse_objective(objective_name);
      const auto tax = tax_args.load();
      const auto ds = SynthDataset::read_csv(data_path);
      const auto res = train(ds, tax, run.train);
      const auto dir = prepare_out(common, run);
      res.encoder.save(dir / "checkpoint.rcl");
      std::string manifest = "objective = " + std::string(to_string(run.train.objective)) + "\n";
      manifest += "seed = " + std::to_string(run.seed) + "\n";
      manifest += "steps = " + std::to_string(res.steps) + "\n";
      manifest += "parameters = " + std::to_string(res.encoder.parameter_count()) + "\n";
      manifest += "final_loss = " + io::format_double(res.history.empty() ? 0.0 : res.history.back()) + "\n";
      io::write_file_atomic(dir / "checkpoint.rcl.manifest", manifest);
      io::write_file_atomic(dir / "loss_history.csv", res.history_csv());
      if (res.centers.rows() > 0) io::write_file_atomic(dir / "centers.csv", matrix_csv(ds.class_ids, res.centers));
    } else if (*probe_cmd) {
      const auto ds = SynthDataset::read_csv(data_path);
      Matrix features = ds.features;
      if (!checkpoint.empty()) {
        const auto enc = Encoder::load(checkpoint);
        if (enc.input_dim() != ds.feature_dim()) fail_data("checkpoint input dimension does not match the dataset");
        features = enc.embed(ds.features);
      }
      const auto results = probe_realms(features, ds, cfg.probe);
      const auto dir = prepare_out(common, cfg);
      io::write_file_atomic(dir / "results.csv", results_csv(results));
    } else if (*report_cmd) {
      const auto report = relative_report(read_results_csv(cand_results), read_results_csv(base_results));
      const auto dir = prepare_out(common, cfg);
      io::write_file_atomic(dir / "deltas.csv", report_csv(report));
      io::write_file_atomic(dir / "deltas.svg", report_svg(report, title));
    }
  } catch (const Error& e) {
    std::cerr << "error: " << to_string(e.kind()) << ": " << e.what() << "\n";
    return static_cast<int>(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << to_string(ErrorKind::data) << ": " << e.what() << "\n";
    return static_cast<int>(ErrorKind::data);
  }
  return 0;
}
