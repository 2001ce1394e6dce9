// moltx: adversarial transfer learning for compound bioactivity, with a
// bioassay pairing pipeline, compound prioritization, and gradient
// diagnostics. Subcommands: synth, pair, train, eval, rank, gradcheck.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "moltx/checkpoint.hpp"
#include "moltx/experiment.hpp"
#include "moltx/gradcheck.hpp"
#include "moltx/kernels.hpp"
#include "moltx/pairing.hpp"

namespace {

using namespace moltx;

void apply_kernel_choice(const std::string& choice) {
  if (choice == "scalar") kernels::force(kernels::Backend::kScalar);
  else if (choice == "avx2") kernels::force(kernels::Backend::kAvx2);
  // "auto": keep the detected backend.
}

int cmd_synth(const std::string& motif_smiles, std::uint64_t seed,
              int n_active, int n_inactive, double overlap,
              const std::string& out_source, const std::string& out_target,
              const std::string& mode, int n_rank,
              const std::string& out_rank) {
  MolecularGraph motif = parse_smiles(motif_smiles);
  if (mode == "rank") {
    Dataset data = synth_generate_ranking(seed, n_rank, motif);
    save_dataset(out_rank, data);
    std::printf("wrote %zu ranking records to %s\n", data.size(),
                out_rank.c_str());
    return 0;
  }
  SynthPair pair = synth_generate(seed, n_active, n_inactive, motif, overlap);
  save_dataset(out_source, pair.source);
  save_dataset(out_target, pair.target);
  std::printf("wrote %zu source and %zu target records\n",
              pair.source.size(), pair.target.size());
  return 0;
}

int cmd_pair(const std::vector<std::string>& assay_paths,
             const std::vector<std::string>& families,
             const std::string& pool_path, std::uint64_t seed, int radius,
             int dim, double margin, int min_actives,
             const std::string& out_dir) {
  std::vector<Assay> assays;
  for (std::size_t i = 0; i < assay_paths.size(); ++i) {
    Assay a;
    a.id = std::filesystem::path(assay_paths[i]).stem().string();
    if (i < families.size() && !families[i].empty()) a.family = families[i];
    a.records = load_dataset(assay_paths[i]);
    assays.push_back(dedup_assay(a));
  }
  Dataset pool;
  if (!pool_path.empty()) pool = load_dataset(pool_path);

  std::filesystem::create_directories(out_dir);
  std::map<PairKey, PairProfile> profiles;
  nlohmann::json pair_rows = nlohmann::json::array();
  std::size_t pair_index = 0;
  for (std::size_t i = 0; i < assays.size(); ++i) {
    for (std::size_t j = i + 1; j < assays.size(); ++j, ++pair_index) {
      if (assays[i].family && assays[j].family &&
          *assays[i].family != *assays[j].family)
        continue;
      const std::uint64_t pair_seed = Rng::derive(seed, pair_index);
      auto [a, b] = resolve_pair(assays[i], assays[j], pair_seed);
      a = balance_assay(a, pool, Rng::derive(pair_seed, 1));
      b = balance_assay(b, pool, Rng::derive(pair_seed, 2));

      auto actives = [](const Assay& x) {
        std::size_t n = 0;
        for (const auto& r : x.records) n += r.label() == 1;
        return n;
      };
      if (actives(a) < static_cast<std::size_t>(min_actives) ||
          actives(b) < static_cast<std::size_t>(min_actives))
        continue;

      PairProfile pr = profile(a, b, radius, dim);
      profiles[{a.id, b.id}] = pr;

      const std::string stem = a.id + "__" + b.id;
      save_dataset((std::filesystem::path(out_dir) / (stem + "." + a.id +
                                                      ".jsonl")).string(),
                   a.records);
      save_dataset((std::filesystem::path(out_dir) / (stem + "." + b.id +
                                                      ".jsonl")).string(),
                   b.records);
      pair_rows.push_back({{"a", a.id},
                           {"b", b.id},
                           {"profile",
                            {{"sim_pp", pr.sim_pp},
                             {"sim_nn", pr.sim_nn},
                             {"sim_pn", pr.sim_pn},
                             {"sim_np", pr.sim_np}}},
                           {"margin_sum", pr.margin_sum()}});
    }
  }

  PairSelection sel = select_pairs(profiles, margin);
  auto contains = [](const std::vector<PairKey>& keys, const std::string& a,
                     const std::string& b) {
    for (const auto& k : keys)
      if (k.first == a && k.second == b) return true;
    return false;
  };
  for (auto& row : pair_rows) {
    const std::string a = row.at("a"), b = row.at("b");
    row["in_p0"] = contains(sel.p0, a, b);
    row["selected"] = contains(sel.p, a, b);
  }

  nlohmann::json manifest;
  manifest["margin"] = margin;
  manifest["average_margin_p0"] = sel.average_margin;
  manifest["pairs"] = pair_rows;
  std::ofstream out(std::filesystem::path(out_dir) / "manifest.json",
                    std::ios::trunc);
  out << manifest.dump(2) << "\n";
  std::printf("profiled %zu pairs; |P0| = %zu, |P| = %zu\n",
              profiles.size(), sel.p0.size(), sel.p.size());
  return 0;
}

int cmd_train(const ExperimentSpec& spec) {
  CvReport report = run_cv(spec);
  std::printf("%-8s %-6s %-7s %-4s %-4s %-10s %s\n", "variant", "alpha",
              "lambda", "d", "tau", "pooling", "roc_auc (mean+/-std)");
  for (const auto& row : report.rows) {
    const auto& s = row.summary.at("roc_auc");
    std::printf("%-8s %-6g %-7g %-4d %-4d %-10s %.4f +/- %.4f\n",
                row.cell.variant.c_str(), row.cell.alpha, row.cell.lambda,
                row.cell.d, row.cell.tau, row.cell.pooling.c_str(), s.mean,
                s.stddev);
  }
  return 0;
}

int cmd_eval(const std::string& ckpt_path, const std::string& data_path,
             const std::string& out_path, double threshold) {
  Checkpoint ck = load_checkpoint(ckpt_path);
  Dataset data = load_dataset(data_path);

  std::vector<double> scores;
  const std::string kind = ck.meta.at("kind").get<std::string>();
  if (kind == "transfer") {
    TransferModel model = transfer_model_from_meta(ck.meta);
    model.params.assign_values(ck.params);
    scores = predict_scores(model, data);
  } else if (kind == "baseline") {
    BaselineModel model = baseline_model_from_meta(ck.meta);
    model.params.assign_values(ck.params);
    scores = predict_scores(model, data);
  } else {
    throw Error("eval: unsupported checkpoint kind: " + kind);
  }

  std::vector<int> labels;
  for (const auto& rec : data) labels.push_back(rec.label());
  nlohmann::json j = classification_metrics(scores, labels, threshold);
  j["n"] = data.size();
  j["threshold"] = threshold;
  const std::string text = j.dump(2) + "\n";
  if (out_path.empty()) {
    std::fputs(text.c_str(), stdout);
  } else {
    std::ofstream out(out_path, std::ios::trunc);
    out << text;
  }
  return 0;
}

int cmd_rank(const RankExperimentSpec& spec) {
  RankCvReport report = run_rank_cv(spec);
  for (const auto& [features, ms] : report.overall) {
    std::printf("%s:", features.c_str());
    for (const auto& [k, v] : ms) std::printf(" %s=%.4f", k.c_str(), v);
    std::printf("\n");
  }
  return 0;
}

int cmd_gradcheck(std::uint64_t seed, double tol, bool inject_grl_bug) {
  GradCheckOptions opts;
  opts.seed = seed;
  opts.tol = tol;
  opts.inject_grl_bug = inject_grl_bug;
  const auto results = run_gradcheck_suites(opts);
  bool ok = true;
  std::printf("%-28s %-14s %s\n", "loss", "max_rel_err", "status");
  for (const auto& r : results) {
    std::printf("%-28s %-14.3e %s\n", r.name.c_str(), r.max_rel_err,
                r.pass ? "pass" : "FAIL");
    ok &= r.pass;
  }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"adversarial transfer learning for compound bioactivity"};
  app.require_subcommand(1);
  app.set_config("--config", "", "read options from an INI/TOML file");

  std::string kernel_choice = "auto";
  app.add_option("--kernels", kernel_choice,
                 "dense kernel backend: auto|scalar|avx2")
      ->check(CLI::IsMember({"auto", "scalar", "avx2"}));

  // synth
  auto* synth = app.add_subcommand("synth", "generate benchmark datasets");
  std::string motif = "C(=O)O";
  std::uint64_t synth_seed = 7;
  int n_active = 50, n_inactive = 50, n_rank = 40;
  double overlap = 1.0;
  std::string out_source = "source.jsonl", out_target = "target.jsonl";
  std::string synth_mode = "classify", out_rank = "ranking.jsonl";
  synth->add_option("--motif", motif, "planted motif SMILES");
  synth->add_option("--seed", synth_seed);
  synth->add_option("--n-active", n_active);
  synth->add_option("--n-inactive", n_inactive);
  synth->add_option("--overlap", overlap,
                    "shared fraction of scaffold vocabulary");
  synth->add_option("--out-source", out_source);
  synth->add_option("--out-target", out_target);
  synth->add_option("--mode", synth_mode, "classify|rank")
      ->check(CLI::IsMember({"classify", "rank"}));
  synth->add_option("--n-rank", n_rank, "ranking dataset size");
  synth->add_option("--out-rank", out_rank);

  // pair
  auto* pair = app.add_subcommand("pair", "bioassay pairing pipeline");
  std::vector<std::string> assay_paths, families;
  std::string pool_path, pair_out = "pairs";
  std::uint64_t pair_seed = 0;
  int pair_radius = 3, pair_dim = 2048, min_actives = 1;
  double margin = 0.026;
  pair->add_option("--assay", assay_paths, "assay JSONL (repeatable)")
      ->required();
  pair->add_option("--family", families,
                   "protein-family tag per assay (positional match)");
  pair->add_option("--pool", pool_path, "extra inactive pool JSONL");
  pair->add_option("--seed", pair_seed);
  pair->add_option("--radius", pair_radius);
  pair->add_option("--dim", pair_dim);
  pair->add_option("--margin", margin, "selection margin for P");
  pair->add_option("--min-actives", min_actives);
  pair->add_option("--out-dir", pair_out);

  // train
  auto* train = app.add_subcommand("train", "10-fold 1:1:8 CV grid search");
  ExperimentSpec spec;
  train->add_option("--source", spec.source_path)->required();
  train->add_option("--target", spec.target_path)->required();
  train->add_option("--variant", spec.variants,
                    "TAc|TAc-f|TAc-c|TAc-fc|DANN|NoT|DT (repeatable)");
  train->add_option("--baseline-features", spec.baseline_features,
                    "encoder|morgan|morgan-c for NoT/DT rows");
  train->add_option("--alpha", spec.alpha_grid);
  train->add_option("--lambda", spec.lambda_grid);
  train->add_option("--d", spec.d_grid);
  train->add_option("--tau", spec.tau_grid);
  train->add_option("--pooling", spec.pooling_grid, "mean|attention");
  train->add_option("--folds", spec.folds);
  train->add_option("--epochs", spec.epochs);
  train->add_option("--batch-size", spec.batch_size);
  train->add_option("--lr-start", spec.lr_start);
  train->add_option("--lr-end", spec.lr_end);
  train->add_option("--classifier-hidden", spec.classifier_hidden);
  train->add_option("--disc-hidden", spec.disc_hidden);
  train->add_option("--attn-hidden", spec.attn_hidden);
  train->add_option("--fp-radius", spec.fp_radius);
  train->add_option("--fp-dim", spec.fp_dim);
  train->add_option("--seed", spec.seed);
  train->add_option("--jobs", spec.jobs);
  train->add_option("--out-dir", spec.out_dir)->required();
  train->add_flag("--save-checkpoints", spec.save_checkpoints);
  train->add_flag("--epoch-logs", spec.write_epoch_logs);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt_path, eval_data, eval_out;
  double threshold = 0.5;
  eval->add_option("--ckpt", ckpt_path)->required();
  eval->add_option("--data", eval_data)->required();
  eval->add_option("--out", eval_out, "metrics JSON path (default stdout)");
  eval->add_option("--threshold", threshold);

  // rank
  auto* rank = app.add_subcommand("rank", "5-fold ranking CV");
  RankExperimentSpec rspec;
  rank->add_option("--data", rspec.data_paths, "ranking JSONL (repeatable)")
      ->required();
  rank->add_option("--features", rspec.features,
                   "dmpna|dmpn|morgan|morgan-c (repeatable)");
  rank->add_option("--d", rspec.d_grid);
  rank->add_option("--tau", rspec.tau_grid);
  rank->add_option("--attn-hidden", rspec.attn_hidden_grid);
  rank->add_option("--lr", rspec.lr_grid);
  rank->add_option("--k", rspec.ks);
  rank->add_option("--k-percent", rspec.k_percents);
  rank->add_option("--folds", rspec.folds);
  rank->add_option("--epochs", rspec.epochs);
  rank->add_option("--batch-size", rspec.batch_size);
  rank->add_option("--l2-lambda", rspec.l2_lambda);
  rank->add_option("--fp-radius", rspec.fp_radius);
  rank->add_option("--fp-dim", rspec.fp_dim);
  rank->add_option("--seed", rspec.seed);
  rank->add_option("--jobs", rspec.jobs);
  rank->add_option("--out-dir", rspec.out_dir);

  // gradcheck
  auto* gradcheck = app.add_subcommand(
      "gradcheck", "finite-difference checks for every exported loss");
  std::uint64_t gc_seed = 20240501;
  double gc_tol = 1e-4;
  bool inject_grl_bug = false;
  gradcheck->add_option("--seed", gc_seed);
  gradcheck->add_option("--tol", gc_tol);
  gradcheck->add_flag("--inject-grl-bug", inject_grl_bug,
                      "diagnostic: remove the gradient reversal");

  CLI11_PARSE(app, argc, argv);
  apply_kernel_choice(kernel_choice);

  try {
    if (synth->parsed())
      return cmd_synth(motif, synth_seed, n_active, n_inactive, overlap,
                       out_source, out_target, synth_mode, n_rank, out_rank);
    if (pair->parsed())
      return cmd_pair(assay_paths, families, pool_path, pair_seed,
                      pair_radius, pair_dim, margin, min_actives, pair_out);
    if (train->parsed()) return cmd_train(spec);
    if (eval->parsed())
      return cmd_eval(ckpt_path, eval_data, eval_out, threshold);
    if (rank->parsed()) return cmd_rank(rspec);
    if (gradcheck->parsed())
      return cmd_gradcheck(gc_seed, gc_tol, inject_grl_bug);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  }
  return 0;
}
