#include "moltx/experiment.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <mutex>
#include <set>
#include <fstream>
#include <thread>

#include "moltx/checkpoint.hpp"
#include "moltx/metrics.hpp"
#include "moltx/rng.hpp"

namespace moltx {

namespace {

std::string fmt(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", x);
  return buf;
}

std::string fmtg(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%g", x);
  return buf;
}

}  // namespace

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (n == 0) return;
  const std::size_t workers =
      std::min<std::size_t>(std::max(jobs, 1), n);
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr error;
  std::mutex error_mu;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mu);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<int> stratified_folds(const Dataset& records, int k,
                                  std::uint64_t seed) {
  if (k < 2) throw Error("stratified_folds: k must be >= 2");
  std::vector<std::size_t> pos, neg;
  for (std::size_t i = 0; i < records.size(); ++i)
    (records[i].label() == 1 ? pos : neg).push_back(i);
  if (pos.size() < static_cast<std::size_t>(k) ||
      neg.size() < static_cast<std::size_t>(k))
    throw Error("stratified_folds: fewer than " + std::to_string(k) +
                " compounds in a class");
  std::vector<int> fold(records.size(), -1);
  Rng rng(Rng::derive(seed, 0x666f6c64));
  for (auto* cls : {&pos, &neg}) {
    rng.shuffle(*cls);
    for (std::size_t i = 0; i < cls->size(); ++i)
      fold[(*cls)[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  }
  return fold;
}

std::vector<int> random_folds(std::size_t n, int k, std::uint64_t seed) {
  if (k < 2) throw Error("random_folds: k must be >= 2");
  if (n < static_cast<std::size_t>(k))
    throw Error("random_folds: fewer records than folds");
  std::vector<std::size_t> idx(n);
  for (std::size_t i = 0; i < n; ++i) idx[i] = i;
  Rng rng(Rng::derive(seed, 0x72666f6c));
  rng.shuffle(idx);
  std::vector<int> fold(n, -1);
  for (std::size_t i = 0; i < n; ++i)
    fold[idx[i]] = static_cast<int>(i % static_cast<std::size_t>(k));
  return fold;
}

std::map<std::string, double> classification_metrics(
    const std::vector<double>& scores, const std::vector<int>& labels,
    double threshold) {
  metrics::BinaryEval e{scores, labels};
  const auto cm = metrics::confusion_metrics(e, threshold);
  return {
      {"accuracy", cm.accuracy},
      {"f1", cm.f1},
      {"pr_auc", metrics::pr_auc(e)},
      {"precision", cm.precision},
      {"roc_auc", metrics::roc_auc(e)},
      {"sensitivity", cm.sensitivity},
  };
}

nlohmann::json ExperimentSpec::to_json() const {
  return {
      {"source", source_path},
      {"target", target_path},
      {"variants", variants},
      {"baseline_features", baseline_features},
      {"alpha_grid", alpha_grid},
      {"lambda_grid", lambda_grid},
      {"d_grid", d_grid},
      {"tau_grid", tau_grid},
      {"pooling_grid", pooling_grid},
      {"folds", folds},
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"lr_start", lr_start},
      {"lr_end", lr_end},
      {"classifier_hidden", classifier_hidden},
      {"disc_hidden", disc_hidden},
      {"attn_hidden", attn_hidden},
      {"fp_radius", fp_radius},
      {"fp_dim", fp_dim},
      {"seed", seed},
  };
}

nlohmann::json transfer_meta(const TransferConfig& cfg) {
  return {
      {"kind", "transfer"},
      {"variant", variant_name(cfg.variant)},
      {"alpha", cfg.alpha},
      {"lambda", cfg.lambda},
      {"d", cfg.encoder.d},
      {"tau", cfg.encoder.tau},
      {"pooling", pooling_name(cfg.encoder.pooling)},
      {"attn_hidden", cfg.encoder.attn_hidden},
      {"atom_width", cfg.encoder.atom_width},
      {"bond_width", cfg.encoder.bond_width},
      {"classifier_hidden", cfg.classifier_hidden},
      {"disc_hidden", cfg.disc_hidden},
      {"seed", cfg.seed},
  };
}

namespace {

EncoderConfig encoder_from_meta(const nlohmann::json& meta) {
  EncoderConfig enc;
  enc.d = meta.at("d").get<int>();
  enc.tau = meta.at("tau").get<int>();
  auto pooling = pooling_from_name(meta.at("pooling").get<std::string>());
  if (!pooling) throw Error("checkpoint: unknown pooling");
  enc.pooling = *pooling;
  enc.attn_hidden = meta.at("attn_hidden").get<int>();
  enc.atom_width = meta.at("atom_width").get<int>();
  enc.bond_width = meta.at("bond_width").get<int>();
  if (enc.atom_width != AtomFeatures::kWidth ||
      enc.bond_width != BondFeatures::kWidth)
    throw Error(
        "checkpoint feature widths do not match this build "
        "(checkpoint " +
        std::to_string(enc.atom_width) + "/" +
        std::to_string(enc.bond_width) + ", build " +
        std::to_string(AtomFeatures::kWidth) + "/" +
        std::to_string(BondFeatures::kWidth) + ")");
  return enc;
}

}  // namespace

TransferModel transfer_model_from_meta(const nlohmann::json& meta) {
  TransferConfig cfg;
  auto variant = variant_from_name(meta.at("variant").get<std::string>());
  if (!variant) throw Error("checkpoint: unknown variant");
  cfg.variant = *variant;
  cfg.alpha = meta.at("alpha").get<double>();
  cfg.lambda = meta.at("lambda").get<double>();
  cfg.encoder = encoder_from_meta(meta);
  cfg.classifier_hidden = meta.at("classifier_hidden").get<int>();
  cfg.disc_hidden = meta.at("disc_hidden").get<int>();
  cfg.seed = meta.at("seed").get<std::uint64_t>();
  return TransferModel::make(cfg);
}

nlohmann::json baseline_meta(const BaselineConfig& cfg) {
  return {
      {"kind", "baseline"},
      {"features", baseline_features_name(cfg.features)},
      {"mode", cfg.mode == BaselineMode::kNoT ? "NoT" : "DT"},
      {"fp_radius", cfg.fp_radius},
      {"fp_dim", cfg.fp_dim},
      {"d", cfg.encoder.d},
      {"tau", cfg.encoder.tau},
      {"pooling", pooling_name(cfg.encoder.pooling)},
      {"attn_hidden", cfg.encoder.attn_hidden},
      {"atom_width", cfg.encoder.atom_width},
      {"bond_width", cfg.encoder.bond_width},
      {"classifier_hidden", cfg.classifier_hidden},
      {"seed", cfg.seed},
  };
}

BaselineModel baseline_model_from_meta(const nlohmann::json& meta) {
  BaselineConfig cfg;
  auto features =
      baseline_features_from_name(meta.at("features").get<std::string>());
  if (!features) throw Error("checkpoint: unknown baseline features");
  cfg.features = *features;
  cfg.mode = meta.at("mode").get<std::string>() == "DT" ? BaselineMode::kDT
                                                        : BaselineMode::kNoT;
  cfg.fp_radius = meta.at("fp_radius").get<int>();
  cfg.fp_dim = meta.at("fp_dim").get<int>();
  cfg.encoder = encoder_from_meta(meta);
  cfg.classifier_hidden = meta.at("classifier_hidden").get<int>();
  cfg.seed = meta.at("seed").get<std::uint64_t>();
  return BaselineModel::make(cfg);
}

namespace {

struct RotationSplit {
  Dataset train, val, test;
};

RotationSplit rotation_split(const Dataset& records,
                             const std::vector<int>& fold, int rotation,
                             int k) {
  RotationSplit out;
  const int val_fold = (rotation + 1) % k;
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (fold[i] == rotation) out.train.push_back(records[i]);
    else if (fold[i] == val_fold) out.val.push_back(records[i]);
    else out.test.push_back(records[i]);
  }
  return out;
}

struct CellTaskResult {
  std::map<std::string, double> metrics;
  std::vector<EpochStats> history;
};

bool is_baseline_variant(const std::string& v) {
  return v == "NoT" || v == "DT";
}

CellTaskResult run_cell_rotation(const ExperimentSpec& spec,
                                 const CellConfig& cell,
                                 std::size_t cell_idx, int rotation,
                                 const Dataset& source,
                                 const RotationSplit& split,
                                 const std::string& ckpt_path) {
  const std::uint64_t task_seed = Rng::derive(
      spec.seed, cell_idx * 1000003ULL + static_cast<std::uint64_t>(rotation));

  EncoderConfig enc;
  enc.d = cell.d;
  enc.tau = cell.tau;
  auto pooling = pooling_from_name(cell.pooling);
  if (!pooling) throw Error("unknown pooling: " + cell.pooling);
  enc.pooling = *pooling;
  enc.attn_hidden = spec.attn_hidden;

  CellTaskResult out;
  std::vector<double> test_scores;
  if (is_baseline_variant(cell.variant)) {
    BaselineConfig cfg;
    auto features = baseline_features_from_name(spec.baseline_features);
    if (!features)
      throw Error("unknown baseline features: " + spec.baseline_features);
    cfg.features = *features;
    cfg.mode = cell.variant == "DT" ? BaselineMode::kDT : BaselineMode::kNoT;
    cfg.fp_radius = spec.fp_radius;
    cfg.fp_dim = spec.fp_dim;
    cfg.encoder = enc;
    cfg.classifier_hidden = spec.classifier_hidden;
    cfg.epochs = spec.epochs;
    cfg.batch_size = spec.batch_size;
    cfg.lr_start = spec.lr_start;
    cfg.lr_end = spec.lr_end;
    cfg.seed = task_seed;
    BaselineModel model = BaselineModel::make(cfg);
    TrainResult tr = train_baseline(model, source, split.train, split.val);
    out.history = tr.history;
    test_scores = predict_scores(model, split.test);
    if (!ckpt_path.empty())
      save_checkpoint(ckpt_path, model.params, baseline_meta(cfg));
  } else {
    TransferConfig cfg;
    auto variant = variant_from_name(cell.variant);
    if (!variant) throw Error("unknown variant: " + cell.variant);
    cfg.variant = *variant;
    cfg.alpha = cell.alpha;
    cfg.lambda = cell.lambda;
    cfg.encoder = enc;
    cfg.classifier_hidden = spec.classifier_hidden;
    cfg.disc_hidden = spec.disc_hidden;
    cfg.epochs = spec.epochs;
    cfg.batch_size = spec.batch_size;
    cfg.lr_start = spec.lr_start;
    cfg.lr_end = spec.lr_end;
    cfg.seed = task_seed;
    TransferModel model = TransferModel::make(cfg);
    TrainResult tr = train(model, source, split.train, split.val);
    out.history = tr.history;
    test_scores = predict_scores(model, split.test);
    if (!ckpt_path.empty())
      save_checkpoint(ckpt_path, model.params, transfer_meta(model.cfg));
  }

  std::vector<int> labels;
  labels.reserve(split.test.size());
  for (const auto& rec : split.test) labels.push_back(rec.label());
  out.metrics = classification_metrics(test_scores, labels);
  return out;
}

void write_epoch_log(const std::string& path,
                     const std::vector<EpochStats>& history) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out << "epoch,train_loss,val_roc_auc,lr\n";
  for (const auto& st : history)
    out << st.epoch << "," << fmt(st.train_loss) << ","
        << fmt(st.val_roc_auc) << "," << fmtg(st.lr) << "\n";
}

MetricSummary summarize(const std::vector<double>& xs) {
  MetricSummary s;
  if (xs.empty()) return s;
  for (double x : xs) s.mean += x;
  s.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double acc = 0.0;
    for (double x : xs) acc += (x - s.mean) * (x - s.mean);
    s.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
  }
  return s;
}

}  // namespace

CvReport run_cv(const ExperimentSpec& spec) {
  if (spec.variants.empty() || spec.alpha_grid.empty() ||
      spec.lambda_grid.empty() || spec.d_grid.empty() ||
      spec.tau_grid.empty() || spec.pooling_grid.empty())
    throw Error("run_cv: variant list and every grid must be nonempty");
  const Dataset source = load_dataset(spec.source_path);
  const Dataset target = load_dataset(spec.target_path);
  const std::vector<int> fold = stratified_folds(target, spec.folds, spec.seed);

  std::vector<CellConfig> cells;
  for (const std::string& variant : spec.variants)
    for (double alpha : spec.alpha_grid)
      for (double lambda : spec.lambda_grid)
        for (int d : spec.d_grid)
          for (int tau : spec.tau_grid)
            for (const std::string& pooling : spec.pooling_grid)
              cells.push_back({variant, alpha, lambda, d, tau, pooling});

  std::vector<RotationSplit> splits;
  for (int r = 0; r < spec.folds; ++r)
    splits.push_back(rotation_split(target, fold, r, spec.folds));

  const bool want_files = !spec.out_dir.empty();
  if (want_files) std::filesystem::create_directories(spec.out_dir);

  const std::size_t n_tasks = cells.size() * static_cast<std::size_t>(spec.folds);
  std::vector<CellTaskResult> results(n_tasks);
  parallel_for(n_tasks, spec.jobs, [&](std::size_t task) {
    const std::size_t cell_idx = task / static_cast<std::size_t>(spec.folds);
    const int rotation = static_cast<int>(task % spec.folds);
    std::string ckpt;
    if (want_files && spec.save_checkpoints) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "ckpt_c%03zu_r%02d.bin", cell_idx,
                    rotation);
      ckpt = (std::filesystem::path(spec.out_dir) / buf).string();
    }
    results[task] = run_cell_rotation(spec, cells[cell_idx], cell_idx,
                                      rotation, source, splits[rotation],
                                      ckpt);
    if (want_files && spec.write_epoch_logs) {
      char buf[64];
      std::snprintf(buf, sizeof(buf), "epochs_c%03zu_r%02d.csv", cell_idx,
                    rotation);
      write_epoch_log((std::filesystem::path(spec.out_dir) / buf).string(),
                      results[task].history);
    }
  });

  CvReport report;
  report.spec = spec.to_json();
  for (std::size_t c = 0; c < cells.size(); ++c) {
    CellReport row;
    row.cell = cells[c];
    std::map<std::string, std::vector<double>> by_metric;
    for (int r = 0; r < spec.folds; ++r) {
      const auto& m =
          results[c * static_cast<std::size_t>(spec.folds) +
                  static_cast<std::size_t>(r)]
              .metrics;
      row.rotations.push_back(m);
      for (const auto& [k, v] : m) by_metric[k].push_back(v);
    }
    for (const auto& [k, xs] : by_metric) row.summary[k] = summarize(xs);
    report.rows.push_back(std::move(row));
  }
  if (want_files) write_cv_report(report, spec.out_dir);
  return report;
}

void write_cv_report(const CvReport& report, const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);
  static const char* kMetrics[] = {"roc_auc", "pr_auc",   "precision",
                                   "sensitivity", "accuracy", "f1"};

  std::ofstream csv(std::filesystem::path(out_dir) / "report.csv",
                    std::ios::trunc);
  if (!csv) throw Error("cannot write report.csv");
  csv << "variant,alpha,lambda,d,tau,pooling";
  for (const char* m : kMetrics) csv << "," << m << "_mean," << m << "_std";
  csv << "\n";
  for (const auto& row : report.rows) {
    csv << row.cell.variant << "," << fmtg(row.cell.alpha) << ","
        << fmtg(row.cell.lambda) << "," << row.cell.d << "," << row.cell.tau
        << "," << row.cell.pooling;
    for (const char* m : kMetrics) {
      const auto it = row.summary.find(m);
      csv << "," << fmt(it->second.mean) << "," << fmt(it->second.stddev);
    }
    csv << "\n";
  }
  csv.close();

  nlohmann::json j;
  j["spec"] = report.spec;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json jr;
    jr["cell"] = {{"variant", row.cell.variant}, {"alpha", row.cell.alpha},
                  {"lambda", row.cell.lambda},   {"d", row.cell.d},
                  {"tau", row.cell.tau},         {"pooling", row.cell.pooling}};
    jr["rotations"] = row.rotations;
    nlohmann::json summary;
    for (const auto& [k, s] : row.summary)
      summary[k] = {{"mean", s.mean}, {"std", s.stddev}};
    jr["summary"] = summary;
    rows.push_back(jr);
  }
  j["results"] = rows;
  std::ofstream js(std::filesystem::path(out_dir) / "report.json",
                   std::ios::trunc);
  if (!js) throw Error("cannot write report.json");
  js << j.dump(2) << "\n";
}

nlohmann::json RankExperimentSpec::to_json() const {
  return {
      {"data", data_paths},
      {"features", features},
      {"d_grid", d_grid},
      {"tau_grid", tau_grid},
      {"attn_hidden_grid", attn_hidden_grid},
      {"lr_grid", lr_grid},
      {"ks", ks},
      {"k_percents", k_percents},
      {"folds", folds},
      {"epochs", epochs},
      {"batch_size", batch_size},
      {"l2_lambda", l2_lambda},
      {"fp_radius", fp_radius},
      {"fp_dim", fp_dim},
      {"seed", seed},
  };
}

namespace {

struct RankCell {
  int d = 25;
  int tau = 3;
  int attn_hidden = 10;
  double lr = 1e-3;
};

std::map<std::string, double> rank_metrics(
    const RankExperimentSpec& spec, const std::vector<double>& activities,
    const std::vector<double>& scores) {
  std::map<std::string, double> out;
  out["ci"] = 1.0 - nci(activities, scores);
  for (int k : spec.ks) {
    out["r@" + std::to_string(k)] =
        metrics::recall_at(activities, scores, k);
    out["ndcg@" + std::to_string(k)] =
        metrics::ndcg_at(activities, scores, k);
  }
  for (double p : spec.k_percents) {
    const std::string tag = fmtg(p) + "%";
    out["r@" + tag] = metrics::recall_at_percent(activities, scores, p);
    out["ndcg@" + tag] = metrics::ndcg_at_percent(activities, scores, p);
  }
  return out;
}

}  // namespace

RankCvReport run_rank_cv(const RankExperimentSpec& spec) {
  RankCvReport report;
  report.spec = spec.to_json();

  struct Task {
    std::size_t assay;
    std::string features;
    int fold;
    RankCell cell;
  };

  std::vector<Dataset> datasets;
  std::vector<std::vector<int>> folds;
  for (std::size_t a = 0; a < spec.data_paths.size(); ++a) {
    datasets.push_back(load_dataset(spec.data_paths[a]));
    std::set<double> activities;
    for (const auto& rec : datasets.back())
      if (!activities.insert(rec.activity()).second)
        throw Error("run_rank_cv: duplicate activity value in " +
                    spec.data_paths[a]);
    folds.push_back(random_folds(datasets.back().size(), spec.folds,
                                 Rng::derive(spec.seed, a)));
  }

  std::vector<Task> tasks;
  for (std::size_t a = 0; a < datasets.size(); ++a) {
    for (const std::string& features : spec.features) {
      auto rf = rank_features_from_name(features);
      if (!rf) throw Error("unknown rank features: " + features);
      const bool uses_encoder = *rf == RankFeatures::kDmpna ||
                                *rf == RankFeatures::kDmpn;
      for (int f = 0; f < spec.folds; ++f) {
        if (uses_encoder) {
          for (int d : spec.d_grid)
            for (int tau : spec.tau_grid)
              for (int ah : spec.attn_hidden_grid)
                for (double lr : spec.lr_grid)
                  tasks.push_back({a, features, f, {d, tau, ah, lr}});
        } else {
          for (double lr : spec.lr_grid)
            tasks.push_back({a, features, f, {0, 0, 0, lr}});
        }
      }
    }
  }

  std::vector<std::map<std::string, double>> task_metrics(tasks.size());
  parallel_for(tasks.size(), spec.jobs, [&](std::size_t t) {
    const Task& task = tasks[t];
    const Dataset& data = datasets[task.assay];
    Dataset train, test;
    for (std::size_t i = 0; i < data.size(); ++i)
      (folds[task.assay][i] == task.fold ? test : train).push_back(data[i]);

    RankingConfig cfg;
    cfg.features = *rank_features_from_name(task.features);
    cfg.encoder.d = task.cell.d > 0 ? task.cell.d : cfg.encoder.d;
    cfg.encoder.tau = task.cell.tau > 0 ? task.cell.tau : cfg.encoder.tau;
    cfg.encoder.attn_hidden =
        task.cell.attn_hidden > 0 ? task.cell.attn_hidden
                                  : cfg.encoder.attn_hidden;
    cfg.fp_radius = spec.fp_radius;
    cfg.fp_dim = spec.fp_dim;
    cfg.l2_lambda = spec.l2_lambda;
    cfg.epochs = spec.epochs;
    cfg.batch_size = spec.batch_size;
    cfg.lr = task.cell.lr;
    cfg.seed = Rng::derive(spec.seed, t * 7919ULL + 13ULL);
    RankingModel model = RankingModel::make(cfg);
    train_gnncp(model, train);

    std::vector<double> scores = predict_rank_scores(model, test);
    std::vector<double> acts;
    for (const auto& rec : test) acts.push_back(rec.activity());
    task_metrics[t] = rank_metrics(spec, acts, scores);
  });

  // Fold-wise optimum over cells, then mean over folds, per (assay, features).
  for (std::size_t a = 0; a < datasets.size(); ++a) {
    for (const std::string& features : spec.features) {
      std::map<std::string, std::vector<double>> fold_best;
      for (int f = 0; f < spec.folds; ++f) {
        std::map<std::string, double> best;
        for (std::size_t t = 0; t < tasks.size(); ++t) {
          if (tasks[t].assay != a || tasks[t].features != features ||
              tasks[t].fold != f)
            continue;
          for (const auto& [k, v] : task_metrics[t]) {
            auto it = best.find(k);
            if (it == best.end() || v > it->second) best[k] = v;
          }
        }
        for (const auto& [k, v] : best) fold_best[k].push_back(v);
      }
      RankAssayReport row;
      row.assay = spec.data_paths[a];
      row.features = features;
      for (const auto& [k, xs] : fold_best) row.metrics[k] = summarize(xs).mean;
      report.rows.push_back(std::move(row));
    }
  }

  for (const std::string& features : spec.features) {
    std::map<std::string, std::vector<double>> acc;
    for (const auto& row : report.rows)
      if (row.features == features)
        for (const auto& [k, v] : row.metrics) acc[k].push_back(v);
    for (const auto& [k, xs] : acc)
      report.overall[features][k] = summarize(xs).mean;
  }

  if (!spec.out_dir.empty()) write_rank_report(report, spec.out_dir);
  return report;
}

void write_rank_report(const RankCvReport& report,
                       const std::string& out_dir) {
  std::filesystem::create_directories(out_dir);

  // Metric key order is the map order (deterministic); header from the
  // first row.
  std::ofstream csv(std::filesystem::path(out_dir) / "rank_report.csv",
                    std::ios::trunc);
  if (!csv) throw Error("cannot write rank_report.csv");
  csv << "assay,features";
  if (!report.rows.empty())
    for (const auto& [k, v] : report.rows.front().metrics) csv << "," << k;
  csv << "\n";
  for (const auto& row : report.rows) {
    csv << row.assay << "," << row.features;
    for (const auto& [k, v] : row.metrics) csv << "," << fmt(v);
    csv << "\n";
  }
  csv.close();

  nlohmann::json j;
  j["spec"] = report.spec;
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : report.rows)
    rows.push_back({{"assay", row.assay},
                    {"features", row.features},
                    {"metrics", row.metrics}});
  j["results"] = rows;
  j["overall"] = report.overall;
  std::ofstream js(std::filesystem::path(out_dir) / "rank_report.json",
                   std::ios::trunc);
  if (!js) throw Error("cannot write rank_report.json");
  js << j.dump(2) << "\n";
}

}  // namespace moltx
