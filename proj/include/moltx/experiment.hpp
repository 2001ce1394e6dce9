#pragma once

#include <map>
#include <string>
#include <vector>

#include <json.hpp>

#include "moltx/molgraph.hpp"
#include "moltx/ranking.hpp"
#include "moltx/transfer.hpp"

namespace moltx {

// Cross-validation harnesses: stratified 10-fold 1:1:8 protocol for the
// classification experiments, 5-fold 4:1 protocol for ranking, grid search
// with per-cell model selection on validation ROC-AUC, and deterministic
// CSV/JSON report emission.

// Per-record fold assignment by per-class shuffling and round-robin dealing;
// every class must have at least `k` members.
std::vector<int> stratified_folds(const Dataset& records, int k,
                                  std::uint64_t seed);
std::vector<int> random_folds(std::size_t n, int k, std::uint64_t seed);

std::map<std::string, double> classification_metrics(
    const std::vector<double>& scores, const std::vector<int>& labels,
    double threshold = 0.5);

struct ExperimentSpec {
  std::string source_path;
  std::string target_path;
  std::vector<std::string> variants = {"TAc"};
  // NoT / DT rows use these input features.
  std::string baseline_features = "encoder";

  std::vector<double> alpha_grid = {0.5};
  std::vector<double> lambda_grid = {0.01};
  std::vector<int> d_grid = {50};
  std::vector<int> tau_grid = {3};
  std::vector<std::string> pooling_grid = {"attention"};

  int folds = 10;
  int epochs = 40;
  int batch_size = 10;
  double lr_start = 1e-3;
  double lr_end = 1e-4;
  int classifier_hidden = 100;
  int disc_hidden = 100;
  int attn_hidden = 100;
  int fp_radius = 3;
  int fp_dim = 2048;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir;
  bool save_checkpoints = false;
  bool write_epoch_logs = false;

  nlohmann::json to_json() const;
};

struct CellConfig {
  std::string variant;
  double alpha = 0.5;
  double lambda = 0.01;
  int d = 50;
  int tau = 3;
  std::string pooling = "attention";
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;
};

struct CellReport {
  CellConfig cell;
  std::vector<std::map<std::string, double>> rotations;
  std::map<std::string, MetricSummary> summary;
};

struct CvReport {
  nlohmann::json spec;
  std::vector<CellReport> rows;
};

CvReport run_cv(const ExperimentSpec& spec);

// report.csv + report.json (+ per-rotation epoch CSVs / checkpoints when
// enabled); all bytes a function of the spec alone.
void write_cv_report(const CvReport& report, const std::string& out_dir);

struct RankExperimentSpec {
  std::vector<std::string> data_paths;
  std::vector<std::string> features = {"dmpna"};
  std::vector<int> d_grid = {25};
  std::vector<int> tau_grid = {3};
  std::vector<int> attn_hidden_grid = {10};
  std::vector<double> lr_grid = {1e-3};
  std::vector<int> ks = {3, 5};
  std::vector<double> k_percents = {5.0, 10.0};
  int folds = 5;
  int epochs = 50;
  int batch_size = 128;
  double l2_lambda = 1e-6;
  int fp_radius = 2;
  int fp_dim = 2048;
  std::uint64_t seed = 0;
  int jobs = 1;
  std::string out_dir;

  nlohmann::json to_json() const;
};

struct RankAssayReport {
  std::string assay;
  std::string features;
  // Fold-wise grid-optimal values averaged over folds, keyed by metric.
  std::map<std::string, double> metrics;
};

struct RankCvReport {
  nlohmann::json spec;
  std::vector<RankAssayReport> rows;
  // Per features: average over assays.
  std::map<std::string, std::map<std::string, double>> overall;
};

RankCvReport run_rank_cv(const RankExperimentSpec& spec);
void write_rank_report(const RankCvReport& report, const std::string& out_dir);

// Metadata-carrying checkpoint helpers shared by train/eval subcommands.
nlohmann::json transfer_meta(const TransferConfig& cfg);
TransferModel transfer_model_from_meta(const nlohmann::json& meta);
nlohmann::json baseline_meta(const BaselineConfig& cfg);
BaselineModel baseline_model_from_meta(const nlohmann::json& meta);

void parallel_for(std::size_t n, int jobs,
                  const std::function<void(std::size_t)>& fn);

}  // namespace moltx
