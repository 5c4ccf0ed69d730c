#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "hybridfm/dataset.hpp"
#include "hybridfm/splits.hpp"
#include "hybridfm/trainer.hpp"

namespace hybridfm {

struct ExperimentConfig {
  std::uint32_t d = 64;
  TrainConfig train;
  std::uint32_t repetitions = 10;
  std::uint64_t base_seed = 42;
  double test_fraction = 0.2;
  double validation_fraction = 0.1;
};

struct ExperimentReport {
  std::string model;
  std::string dataset;
  SplitKind split = SplitKind::kWarm;
  std::vector<double> aucs;  // one per repetition

  double mean() const;
  double stddev() const;
};

// Tab-delimited report rows:
// model dataset split mean_auc std_auc auc_1,auc_2,...
void write_report_table(const std::vector<ExperimentReport>& reports,
                        std::ostream& out);

// Scores `pairs` under the given variant after training on the split. Core
// variants train with early stopping on the carved validation set; the LSI
// baselines train on train+validation. Repetition r uses seed
// mix_seed(base_seed, r) for splitting, initialization and shuffling.
ExperimentReport run_experiment(const Dataset& dataset, ModelVariant variant,
                                SplitKind split_kind,
                                const ExperimentConfig& config);

struct SweepRow {
  std::string model;
  std::uint32_t d = 0;
  double mean_auc = 0.0;
};

// One run_experiment per (model, d). `dims` must be positive and ascending.
std::vector<SweepRow> dimension_sweep(const Dataset& dataset,
                                      const std::vector<ModelVariant>& variants,
                                      const std::vector<std::uint32_t>& dims,
                                      SplitKind split_kind,
                                      const ExperimentConfig& config);

void write_sweep_table(const std::vector<SweepRow>& rows, std::ostream& out);

}  // namespace hybridfm
