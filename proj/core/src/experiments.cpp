#include "hybridfm/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "hybridfm/baselines.hpp"
#include "hybridfm/errors.hpp"
#include "hybridfm/metrics.hpp"
#include "hybridfm/rng.hpp"

namespace hybridfm {

double ExperimentReport::mean() const {
  if (aucs.empty()) {
    return 0.0;
  }
  double total = 0.0;
  for (double a : aucs) {
    total += a;
  }
  return total / static_cast<double>(aucs.size());
}

double ExperimentReport::stddev() const {
  if (aucs.size() < 2) {
    return 0.0;
  }
  const double m = mean();
  double acc = 0.0;
  for (double a : aucs) {
    acc += (a - m) * (a - m);
  }
  return std::sqrt(acc / static_cast<double>(aucs.size() - 1));
}

void write_report_table(const std::vector<ExperimentReport>& reports,
                        std::ostream& out) {
  out << "model\tdataset\tsplit\tmean_auc\tstd_auc\taucs\n";
  for (const auto& r : reports) {
    out << r.model << '\t' << r.dataset << '\t' << split_kind_name(r.split)
        << '\t' << r.mean() << '\t' << r.stddev() << '\t';
    for (std::size_t i = 0; i < r.aucs.size(); ++i) {
      out << (i == 0 ? "" : ",") << r.aucs[i];
    }
    out << '\n';
  }
}

namespace {

InteractionSet merge(const InteractionSet& a, const InteractionSet& b) {
  InteractionSet out;
  for (const auto& t : a.all()) {
    out.add(t.user, t.item, t.positive);
  }
  for (const auto& t : b.all()) {
    out.add(t.user, t.item, t.positive);
  }
  return out;
}

double score_test_auc_core(const Dataset& dataset, ModelVariant variant,
                           const DatasetSplit& split,
                           const ExperimentConfig& config,
                           std::uint64_t seed) {
  const auto mapping = build_feature_mapping(dataset, variant);
  ModelState model(config.d, mapping.user_features.size(),
                   mapping.item_features.size());
  initialize_embeddings(model, mix_seed(seed, 0xeeb));

  TrainConfig train_config = config.train;
  train_config.rng_seed = mix_seed(seed, 0x5eed);
  fit(model, mapping, split.train, split.validation, train_config);

  std::vector<double> scores;
  scores.reserve(split.test.size());
  for (const auto& t : split.test.all()) {
    scores.push_back(predict(model, mapping, t.user, t.item));
  }
  return mean_auc(scores, split.test);
}

double score_test_auc_lsi(const Dataset& dataset, ModelVariant variant,
                          const DatasetSplit& split,
                          const ExperimentConfig& config, std::uint64_t seed) {
  const auto features = item_feature_matrix(dataset);
  // No gradient-based early stopping here, so validation joins the
  // training pool.
  const auto train = merge(split.train, split.validation);

  std::vector<double> scores;
  scores.reserve(split.test.size());
  if (variant == ModelVariant::kLsiLr) {
    const auto model =
        train_lsi_lr(features.matrix, train, config.d, mix_seed(seed, 0x15));
    for (const auto& t : split.test.all()) {
      scores.push_back(model.score(t.user, t.item));
    }
  } else {
    const auto model =
        train_lsi_up(features.matrix, train, dataset.user_names.size(),
                     config.d, mix_seed(seed, 0x16));
    for (const auto& t : split.test.all()) {
      scores.push_back(model.score(t.user, t.item));
    }
  }
  return mean_auc(scores, split.test);
}

}  // namespace

ExperimentReport run_experiment(const Dataset& dataset, ModelVariant variant,
                                SplitKind split_kind,
                                const ExperimentConfig& config) {
  if (config.repetitions == 0) {
    throw ValidationError("experiment needs at least one repetition");
  }
  ExperimentReport report;
  report.model = model_variant_name(variant);
  report.dataset = dataset.name;
  report.split = split_kind;

  for (std::uint32_t rep = 0; rep < config.repetitions; ++rep) {
    const std::uint64_t seed = mix_seed(config.base_seed, rep);
    const auto split =
        split_kind == SplitKind::kWarm
            ? warm_split(dataset.interactions, config.test_fraction,
                         config.validation_fraction, seed)
            : cold_item_split(dataset.interactions, config.test_fraction,
                              config.validation_fraction, seed);
    const double auc =
        is_core_model_variant(variant)
            ? score_test_auc_core(dataset, variant, split, config, seed)
            : score_test_auc_lsi(dataset, variant, split, config, seed);
    report.aucs.push_back(auc);
  }
  return report;
}

std::vector<SweepRow> dimension_sweep(const Dataset& dataset,
                                      const std::vector<ModelVariant>& variants,
                                      const std::vector<std::uint32_t>& dims,
                                      SplitKind split_kind,
                                      const ExperimentConfig& config) {
  if (dims.empty() || dims.front() == 0 ||
      !std::is_sorted(dims.begin(), dims.end())) {
    throw ValidationError("dimension sweep needs positive ascending dims");
  }
  std::vector<SweepRow> rows;
  for (const auto variant : variants) {
    for (const auto d : dims) {
      ExperimentConfig run_config = config;
      run_config.d = d;
      const auto report =
          run_experiment(dataset, variant, split_kind, run_config);
      rows.push_back({report.model, d, report.mean()});
    }
  }
  return rows;
}

void write_sweep_table(const std::vector<SweepRow>& rows, std::ostream& out) {
  out << "model\td\tmean_auc\n";
  for (const auto& r : rows) {
    out << r.model << '\t' << r.d << '\t' << r.mean_auc << '\n';
  }
}

}  // namespace hybridfm
