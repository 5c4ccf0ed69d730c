// Command-line front end: dataset ingestion, synthetic fixtures, training,
// tag similarity queries and evaluation experiments.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <CLI11.hpp>

#include "hybridfm/ann.hpp"
#include "hybridfm/baselines.hpp"
#include "hybridfm/dataset.hpp"
#include "hybridfm/errors.hpp"
#include "hybridfm/experiments.hpp"
#include "hybridfm/ingest.hpp"
#include "hybridfm/metrics.hpp"
#include "hybridfm/model.hpp"
#include "hybridfm/rng.hpp"
#include "hybridfm/serialization.hpp"
#include "hybridfm/splits.hpp"
#include "hybridfm/synthetic.hpp"
#include "hybridfm/trainer.hpp"

namespace {

using namespace hybridfm;

// Assigns dense ids in order of first appearance.
struct IdTable {
  std::vector<std::string> names;
  std::unordered_map<std::string, std::uint32_t> ids;

  std::uint32_t id(const std::string& name) {
    const auto [it, inserted] =
        ids.try_emplace(name, static_cast<std::uint32_t>(names.size()));
    if (inserted) {
      names.push_back(name);
    }
    return it->second;
  }
};

std::vector<std::string> dedupe_keep_order(
    const std::vector<std::string>& values) {
  std::vector<std::string> out;
  std::unordered_set<std::string> seen;
  for (const auto& v : values) {
    if (seen.insert(v).second) {
      out.push_back(v);
    }
  }
  return out;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) {
    throw ParseError("cannot write " + path);
  }
  out << content;
}

struct IngestMovielensArgs {
  std::string ratings;
  std::string genome;
  std::string movies;
  double threshold = 0.8;
  std::string out;
};

void run_ingest_movielens(const IngestMovielensArgs& args) {
  const auto pairs = binarize(parse_ratings_file(args.ratings));
  const auto tags = parse_tag_genome_file(args.genome, args.threshold);
  std::unordered_map<std::string, std::vector<std::string>> genres;
  if (!args.movies.empty()) {
    genres = parse_movie_genres_file(args.movies);
  }

  Dataset dataset;
  dataset.name = std::filesystem::path(args.out).filename().string();
  IdTable users;
  IdTable items;
  for (const auto& p : pairs) {
    dataset.interactions.add(users.id(p.user), items.id(p.item), p.positive);
  }
  dataset.user_names = users.names;
  dataset.item_names = items.names;

  std::unordered_map<std::string, std::vector<std::string>> tags_of;
  for (const auto& t : tags) {
    tags_of[t.item].push_back(t.tag);
  }
  dataset.item_metadata.resize(items.names.size());
  for (std::size_t i = 0; i < items.names.size(); ++i) {
    std::vector<std::string> metadata;
    if (const auto it = tags_of.find(items.names[i]); it != tags_of.end()) {
      metadata.insert(metadata.end(), it->second.begin(), it->second.end());
    }
    if (const auto it = genres.find(items.names[i]); it != genres.end()) {
      metadata.insert(metadata.end(), it->second.begin(), it->second.end());
    }
    dataset.item_metadata[i] = dedupe_keep_order(metadata);
  }
  dataset.user_metadata.resize(users.names.size());

  write_dataset(dataset, args.out);
  std::cout << "dataset=" << dataset.name << " users=" << users.names.size()
            << " items=" << items.names.size()
            << " interactions=" << dataset.interactions.size()
            << " positives=" << dataset.interactions.positive_count() << '\n';
}

struct IngestStackExchangeArgs {
  std::string posts;
  std::string users;
  std::string out;
  std::uint32_t neg_ratio = 3;
  std::uint64_t seed = 42;
  std::size_t about_dict = 5000;
};

void run_ingest_stackexchange(const IngestStackExchangeArgs& args) {
  const auto data = parse_stackexchange_files(args.posts, args.users);
  if (data.positives.empty()) {
    throw ValidationError("no (answerer, question) pairs found");
  }

  Dataset dataset;
  dataset.name = std::filesystem::path(args.out).filename().string();
  IdTable users;
  IdTable items;
  InteractionSet positives;
  for (const auto& p : data.positives) {
    positives.add(users.id(p.user), items.id(p.item), true);
  }
  dataset.user_names = users.names;
  dataset.item_names = items.names;
  dataset.interactions =
      sample_negatives(positives, static_cast<std::uint32_t>(items.names.size()),
                       args.neg_ratio, mix_seed(args.seed, 0x9e9));

  dataset.item_metadata.resize(items.names.size());
  for (std::size_t i = 0; i < items.names.size(); ++i) {
    if (const auto it = data.question_tags.find(items.names[i]);
        it != data.question_tags.end()) {
      dataset.item_metadata[i] = dedupe_keep_order(it->second);
    }
  }

  // Vocabulary: the most frequent about-text tokens across this dataset's
  // users; each user then carries their deduplicated in-vocabulary tokens.
  std::unordered_map<std::string, std::size_t> counts;
  std::vector<std::vector<std::string>> tokens_of(users.names.size());
  for (std::size_t u = 0; u < users.names.size(); ++u) {
    if (const auto it = data.about_texts.find(users.names[u]);
        it != data.about_texts.end()) {
      tokens_of[u] = tokenize_about(it->second);
      for (const auto& token : tokens_of[u]) {
        ++counts[token];
      }
    }
  }
  const auto vocabulary_list = top_tokens(counts, args.about_dict);
  const std::unordered_set<std::string> vocabulary(vocabulary_list.begin(),
                                                   vocabulary_list.end());
  dataset.user_metadata.resize(users.names.size());
  for (std::size_t u = 0; u < users.names.size(); ++u) {
    std::vector<std::string> kept;
    for (const auto& token : dedupe_keep_order(tokens_of[u])) {
      if (vocabulary.contains(token)) {
        kept.push_back(token);
      }
    }
    dataset.user_metadata[u] = std::move(kept);
  }

  write_dataset(dataset, args.out);
  if (data.skipped_orphan_answers > 0) {
    std::cerr << "skipped " << data.skipped_orphan_answers
              << " answers without a known parent question\n";
  }
  std::cout << "dataset=" << dataset.name << " users=" << users.names.size()
            << " items=" << items.names.size()
            << " positives=" << dataset.interactions.positive_count()
            << " negatives=" << dataset.interactions.negative_count() << '\n';
}

struct SynthArgs {
  std::string spec;
  std::string out;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

void run_synth(const SynthArgs& args) {
  SyntheticSpec spec = parse_synthetic_spec(args.spec);
  if (args.seed_set) {
    spec.seed = args.seed;
  }
  const auto dataset = generate_synthetic(spec);
  write_dataset(dataset, args.out);
  std::cout << "dataset=" << std::filesystem::path(args.out).filename().string()
            << " users=" << dataset.user_names.size()
            << " items=" << dataset.item_names.size()
            << " tags=" << spec.tags
            << " interactions=" << dataset.interactions.size() << '\n';
}

struct TrainArgs {
  std::string dataset_dir;
  std::string model_name;
  std::uint32_t d = 64;
  double learning_rate = 0.05;
  std::uint32_t epochs = 100;
  std::uint32_t patience = 3;
  std::uint32_t threads = 4;
  std::uint64_t seed = 42;
  double validation_fraction = 0.1;
  std::string out;
  std::string resume;
  bool d_set = false;
};

// Rewrites entity feature sets expressed against `from` into `to` indices.
std::vector<std::vector<std::uint32_t>> translate_sets(
    const std::vector<std::vector<std::uint32_t>>& sets,
    const FeatureDictionary& from, const FeatureDictionary& to) {
  std::vector<std::vector<std::uint32_t>> out(sets.size());
  for (std::size_t e = 0; e < sets.size(); ++e) {
    out[e].reserve(sets[e].size());
    for (auto f : sets[e]) {
      out[e].push_back(to.at(from.name(f)));
    }
  }
  return out;
}

void run_train(const TrainArgs& args) {
  const auto variant = parse_model_variant(args.model_name);
  if (!is_core_model_variant(variant)) {
    throw ValidationError("train persists feature-embedding models only; "
                          "evaluate " + args.model_name + " via `experiment`");
  }
  const auto dataset = read_dataset(args.dataset_dir);
  const auto dataset_mapping = build_feature_mapping(dataset, variant);

  ModelState model;
  FeatureMapping mapping;
  if (!args.resume.empty()) {
    auto [loaded_model, loaded_mapping] = load_model(args.resume);
    if (args.d_set && args.d != loaded_model.d) {
      std::cerr << "resuming with d=" << loaded_model.d
                << " from the checkpoint; ignoring --d " << args.d << '\n';
    }
    for (const Side side : {Side::kUser, Side::kItem}) {
      std::vector<std::string> fresh;
      for (const auto& name : dataset_mapping.dictionary(side).names()) {
        if (!loaded_mapping.dictionary(side).contains(name)) {
          fresh.push_back(name);
        }
      }
      fold_in_features(loaded_model, loaded_mapping, fresh, side,
                       mix_seed(args.seed, 0xf01d));
      if (!fresh.empty()) {
        std::cerr << "folded in " << fresh.size() << " new "
                  << (side == Side::kUser ? "user" : "item") << " features\n";
      }
    }
    loaded_mapping.user_feature_sets =
        translate_sets(dataset_mapping.user_feature_sets,
                       dataset_mapping.user_features,
                       loaded_mapping.user_features);
    loaded_mapping.item_feature_sets =
        translate_sets(dataset_mapping.item_feature_sets,
                       dataset_mapping.item_features,
                       loaded_mapping.item_features);
    loaded_mapping.validate();
    model = std::move(loaded_model);
    mapping = std::move(loaded_mapping);
  } else {
    mapping = dataset_mapping;
    model = ModelState(args.d, mapping.user_features.size(),
                       mapping.item_features.size());
    initialize_embeddings(model, mix_seed(args.seed, 0xeeb));
  }

  InteractionSet train_set = dataset.interactions;
  InteractionSet validation;
  if (args.validation_fraction > 0.0) {
    auto split = warm_split(dataset.interactions, 0.0,
                            args.validation_fraction, mix_seed(args.seed, 0xca));
    train_set = std::move(split.train);
    validation = std::move(split.validation);
  }

  TrainConfig config;
  config.learning_rate = args.learning_rate;
  config.epochs_max = args.epochs;
  config.threads = args.threads;
  config.early_stop_patience = args.patience;
  config.rng_seed = mix_seed(args.seed, 0x5eed);

  const auto history = fit(model, mapping, train_set, validation, config);
  save_model(model, mapping, args.out);
  {
    std::ofstream out(args.out + ".history.tsv");
    if (!out) {
      throw ParseError("cannot write " + args.out + ".history.tsv");
    }
    history.write_tsv(out);
  }

  std::cout << "model=" << model_variant_name(variant) << " d=" << model.d
            << " epochs_run=" << history.epochs.size()
            << " best_epoch=" << history.best_epoch
            << " best_validation_auc=" << history.best_validation_auc << '\n';
}

struct SimilarArgs {
  std::string model_path;
  std::string tag;
  std::size_t k = 10;
  std::string side = "item";
  bool include_ids = false;
};

void run_similar(const SimilarArgs& args) {
  const auto [model, mapping] = load_model(args.model_path);
  const Side side = args.side == "user" ? Side::kUser : Side::kItem;
  const auto& dict = mapping.dictionary(side);
  const auto feature = dict.find(args.tag);
  if (!feature) {
    throw ValidationError("feature not in the model: " + args.tag);
  }
  if (dict.size() < 2) {
    throw ValidationError("model has no other features on this side");
  }

  std::size_t indicator_count = 0;
  if (!args.include_ids) {
    for (const auto& name : dict.names()) {
      indicator_count += is_indicator_feature(name) ? 1 : 0;
    }
  }
  const auto& table_data =
      side == Side::kUser ? model.user_embeddings : model.item_embeddings;
  const EmbeddingTableView table{table_data.data(), dict.size(), model.d};
  const std::size_t want =
      std::min(dict.size() - 1, args.k + indicator_count);
  const auto neighbors = top_k_exact(table, *feature, want);

  std::size_t rank = 0;
  for (const auto& n : neighbors) {
    const auto& name = dict.name(n.id);
    if (!args.include_ids && is_indicator_feature(name)) {
      continue;
    }
    std::cout << ++rank << '\t' << name << '\t' << n.similarity << '\n';
    if (rank == args.k) {
      break;
    }
  }
}

struct ExperimentArgs {
  std::string dataset_dir;
  std::string split = "warm";
  std::vector<std::string> models{"mf", "lsi-lr", "lsi-up", "lightfm-tags"};
  std::uint32_t d = 64;
  std::uint32_t reps = 10;
  std::uint64_t seed = 42;
  double learning_rate = 0.05;
  std::uint32_t epochs = 100;
  std::uint32_t patience = 3;
  std::uint32_t threads = 4;
  double test_fraction = 0.2;
  double validation_fraction = 0.1;
  std::string out;
  std::vector<std::uint32_t> dims;  // sweep only
};

ExperimentConfig to_config(const ExperimentArgs& args) {
  ExperimentConfig config;
  config.d = args.d;
  config.repetitions = args.reps;
  config.base_seed = args.seed;
  config.test_fraction = args.test_fraction;
  config.validation_fraction = args.validation_fraction;
  config.train.learning_rate = args.learning_rate;
  config.train.epochs_max = args.epochs;
  config.train.early_stop_patience = args.patience;
  config.train.threads = args.threads;
  return config;
}

void emit(const std::string& path, const std::string& table) {
  if (path.empty()) {
    std::cout << table;
  } else {
    write_text_file(path, table);
  }
}

void run_experiment_cmd(const ExperimentArgs& args) {
  const auto dataset = read_dataset(args.dataset_dir);
  const auto kind = parse_split_kind(args.split);
  const auto config = to_config(args);

  std::vector<ExperimentReport> reports;
  for (const auto& name : args.models) {
    const auto variant = parse_model_variant(name);
    std::cerr << "running " << name << " (" << args.reps << " repetitions)\n";
    reports.push_back(run_experiment(dataset, variant, kind, config));
  }
  std::ostringstream table;
  write_report_table(reports, table);
  emit(args.out, table.str());
}

void run_sweep_cmd(const ExperimentArgs& args) {
  const auto dataset = read_dataset(args.dataset_dir);
  const auto kind = parse_split_kind(args.split);
  const auto config = to_config(args);

  std::vector<ModelVariant> variants;
  for (const auto& name : args.models) {
    variants.push_back(parse_model_variant(name));
  }
  const auto rows = dimension_sweep(dataset, variants, args.dims, kind, config);
  std::ostringstream table;
  write_sweep_table(rows, table);
  emit(args.out, table.str());
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hybrid recommender toolkit: feature-embedding models, "
               "latent-semantic baselines, and nearest-neighbour queries"};
  app.require_subcommand(1);
  app.set_config("--config");

  auto* ingest = app.add_subcommand("ingest", "Convert raw dumps to a dataset");
  ingest->require_subcommand(1);

  IngestMovielensArgs ml;
  auto* movielens =
      ingest->add_subcommand("movielens", "Ratings plus tag relevance dump");
  movielens->add_option("--ratings", ml.ratings, "user::item::rating::timestamp file")
      ->required();
  movielens->add_option("--genome", ml.genome, "item, tag, relevance file")
      ->required();
  movielens->add_option("--movies", ml.movies, "id::title::genres file");
  movielens->add_option("--threshold", ml.threshold,
                        "minimum tag relevance to keep")
      ->capture_default_str();
  movielens->add_option("--out", ml.out, "output dataset directory")->required();
  movielens->callback([&ml] { run_ingest_movielens(ml); });

  IngestStackExchangeArgs se;
  auto* stackexchange =
      ingest->add_subcommand("stackexchange", "Posts.xml and Users.xml dump");
  stackexchange->add_option("--posts", se.posts, "Posts.xml")->required();
  stackexchange->add_option("--users", se.users, "Users.xml")->required();
  stackexchange->add_option("--out", se.out, "output dataset directory")
      ->required();
  stackexchange
      ->add_option("--neg-ratio", se.neg_ratio,
                   "sampled negatives per positive")
      ->capture_default_str();
  stackexchange->add_option("--seed", se.seed, "negative sampling seed")
      ->capture_default_str();
  stackexchange
      ->add_option("--about-dict", se.about_dict,
                   "about-text vocabulary size")
      ->capture_default_str();
  stackexchange->callback([&se] { run_ingest_stackexchange(se); });

  SynthArgs synth;
  auto* synth_cmd =
      app.add_subcommand("synth", "Generate a planted-structure dataset");
  synth_cmd->add_option("--spec", synth.spec,
                        "comma-separated key=value overrides");
  synth_cmd->add_option("--out", synth.out, "output dataset directory")
      ->required();
  auto* synth_seed = synth_cmd->add_option("--seed", synth.seed, "generator seed");
  synth_cmd->callback([&synth, synth_seed] {
    synth.seed_set = synth_seed->count() > 0;
    run_synth(synth);
  });

  TrainArgs train;
  auto* train_cmd = app.add_subcommand("train", "Fit a model on a dataset");
  train_cmd->add_option("--dataset", train.dataset_dir, "dataset directory")
      ->required();
  train_cmd
      ->add_option("--model", train.model_name,
                   "mf, lightfm-tags, lightfm-tags-ids or lightfm-tags-about")
      ->required();
  auto* train_d =
      train_cmd->add_option("--d", train.d, "embedding dimensionality")
          ->capture_default_str();
  train_cmd->add_option("--lr", train.learning_rate, "base learning rate")
      ->capture_default_str();
  train_cmd->add_option("--epochs", train.epochs, "maximum epochs")
      ->capture_default_str();
  train_cmd
      ->add_option("--patience", train.patience,
                   "early-stop patience in epochs (0 disables)")
      ->capture_default_str();
  train_cmd->add_option("--threads", train.threads, "worker threads")
      ->envname("HYBRIDFM_THREADS")
      ->capture_default_str();
  train_cmd->add_option("--seed", train.seed, "training seed")
      ->capture_default_str();
  train_cmd
      ->add_option("--val-fraction", train.validation_fraction,
                   "held-out fraction for early stopping (0 disables)")
      ->capture_default_str();
  train_cmd->add_option("--out", train.out, "model file to write")->required();
  train_cmd->add_option("--resume", train.resume,
                        "continue training from a saved model");
  train_cmd->callback([&train, train_d] {
    train.d_set = train_d->count() > 0;
    run_train(train);
  });

  SimilarArgs similar;
  auto* similar_cmd =
      app.add_subcommand("similar", "Nearest features by embedding cosine");
  similar_cmd->add_option("--model", similar.model_path, "saved model file")
      ->required();
  similar_cmd->add_option("--tag", similar.tag, "feature name to query")
      ->required();
  similar_cmd->add_option("--k", similar.k, "neighbours to print")
      ->capture_default_str();
  similar_cmd->add_option("--side", similar.side, "user or item table")
      ->check(CLI::IsMember({"user", "item"}))
      ->capture_default_str();
  similar_cmd->add_flag("--include-ids", similar.include_ids,
                        "also report indicator features");
  similar_cmd->callback([&similar] { run_similar(similar); });

  ExperimentArgs experiment;
  auto* experiment_cmd = app.add_subcommand(
      "experiment", "Mean test AUC over repeated splits, one row per model");
  ExperimentArgs sweep;
  auto* sweep_cmd = app.add_subcommand(
      "sweep", "Mean test AUC across embedding dimensionalities");

  const auto add_shared = [](CLI::App* cmd, ExperimentArgs& args) {
    cmd->add_option("--dataset", args.dataset_dir, "dataset directory")
        ->required();
    cmd->add_option("--split", args.split, "warm or cold")
        ->check(CLI::IsMember({"warm", "cold"}))
        ->capture_default_str();
    cmd->add_option("--models", args.models, "comma-separated model list")
        ->delimiter(',')
        ->capture_default_str();
    cmd->add_option("--reps", args.reps, "repetitions per configuration")
        ->capture_default_str();
    cmd->add_option("--seed", args.seed, "base seed")->capture_default_str();
    cmd->add_option("--lr", args.learning_rate, "base learning rate")
        ->capture_default_str();
    cmd->add_option("--epochs", args.epochs, "maximum epochs")
        ->capture_default_str();
    cmd->add_option("--patience", args.patience, "early-stop patience")
        ->capture_default_str();
    cmd->add_option("--threads", args.threads, "worker threads")
        ->envname("HYBRIDFM_THREADS")
        ->capture_default_str();
    cmd->add_option("--test-fraction", args.test_fraction,
                    "held-out test fraction")
        ->capture_default_str();
    cmd->add_option("--val-fraction", args.validation_fraction,
                    "held-out validation fraction")
        ->capture_default_str();
    cmd->add_option("--out", args.out, "write the table here instead of stdout");
  };
  add_shared(experiment_cmd, experiment);
  experiment_cmd->add_option("--d", experiment.d, "embedding dimensionality")
      ->capture_default_str();
  experiment_cmd->callback([&experiment] { run_experiment_cmd(experiment); });

  sweep.models = {"mf", "lightfm-tags"};
  sweep.split = "cold";
  add_shared(sweep_cmd, sweep);
  sweep_cmd->add_option("--dims", sweep.dims,
                        "comma-separated ascending dimensionalities")
      ->delimiter(',')
      ->required();
  sweep_cmd->callback([&sweep] { run_sweep_cmd(sweep); });

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
