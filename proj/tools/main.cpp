// tuckert: train, evaluate and verify temporal Tucker models from the shell.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 numeric failure
// (NaN detected, or a gradient/expressivity check that did not pass).

#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>

#include "tuckert/checkpoint.hpp"
#include "tuckert/config.hpp"
#include "tuckert/errors.hpp"
#include "tuckert/expressivity.hpp"
#include "tuckert/grad_check.hpp"
#include "tuckert/trainer.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kNumericError = 3;

struct TrainFlags {
  std::optional<std::string> config_file, dataset, train, valid, test;
  std::optional<std::string> model, binding, regularizer, protocol;
  std::optional<std::size_t> dim, batch_size, epochs, patience;
  std::optional<double> lr, alpha, lambda, p, q, k;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::string out = "run";
  std::optional<std::string> resume;
  bool quiet = false;
};

void add_dataset_flags(CLI::App* cmd, TrainFlags& f) {
  cmd->add_option("--dataset", f.dataset,
                  "Directory with train/valid/test TSVs (or a name under $TUCKERT_DATA_DIR)");
  cmd->add_option("--train", f.train, "Training TSV");
  cmd->add_option("--valid", f.valid, "Validation TSV");
  cmd->add_option("--test", f.test, "Test TSV");
}

void apply_dataset_flags(const TrainFlags& f, tuckert::TrainConfig& c) {
  if (f.dataset) {
    const auto dir = tuckert::resolve_dataset_dir(*f.dataset);
    for (auto [name, path] : {std::pair{"train", &c.train_path}, std::pair{"valid", &c.valid_path},
                              std::pair{"test", &c.test_path}}) {
      for (const char* suffix : {"", ".txt", ".tsv"}) {
        const auto candidate = dir / (std::string(name) + suffix);
        if (std::filesystem::is_regular_file(candidate)) {
          *path = candidate;
          break;
        }
      }
    }
  }
  if (f.train) c.train_path = *f.train;
  if (f.valid) c.valid_path = *f.valid;
  if (f.test) c.test_path = *f.test;
}

tuckert::TrainConfig build_config(const TrainFlags& f) {
  tuckert::TrainConfig c = f.config_file ? tuckert::load_config(*f.config_file)
                                         : tuckert::TrainConfig{};
  apply_dataset_flags(f, c);
  if (f.model) c.kind = tuckert::parse_model_kind(*f.model);
  if (f.binding) c.binding = tuckert::parse_time_binding(*f.binding);
  if (f.regularizer) c.regularizer.kind = tuckert::parse_regularizer(*f.regularizer);
  if (f.protocol) c.protocol = tuckert::parse_protocol(*f.protocol);
  if (f.dim) c.dim = *f.dim;
  if (f.batch_size) c.batch_size = *f.batch_size;
  if (f.epochs) c.epochs = *f.epochs;
  if (f.patience) c.patience = *f.patience;
  if (f.lr) c.learning_rate = *f.lr;
  if (f.alpha) c.regularizer.alpha = *f.alpha;
  if (f.lambda) c.regularizer.lambda = *f.lambda;
  if (f.p) c.regularizer.p = *f.p;
  if (f.q) c.regularizer.q = *f.q;
  if (f.k) c.regularizer.k = *f.k;
  if (f.seed) c.seed = *f.seed;
  if (f.threads) c.threads = *f.threads;
  c.validate();
  if (c.train_path.empty() || c.valid_path.empty() || c.test_path.empty()) {
    throw tuckert::ConfigError("train, valid and test files are required (--dataset DIR)");
  }
  return c;
}

tuckert::QuadrupleDataset load_splits(const tuckert::TrainConfig& c) {
  return tuckert::build_dataset(tuckert::load_tsv(c.train_path), tuckert::load_tsv(c.valid_path),
                                tuckert::load_tsv(c.test_path));
}

void print_report(const std::string& label, const tuckert::RankingReport& r) {
  std::cout << std::fixed << std::setprecision(4) << label << " [" << tuckert::to_string(r.protocol)
            << ", " << r.query_count << " queries]  MRR " << r.mrr << "  Hits@1 " << r.hits1
            << "  Hits@3 " << r.hits3 << "  Hits@10 " << r.hits10 << '\n';
  std::cout.unsetf(std::ios::floatfield);
}

int cmd_train(const TrainFlags& f) {
  std::optional<tuckert::Trainer> trainer;
  tuckert::QuadrupleDataset data;
  if (f.resume) {
    auto ckpt = tuckert::load_checkpoint(*f.resume);
    if (f.epochs) ckpt.config.epochs = *f.epochs;
    if (f.threads) ckpt.config.threads = *f.threads;
    data = load_splits(ckpt.config);
    std::optional<tuckert::ModelParams<float>> best;
    const auto best_dir = std::filesystem::path(*f.resume).parent_path() / "best";
    if (std::filesystem::exists(best_dir / "manifest.json")) {
      best = tuckert::load_checkpoint(best_dir).params;
    }
    trainer.emplace(data, std::move(ckpt), std::move(best));
  } else {
    const auto config = build_config(f);
    data = load_splits(config);
    trainer.emplace(config, data);
  }
  {
    std::filesystem::create_directories(f.out);
    std::ofstream cfg(std::filesystem::path(f.out) / "config.json");
    cfg << nlohmann::json(trainer->config()).dump(2) << '\n';
  }
  const auto outcome = trainer->train(std::filesystem::path(f.out), f.quiet ? nullptr : &std::cerr);
  std::cout << "best epoch " << outcome.best_epoch << " (valid MRR " << outcome.best_valid_mrr
            << ")" << (outcome.stopped_early ? ", stopped early" : "") << '\n';
  print_report("test", outcome.test);
  return 0;
}

int cmd_evaluate(const std::string& checkpoint_dir, const TrainFlags& f, const std::string& split,
                 const std::optional<std::string>& out) {
  const auto ckpt = tuckert::load_checkpoint(checkpoint_dir);
  tuckert::TrainConfig c = ckpt.config;
  apply_dataset_flags(f, c);
  if (f.protocol) c.protocol = tuckert::parse_protocol(*f.protocol);
  const int threads = f.threads.value_or(1);
  const auto data = load_splits(c);
  tuckert::check_vocab(ckpt.params.shape, data);
  const auto& facts = split == "valid" ? data.valid : data.test;
  const auto report =
      tuckert::evaluate(ckpt.params, facts, data, c.binding, c.protocol, threads);
  print_report(split, report);
  if (out) {
    std::ofstream o(*out);
    if (!o) throw tuckert::DataError("cannot write " + *out);
    o << tuckert::to_json(report).dump(2) << '\n';
  }
  return 0;
}

int cmd_grad_check(const tuckert::GradCheckOptions& opt, bool verbose) {
  const auto report = tuckert::run_grad_check(opt);
  for (const auto& c : report.cases) {
    if (verbose || !c.passed) {
      std::cout << (c.passed ? "ok   " : "FAIL ") << tuckert::to_string(c.kind) << " / "
                << tuckert::to_string(c.binding) << " / " << tuckert::to_string(c.regularizer)
                << "  max rel err " << std::scientific << c.max_rel_error << " at "
                << c.worst_entry << std::defaultfloat << '\n';
    }
  }
  std::cout << (report.passed ? "PASS" : "FAIL") << "  " << report.cases.size()
            << " cases, max rel err " << std::scientific << report.max_rel_error
            << std::defaultfloat << " (tolerance " << opt.tolerance << ")\n";
  return report.passed ? 0 : kNumericError;
}

int cmd_expressivity(std::size_t n_e, std::size_t n_r, std::size_t n_t, std::size_t trials,
                     std::uint64_t seed, const std::string& truth) {
  bool all_ok = true;
  for (std::size_t i = 0; i < trials; ++i) {
    tuckert::TruthTable table =
        truth == "all"    ? tuckert::TruthTable::constant(n_e, n_r, n_t, true)
        : truth == "none" ? tuckert::TruthTable::constant(n_e, n_r, n_t, false)
                          : tuckert::TruthTable::random(n_e, n_r, n_t, seed + i);
    const auto r = tuckert::run_expressivity_check(table);
    all_ok = all_ok && r.passed;
    std::cout << (r.passed ? "ok   " : "FAIL ") << "trial " << i << ": " << r.separated << "/"
              << r.facts << " separated, " << r.true_facts << " true facts, folded "
              << (r.folded_matches ? "matches" : "DIFFERS");
    if (r.ranking.query_count > 0) std::cout << ", filtered MRR " << r.ranking.mrr;
    std::cout << '\n';
  }
  std::cout << (all_ok ? "PASS" : "FAIL") << '\n';
  return all_ok ? 0 : kNumericError;
}

int cmd_stats(const TrainFlags& f) {
  tuckert::TrainConfig c;
  apply_dataset_flags(f, c);
  if (c.train_path.empty()) throw tuckert::ConfigError("--dataset or --train/--valid/--test required");
  const auto data = load_splits(c);
  nlohmann::json j{{"entities", data.num_entities()},
                   {"predicates", data.num_relations()},
                   {"timestamps", data.num_timestamps()},
                   {"train", data.raw_train_size()},
                   {"train_augmented", data.train.size()},
                   {"valid", data.valid.size()},
                   {"test", data.test.size()}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal knowledge-graph completion with order-4 Tucker models"};
  app.require_subcommand(1);

  TrainFlags train_flags;
  auto* train = app.add_subcommand("train", "Train a model with early stopping");
  train->add_option("--config", train_flags.config_file, "JSON config; flags override it");
  add_dataset_flags(train, train_flags);
  train->add_option("--model", train_flags.model, "TuckERT or TuckERTNT");
  train->add_option("--binding", train_flags.binding, "subject, predicate or object");
  train->add_option("--dim", train_flags.dim, "Embedding dimension");
  train->add_option("--batch-size", train_flags.batch_size);
  train->add_option("--lr", train_flags.lr, "Adagrad learning rate");
  train->add_option("--regularizer", train_flags.regularizer,
                    "none, frobenius, frobenius_core, lp, lp_core");
  train->add_option("--alpha", train_flags.alpha, "Embedding regularizer weight");
  train->add_option("--lambda", train_flags.lambda, "Time smoothness weight");
  train->add_option("--p", train_flags.p, "l_p norm order");
  train->add_option("--q", train_flags.q, "Power of the l_p norm");
  train->add_option("--k", train_flags.k, "Power of the Frobenius norm");
  train->add_option("--epochs", train_flags.epochs);
  train->add_option("--patience", train_flags.patience, "Early-stopping patience (0 = off)");
  train->add_option("--seed", train_flags.seed);
  train->add_option("--protocol", train_flags.protocol, "raw or filtered");
  train->add_option("--threads", train_flags.threads, "Worker threads (1 = reproducible)");
  train->add_option("--out", train_flags.out, "Output directory")->capture_default_str();
  train->add_option("--resume", train_flags.resume, "Checkpoint directory to continue from");
  train->add_flag("--quiet", train_flags.quiet, "No per-epoch progress on stderr");

  TrainFlags eval_flags;
  std::string checkpoint_dir;
  std::string split = "test";
  std::optional<std::string> report_out;
  auto* evaluate = app.add_subcommand("evaluate", "Rank a split with a saved checkpoint");
  evaluate->add_option("--checkpoint", checkpoint_dir, "Checkpoint directory")->required();
  add_dataset_flags(evaluate, eval_flags);
  evaluate->add_option("--protocol", eval_flags.protocol, "raw or filtered");
  evaluate->add_option("--split", split, "valid or test")
      ->check(CLI::IsMember({"valid", "test"}))
      ->capture_default_str();
  evaluate->add_option("--threads", eval_flags.threads);
  evaluate->add_option("--report", report_out, "Write the report as JSON");

  tuckert::GradCheckOptions gc;
  bool gc_verbose = false;
  auto* grad = app.add_subcommand("grad-check", "Finite-difference check of every gradient path");
  grad->add_option("--seed", gc.seed)->capture_default_str();
  grad->add_option("--entities", gc.entities)->capture_default_str()->check(CLI::Range(1, 6));
  grad->add_option("--relations", gc.relations)->capture_default_str();
  grad->add_option("--timestamps", gc.timestamps)->capture_default_str();
  grad->add_option("--dim", gc.dim)->capture_default_str()->check(CLI::Range(1, 5));
  grad->add_option("--batch", gc.batch)->capture_default_str();
  grad->add_option("--alpha", gc.alpha)->capture_default_str();
  grad->add_option("--lambda", gc.lambda)->capture_default_str();
  grad->add_option("--tolerance", gc.tolerance)->capture_default_str();
  grad->add_flag("--corrupt", gc.corrupt, "Perturb one analytic gradient (negative control)");
  grad->add_flag("-v,--verbose", gc_verbose, "Print every case");

  std::size_t x_e = 3, x_r = 2, x_t = 3, x_trials = 1;
  std::uint64_t x_seed = 0;
  std::string x_truth = "random";
  auto* expr = app.add_subcommand("expressivity-check",
                                  "Separate any truth assignment with a constructed model");
  expr->add_option("--entities", x_e)->capture_default_str();
  expr->add_option("--relations", x_r)->capture_default_str();
  expr->add_option("--timestamps", x_t)->capture_default_str();
  expr->add_option("--trials", x_trials)->capture_default_str();
  expr->add_option("--seed", x_seed)->capture_default_str();
  expr->add_option("--truth", x_truth, "random, all or none")
      ->check(CLI::IsMember({"random", "all", "none"}))
      ->capture_default_str();

  TrainFlags stats_flags;
  auto* stats = app.add_subcommand("stats", "Print vocabulary and split sizes of a dataset");
  add_dataset_flags(stats, stats_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*train) return cmd_train(train_flags);
    if (*evaluate) return cmd_evaluate(checkpoint_dir, eval_flags, split, report_out);
    if (*grad) return cmd_grad_check(gc, gc_verbose);
    if (*expr) return cmd_expressivity(x_e, x_r, x_t, x_trials, x_seed, x_truth);
    if (*stats) return cmd_stats(stats_flags);
  } catch (const tuckert::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const tuckert::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kNumericError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kDataError;
  }
  return kUsageError;
}
