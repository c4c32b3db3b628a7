// Acceptance suite. Prints one PASS / FAIL / SKIP / N/A line per criterion.
//
//   --group core  criteria 1, 2, 3, 7, 8 (self-contained)
//   --group data  criteria 4, 5, 6 (need the public ICEWS/GDELT splits under
//                 $TUCKERT_DATA_DIR or --data-dir; exit 77 when none are found)
//
// Exit status: 0 all run criteria passed, 1 a criterion failed, 77 nothing ran.

#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <thread>

#include "support/oracles.hpp"
#include "support/toy.hpp"
#include "tuckert/config.hpp"
#include "tuckert/expressivity.hpp"
#include "tuckert/grad_check.hpp"
#include "tuckert/trainer.hpp"

namespace {

using namespace tuckert;
using Clock = std::chrono::steady_clock;

enum class Status { Pass, Fail, Skip, NotApplicable };

struct Result {
  Status status;
  std::string detail;
};

int failures = 0;
int ran = 0;

void report(int id, const std::string& name, const Result& r, double seconds) {
  static constexpr const char* kLabel[] = {"PASS", "FAIL", "SKIP", "N/A "};
  std::cout << "[" << kLabel[static_cast<int>(r.status)] << "] criterion " << id << " " << name
            << ": " << r.detail;
  if (r.status == Status::Pass || r.status == Status::Fail) {
    std::cout << " (" << std::fixed << std::setprecision(2) << seconds << " s)";
    std::cout.unsetf(std::ios::floatfield);
    ++ran;
  }
  std::cout << std::endl;
  if (r.status == Status::Fail) ++failures;
}

template <class F>
void criterion(int id, const std::string& name, double time_limit_s, F&& body) {
  const auto start = Clock::now();
  Result r;
  try {
    r = body();
  } catch (const std::exception& e) {
    r = {Status::Fail, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  if (r.status == Status::Pass && time_limit_s > 0 && secs >= time_limit_s) {
    std::ostringstream os;
    os << r.detail << "; exceeded time limit " << time_limit_s << " s";
    r = {Status::Fail, os.str()};
  }
  report(id, name, r, secs);
}

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

// 1. Kernels against loop oracles, |error| < 1e-12.
Result kernel_oracles() {
  constexpr double kTol = 1e-12;
  oracle::Rng rng(2024);
  double worst = 0.0;
  for (int instance = 0; instance < 500; ++instance) {
    const std::size_t d = 2 + static_cast<std::size_t>(instance % 5);
    const auto w = rng.core(d, d, d);
    const auto a = rng.vector(d), b = rng.vector(d), c = rng.vector(d);
    worst = std::max(worst, std::abs(trilinear_form<double>(w, a, b, c) -
                                     oracle::triple_loop(w, a, b, c)));
    const auto m = contract_mode2<double>(w, b);
    const auto m_ref = oracle::mode2_loop(w, b);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t k = 0; k < d; ++k) worst = std::max(worst, std::abs(m(i, k) - m_ref[i][k]));
    const std::size_t n = 1 + rng.index(9);
    const auto cand = rng.matrix(n, d);
    const auto scores = score_all_candidates<double>(w, a, b, cand);
    for (std::size_t row = 0; row < n; ++row) {
      worst = std::max(worst, std::abs(scores[row] -
                                       oracle::triple_loop(w, a, b, oracle::row(cand.row(row)))));
    }
  }
  return {worst < kTol ? Status::Pass : Status::Fail,
          "500 instances, d in 2..6, max abs error " + fmt(worst, 3) + " (tolerance 1e-12)"};
}

// 2. Every gradient path against central differences, relative error < 1e-5.
Result gradient_suite() {
  const GradCheckOptions opt;
  const auto r = run_grad_check(opt);
  std::string detail = std::to_string(r.cases.size()) +
                       " cases (2 kinds x 3 bindings x 5 regularizers), max rel error " +
                       fmt(r.max_rel_error, 3) + " (tolerance 1e-5)";
  return {r.passed && r.cases.size() == 30 && r.max_rel_error < 1e-5 ? Status::Pass : Status::Fail,
          detail};
}

// 3. 20 random truth assignments at n_e=3, n_r=2, n_t=3.
Result expressivity() {
  std::size_t separated = 0, facts = 0, perfect = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const auto r = run_expressivity_check(TruthTable::random(3, 2, 3, seed));
    separated += r.separated;
    facts += r.facts;
    const bool mrr_ok = r.ranking.query_count == 0 || r.ranking.mrr == 1.0;
    if (r.passed && r.separated == r.facts && r.folded_matches && mrr_ok) ++perfect;
  }
  return {perfect == 20 ? Status::Pass : Status::Fail,
          std::to_string(perfect) + "/20 assignments with MRR 1.0, " + std::to_string(separated) +
              "/" + std::to_string(facts) + " tuples sign-separated"};
}

// 8. Two identical single-threaded toy runs produce identical files.
Result determinism() {
  const auto s = toy::planted(12, 3, 16, 8);
  const auto ds = build_dataset(s.train, s.valid, s.test);
  TrainConfig cfg;
  cfg.dim = 8;
  cfg.batch_size = 32;
  cfg.epochs = 3;
  cfg.patience = 0;
  cfg.seed = 17;
  cfg.threads = 1;
  const auto a = toy::scratch_dir("acceptance_det_a");
  const auto b = toy::scratch_dir("acceptance_det_b");
  Trainer(cfg, ds).train(a);
  Trainer(cfg, ds).train(b);
  std::size_t compared = 0;
  for (const char* f : {"metrics.jsonl", "report.json", "last/manifest.json", "last/tensors.bin",
                        "best/manifest.json", "best/tensors.bin"}) {
    const auto x = toy::read_file(a / f), y = toy::read_file(b / f);
    if (x.empty() || x != y) return {Status::Fail, std::string(f) + " differs between runs"};
    ++compared;
  }
  std::filesystem::remove_all(a);
  std::filesystem::remove_all(b);
  return {Status::Pass, std::to_string(compared) + " files bitwise identical across 2 runs"};
}

struct Expected {
  const char* name;
  std::size_t entities, predicates, timestamps, train, valid, test;
};

constexpr Expected kDatasets[] = {
    {"icews14", 7128, 230, 365, 72826, 8941, 8963},
    {"icews05-15", 10488, 251, 4017, 386962, 46275, 46092},
    {"gdelt", 500, 20, 366, 2735685, 341961, 341961},
};

std::optional<std::filesystem::path> find_dataset(const std::filesystem::path& root,
                                                  const std::string& name) {
  if (root.empty()) return std::nullopt;
  std::string upper = name;
  for (auto& ch : upper) ch = static_cast<char>(std::toupper(static_cast<unsigned char>(ch)));
  for (const auto& candidate : {name, upper}) {
    if (std::filesystem::is_directory(root / candidate)) return root / candidate;
  }
  return std::nullopt;
}

// 4. Loader counts.
Result dataset_counts(const std::filesystem::path& root) {
  std::string detail;
  bool all_ok = true;
  std::size_t loaded = 0;
  for (const auto& e : kDatasets) {
    const auto dir = find_dataset(root, e.name);
    if (!dir) {
      detail += std::string(e.name) + " absent; ";
      continue;
    }
    const auto ds = load_dataset(*dir);
    const bool ok = ds.num_entities() == e.entities && ds.num_relations() == e.predicates &&
                    ds.num_timestamps() == e.timestamps && ds.raw_train_size() == e.train &&
                    ds.valid.size() == e.valid && ds.test.size() == e.test;
    all_ok = all_ok && ok;
    ++loaded;
    detail += std::string(e.name) + " " + std::to_string(ds.num_entities()) + "/" +
              std::to_string(ds.num_relations()) + "/" + std::to_string(ds.num_timestamps()) +
              "/" + std::to_string(ds.raw_train_size()) + "/" + std::to_string(ds.valid.size()) +
              "/" + std::to_string(ds.test.size()) + (ok ? " ok; " : " MISMATCH; ");
  }
  if (loaded == 0) return {Status::Skip, "no dataset directories found"};
  return {all_ok ? Status::Pass : Status::Fail, detail + "exact match required"};
}

RankingReport train_icews14(const std::filesystem::path& dir, std::size_t dim,
                            const RegularizerChoice& reg, int threads) {
  const auto ds = load_dataset(dir);
  TrainConfig cfg;
  cfg.kind = ModelKind::TuckERTNT;
  cfg.dim = dim;
  cfg.regularizer = reg;
  cfg.threads = threads;
  return Trainer(cfg, ds).train(std::nullopt, &std::cerr).test;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance criteria"};
  std::string group = "core";
  std::string data_dir;
  int threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  bool extended = false;
  app.add_option("--group", group)->check(CLI::IsMember({"core", "data"}))->capture_default_str();
  app.add_option("--data-dir", data_dir, "Root holding icews14/, icews05-15/, gdelt/");
  app.add_option("--threads", threads, "Worker threads for the training criteria");
  app.add_flag("--extended", extended, "Also run the optional d=100 reproduction");
  CLI11_PARSE(app, argc, argv);

  if (group == "core") {
    criterion(1, "kernel oracle equivalence", 5.0, kernel_oracles);
    criterion(2, "gradient suite", 60.0, gradient_suite);
    criterion(3, "expressivity", 10.0, expressivity);
    report(7, "full-scale reference numbers", {Status::NotApplicable, "outside acceptance scope"},
           0.0);
    criterion(8, "determinism", 0.0, determinism);
    return failures > 0 ? 1 : 0;
  }

  if (data_dir.empty()) {
    if (const char* env = std::getenv(kDataDirEnv)) data_dir = env;
  }
  const std::filesystem::path root = data_dir;
  criterion(4, "dataset fidelity", 30.0, [&] { return dataset_counts(root); });

  const auto icews14 = find_dataset(root, "icews14");
  const Result no_data{Status::Skip, "ICEWS14 not found (set " + std::string(kDataDirEnv) + ")"};
  criterion(5, "ICEWS14 TuckERTNT d=32", 0.0, [&]() -> Result {
    if (!icews14) return no_data;
    const auto r = train_icews14(*icews14, 32, RegularizerChoice{}, threads);
    return {r.mrr >= 0.45 ? Status::Pass : Status::Fail,
            "test MRR " + fmt(r.mrr) + " (threshold 0.45, reference 0.478)"};
  });
  if (extended) {
    criterion(5, "ICEWS14 TuckERTNT d=100 (extended)", 0.0, [&]() -> Result {
      if (!icews14) return no_data;
      const auto r = train_icews14(*icews14, 100, RegularizerChoice{}, threads);
      return {r.mrr >= 0.52 ? Status::Pass : Status::Fail,
              "test MRR " + fmt(r.mrr) + " (threshold 0.52, reference 0.554)"};
    });
  }
  criterion(6, "time-smoothness ablation d=100", 0.0, [&]() -> Result {
    if (!icews14) return no_data;
    RegularizerChoice plain{Regularizer::None, 0.0, 0.0};
    RegularizerChoice smooth{Regularizer::None, 0.0, 0.01};
    const auto a = train_icews14(*icews14, 100, plain, threads);
    const auto b = train_icews14(*icews14, 100, smooth, threads);
    return {b.mrr - a.mrr >= 0.01 ? Status::Pass : Status::Fail,
            "test MRR " + fmt(a.mrr) + " -> " + fmt(b.mrr) + " (required gain 0.01)"};
  });
  if (failures > 0) return 1;
  return ran == 0 ? 77 : 0;
}
