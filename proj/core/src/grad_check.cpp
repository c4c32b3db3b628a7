#include "tuckert/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "tuckert/errors.hpp"

namespace tuckert {
namespace {

// Tiny models are drawn at a larger scale than training init so every
// regularizer term contributes a well-conditioned gradient.
ModelParams<double> random_model(const ModelShape& shape, ModelKind kind, std::mt19937_64& rng) {
  auto p = ModelParams<double>::zeros(shape, kind);
  std::uniform_real_distribution<double> emb(-1.0, 1.0);
  std::uniform_real_distribution<double> core(-1.0 / static_cast<double>(shape.dim),
                                              1.0 / static_cast<double>(shape.dim));
  for (auto* m : {&p.entities, &p.pred_temporal, &p.pred_static, &p.times}) {
    for (auto& x : m->values()) x = emb(rng);
  }
  for (auto& x : p.core.values()) x = core(rng);
  return p;
}

std::vector<Quadruple> random_batch(const ModelShape& shape, std::size_t n, std::mt19937_64& rng) {
  std::uniform_int_distribution<std::uint32_t> ent(0, static_cast<std::uint32_t>(shape.entities - 1));
  std::uniform_int_distribution<std::uint32_t> rel(
      0, static_cast<std::uint32_t>(2 * shape.relations - 1));
  std::uniform_int_distribution<std::uint32_t> ts(0,
                                                  static_cast<std::uint32_t>(shape.timestamps - 1));
  std::vector<Quadruple> batch(n);
  for (auto& q : batch) q = Quadruple{ent(rng), rel(rng), ent(rng), ts(rng)};
  return batch;
}

struct Slot {
  const char* name;
  std::span<double> param;
  std::span<const double> grad;
};

}  // namespace

GradCheckReport run_grad_check(const GradCheckOptions& opt) {
  if (opt.dim == 0 || opt.entities == 0 || opt.relations == 0 || opt.timestamps == 0 ||
      opt.batch == 0) {
    throw ConfigError("grad check sizes must be >= 1");
  }
  const ModelShape shape{opt.entities, opt.relations, opt.timestamps, opt.dim};
  std::mt19937_64 rng(opt.seed);
  GradCheckReport report;
  report.passed = true;

  for (ModelKind kind : opt.kinds) {
    for (TimeBinding binding : opt.bindings) {
      for (Regularizer reg : opt.regularizers) {
        RegularizerChoice choice{reg, opt.alpha, opt.lambda, opt.p, opt.q, opt.k};
        auto params = random_model(shape, kind, rng);
        const auto batch = random_batch(shape, opt.batch, rng);

        Gradients analytic;
        batch_objective(params, batch, binding, choice, analytic);
        if (opt.corrupt) analytic.core.values()[0] += 1e-2;

        Gradients scratch;
        auto loss_at = [&] { return batch_objective(params, batch, binding, choice, scratch).total; };

        const std::vector<Slot> slots{
            {"entities", params.entities.values(), analytic.entities.values()},
            {"pred_temporal", params.pred_temporal.values(), analytic.pred_temporal.values()},
            {"pred_static", params.pred_static.values(), analytic.pred_static.values()},
            {"times", params.times.values(), analytic.times.values()},
            {"core", params.core.values(), analytic.core.values()},
        };

        GradCheckCase c{kind, binding, reg, 0, 0.0, {}, false};
        for (const auto& slot : slots) {
          for (std::size_t i = 0; i < slot.param.size(); ++i) {
            const double saved = slot.param[i];
            slot.param[i] = saved + opt.step;
            const double up = loss_at();
            slot.param[i] = saved - opt.step;
            const double down = loss_at();
            slot.param[i] = saved;
            const double numeric = (up - down) / (2.0 * opt.step);
            const double a = slot.grad[i];
            const double err =
                std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), opt.floor});
            ++c.entries;
            if (err >= c.max_rel_error) {
              c.max_rel_error = err;
              c.worst_entry = std::string(slot.name) + "[" + std::to_string(i) + "]";
            }
          }
        }
        c.passed = c.max_rel_error < opt.tolerance;
        report.max_rel_error = std::max(report.max_rel_error, c.max_rel_error);
        report.passed = report.passed && c.passed;
        report.cases.push_back(std::move(c));
      }
    }
  }
  return report;
}

}  // namespace tuckert
