#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tuckert/model.hpp"
#include "tuckert/objective.hpp"

namespace tuckert {

struct GradCheckOptions {
  std::uint64_t seed = 7;
  std::size_t entities = 5;
  std::size_t relations = 2;
  std::size_t timestamps = 4;
  std::size_t dim = 4;
  std::size_t batch = 6;
  double alpha = 0.05;
  double lambda = 0.05;
  double p = 4.0;
  double q = 2.0;
  double k = 1.0;
  double step = 1e-5;
  double tolerance = 1e-5;
  /// Error denominator floor: |analytic - numeric| / max(|analytic|, |numeric|, floor).
  double floor = 1e-3;
  /// Negative control: perturb one analytic core gradient entry before comparing.
  bool corrupt = false;
  std::vector<ModelKind> kinds{ModelKind::TuckERT, ModelKind::TuckERTNT};
  std::vector<TimeBinding> bindings{TimeBinding::Subject, TimeBinding::Predicate,
                                    TimeBinding::Object};
  std::vector<Regularizer> regularizers{Regularizer::None, Regularizer::Frobenius,
                                        Regularizer::FrobeniusWithCore, Regularizer::Lp,
                                        Regularizer::LpWithCore};
};

struct GradCheckCase {
  ModelKind kind;
  TimeBinding binding;
  Regularizer regularizer;
  std::size_t entries = 0;
  double max_rel_error = 0.0;
  std::string worst_entry;
  bool passed = false;
};

struct GradCheckReport {
  std::vector<GradCheckCase> cases;
  double max_rel_error = 0.0;
  bool passed = false;
};

/// Compares every entry of batch_objective's analytic gradient against central
/// finite differences of its total loss on random tiny 64-bit models.
GradCheckReport run_grad_check(const GradCheckOptions& options);

}  // namespace tuckert
