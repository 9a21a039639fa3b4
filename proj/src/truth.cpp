#include "nala/truth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace nala {

namespace {

void check_unit(double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("extended boolean operand outside [0,1]: " + std::to_string(x));
  }
}

// Floating-point drift can push products a few ulps outside the unit
// interval; results are clamped back.
double clamp_unit(double x) { return std::clamp(x, 0.0, 1.0); }

TruthValue clamped(double f, double c) { return {clamp_unit(f), clamp_unit(c)}; }

}  // namespace

std::string to_string(const TruthValue& tv) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "<%.6g, %.6g>", tv.f, tv.c);
  return buf;
}

double op_and(std::span<const double> xs) {
  double acc = 1.0;
  for (double x : xs) {
    check_unit(x);
    acc *= x;
  }
  return acc;
}

double op_and(std::initializer_list<double> xs) {
  return op_and(std::span<const double>(xs.begin(), xs.size()));
}

double op_or(std::span<const double> xs) {
  double acc = 1.0;
  for (double x : xs) {
    check_unit(x);
    acc *= 1.0 - x;
  }
  return 1.0 - acc;
}

double op_or(std::initializer_list<double> xs) {
  return op_or(std::span<const double>(xs.begin(), xs.size()));
}

double op_not(double x) {
  check_unit(x);
  return 1.0 - x;
}

double evidence_amount(double confidence) {
  if (!(confidence >= 0.0 && confidence <= 1.0)) {
    throw DomainError("confidence outside [0,1]: " + std::to_string(confidence));
  }
  if (confidence >= 1.0) throw DomainError("infinite evidence: confidence is 1");
  return kEvidentialHorizon * confidence / (1.0 - confidence);
}

double confidence_from_amount(double w) { return w / (w + kEvidentialHorizon); }

Evidence evidence_from_truth(const TruthValue& tv) {
  check_unit(tv.f);
  const double w = evidence_amount(tv.c);
  return {tv.f * w, w};
}

TruthValue truth_from_evidence(const Evidence& ev) {
  if (ev.total < 0.0 || ev.positive < 0.0 || ev.positive > ev.total * (1.0 + 1e-12)) {
    throw DomainError("invalid evidence: w+ must lie in [0, w]");
  }
  if (ev.total == 0.0) return {0.0, 0.0};
  return clamped(ev.positive / ev.total, confidence_from_amount(ev.total));
}

TruthValue deduction(const TruthValue& t1, const TruthValue& t2) {
  return clamped(op_and({t1.f, t2.f}), op_and({t1.f, t2.f, t1.c, t2.c}));
}

TruthValue analogy(const TruthValue& t1, const TruthValue& t2) {
  return clamped(op_and({t1.f, t2.f}), op_and({t2.f, t1.c, t2.c}));
}

TruthValue conditional_deduction(const TruthValue& implication,
                                 const TruthValue& condition) {
  return deduction(implication, condition);
}

Evidence induction_evidence(const TruthValue& t1, const TruthValue& t2) {
  const double positive = op_and({t2.f, t2.c, t1.f, t1.c});
  const double negative = op_and({t2.f, t2.c, op_not(t1.f), t1.c});
  return {positive, positive + negative};
}

TruthValue induction(const TruthValue& t1, const TruthValue& t2) {
  return truth_from_evidence(induction_evidence(t1, t2));
}

TruthValue revision(const TruthValue& t1, const TruthValue& t2) {
  RevisionPool pool;
  pool.add(t1);
  pool.add(t2);
  return pool.result();
}

TruthValue probabilistic_revision(const TruthValue& t1, const TruthValue& t2) {
  ProbabilisticRevisionPool pool;
  pool.add(t1);
  pool.add(t2);
  return pool.result();
}

TruthValue scale_evidence(const TruthValue& tv, double factor) {
  if (!(factor > 0.0) || !std::isfinite(factor)) {
    throw DomainError("evidence scale factor must be positive and finite");
  }
  if (factor == 1.0) return tv;
  const double w = evidence_amount(tv.c) * factor;
  return clamped(tv.f, confidence_from_amount(w));
}

void RevisionPool::add(const TruthValue& tv) { add(evidence_from_truth(tv)); }

void RevisionPool::add(const Evidence& ev) {
  positive_ += ev.positive;
  total_ += ev.total;
}

TruthValue RevisionPool::result() const {
  return truth_from_evidence({std::min(positive_, total_), total_});
}

void ProbabilisticRevisionPool::add(const TruthValue& tv) {
  const double w = evidence_amount(tv.c);
  check_unit(tv.f);
  if (w == 0.0) return;
  complement_product_ *= 1.0 - tv.f;
  total_ += w;
  ++count_;
}

TruthValue ProbabilisticRevisionPool::result() const {
  if (total_ == 0.0) return {0.0, 0.0};
  return clamped(1.0 - complement_product_, confidence_from_amount(total_));
}

}  // namespace nala
