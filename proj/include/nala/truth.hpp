#pragma once
// Truth-value algebra for non-axiomatic similarity inference.
//
// A truth value is a <frequency, confidence> pair. Confidence is a monotone
// function of the total amount of evidence w: c = w / (w + k), with the
// evidential horizon k fixed at 1. All rules below are pure functions.

#include <initializer_list>
#include <span>
#include <stdexcept>
#include <string>

namespace nala {

inline constexpr double kEvidentialHorizon = 1.0;

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct TruthValue {
  double f = 0.0;
  double c = 0.0;

  // Ranking key used by the matcher. Defined as f * c.
  double expectation() const { return f * c; }

  friend bool operator==(const TruthValue&, const TruthValue&) = default;
};

struct Evidence {
  double positive = 0.0;  // w+
  double total = 0.0;     // w = w+ + w-

  double negative() const { return total - positive; }
};

std::string to_string(const TruthValue& tv);

// Extended boolean operators. Inputs must lie in [0, 1].
double op_and(std::span<const double> xs);
double op_and(std::initializer_list<double> xs);
double op_or(std::span<const double> xs);
double op_or(std::initializer_list<double> xs);
double op_not(double x);

// Throws DomainError when tv.c == 1 (infinite evidence).
Evidence evidence_from_truth(const TruthValue& tv);
// f = 0 when w = 0.
TruthValue truth_from_evidence(const Evidence& ev);

// Amount of evidence behind a confidence, w = k c / (1 - c).
double evidence_amount(double confidence);
double confidence_from_amount(double w);

// Strong rules. Accept c == 1 inputs (axiomatic facts).
TruthValue deduction(const TruthValue& t1, const TruthValue& t2);
TruthValue analogy(const TruthValue& t1, const TruthValue& t2);
TruthValue conditional_deduction(const TruthValue& implication,
                                 const TruthValue& condition);

// Weak rule: conclusion confidence is capped at 1 / (1 + k).
TruthValue induction(const TruthValue& t1, const TruthValue& t2);
// The (w+, w) produced by induction before conversion to a truth value.
Evidence induction_evidence(const TruthValue& t1, const TruthValue& t2);

// Evidence pooling. Both premises need c < 1. A premise carrying zero
// evidence is neutral.
TruthValue revision(const TruthValue& t1, const TruthValue& t2);
TruthValue probabilistic_revision(const TruthValue& t1, const TruthValue& t2);

// Multiplies the evidence amount by factor, keeping the frequency.
TruthValue scale_evidence(const TruthValue& tv, double factor);

// Streaming folds equivalent to repeated application of revision and
// probabilistic_revision. They keep the running state in evidence space so
// long folds do not lose precision through repeated c <-> w conversion.
class RevisionPool {
 public:
  void add(const TruthValue& tv);
  void add(const Evidence& ev);
  bool empty() const { return total_ == 0.0; }
  TruthValue result() const;
  Evidence evidence() const { return {positive_, total_}; }

 private:
  double positive_ = 0.0;
  double total_ = 0.0;
};

class ProbabilisticRevisionPool {
 public:
  void add(const TruthValue& tv);
  bool empty() const { return total_ == 0.0; }
  std::size_t size() const { return count_; }
  TruthValue result() const;

 private:
  double complement_product_ = 1.0;  // prod (1 - f_i)
  double total_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace nala
