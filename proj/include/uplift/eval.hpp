#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "uplift/data.hpp"
#include "uplift/policy.hpp"
#include "uplift/tree.hpp"

namespace uplift {

/// Thrown when no test record's logged assignment matches the policy.
class NoMatchedRecords : public Error {
 public:
  NoMatchedRecords() : Error("no matched records") {}
};

struct EvaluationReport {
  std::uint64_t matched_mail = 0;
  std::uint64_t matched_nomail = 0;
  std::uint64_t skipped = 0;
  double total_revenue = 0.0;
  double per_person_revenue = 0.0;
  double baseline_per_person = 0.0;
  double improvement = 0.0;
};

/// A targeting policy sees only the predictors of a record.
using PolicyFn = std::function<Action(std::span<const ValueIndex>)>;

/// Matched-record protocol: a record counts only when the recommended action
/// equals its logged treatment. Matched mailed records earn r_s - c on
/// subscription and -c otherwise; matched unmailed records earn r_u on
/// subscription and 0 otherwise. Baseline is filled in when the test set has a
/// mailed record.
EvaluationReport evaluate_policy(const PolicyFn& policy, const Dataset& test,
                                 const CostBenefit& cb);
EvaluationReport evaluate_policy(const Tree& tree, const Dataset& test, const CostBenefit& cb);

/// Mean revenue over mailed test records: p̂(s1|m1) * r_s - c.
double mail_to_all_revenue(const Dataset& test, const CostBenefit& cb);

inline double improvement(double policy_revenue, double baseline_revenue) {
  return policy_revenue - baseline_revenue;
}

struct NamedTree {
  std::string name;
  const Tree* tree;
};

struct SweepRow {
  double r = 0.0;  // r_s = r_u = r
  double baseline = 0.0;
  std::vector<double> revenue;      // per tree, in input order
  std::vector<double> improvement;  // per tree
};

std::vector<SweepRow> sweep(std::span<const NamedTree> trees, const Dataset& test, double cost,
                            std::span<const double> r_values);

/// Header r,baseline,<name>_revenue,<name>_improvement,...
void write_sweep_csv(std::ostream& out, std::span<const NamedTree> trees,
                     std::span<const SweepRow> rows);

}  // namespace uplift
