#include "uplift/eval.hpp"

#include <fmt/format.h>

#include <ostream>

namespace uplift {
namespace {

// Revenue from tallies rather than a running sum, so large test sets do not
// pick up rounding drift and both entry points agree bit for bit.
double revenue(const CrossTab& matched, const CostBenefit& cb) {
  const auto& m = matched.mailed;
  const auto& u = matched.not_mailed;
  return static_cast<double>(m.yes) * (cb.solicited_revenue - cb.cost) -
         static_cast<double>(m.no) * cb.cost + static_cast<double>(u.yes) * cb.unsolicited_revenue;
}

bool has_mailed(const Dataset& d) {
  for (const auto& r : d.records()) {
    if (r.treatment == Treatment::kMailed) return true;
  }
  return false;
}

}  // namespace

EvaluationReport evaluate_policy(const PolicyFn& policy, const Dataset& test,
                                 const CostBenefit& cb) {
  cb.validate();
  EvaluationReport report;
  CrossTab matched_counts;
  for (const auto& r : test.records()) {
    const Action a = policy(r.predictors);
    const bool mail = a == Action::kMail;
    if (mail != (r.treatment == Treatment::kMailed)) {
      ++report.skipped;
      continue;
    }
    matched_counts.add(r.treatment, r.outcome);
  }
  report.matched_mail = matched_counts.mailed.total();
  report.matched_nomail = matched_counts.not_mailed.total();
  report.total_revenue = revenue(matched_counts, cb);
  const auto matched = report.matched_mail + report.matched_nomail;
  if (matched == 0) throw NoMatchedRecords();
  report.per_person_revenue = report.total_revenue / static_cast<double>(matched);
  if (has_mailed(test)) {
    report.baseline_per_person = mail_to_all_revenue(test, cb);
    report.improvement = improvement(report.per_person_revenue, report.baseline_per_person);
  }
  return report;
}

EvaluationReport evaluate_policy(const Tree& tree, const Dataset& test, const CostBenefit& cb) {
  if (tree.schema().fingerprint() != test.schema().fingerprint()) {
    throw Error("test data does not match the tree's schema");
  }
  return evaluate_policy([&](std::span<const ValueIndex> x) { return decide(tree, x, cb).action; },
                         test, cb);
}

double mail_to_all_revenue(const Dataset& test, const CostBenefit& cb) {
  cb.validate();
  CrossTab mailed;
  mailed.mailed = test.counts().mailed;
  if (mailed.total() == 0) throw Error("no mailed records in the test set");
  return revenue(mailed, cb) / static_cast<double>(mailed.total());
}

std::vector<SweepRow> sweep(std::span<const NamedTree> trees, const Dataset& test, double cost,
                            std::span<const double> r_values) {
  if (trees.empty()) throw Error("sweep needs at least one tree");
  if (r_values.empty()) throw Error("sweep needs at least one revenue value");
  std::vector<SweepRow> rows;
  rows.reserve(r_values.size());
  for (double r : r_values) {
    const CostBenefit cb{cost, r, r};
    SweepRow row;
    row.r = r;
    row.baseline = mail_to_all_revenue(test, cb);
    for (const auto& t : trees) {
      const auto report = evaluate_policy(*t.tree, test, cb);
      row.revenue.push_back(report.per_person_revenue);
      row.improvement.push_back(improvement(report.per_person_revenue, row.baseline));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_sweep_csv(std::ostream& out, std::span<const NamedTree> trees,
                     std::span<const SweepRow> rows) {
  out << "r,baseline";
  for (const auto& t : trees) out << ',' << t.name << "_revenue," << t.name << "_improvement";
  out << '\n';
  for (const auto& row : rows) {
    out << fmt::format("{:g},{:.6f}", row.r, row.baseline);
    for (std::size_t k = 0; k < row.revenue.size(); ++k) {
      out << fmt::format(",{:.6f},{:.6f}", row.revenue[k], row.improvement[k]);
    }
    out << '\n';
  }
}

}  // namespace uplift
