#include "uplift/policy.hpp"

#include <fmt/format.h>

#include <ostream>

namespace uplift {
namespace {

struct ReportBuilder {
  const Tree& tree;
  const CostBenefit& cb;
  const Dataset* support_data;
  std::vector<SegmentRow> rows;

  // Walks the tree once for each treatment at the same time: n0 is where an
  // unmailed person currently sits, n1 where a mailed one does.
  void walk(const Node* n0, const Node* n1, const Node* common, const Region& region,
            std::vector<std::string>& tests, bool cut_after_divergence) {
    while (!n0->is_leaf() && n0->rule->variable.is_treatment()) {
      if (n0 == n1) common = n0;
      const Node* next0 = &n0->children[n0->rule->child_for(0)];
      if (n1 == n0) n1 = &n1->children[n1->rule->child_for(1)];
      n0 = next0;
    }
    while (!n1->is_leaf() && n1->rule->variable.is_treatment()) {
      n1 = &n1->children[n1->rule->child_for(1)];
    }

    if (n0->is_leaf() && n1->is_leaf()) {
      emit(*n0, *n1, n0 == n1 ? n0 : common, region, tests, cut_after_divergence);
      return;
    }

    const bool shared = n0 == n1;
    const Node* splitter = !n0->is_leaf() ? n0 : n1;
    const SplitRule& rule = *splitter->rule;
    const std::size_t j = rule.variable.predictor_index();
    const auto& spec = tree.schema().predictor(j);
    for (std::size_t c = 0; c < splitter->children.size(); ++c) {
      Region child_region = region.restrict(rule, c);
      if (child_region.empty()) continue;
      const bool cuts = child_region.allowed(j) != region.allowed(j);
      if (cuts) tests.push_back(describe(rule, c, spec));
      const Node* next0 = n0 == splitter ? &splitter->children[c] : n0;
      const Node* next1 = n1 == splitter ? &splitter->children[c] : n1;
      walk(next0, next1, shared ? next0 : common, child_region, tests,
           cut_after_divergence || (cuts && !shared));
      if (cuts) tests.pop_back();
    }
  }

  static std::string describe(const SplitRule& rule, std::size_t child, const VariableSpec& spec) {
    if (rule.kind == SplitKind::kBinary) {
      return fmt::format("{}{}{}", spec.name, child == 0 ? "=" : "!=", spec.values[rule.value]);
    }
    return fmt::format("{}={}", spec.name, spec.values[child]);
  }

  void emit(const Node& leaf0, const Node& leaf1, const Node* common, const Region& region,
            const std::vector<std::string>& tests, bool cut_after_divergence) {
    SegmentRow row{.path = tests.empty() ? "*" : fmt::format("{}", fmt::join(tests, " & ")),
                   .region = region};
    row.p_not_mailed = leaf_probability(leaf0, tree.form(), Treatment::kNotMailed);
    row.p_mailed = leaf_probability(leaf1, tree.form(), Treatment::kMailed);
    row.elp = elp(row.p_mailed, row.p_not_mailed, cb);
    row.action = row.elp > 0.0 ? Action::kMail : Action::kNoMail;
    if (support_data) {
      for (const auto& r : support_data->records())
        row.support += region.contains(r.predictors) ? 1 : 0;
    } else if (!cut_after_divergence && common) {
      row.support = common->counts.total();
    } else {
      row.support = leaf0.counts.not_mailed.total() + leaf1.counts.mailed.total();
      row.support_exact = false;
    }
    rows.push_back(std::move(row));
  }
};

}  // namespace

void CostBenefit::validate() const {
  if (!(cost >= 0.0) || !(solicited_revenue >= 0.0) || !(unsolicited_revenue >= 0.0)) {
    throw Error("cost and revenues must be nonnegative");
  }
}

std::string_view to_string(Action a) { return a == Action::kMail ? "mail" : "no_mail"; }

double elp(double p_mailed, double p_not_mailed, const CostBenefit& cb) {
  return cb.solicited_revenue * p_mailed - cb.unsolicited_revenue * p_not_mailed - cb.cost;
}

Decision decide(const Tree& tree, std::span<const ValueIndex> x, const CostBenefit& cb,
                Estimator estimator) {
  Decision d;
  d.p_mailed = tree.predict(x, Treatment::kMailed, estimator);
  d.p_not_mailed = tree.predict(x, Treatment::kNotMailed, estimator);
  d.elp = elp(d.p_mailed, d.p_not_mailed, cb);
  d.action = d.elp > 0.0 ? Action::kMail : Action::kNoMail;
  return d;
}

Region::Region(const Schema& schema) {
  for (const auto& p : schema.predictors()) allowed_.emplace_back(p.arity(), true);
}

bool Region::contains(std::span<const ValueIndex> x) const {
  for (std::size_t j = 0; j < allowed_.size(); ++j) {
    if (!allowed_[j][x[j]]) return false;
  }
  return true;
}

Region Region::restrict(const SplitRule& rule, std::size_t child) const {
  Region out = *this;
  if (rule.variable.is_treatment()) return out;
  auto& allowed = out.allowed_[rule.variable.predictor_index()];
  for (std::size_t v = 0; v < allowed.size(); ++v) {
    allowed[v] = allowed[v] && rule.child_for(static_cast<ValueIndex>(v)) == child;
  }
  return out;
}

bool Region::empty() const {
  for (const auto& a : allowed_) {
    bool any = false;
    for (bool b : a) any = any || b;
    if (!any) return true;
  }
  return false;
}

std::vector<SegmentRow> segment_report(const Tree& tree, const CostBenefit& cb,
                                       const Dataset* support_data) {
  ReportBuilder builder{tree, cb, support_data, {}};
  std::vector<std::string> tests;
  const Node* root = &tree.root();
  builder.walk(root, root, root, Region(tree.schema()), tests, false);
  return std::move(builder.rows);
}

void write_segment_csv(std::ostream& out, std::span<const SegmentRow> rows) {
  out << "path,support,p1,p0,elp,action\n";
  for (const auto& r : rows) {
    out << fmt::format("{},{},{:.6f},{:.6f},{:.6f},{}\n", r.path, r.support, r.p_mailed,
                       r.p_not_mailed, r.elp, to_string(r.action));
  }
}

}  // namespace uplift
