#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "uplift/data.hpp"
#include "uplift/tree.hpp"

namespace uplift {

/// Mailing cost c and revenues from solicited (r_s) and unsolicited (r_u) subscriptions.
struct CostBenefit {
  double cost = 0.0;
  double solicited_revenue = 0.0;
  double unsolicited_revenue = 0.0;

  void validate() const;
};

enum class Action { kNoMail, kMail };

std::string_view to_string(Action a);

struct Decision {
  Action action = Action::kNoMail;
  double elp = 0.0;
  double p_mailed = 0.0;      // p(s1 | m1, x)
  double p_not_mailed = 0.0;  // p(s1 | m0, x)
};

/// Expected lift in profit: r_s * p1 - r_u * p0 - c.
double elp(double p_mailed, double p_not_mailed, const CostBenefit& cb);

/// Mail iff the expected lift is strictly positive.
Decision decide(const Tree& tree, std::span<const ValueIndex> x, const CostBenefit& cb,
                Estimator estimator = Estimator::kPosteriorMean);

/// A region of predictor space: the allowed values of each predictor.
class Region {
 public:
  explicit Region(const Schema& schema);

  bool contains(std::span<const ValueIndex> x) const;
  const std::vector<bool>& allowed(std::size_t predictor) const { return allowed_[predictor]; }
  /// Intersects with the values sending predictor j down child `child` of a rule.
  Region restrict(const SplitRule& rule, std::size_t child) const;
  bool empty() const;

 private:
  std::vector<std::vector<bool>> allowed_;
};

struct SegmentRow {
  std::string path;  // e.g. "X2=2 & X1=1"; "*" for the whole space
  Region region;
  std::uint64_t support = 0;
  bool support_exact = true;
  double p_mailed = 0.0;
  double p_not_mailed = 0.0;
  double elp = 0.0;
  Action action = Action::kNoMail;
};

/// One row per maximal root-to-(M split or leaf) path; rows partition the
/// predictor space. Support is the training count of the region; where an M
/// split is followed by further splits the count cannot be recovered from the
/// tree alone and is reported as the sum of the two terminal cells
/// (support_exact = false) unless `support_data` is given.
std::vector<SegmentRow> segment_report(const Tree& tree, const CostBenefit& cb,
                                       const Dataset* support_data = nullptr);

/// CSV with columns path,support,p1,p0,elp,action.
void write_segment_csv(std::ostream& out, std::span<const SegmentRow> rows);

}  // namespace uplift
