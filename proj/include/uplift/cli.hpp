#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "uplift/data.hpp"
#include "uplift/eval.hpp"
#include "uplift/generator.hpp"
#include "uplift/learn.hpp"
#include "uplift/policy.hpp"

namespace uplift::cli {

/// Flat key = value settings. '#' starts a comment line.
using Settings = std::map<std::string, std::string>;

/// Bad command line or config text; reported with exit status 2.
class UsageError : public Error {
 public:
  using Error::Error;
};

Settings parse_settings(std::istream& in);

/// Hash of every setting except file paths, so relocated runs share it.
std::string settings_fingerprint(const Settings& settings);

SchemaConfig schema_config_from(const Settings& s);
LearnConfig learn_config_from(const Settings& s);
CostBenefit cost_benefit_from(const Settings& s);
/// Falls back to a three-segment demo population when no predictors are set.
GeneratorConfig generator_config_from(const Settings& s);
/// "lo:hi[:step]", inclusive of hi.
std::vector<double> parse_range(std::string_view text);

/// Entry point behind the `uplift` executable. `args` excludes the program name.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace uplift::cli
