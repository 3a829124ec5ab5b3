#include "uplift/cli.hpp"

#include <fmt/format.h>

#include <CLI11.hpp>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <set>
#include <sstream>

namespace uplift::cli {
namespace {

namespace fs = std::filesystem;

// Settings naming files; excluded from the fingerprint.
const std::set<std::string, std::less<>> kPathKeys = {"config",       "out_dir",    "train",
                                                      "test",         "model",      "models",
                                                      "segments_out", "report_out", "sweep_out"};

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) return out;
    start = pos + 1;
  }
}

double parse_double(std::string_view key, std::string_view text) {
  double v = 0.0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw UsageError(fmt::format("setting '{}': '{}' is not a number", key, text));
  }
  return v;
}

std::uint64_t parse_uint(std::string_view key, std::string_view text) {
  std::uint64_t v = 0;
  const auto t = trim(text);
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw UsageError(fmt::format("setting '{}': '{}' is not a nonnegative integer", key, text));
  }
  return v;
}

std::string get(const Settings& s, const std::string& key, std::string fallback) {
  const auto it = s.find(key);
  return it == s.end() ? std::move(fallback) : it->second;
}

double get_double(const Settings& s, const std::string& key, double fallback) {
  const auto it = s.find(key);
  return it == s.end() ? fallback : parse_double(key, it->second);
}

std::uint64_t get_uint(const Settings& s, const std::string& key, std::uint64_t fallback) {
  const auto it = s.find(key);
  return it == s.end() ? fallback : parse_uint(key, it->second);
}

std::string require(const Settings& s, const std::string& key) {
  const auto it = s.find(key);
  if (it == s.end() || it->second.empty()) {
    throw UsageError(fmt::format("missing required setting '{}'", key));
  }
  return it->second;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(fmt::format("cannot write '{}'", path.string()));
  return out;
}

GeneratorConfig demo_population() {
  GeneratorConfig g;
  g.predictors = {{"segment", {"a", "b", "c"}},
                  {"region", {"east", "west"}},
                  {"memory", {"low", "mid", "high"}}};
  g.segments = {
      {{{0, 0}}, {0.05, 0.40, 0.00, 0.55}, 1.0 / 3.0},
      {{{0, 1}}, {0.30, 0.00, 0.00, 0.70}, 1.0 / 3.0},
      {{{0, 2}}, {0.05, 0.00, 0.15, 0.80}, 1.0 / 3.0},
  };
  g.population_size = 50000;
  return g;
}

Dataset load_dataset(const std::string& path, const SchemaConfig& config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  return load_csv(in, config);
}

Dataset load_dataset(const std::string& path, const Schema& schema) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open '{}'", path));
  return load_csv(in, schema);
}

Tree load_tree(const std::string& path) {
  try {
    return deserialize(read_file(path));
  } catch (const Error& e) {
    throw Error(fmt::format("{}: {}", path, e.what()));
  }
}

std::string comment_line(const std::string& fingerprint) {
  return fmt::format("# config_fingerprint={}\n", fingerprint);
}

// ---- subcommands ----

int cmd_generate(const Settings& s, std::ostream& out) {
  const auto fp = settings_fingerprint(s);
  const auto config = generator_config_from(s);
  const auto data = generate(config);
  const fs::path dir = get(s, "out_dir", ".");
  const double train_fraction = get_double(s, "train_fraction", 0.7);
  const auto [train, test] = split_train_test(data.dataset, train_fraction, config.seed);

  const auto write = [&](const char* name, const Dataset& d) {
    auto f = open_output(dir / name);
    f << comment_line(fp);
    write_csv(f, d);
  };
  write("dataset.csv", data.dataset);
  write("train.csv", train);
  write("test.csv", test);
  {
    auto f = open_output(dir / "truth.csv");
    f << comment_line(fp);
    write_truth_csv(f, data.truth);
  }
  out << fmt::format("generated {} records ({} train, {} test) in {}\n", data.dataset.size(),
                     train.size(), test.size(), dir.string());
  return 0;
}

int cmd_train(const Settings& s, std::ostream& out) {
  const auto config = learn_config_from(s);
  const auto train = load_dataset(require(s, "train"), schema_config_from(s));
  const Tree tree = learn(train, config);
  const double score = tree_log_score(tree, config.score);
  const std::map<std::string, std::string> metadata{
      {"config_fingerprint", settings_fingerprint(s)},
      {"mode", std::string(to_string(config.mode))},
      {"kappa", fmt::format("{}", config.score.kappa)},
      {"training_records", std::to_string(train.size())},
      {"leaves", std::to_string(tree.num_leaves())},
      {"log_score", fmt::format("{:.10f}", score)},
  };
  const std::string model_path = get(s, "model", "model.json");
  auto f = open_output(model_path);
  f << serialize(tree, metadata);
  out << fmt::format("mode={}\nrecords={}\nleaves={}\nlog_score={:.10f}\nmodel={}\n",
                     to_string(config.mode), train.size(), tree.num_leaves(), score, model_path);
  return 0;
}

int cmd_policy(const Settings& s, std::ostream& out) {
  const auto cb = cost_benefit_from(s);
  const Tree tree = load_tree(require(s, "model"));
  std::optional<Dataset> support;
  if (const auto it = s.find("train"); it != s.end())
    support = load_dataset(it->second, tree.schema());
  const auto rows = segment_report(tree, cb, support ? &*support : nullptr);
  const std::string path = get(s, "segments_out", "-");
  const auto emit = [&](std::ostream& o) {
    o << comment_line(settings_fingerprint(s));
    write_segment_csv(o, rows);
  };
  if (path == "-") {
    emit(out);
  } else {
    auto f = open_output(path);
    emit(f);
  }
  return 0;
}

int cmd_evaluate(const Settings& s, std::ostream& out) {
  const auto cb = cost_benefit_from(s);
  const Tree tree = load_tree(require(s, "model"));
  const auto test = load_dataset(require(s, "test"), tree.schema());
  const auto report = evaluate_policy(tree, test, cb);
  const auto fp = settings_fingerprint(s);

  nlohmann::ordered_json j{{"matched_mail", report.matched_mail},
                           {"matched_nomail", report.matched_nomail},
                           {"skipped", report.skipped},
                           {"total_revenue", report.total_revenue},
                           {"per_person_revenue", report.per_person_revenue},
                           {"baseline_per_person", report.baseline_per_person},
                           {"improvement", report.improvement},
                           {"config_fingerprint", fp}};
  auto f = open_output(get(s, "report_out", "evaluation.json"));
  f << j.dump(2) << '\n';

  out << fmt::format(
      "matched_mail={}\nmatched_nomail={}\nskipped={}\ntotal_revenue={:.6f}\n"
      "per_person_revenue={:.6f}\nbaseline_per_person={:.6f}\nimprovement={:.6f}\n"
      "config_fingerprint={}\n",
      report.matched_mail, report.matched_nomail, report.skipped, report.total_revenue,
      report.per_person_revenue, report.baseline_per_person, report.improvement, fp);
  return 0;
}

int cmd_sweep(const Settings& s, std::ostream& out) {
  const double cost = cost_benefit_from(s).cost;
  const auto r_values = parse_range(get(s, "sweep_r", "1:15"));
  std::vector<std::pair<std::string, std::string>> specs;
  if (const auto it = s.find("models"); it != s.end()) {
    for (const auto& item : split(it->second, ',')) {
      if (item.empty()) continue;
      const auto eq = item.find('=');
      if (eq == std::string::npos) {
        specs.emplace_back(fs::path(item).stem().string(), item);
      } else {
        specs.emplace_back(item.substr(0, eq), item.substr(eq + 1));
      }
    }
  } else {
    const auto path = require(s, "model");
    specs.emplace_back(fs::path(path).stem().string(), path);
  }
  std::vector<Tree> trees;
  for (const auto& [name, path] : specs) trees.push_back(load_tree(path));
  for (const auto& t : trees) {
    if (t.schema() != trees.front().schema()) throw Error("swept models use different schemas");
  }
  std::vector<NamedTree> named;
  for (std::size_t k = 0; k < trees.size(); ++k) named.push_back({specs[k].first, &trees[k]});

  const auto test = load_dataset(require(s, "test"), trees.front().schema());
  const auto rows = sweep(named, test, cost, r_values);

  const auto path = get(s, "sweep_out", "sweep.csv");
  const auto emit = [&](std::ostream& o) {
    o << comment_line(settings_fingerprint(s));
    write_sweep_csv(o, named, rows);
  };
  if (path == "-") {
    emit(out);
  } else {
    auto f = open_output(path);
    emit(f);
    out << fmt::format("wrote {} rows to {}\n", rows.size(), path);
  }
  return 0;
}

struct Command {
  CLI::App* app;
  std::map<std::string, std::string> overrides;
  std::vector<std::string> models;
};

void add_setting(Command& cmd, const std::string& flag, const std::string& key,
                 const std::string& help) {
  cmd.app->add_option_function<std::string>(
      flag, [&cmd, key](const std::string& v) { cmd.overrides[key] = v; }, help);
}

void add_cost_benefit_flags(Command& cmd, bool single_r) {
  add_setting(cmd, "--c", "c", "mailing cost");
  if (single_r) {
    add_setting(cmd, "--r-s", "r_s", "revenue from a solicited subscription");
    add_setting(cmd, "--r-u", "r_u", "revenue from an unsolicited subscription");
    cmd.app->add_option_function<std::string>(
        "--r",
        [&cmd](const std::string& v) {
          cmd.overrides["r_s"] = v;
          cmd.overrides["r_u"] = v;
        },
        "sets both revenues");
  }
}

}  // namespace

Settings parse_settings(std::istream& in) {
  Settings s;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw UsageError(fmt::format("config line {}: expected key = value", line_no));
    }
    auto key = trim(std::string_view(t).substr(0, eq));
    if (key.empty()) throw UsageError(fmt::format("config line {}: empty key", line_no));
    s[key] = trim(std::string_view(t).substr(eq + 1));
  }
  return s;
}

std::string settings_fingerprint(const Settings& settings) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  const auto mix = [&h](std::string_view bytes) {
    for (unsigned char c : bytes) {
      h ^= c;
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& [k, v] : settings) {
    if (kPathKeys.contains(k)) continue;
    mix(k);
    mix("=");
    mix(v);
    mix("\n");
  }
  return fmt::format("{:016x}", h);
}

SchemaConfig schema_config_from(const Settings& s) {
  SchemaConfig c;
  c.treatment_column = get(s, "treatment_column", c.treatment_column);
  c.treatment_m0 = get(s, "treatment_m0", c.treatment_m0);
  c.treatment_m1 = get(s, "treatment_m1", c.treatment_m1);
  c.outcome_column = get(s, "outcome_column", c.outcome_column);
  c.outcome_s0 = get(s, "outcome_s0", c.outcome_s0);
  c.outcome_s1 = get(s, "outcome_s1", c.outcome_s1);
  return c;
}

LearnConfig learn_config_from(const Settings& s) {
  LearnConfig c;
  try {
    c.mode = parse_learn_mode(get(s, "mode", "force"));
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  c.score.kappa = get_double(s, "kappa", c.score.kappa);
  c.score.validate();
  return c;
}

CostBenefit cost_benefit_from(const Settings& s) {
  CostBenefit cb;
  cb.cost = get_double(s, "c", 0.42);
  cb.solicited_revenue = get_double(s, "r_s", 10.0);
  cb.unsolicited_revenue = get_double(s, "r_u", cb.solicited_revenue);
  try {
    cb.validate();
  } catch (const Error& e) {
    throw UsageError(e.what());
  }
  return cb;
}

GeneratorConfig generator_config_from(const Settings& s) {
  GeneratorConfig g = demo_population();
  if (const auto it = s.find("predictors"); it != s.end()) {
    g.predictors.clear();
    for (const auto& name : split(it->second, ',')) {
      const auto values = split(require(s, "predictor." + name), ',');
      g.predictors.push_back({name, values});
    }
    g.segments.clear();
    for (std::size_t k = 0;; ++k) {
      const auto prefix = fmt::format("segment.{}.", k);
      if (!s.contains(prefix + "mixture")) break;
      SegmentSpec seg;
      const auto predicate = trim(get(s, prefix + "predicate", "*"));
      if (predicate != "*" && !predicate.empty()) {
        for (const auto& term : split(predicate, ';')) {
          const auto eq = term.find('=');
          if (eq == std::string::npos) {
            throw UsageError(
                fmt::format("segment {}: predicate term '{}' needs var=value", k, term));
          }
          const auto var = trim(std::string_view(term).substr(0, eq));
          const auto label = trim(std::string_view(term).substr(eq + 1));
          std::size_t j = 0;
          while (j < g.predictors.size() && g.predictors[j].name != var) ++j;
          if (j == g.predictors.size()) {
            throw UsageError(fmt::format("segment {}: unknown predictor '{}'", k, var));
          }
          const auto v = g.predictors[j].find(label);
          if (!v)
            throw UsageError(fmt::format("segment {}: '{}' is not a value of '{}'", k, label, var));
          seg.predicate.emplace_back(j, *v);
        }
      }
      const auto mix = split(require(s, prefix + "mixture"), ',');
      if (mix.size() != 4) {
        throw UsageError(fmt::format("segment {}: mixture needs 4 proportions", k));
      }
      seg.mixture = {
          parse_double(prefix + "mixture", mix[0]), parse_double(prefix + "mixture", mix[1]),
          parse_double(prefix + "mixture", mix[2]), parse_double(prefix + "mixture", mix[3])};
      seg.weight = get_double(s, prefix + "weight", 1.0);
      g.segments.push_back(std::move(seg));
    }
  }
  g.population_size = get_uint(s, "population_size", g.population_size);
  g.mail_probability = get_double(s, "mail_probability", g.mail_probability);
  g.seed = get_uint(s, "seed", g.seed);
  const auto sc = schema_config_from(s);
  g.treatment = {sc.treatment_column, {sc.treatment_m0, sc.treatment_m1}};
  g.outcome = {sc.outcome_column, {sc.outcome_s0, sc.outcome_s1}};
  return g;
}

std::vector<double> parse_range(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() < 1 || parts.size() > 3) {
    throw UsageError(fmt::format("range '{}' must be lo:hi[:step]", text));
  }
  const double lo = parse_double("r", parts[0]);
  const double hi = parts.size() > 1 ? parse_double("r", parts[1]) : lo;
  const double step = parts.size() > 2 ? parse_double("r", parts[2]) : 1.0;
  if (!(step > 0.0) || hi < lo) throw UsageError(fmt::format("invalid range '{}'", text));
  std::vector<double> out;
  // Index-based so accumulated rounding never drops the last point.
  const auto n = static_cast<std::size_t>(std::floor((hi - lo) / step + 1e-9));
  for (std::size_t k = 0; k <= n; ++k) out.push_back(lo + static_cast<double>(k) * step);
  return out;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Uplift decision trees and profit-maximizing mailing policies", "uplift"};
  app.require_subcommand(1);
  std::string config_path;
  app.add_option("--config", config_path, "key = value settings file")->check(CLI::ExistingFile);

  std::vector<std::unique_ptr<Command>> commands;
  const auto make = [&](const char* name, const char* help) -> Command& {
    auto cmd = std::make_unique<Command>();
    cmd->app = app.add_subcommand(name, help);
    cmd->app->add_option("--config", config_path, "key = value settings file")
        ->check(CLI::ExistingFile);
    commands.push_back(std::move(cmd));
    return *commands.back();
  };

  Command& generate_cmd = make("generate", "simulate a randomized mailing experiment");
  add_setting(generate_cmd, "--out", "out_dir", "output directory");
  add_setting(generate_cmd, "--seed", "seed", "random seed");
  add_setting(generate_cmd, "--population-size", "population_size", "number of people");
  add_setting(generate_cmd, "--mail-probability", "mail_probability", "share mailed");
  add_setting(generate_cmd, "--train-fraction", "train_fraction", "share kept for training");

  Command& train_cmd = make("train", "learn a tree from training data");
  add_setting(train_cmd, "--train", "train", "training CSV");
  add_setting(train_cmd, "--mode", "mode", "normal | force | split_first");
  add_setting(train_cmd, "--kappa", "kappa", "structure prior base");
  add_setting(train_cmd, "--out", "model", "model JSON to write");

  Command& policy_cmd = make("policy", "print the mailing decision per segment");
  add_setting(policy_cmd, "--model", "model", "model JSON");
  add_setting(policy_cmd, "--train", "train", "training CSV for exact supports");
  add_setting(policy_cmd, "--out", "segments_out", "segment CSV to write ('-' for stdout)");
  add_cost_benefit_flags(policy_cmd, true);

  Command& evaluate_cmd = make("evaluate", "matched-record revenue on test data");
  add_setting(evaluate_cmd, "--model", "model", "model JSON");
  add_setting(evaluate_cmd, "--test", "test", "test CSV");
  add_setting(evaluate_cmd, "--out", "report_out", "report JSON to write");
  add_cost_benefit_flags(evaluate_cmd, true);

  Command& sweep_cmd = make("sweep", "revenue and improvement over a range of r_s = r_u");
  sweep_cmd.app->add_option("--model", sweep_cmd.models, "model JSON, optionally name=path");
  add_setting(sweep_cmd, "--test", "test", "test CSV");
  add_setting(sweep_cmd, "--r", "sweep_r", "revenue range lo:hi[:step]");
  add_setting(sweep_cmd, "--out", "sweep_out", "sweep CSV to write ('-' for stdout)");
  add_cost_benefit_flags(sweep_cmd, false);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  Command* chosen = nullptr;
  for (auto& c : commands) {
    if (c->app->parsed()) chosen = c.get();
  }

  try {
    Settings settings;
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw Error(fmt::format("cannot open '{}'", config_path));
      settings = parse_settings(in);
    }
    for (const auto& [k, v] : chosen->overrides) settings[k] = v;
    if (!chosen->models.empty()) {
      std::string joined;
      for (const auto& m : chosen->models) joined += (joined.empty() ? "" : ",") + m;
      settings["models"] = joined;
    }

    const std::string name = chosen->app->get_name();
    if (name == "generate") return cmd_generate(settings, out);
    if (name == "train") return cmd_train(settings, out);
    if (name == "policy") return cmd_policy(settings, out);
    if (name == "evaluate") return cmd_evaluate(settings, out);
    return cmd_sweep(settings, out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n\n" << chosen->app->help();
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace uplift::cli
