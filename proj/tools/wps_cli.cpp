#include "wps_cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <sstream>
#include <thread>

#include "wps/corpus.hpp"
#include "wps/datatools.hpp"
#include "wps/errors.hpp"
#include "wps/learning.hpp"
#include "wps/resources.hpp"

namespace wps::cli {

namespace {

using nlohmann::json;

// Settings shared by every command. Config values fill whatever the flags left unset.
struct Settings {
  std::optional<std::string> config;
  std::optional<std::string> data_dir;
  std::optional<std::string> lexicon_dir;
  std::optional<double> C;
  std::optional<int> epochs;
  std::optional<std::size_t> beam;
  std::optional<std::size_t> window;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;

  Hyperparams hyper() const {
    Hyperparams h;
    if (C) h.C = *C;
    if (epochs) h.epochs = *epochs;
    if (beam) h.beam = *beam;
    if (window) h.window = *window;
    if (seed) h.seed = *seed;
    return h;
  }
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

template <class T>
void fill(std::optional<T>& slot, const std::map<std::string, std::string>& cfg, const std::string& key) {
  auto it = cfg.find(key);
  if (slot || it == cfg.end()) return;
  std::istringstream in(it->second);
  T v{};
  in >> v;
  if (!in || !(in >> std::ws).eof()) throw UsageError("config: bad value for " + key + ": " + it->second);
  slot = v;
}

void apply_config(Settings& s) {
  if (!s.config) return;
  auto cfg = read_config(*s.config);
  static const std::set<std::string> known{"C", "epochs", "beam", "window", "seed", "jobs", "data_dir", "lexicon_dir"};
  for (const auto& [k, v] : cfg)
    if (!known.contains(k)) throw UsageError("config: unknown key '" + k + "'");
  fill(s.C, cfg, "C");
  fill(s.epochs, cfg, "epochs");
  fill(s.beam, cfg, "beam");
  fill(s.window, cfg, "window");
  fill(s.seed, cfg, "seed");
  fill(s.jobs, cfg, "jobs");
  if (!s.data_dir && cfg.contains("data_dir")) s.data_dir = cfg.at("data_dir");
  if (!s.lexicon_dir && cfg.contains("lexicon_dir")) s.lexicon_dir = cfg.at("lexicon_dir");
}

Resources resources(const Settings& s) {
  std::size_t window = s.hyper().window;
  if (s.lexicon_dir) return Resources::load(LexiconPaths::under(*s.lexicon_dir), window);
  return load_resources(s.data_dir ? std::filesystem::path(*s.data_dir) : default_data_dir(), window);
}

void add_common(CLI::App& app, Settings& s, bool training) {
  app.add_option("--config", s.config, "key=value config file; flags override it");
  app.add_option("--data-dir", s.data_dir, "Directory holding lexicon/");
  app.add_option("--lexicon-dir", s.lexicon_dir, "Lexicon directory (overrides --data-dir)");
  app.add_option("--window", s.window, "Neighborhood window W");
  app.add_option("--beam", s.beam, "Beam width")->check(CLI::PositiveNumber);
  app.add_option("--jobs", s.jobs, "Worker threads for solving")->check(CLI::PositiveNumber);
  if (training) {
    app.add_option("--C", s.C, "Regularization constant");
    app.add_option("--epochs", s.epochs, "Passes per training stage");
    app.add_option("--seed", s.seed, "Shuffle seed");
  }
}

std::string fmt(double v, int precision = 4) {
  std::ostringstream o;
  o << std::fixed << std::setprecision(precision) << v;
  return o.str();
}

std::string span_text(const WordProblem& p, const std::optional<Span>& s) {
  return s ? "'" + p.join(*s) + "'" : "-";
}

void trace_schemas(const WordProblem& p, std::ostream& out) {
  out << "  question unit: " << span_text(p, p.question_unit) << "\n";
  for (const auto& q : p.quantities) {
    const auto& s = q.schema;
    out << "  [" << q.index + 1 << "] " << q.value.to_string() << " subj=" << span_text(p, s.subject)
        << " verb=" << (s.verb ? p.tokens[*s.verb].lower : "-") << " iobj=" << span_text(p, s.indirect_object)
        << " unit=" << span_text(p, s.unit) << " rate=" << span_text(p, s.rate)
        << " math=" << (s.math_term ? p.join(s.math_term->span) + "/" + std::string(to_string(s.math_term->cls)) : "-")
        << "\n";
  }
}

std::vector<WordProblem> read_inputs(const std::optional<std::string>& path, std::istream& in, const Resources& res) {
  std::vector<WordProblem> out;
  auto from_text = [&](std::istream& src) {
    std::string line;
    std::size_t n = 0;
    while (std::getline(src, line)) {
      ++n;
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      out.push_back(build_problem("line" + std::to_string(n), line, res.rules));
    }
  };
  if (!path || *path == "-") {
    from_text(in);
  } else if (std::filesystem::path(*path).extension() == ".jsonl") {
    out = load_corpus(*path, res);
  } else {
    std::ifstream f(*path);
    if (!f) throw ParseError("cannot read " + *path);
    from_text(f);
  }
  return out;
}

std::string steps_line(const Derivation& d) {
  std::string s;
  for (const auto& st : d.steps) {
    if (!s.empty()) s += ' ';
    s += std::string(to_string(st.kind)) + ":" + st.rule_id;
  }
  return s;
}

// ---------------------------------------------------------------------------

int cmd_train(const Settings& s, const std::string& corpus, const std::string& model_path,
              const std::optional<std::string>& log_path, bool strict, std::ostream& out, std::ostream& err) {
  Resources res = resources(s);
  auto problems = load_corpus(corpus, res);
  TrainingLog log;
  Model model = train(problems, res, s.hyper(), &log, TrainOptions{strict});
  save_model(model, model_path);

  auto data = make_examples(problems, res);
  double acc = training_accuracy(data, model, res);
  std::ofstream logf(log_path.value_or(model_path + ".log"));
  for (const auto& w : log.warnings) {
    logf << "warning: " << w << "\n";
    err << "warning: " << w << "\n";
  }
  logf << "examples=" << log.examples << " stage1_nodes=" << log.stage1_nodes << "\n";
  for (const auto& e : log.epochs)
    logf << "stage=" << e.stage << " epoch=" << e.epoch << " objective=" << fmt(e.objective, 6)
         << " accepted=" << e.accepted << " accuracy=" << fmt(e.accuracy) << "\n";
  logf << "train_accuracy=" << fmt(acc) << "\n";
  out << "trained on " << log.examples << " problems; train accuracy " << fmt(acc) << "; model written to "
      << model_path << "\n";
  return kOk;
}

int cmd_solve(const Settings& s, const std::string& model_path, const std::optional<std::string>& input, bool trace,
              std::istream& in, std::ostream& out) {
  Resources res = resources(s);
  Model model = load_model(model_path);
  auto problems = read_inputs(input, in, res);
  const std::size_t beam = s.beam.value_or(model.hyper.beam);
  // Solve in parallel into per-problem buffers, then print in input order.
  std::vector<std::string> buffers(problems.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < problems.size(); i = next++) {
      const WordProblem& p = problems[i];
      std::ostringstream o;
      if (trace) {
        o << p.id << ": " << p.text << "\n";
        trace_schemas(p, o);
      }
      try {
        SolveResult r = solve(p, model, res, beam);
        const auto values = p.values();
        o << p.id << ": " << render(r.expression(), values) << " = " << evaluate(r.expression(), values).to_string()
          << "\n  steps: " << steps_line(r.derivation) << "\n";
        if (trace) o << "  score: " << fmt(r.score.to_double(), 6) << "\n";
      } catch (const NoDerivation&) {
        o << p.id << ": no derivation\n";
      }
      buffers[i] = o.str();
    }
  };
  std::size_t jobs = std::max<std::size_t>(1, std::min(s.jobs.value_or(1), problems.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < jobs; ++t) pool.emplace_back(worker);
  }
  for (const auto& b : buffers) out << b;
  return kOk;
}

json concept_json(const EvalReport& r) {
  json j = json::object();
  for (const auto& [c, t] : r.by_concept)
    j[std::string(to_string(c))] = {{"total", t.total}, {"correct", t.correct}};
  return j;
}

void print_report(const std::string& label, const EvalReport& r, std::ostream& out) {
  out << label << ": ";
  if (auto a = r.accuracy()) out << "accuracy " << fmt(*a) << " (" << r.hits() << "/" << r.total() << ")";
  else out << "accuracy undefined (no gold problems)";
  out << "\n";
  for (const auto& [c, t] : r.by_concept) out << "  " << to_string(c) << ": " << t.correct << "/" << t.total << "\n";
}

int cmd_eval(const Settings& s, const std::optional<std::string>& model_path, const std::optional<std::string>& corpus,
             std::optional<int> folds, const std::optional<std::string>& train_path,
             const std::optional<std::string>& test_path, const std::optional<std::string>& report_path,
             std::ostream& out) {
  Resources res = resources(s);
  Hyperparams hyper = s.hyper();
  const std::size_t jobs = s.jobs.value_or(1);
  json summary;
  // Correctness of the trained model and of an all-zero model on the same problems.
  std::vector<bool> ours, baseline;
  Model zero;

  if (folds) {
    if (!corpus) throw UsageError("--folds needs a corpus");
    auto problems = load_corpus(*corpus, res);
    auto split = kfold_split(problems.size(), *folds, hyper.seed);
    json per_fold = json::array();
    double sum = 0;
    for (std::size_t f = 0; f < split.size(); ++f) {
      std::vector<WordProblem> tr, te;
      for (auto i : split[f].train) tr.push_back(problems[i]);
      for (auto i : split[f].test) te.push_back(problems[i]);
      Model m = train(tr, res, hyper);
      EvalReport r = evaluate(m, te, res, hyper.beam, jobs);
      EvalReport z = evaluate(zero, te, res, hyper.beam, jobs);
      print_report("fold " + std::to_string(f + 1), r, out);
      double acc = r.accuracy().value_or(0.0);
      sum += acc;
      per_fold.push_back({{"fold", f + 1}, {"accuracy", acc}, {"total", r.total()}, {"by_concept", concept_json(r)}});
      ours.insert(ours.end(), r.correct.begin(), r.correct.end());
      baseline.insert(baseline.end(), z.correct.begin(), z.correct.end());
    }
    double mean = sum / static_cast<double>(split.size());
    out << "mean accuracy " << fmt(mean) << " over " << split.size() << " folds\n";
    summary["mode"] = "folds";
    summary["folds"] = per_fold;
    summary["mean_accuracy"] = mean;
  } else {
    if (!test_path) throw UsageError("eval needs --folds K CORPUS, or --test with --train or --model");
    Model m;
    if (train_path) {
      m = train(load_corpus(*train_path, res), res, hyper);
    } else if (model_path) {
      m = load_model(*model_path);
    } else {
      throw UsageError("eval needs --train or --model alongside --test");
    }
    auto test = load_corpus(*test_path, res);
    const std::size_t beam = s.beam.value_or(m.hyper.beam);
    EvalReport r = evaluate(m, test, res, beam, jobs);
    EvalReport z = evaluate(zero, test, res, beam, jobs);
    print_report("test", r, out);
    ours = r.correct;
    baseline = z.correct;
    summary["mode"] = "train-test";
    summary["accuracy"] = r.accuracy() ? json(*r.accuracy()) : json(nullptr);
    summary["total"] = r.total();
    summary["by_concept"] = concept_json(r);
    if (train_path) {
      auto tr = load_corpus(*train_path, res);
      auto ov = lexeme_overlap(tr, test);
      out << "lexeme overlap: mean best jaccard " << fmt(ov.mean_max_jaccard) << ", " << ov.near_duplicates
          << " test problems >= " << fmt(ov.threshold, 2) << "\n";
      summary["overlap"] = {{"mean_max_jaccard", ov.mean_max_jaccard}, {"near_duplicates", ov.near_duplicates}};
    }
  }
  double p = significance(ours, baseline, 10000, hyper.seed);
  std::size_t base_hits = static_cast<std::size_t>(std::count(baseline.begin(), baseline.end(), true));
  out << "untrained baseline: " << base_hits << "/" << baseline.size() << "; paired bootstrap p = " << fmt(p) << "\n";
  summary["baseline_correct"] = base_hits;
  summary["p_value"] = p;
  if (report_path) {
    std::ofstream f(*report_path);
    f << summary.dump(2) << "\n";
  }
  return kOk;
}

int cmd_perturb(const Settings& s, const std::string& corpus, const std::optional<std::string>& out_path,
                std::ostream& out) {
  Resources res = resources(s);
  auto problems = load_corpus(corpus, res);
  std::ofstream file;
  if (out_path) file.open(*out_path);
  std::ostream& o = out_path ? file : out;
  for (const auto& p : problems) {
    if (!p.gold) continue;
    const auto values = p.values();
    std::size_t n = 0;
    for (const auto& e : perturb_expression(p.gold->solution, values)) {
      json row;
      row["id"] = p.id + "-p" + std::to_string(++n);
      row["source"] = p.id;
      row["text"] = p.text;
      row["original_solution"] = render(p.gold->solution, values);
      row["solution"] = render(e, values);
      row["value"] = evaluate(e, values).to_string();
      o << row.dump() << "\n";
    }
  }
  return kOk;
}

int cmd_bias(const Settings& s, const std::vector<std::string>& corpora, std::size_t top, std::ostream& out,
             std::ostream& err) {
  Resources res = resources(s);
  const std::size_t window = s.hyper().window;
  std::vector<WordProblem> all;
  auto report = [&](const std::string& label, const std::vector<WordProblem>& ps) {
    EntropyReport r = bias_report(ps, window);
    if (r.occurrences == 0) err << "warning: " << label << " has no gold quantities\n";
    out << label << ": entropy " << fmt(r.mean) << " bits over " << r.occurrences << " occurrences\n";
    for (std::size_t i = 0; i < std::min(top, r.words.size()); ++i) {
      const auto& w = r.words[i];
      out << "  " << w.word << " " << fmt(w.entropy) << " x" << w.occurrences << " {";
      bool first = true;
      for (const auto& [op, c] : w.ops) {
        out << (first ? "" : " ") << to_string(op) << ":" << c;
        first = false;
      }
      out << "}\n";
    }
  };
  for (const auto& c : corpora) {
    auto ps = load_corpus(c, res);
    report(c, ps);
    all.insert(all.end(), ps.begin(), ps.end());
  }
  if (corpora.size() > 1) report("aggregate", all);
  return kOk;
}

}  // namespace

std::map<std::string, std::string> read_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot read config " + path.string());
  std::map<std::string, std::string> out;
  std::string line;
  std::size_t n = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(" \t\r");
    auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  while (std::getline(in, line)) {
    ++n;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key=value", n);
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ParseError("empty key", n);
    out[key] = trim(line.substr(eq + 1));
  }
  return out;
}

int run(int argc, const char* const* argv, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Arithmetic word problem solver"};
  app.require_subcommand(1);
  Settings s;

  auto* train_cmd = app.add_subcommand("train", "Train a model on a JSONL corpus");
  std::string train_corpus, model_out = "model.txt";
  std::optional<std::string> log_path;
  bool strict = false;
  train_cmd->add_option("corpus", train_corpus, "Training corpus")->required();
  train_cmd->add_option("-o,--model", model_out, "Output model file");
  train_cmd->add_option("--log", log_path, "Training log (default: <model>.log)");
  train_cmd->add_flag("--strict", strict, "Fail on gold nodes no rule explains");
  add_common(*train_cmd, s, true);

  auto* solve_cmd = app.add_subcommand("solve", "Solve problems: a .jsonl corpus, or one problem text per line");
  std::string solve_model;
  std::optional<std::string> solve_input;
  bool trace = false;
  solve_cmd->add_option("-m,--model", solve_model, "Model file")->required();
  solve_cmd->add_option("input", solve_input, "Input file; stdin when absent or '-'");
  solve_cmd->add_flag("--trace", trace, "Print extracted schemas and scores");
  add_common(*solve_cmd, s, false);

  auto* eval_cmd = app.add_subcommand("eval", "Cross-validate or evaluate on a test corpus");
  std::optional<std::string> eval_model, eval_corpus, eval_train, eval_test, report_path;
  std::optional<int> folds;
  eval_cmd->add_option("corpus", eval_corpus, "Corpus for --folds");
  eval_cmd->add_option("--folds", folds, "Number of folds");
  eval_cmd->add_option("-m,--model", eval_model, "Trained model for --test");
  eval_cmd->add_option("--train", eval_train, "Training corpus for --test");
  eval_cmd->add_option("--test", eval_test, "Test corpus");
  eval_cmd->add_option("--report", report_path, "Write a JSON summary here");
  add_common(*eval_cmd, s, true);

  auto* perturb_cmd = app.add_subcommand("perturb", "Emit single-operation perturbations of gold solutions");
  std::string perturb_corpus;
  std::optional<std::string> perturb_out;
  perturb_cmd->add_option("corpus", perturb_corpus, "Corpus with solutions")->required();
  perturb_cmd->add_option("-o,--output", perturb_out, "Worksheet file (default: stdout)");
  add_common(*perturb_cmd, s, false);

  auto* bias_cmd = app.add_subcommand("bias", "Operation entropy given neighborhood words");
  std::vector<std::string> bias_corpora;
  std::size_t top = 10;
  bias_cmd->add_option("corpora", bias_corpora, "Corpora; more than one also reports their union")->required();
  bias_cmd->add_option("--top", top, "Words listed per corpus");
  add_common(*bias_cmd, s, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << "run with --help for usage\n";
    return kUsage;
  }

  try {
    apply_config(s);
    if (train_cmd->parsed()) return cmd_train(s, train_corpus, model_out, log_path, strict, out, err);
    if (solve_cmd->parsed()) return cmd_solve(s, solve_model, solve_input, trace, in, out);
    if (eval_cmd->parsed())
      return cmd_eval(s, eval_model, eval_corpus, folds, eval_train, eval_test, report_path, out);
    if (perturb_cmd->parsed()) return cmd_perturb(s, perturb_corpus, perturb_out, out);
    if (bias_cmd->parsed()) return cmd_bias(s, bias_corpora, top, out, err);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const ParseError& e) {
    err << "error: " << e.what();
    if (e.line() > 0) err << " (line " << e.line() << ")";
    err << "\n";
    return kDataError;
  } catch (const ReachabilityError& e) {
    err << "error: " << e.what() << "\n";
    for (const auto& n : e.nodes()) err << "  " << n << "\n";
    return kDataError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kDataError;
  }
  return kUsage;
}

}  // namespace wps::cli
