// Command-line front end: validate models, build and export semantics, run
// equivalence checks, compose automata, and replay the bundled corpus.
//
// Exit codes: 0 equivalent/success, 1 distinguished, 2 usage or parse error,
// 3 resource limit.

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include <CLI11.hpp>

#include "maeq/compose.hpp"
#include "maeq/corpus.hpp"
#include "maeq/dot.hpp"
#include "maeq/verdict_json.hpp"

namespace {

constexpr int kExitEquivalent = 0;
constexpr int kExitDistinguished = 1;
constexpr int kExitUsage = 2;
constexpr int kExitResourceLimit = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw maeq::ModelError("cannot open " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

maeq::MarkovAutomaton load_model(const std::string& path) {
  return maeq::parse_model(slurp(path));
}

maeq::SemanticsKind parse_kind(const std::string& s) {
  if (s == "early") return maeq::SemanticsKind::Early;
  if (s == "late") return maeq::SemanticsKind::Late;
  if (s == "late-strong") return maeq::SemanticsKind::LateStrongOnly;
  throw CLI::ValidationError("unknown semantics kind: " + s);
}

maeq::RelationKind parse_relation(const std::string& s) {
  if (s == "bisim") return maeq::RelationKind::Bisim;
  if (s == "sim") return maeq::RelationKind::Sim;
  if (s == "kernel") return maeq::RelationKind::Kernel;
  if (s == "ehz") return maeq::RelationKind::Ehz;
  if (s == "dh") return maeq::RelationKind::Dh;
  throw CLI::ValidationError("unknown relation: " + s);
}

void print_failure(const maeq::FailureNode& f, int depth) {
  std::string pad(static_cast<std::size_t>(depth) * 2, ' ');
  std::cout << pad << "at " << f.mu.display() << " vs " << f.nu.display()
            << "\n"
            << pad << f.side << " plays " << f.challenge.display() << ": "
            << f.reason << "\n";
  for (const auto& c : f.children) print_failure(c, depth + 1);
}

int exit_code_for(maeq::Outcome o) {
  switch (o) {
    case maeq::Outcome::Equivalent: return kExitEquivalent;
    case maeq::Outcome::Distinguished: return kExitDistinguished;
    case maeq::Outcome::ResourceLimit: return kExitResourceLimit;
  }
  return kExitUsage;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equivalence checker for Markov automata"};
  app.require_subcommand(1);

  // validate <file>
  std::string validate_path;
  auto* cmd_validate = app.add_subcommand("validate", "Parse and validate a model");
  cmd_validate->add_option("file", validate_path, "model file")->required();

  // semantics --model <file> --kind early|late|late-strong [--dot out]
  std::string sem_model, sem_kind = "early", sem_dot;
  auto* cmd_sem = app.add_subcommand("semantics", "Build a derived transition system");
  cmd_sem->add_option("--model", sem_model, "model file")->required();
  cmd_sem->add_option("--kind", sem_kind, "early|late|late-strong");
  cmd_sem->add_option("--dot", sem_dot, "write DOT graph to this file");

  // check
  std::string chk_model, chk_sem = "early", chk_rel = "bisim", chk_lhs, chk_rhs;
  bool chk_div = false, chk_json = false, chk_explain = false;
  int chk_grid = maeq::SearchBounds{}.grid_denominator;
  int chk_depth = maeq::SearchBounds{}.tau_depth;
  auto* cmd_check = app.add_subcommand("check", "Decide an equivalence or preorder");
  cmd_check->add_option("--model", chk_model, "model file")->required();
  cmd_check->add_option("--semantics", chk_sem, "early|late");
  cmd_check->add_option("--relation", chk_rel, "bisim|sim|kernel|ehz|dh");
  cmd_check->add_flag("--divergence-sensitive", chk_div,
                      "require matching divergence");
  cmd_check->add_option("--lhs", chk_lhs, "state or distribution literal")
      ->required();
  cmd_check->add_option("--rhs", chk_rhs, "state or distribution literal")
      ->required();
  cmd_check->add_option("--grid-denominator", chk_grid,
                        "max denominator of split fractions");
  cmd_check->add_option("--tau-depth", chk_depth,
                        "max deterministic weak tau rounds per side of a step");
  cmd_check->add_flag("--json", chk_json, "emit the verdict as JSON");
  cmd_check->add_flag("--explain", chk_explain, "print the counterexample tree");

  // compose
  std::string cmp_left, cmp_right, cmp_out, cmp_sync;
  bool cmp_have_sync = false;
  auto* cmd_compose = app.add_subcommand("compose", "Parallel composition");
  cmd_compose->add_option("--left", cmp_left, "model file")->required();
  cmd_compose->add_option("--right", cmp_right, "model file")->required();
  cmd_compose->add_option("--sync", cmp_sync, "comma-separated action labels")
      ->trigger_on_parse();
  cmd_compose->add_option("--out", cmp_out, "output model file")->required();

  // corpus run
  auto* cmd_corpus = app.add_subcommand("corpus", "Bundled models and claims");
  bool corpus_json = false;
  auto* cmd_corpus_run = cmd_corpus->add_subcommand("run", "Replay every claim");
  cmd_corpus_run->add_flag("--json", corpus_json, "emit results as JSON");
  cmd_corpus->require_subcommand(1);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? 0 : kExitUsage;
  }

  try {
    if (*cmd_validate) {
      maeq::MarkovAutomaton ma = load_model(validate_path);
      std::cout << "ok: " << ma.name << " (" << ma.states.size() << " states, "
                << ma.ptrans.size() << " probabilistic, " << ma.mtrans.size()
                << " Markovian transitions)\n";
      return kExitEquivalent;
    }

    if (*cmd_sem) {
      maeq::MarkovAutomaton ma = load_model(sem_model);
      maeq::Mlts mlts = maeq::build_semantics(ma, parse_kind(sem_kind));
      std::cout << "states: " << mlts.states.size()
                << ", transitions: " << mlts.trans.size() << "\n";
      for (const auto& t : mlts.trans)
        std::cout << "  " << t.source.display() << " --" << t.action.display()
                  << "--> " << t.target.display() << "\n";
      if (!sem_dot.empty()) {
        std::ofstream out(sem_dot);
        if (!out) throw maeq::ModelError("cannot write " + sem_dot);
        out << maeq::to_dot(mlts, ma.name + "_" + sem_kind);
      }
      return kExitEquivalent;
    }

    if (*cmd_check) {
      if (chk_sem != "early" && chk_sem != "late")
        throw CLI::ValidationError("--semantics must be early or late");
      maeq::MarkovAutomaton ma = load_model(chk_model);
      maeq::CheckerOptions opt;
      opt.bounds.grid_denominator = chk_grid;
      opt.bounds.tau_depth = chk_depth;
      opt.divergence_sensitive = chk_div;
      maeq::RelationKind rel = parse_relation(chk_rel);
      maeq::Verdict v =
          maeq::check_ma(ma, parse_kind(chk_sem), rel,
                         maeq::parse_dist_literal(chk_lhs),
                         maeq::parse_dist_literal(chk_rhs), opt);
      if (chk_json) {
        std::cout << maeq::verdict_to_json(v, rel, chk_sem).dump(2) << "\n";
      } else {
        std::cout << maeq::to_string(v.outcome) << " (" << v.caveat
                  << ", pairs=" << v.stats.pairs_explored
                  << ", challenges=" << v.stats.challenges << ", "
                  << v.stats.wall_time_ms << " ms)\n";
        if (chk_explain && v.counterexample) print_failure(*v.counterexample, 0);
      }
      return exit_code_for(v.outcome);
    }

    if (*cmd_compose) {
      maeq::MarkovAutomaton left = load_model(cmp_left);
      maeq::MarkovAutomaton right = load_model(cmp_right);
      cmp_have_sync = cmd_compose->count("--sync") > 0;
      maeq::SyncSet sync = cmp_have_sync ? maeq::SyncSet{}
                                         : maeq::SyncSet::common(left, right);
      if (cmp_have_sync) {
        std::istringstream ss(cmp_sync);
        std::string label;
        while (std::getline(ss, label, ','))
          if (!label.empty()) sync.labels.insert(label);
      }
      maeq::MarkovAutomaton prod = maeq::parallel_compose(left, right, sync);
      std::ofstream out(cmp_out);
      if (!out) throw maeq::ModelError("cannot write " + cmp_out);
      out << maeq::serialize_model(prod);
      std::cout << "ok: " << prod.states.size() << " states\n";
      return kExitEquivalent;
    }

    if (*cmd_corpus_run) {
      auto results = maeq::run_corpus();
      bool all_pass = true;
      nlohmann::json rows = nlohmann::json::array();
      for (const auto& r : results) {
        all_pass = all_pass && r.pass;
        if (corpus_json) {
          rows.push_back({{"entry", r.entry},
                          {"claim", r.claim.display()},
                          {"expected", maeq::to_string(r.claim.expected)},
                          {"actual", maeq::to_string(r.actual)},
                          {"pass", r.pass},
                          {"note", r.claim.note}});
        } else {
          std::cout << (r.pass ? "pass" : "FAIL") << "  " << r.entry << ": "
                    << r.claim.display() << " -> " << maeq::to_string(r.actual)
                    << "\n";
        }
      }
      if (corpus_json) std::cout << rows.dump(2) << "\n";
      return all_pass ? kExitEquivalent : kExitDistinguished;
    }
  } catch (const maeq::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const maeq::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitUsage;
}
