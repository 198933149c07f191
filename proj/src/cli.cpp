#include "rds/cli.hpp"

#include <cstdlib>
#include <iostream>
#include <map>
#include <optional>

#include <CLI11.hpp>

#include "rds/error.hpp"
#include "rds/experiments.hpp"

namespace rds {
namespace {

constexpr const char* kOutEnv = "RDS_OUT_DIR";

bool is_bool_key(const std::string& key) { return key == "heuristic" || key == "exhaustive" || key == "svg"; }

std::string help_for(const std::string& key) {
  static const std::map<std::string, std::string> text = {
      {"seq", "frequency sequence: naturals, primes, weighted-naturals, explicit"},
      {"seq-exponent", "exponent a of weighted naturals n*log(n+1)^a"},
      {"seq-start", "first served index (0 = family default)"},
      {"seq-values", "comma-separated elements of an explicit sequence"},
      {"seq-file", "file with one element per line"},
      {"seed", "master seed"},
      {"trials", "number of Monte Carlo trials"},
      {"first-trial", "index of the first trial"},
      {"trial", "trial index of the sample path"},
      {"mode", "certified, deterministic or heuristic"},
      {"sigma", "real exponent"},
      {"sigmas", "comma-separated exponents"},
      {"sigma-lo", "left end of the sigma range"},
      {"sigma-hi", "right end of the scanned range"},
      {"sigma0", "comma-separated base exponents of tail certificates"},
      {"sigma-switch", "start of the domination ladder"},
      {"cutoff", "truncation point U"},
      {"eta", "failure probability budget"},
      {"grid", "initial grid size"},
      {"refine", "maximum bisection rounds"},
      {"heuristic", "fill undecided points with heuristic signs"},
      {"heuristic-max-cutoff", "largest heuristic truncation point"},
      {"condition-cutoff", "force signs +1 up to this point in a second arm (0 = off)"},
      {"exhaustive", "enumerate every sign assignment of a finite sequence"},
      {"u-ladder", "comma-separated truncation points U"},
      {"horizon-factor", "sup is taken over U < x <= factor * U"},
      {"bu-level", "threshold of the B_U event"},
      {"scales", "comma-separated increasing scales y_k"},
      {"levels", "comma-separated levels L"},
      {"t-max", "largest |t| of the characteristic-function grid"},
      {"points", "number of t grid points"},
      {"n", "number of weights per instance"},
      {"instances", "number of random instances"},
      {"lambda-points", "thresholds per instance"},
      {"input", "report document to render"},
      {"workers", "worker threads (results do not depend on it)"},
      {"out", "output directory (default $RDS_OUT_DIR or .)"},
  };
  const auto it = text.find(key);
  return it == text.end() ? key : it->second;
}

std::string describe(Subcommand s) {
  switch (s) {
    case Subcommand::Eval: return "certified value of one sample path at one sigma";
    case Subcommand::Scan: return "certified sign scan and sign-change count of one path";
    case Subcommand::NoZeros: return "fraction of paths certified free of real zeros";
    case Subcommand::SignChanges: return "sign-change counts along a sigma ladder";
    case Subcommand::Clt: return "normalized partial sums and their KS distance to N(0,1)";
    case Subcommand::CharFn: return "characteristic-function product against exp(-t^2/2)";
    case Subcommand::VarianceProfile: return "V_y, U_y and V(sigma) along a sigma ladder";
    case Subcommand::Inequalities: return "Hoeffding and maximal inequalities against exact enumeration";
    case Subcommand::BuEvent: return "frequency of the B_U event against its bound";
    case Subcommand::Exceedance: return "finite-scale exceedance frequencies of normalized sums";
    case Subcommand::Report: return "re-read a report document and verify its config hash";
  }
  return "";
}

struct SubState {
  CLI::App* app = nullptr;
  std::string config_file;
  bool dry_run = false;
  bool quiet = false;
  std::map<std::string, std::string> values;
  std::map<std::string, bool> flags;
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Random Dirichlet series laboratory", "rds"};
  app.require_subcommand(1);
  app.set_version_flag("--version", code_version());
  std::map<Subcommand, SubState> subs;
  for (const Subcommand s : all_subcommands()) {
    auto& st = subs[s];
    st.app = app.add_subcommand(std::string(to_string(s)), describe(s));
    st.app->add_option("--config", st.config_file, "config file (flags override its keys)");
    st.app->add_flag("--dry-run", st.dry_run, "validate and print the resolved plan");
    st.app->add_flag("--quiet", st.quiet, "suppress the summary line");
    for (const auto& key : config_keys(s)) {
      if (is_bool_key(key)) {
        st.app->add_flag_function(
            "--" + key + ",!--no-" + key, [&st, key](std::int64_t v) { st.flags[key] = v > 0; }, help_for(key));
      } else {
        st.app->add_option_function<std::string>(
            "--" + key, [&st, key](const std::string& v) { st.values[key] = v; }, help_for(key));
      }
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      app.exit(e, out, err);
      return kExitOk;
    }
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  }

  for (auto& [sub, st] : subs) {
    if (!st.app->parsed()) continue;
    try {
      ExperimentConfig config = st.config_file.empty() ? make_config(sub) : load_config(st.config_file, sub);
      for (const auto& [k, v] : st.values) config.set(k, v);
      for (const auto& [k, v] : st.flags) config.set(k, v ? "true" : "false");
      if (config.out.empty()) {
        const char* env = std::getenv(kOutEnv);
        config.out = env && *env ? env : ".";
      }
      if (st.dry_run) {
        out << describe_plan(config);
        return kExitOk;
      }
      const auto report = run_experiment(config);
      const auto files = write_report(report, config.out);
      if (!st.quiet) out << report.summary << " -> " << files.front() << "\n";
      return report.checks_passed ? kExitOk : kExitCheckFailed;
    } catch (const ValidationError& e) {
      err << "error: " << e.what() << "\n";
      return kExitValidation;
    } catch (const ResourceError& e) {
      err << "resource error: " << e.what() << "\n";
      return kExitResource;
    } catch (const std::exception& e) {
      err << "internal error: " << e.what() << "\n";
      return kExitInternal;
    }
  }
  return kExitInternal;
}

}  // namespace rds
