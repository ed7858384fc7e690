#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "pathid/pathid.hpp"

namespace fs = std::filesystem;
using namespace pathid;

namespace {

struct CliError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CliError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Experiment load_experiment(const std::string& path) {
  auto result = dsl::parse(read_file(path));
  for (const auto& w : result.warnings) std::cerr << path << ":" << w << " (warning)\n";
  if (!result.ok()) {
    for (const auto& e : result.errors) std::cerr << path << ":" << dsl::to_string(e) << "\n";
    throw CliError("failed to parse '" + path + "'");
  }
  return *result.experiment;
}

std::vector<std::string> party_paths(const Experiment& exp, int n) {
  std::vector<std::string> paths;
  for (const auto& d : exp.detectors)
    if (d.single()) paths.push_back(d.paths.front());
  if (static_cast<int>(paths.size()) == n && paths.size() == exp.detectors.size()) return paths;
  return default_paths(n);
}

int parse_positive(const std::string& text, const std::string& what) {
  int v = 0;
  if (!pathid::detail::parse_int(text, v) || v < 1) throw CliError("bad " + what + " '" + text + "'");
  return v;
}

// ghz:<n>:<d>, w:<n>, or a state file.
StateVector parse_target(const std::string& spec, const Experiment* exp) {
  if (spec.rfind("ghz:", 0) == 0) {
    const auto colon = spec.find(':', 4);
    if (colon == std::string::npos) throw CliError("expected ghz:<n>:<d>");
    const int n = parse_positive(spec.substr(4, colon - 4), "n");
    const int d = parse_positive(spec.substr(colon + 1), "d");
    return ghz_target(n, d, exp ? party_paths(*exp, n) : default_paths(n));
  }
  if (spec.rfind("w:", 0) == 0) {
    const int n = parse_positive(spec.substr(2), "n");
    return w_target(n, exp ? party_paths(*exp, n) : default_paths(n));
  }
  return parse_state(read_file(spec));
}

// 1, -0.5, i, -i, 0.3+0.4i, 2.5e-1-1i
Amplitude parse_complex(std::string text) {
  if (text.empty()) throw CliError("empty coefficient");
  auto real_part = [&](const std::string& s, double& out) {
    if (s.empty() || s == "+") return out = 1.0, true;
    if (s == "-") return out = -1.0, true;
    return pathid::detail::parse_double(s, out);
  };
  if (text.back() != 'i') {
    double re = 0;
    if (!pathid::detail::parse_double(text, re)) throw CliError("bad coefficient '" + text + "'");
    return {re, 0.0};
  }
  const std::string body = text.substr(0, text.size() - 1);
  std::size_t split = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  double re = 0, im = 0;
  if (split == std::string::npos) {
    if (!real_part(body, im)) throw CliError("bad coefficient '" + text + "'");
  } else if (!pathid::detail::parse_double(body.substr(0, split), re) || !real_part(body.substr(split), im)) {
    throw CliError("bad coefficient '" + text + "'");
  }
  return {re, im};
}

void print_state(const StateVector& state, bool json) {
  if (!json) {
    std::cout << serialize_state(state);
    return;
  }
  for (const auto& [occ, amp] : state.terms()) {
    nlohmann::json occupations = nlohmann::json::array();
    for (const auto& [label, n] : occ.entries())
      occupations.push_back({{"path", label.path}, {"mode", label.mode}, {"count", n}});
    std::cout << nlohmann::json{{"re", amp.real()}, {"im", amp.imag()}, {"occupations", occupations}}.dump() << "\n";
  }
}

std::string number(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"pathid: simulate photon-pair experiments built on path identity"};
  app.require_subcommand(1);

  std::string file;
  bool creation_only = false;

  auto* run_cmd = app.add_subcommand("run", "simulate an experiment and print the state table");
  std::optional<int> order;
  bool no_postselect = false, json = false;
  run_cmd->add_option("file", file, "experiment file")->required();
  run_cmd->add_option("--order", order, "override the expansion order")->check(CLI::PositiveNumber);
  run_cmd->add_flag("--no-postselect", no_postselect, "print the full state");
  run_cmd->add_flag("--json", json, "one JSON object per term");
  run_cmd->add_flag("--creation-only", creation_only, "drop the annihilation part of each crystal");

  auto* fid_cmd = app.add_subcommand("fidelity", "fidelity of the post-selected state with a target");
  std::string target;
  fid_cmd->add_option("file", file, "experiment file")->required();
  fid_cmd->add_option("--target", target, "ghz:<n>:<d>, w:<n> or a state file")->required();
  fid_cmd->add_flag("--creation-only", creation_only, "drop the annihilation part of each crystal");

  auto* srv_cmd = app.add_subcommand("srv", "Schmidt-rank vector of the post-selected state");
  srv_cmd->add_option("file", file, "experiment file")->required();
  srv_cmd->add_flag("--creation-only", creation_only, "drop the annihilation part of each crystal");

  auto* eff_cmd = app.add_subcommand("efficiency", "GHZ generation efficiency");
  int eff_n = 0, eff_d = 0;
  std::string simulate;
  eff_cmd->add_option("n", eff_n, "photons")->required();
  eff_cmd->add_option("d", eff_d, "dimensions")->required();
  eff_cmd->add_option("--simulate", simulate, "experiment file to simulate");

  auto* layout_cmd = app.add_subcommand("layout", "print a generated layout");
  std::string layout_kind;
  int lay_n = 0, lay_d = 0;
  double lay_g = kDefaultGain;
  layout_cmd->add_option("kind", layout_kind, "layout family")->required()->check(CLI::IsMember({"ghz"}));
  layout_cmd->add_option("n", lay_n, "photons")->required();
  layout_cmd->add_option("d", lay_d, "dimensions")->required();
  layout_cmd->add_option("--g", lay_g, "crystal gain");

  auto* build_cmd = app.add_subcommand("build2", "layout for sum_k c_k |k,k>");
  std::string coefficients;
  build_cmd->add_option("coefficients", coefficients, "comma-separated complex coefficients, e.g. 1,i,-1,-i")->required();

  auto* coh_cmd = app.add_subcommand("coherence", "check path-length constraints");
  coh_cmd->add_option("file", file, "key=value spec")->required();

  auto* search_cmd = app.add_subcommand("search", "random search for a target");
  std::string search_target, pool = "crystal:H,crystal:V", out_dir, paths_csv = "a,b,c,d";
  std::uint64_t budget = 1000, seed = 0;
  unsigned workers = 1;
  int max_elements = 4;
  double threshold = 1.0 - 1e-6;
  search_cmd->add_option("target", search_target, "ghz:<n>:<d>, w:<n>, srv:<r1,r2,...> or a state file")->required();
  search_cmd->add_option("--budget", budget, "number of trials")->required()->check(CLI::PositiveNumber);
  search_cmd->add_option("--seed", seed, "64-bit seed")->required();
  search_cmd->add_option("--workers", workers, "worker threads")->check(CLI::PositiveNumber);
  search_cmd->add_option("--pool", pool, "element pool, e.g. crystal:H,crystal:V,shift:1");
  search_cmd->add_option("--paths", paths_csv, "comma-separated detector paths");
  search_cmd->add_option("--max-elements", max_elements, "largest sampled setup")->check(CLI::PositiveNumber);
  search_cmd->add_option("--threshold", threshold, "fidelity threshold");
  search_cmd->add_option("--out", out_dir, "directory for hit files");
  search_cmd->add_flag("--creation-only", creation_only, "drop the annihilation part of each crystal");

  CLI11_PARSE(app, argc, argv);

  try {
    RunOptions run_opts;
    run_opts.include_annihilation = !creation_only;

    if (*run_cmd) {
      const Experiment exp = load_experiment(file);
      run_opts.order_override = order;
      const StateVector full = run(exp, run_opts);
      if (no_postselect) {
        print_state(full, json);
      } else {
        const auto selected = post_select(full, exp);
        if (!json) std::cout << "# post-selected weight " << number(selected.success_weight) << "\n";
        print_state(selected.state, json);
      }
    } else if (*fid_cmd) {
      const Experiment exp = load_experiment(file);
      const auto selected = post_select(run(exp, run_opts), exp);
      if (!(selected.success_weight > 0.0)) throw CliError("post-selection keeps nothing");
      std::cout << number(fidelity(selected.state, parse_target(target, &exp))) << "\n";
    } else if (*srv_cmd) {
      const Experiment exp = load_experiment(file);
      const auto selected = post_select(run(exp, run_opts), exp);
      if (!(selected.success_weight > 0.0)) throw CliError("post-selection keeps nothing");
      std::cout << to_string(schmidt_rank_vector(selected.state, exp.detectors)) << "\n";
    } else if (*eff_cmd) {
      std::optional<Experiment> exp;
      if (!simulate.empty()) exp = load_experiment(simulate);
      const auto report = efficiency_report(eff_n, eff_d, exp ? &*exp : nullptr);
      std::cout << "formula " << to_string(report.formula_value) << "\n";
      if (report.simulated) {
        std::cout << "simulated "
                  << (report.simulated->exact ? to_string(*report.simulated->exact) : number(report.simulated->value))
                  << "\n";
        std::cout << "note " << report.discrepancy_note() << "\n";
      }
    } else if (*layout_cmd) {
      std::cout << dsl::serialize(ghz_layout(lay_n, lay_d, default_paths(lay_n), lay_g));
    } else if (*build_cmd) {
      std::vector<Amplitude> c;
      std::stringstream ss(coefficients);
      std::string tok;
      while (std::getline(ss, tok, ',')) c.push_back(parse_complex(tok));
      std::cout << dsl::serialize(two_photon_builder(c));
    } else if (*coh_cmd) {
      const auto report = check_coherence(parse_coherence_spec(read_file(file)));
      std::cout << (report.pass ? "pass" : "fail") << " min_margin " << number(report.min_margin()) << "\n";
      for (const auto& c : report.constraints)
        std::cout << (c.satisfied ? "ok   " : "FAIL ") << c.name << " diff " << number(c.difference) << " budget "
                  << number(c.budget) << " margin " << number(c.margin) << "\n";
    } else if (*search_cmd) {
      search::SearchConfig config;
      config.pool = search::parse_pool(pool);
      config.paths.clear();
      std::stringstream ps(paths_csv);
      std::string p;
      while (std::getline(ps, p, ',')) config.paths.push_back(p);
      config.detectors.assign(config.paths.begin(), config.paths.end());
      config.budget = budget;
      config.seed = seed;
      config.workers = workers;
      config.max_elements = max_elements;
      config.include_annihilation = !creation_only;
      if (search_target.rfind("srv:", 0) == 0) {
        std::vector<int> ranks;
        std::stringstream rs(search_target.substr(4));
        std::string r;
        while (std::getline(rs, r, ',')) ranks.push_back(parse_positive(r, "rank"));
        config.acceptance = search::Acceptance::schmidt_rank(ranks);
      } else {
        Experiment shape;
        shape.detectors = config.detectors;
        config.acceptance = search::Acceptance::fidelity(parse_target(search_target, &shape), threshold);
      }
      const auto hits = search::search(config);
      if (!out_dir.empty()) fs::create_directories(out_dir);
      std::cout << "trial score elements\n";
      for (const auto& hit : hits) {
        std::cout << hit.trial_index << " " << number(hit.score) << " " << hit.experiment.elements.size() << "\n";
        if (!out_dir.empty()) {
          std::ofstream out(fs::path(out_dir) / ("hit_" + std::to_string(hit.trial_index) + ".exp"));
          out << dsl::serialize(hit.experiment);
        }
      }
      std::cerr << hits.size() << " hits in " << budget << " trials\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
