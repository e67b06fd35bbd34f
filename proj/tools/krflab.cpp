#include <cstdio>
#include <exception>
#include <fstream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "krf/errors.hpp"
#include "krf/scenario.hpp"

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw krf::parameter_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

int cmd_run(const std::string& config_path, const std::string& out_dir) {
  krf::ScenarioConfig cfg = krf::parse_config(config_path);
  if (!out_dir.empty()) cfg.out_dir = out_dir;
  const krf::ScenarioResult result = krf::run_scenario(cfg);
  const krf::SummaryReport& rep = result.summary;
  std::printf("scenario %s (%s), config %s\n", rep.scenario_id.c_str(),
              rep.model.c_str(), rep.config_hash.c_str());
  for (const krf::CheckResult& c : rep.checks)
    std::printf("  [%s] %-18s value=%.6g %s\n", c.pass ? "PASS" : "FAIL",
                c.name.c_str(), c.value, c.detail.c_str());
  if (rep.terminal != "none")
    std::printf("  flow terminated: %s\n", rep.terminal.c_str());
  for (const std::string& a : result.artifacts) std::printf("  wrote %s\n", a.c_str());
  return result.exit_code;
}

int cmd_diff(const std::string& path_a, const std::string& path_b, double rel_tol) {
  const std::string diff = krf::report_diff(slurp(path_a), slurp(path_b), rel_tol);
  if (diff.empty()) return 0;
  std::fputs(diff.c_str(), stdout);
  return 1;
}

int cmd_list_checks() {
  for (const krf::CheckInfo& info : krf::list_checks())
    std::printf("%-18s [%s]\n    %s\n", info.name.c_str(), info.models.c_str(),
                info.description.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"krflab: normalised Kahler-Ricci flow laboratory"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  CLI::App* run = app.add_subcommand("run", "run a scenario from a config file");
  run->add_option("config", config_path, "key-value config file")->required();
  run->add_option("--out-dir", out_dir,
                  "output directory (KRFLAB_OUT_DIR overrides both this and the config)");

  std::string path_a, path_b;
  double rel_tol = 0.05;
  CLI::App* diff = app.add_subcommand("diff", "compare two JSON summaries");
  diff->add_option("a", path_a, "left summary")->required();
  diff->add_option("b", path_b, "right summary")->required();
  diff->add_option("--rel-tol", rel_tol, "relative tolerance for numeric fields");

  CLI::App* list = app.add_subcommand("list-checks", "describe the available checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_path, out_dir);
    if (diff->parsed()) return cmd_diff(path_a, path_b, rel_tol);
    if (list->parsed()) return cmd_list_checks();
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 3;
  }
  return 0;
}
