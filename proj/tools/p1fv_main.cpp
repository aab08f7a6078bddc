// Command-line front end: p1fv <run|check-mesh|verify|convergence> [options]

#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "p1fv/cli.hpp"
#include "p1fv/error.hpp"

namespace {

struct Overrides {
  std::string config;
  std::string out;
  std::string format;
  std::size_t levels = 0;
  bool parallel_levels = false;
};

p1fv::RunConfig resolve_config(const Overrides& o) {
  p1fv::RunConfig cfg = o.config.empty() ? p1fv::parse_config("") : p1fv::load_config(o.config);
  if (!o.out.empty()) cfg.output_dir = o.out;
  if (!o.format.empty()) {
    cfg.write_csv = o.format != "vtk";
    cfg.write_vtk = o.format != "csv";
  }
  if (o.levels != 0) cfg.levels = o.levels;
  if (o.parallel_levels) cfg.parallel_levels = true;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite volume solver for the P1 radiative heat transfer model"};
  app.require_subcommand(1);
  Overrides o;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", o.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", o.out, "output directory (overrides output_dir)");
  };
  auto* run = app.add_subcommand("run", "run the scheme and export fields");
  add_common(run);
  run->add_option("--format", o.format, "export format")->check(CLI::IsMember({"csv", "vtk", "both"}));
  auto* check = app.add_subcommand("check-mesh", "report mesh admissibility and theta_M");
  add_common(check);
  auto* verify = app.add_subcommand("verify", "run every invariant check, nonzero exit on a violation");
  add_common(verify);
  auto* conv = app.add_subcommand("convergence", "refinement study with Cauchy differences");
  add_common(conv);
  conv->add_option("--levels", o.levels, "number of levels")->check(CLI::Range(2, 8));
  conv->add_flag("--parallel-levels", o.parallel_levels, "run levels concurrently");

  CLI11_PARSE(app, argc, argv);

  try {
    const p1fv::RunConfig cfg = resolve_config(o);
    if (run->parsed()) return p1fv::cmd_run(cfg, std::cout);
    if (check->parsed()) return p1fv::cmd_check_mesh(cfg, std::cout);
    if (verify->parsed()) return p1fv::cmd_verify(cfg, std::cout);
    return p1fv::cmd_convergence(cfg, std::cout);
  } catch (const p1fv::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "unexpected error: " << e.what() << '\n';
    return 3;
  }
}
