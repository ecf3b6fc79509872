#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "lps/io.hpp"

int main(int argc, char** argv) {
  CLI::App app{
      "lps: Lie-Poisson stratification toolkit (brackets, strata, "
      "connections, holonomy, gauge charts)"};
  app.fallthrough();

  lps::RunConfig rc;
  if (const char* env = std::getenv("LPS_OUT_DIR")) rc.out_dir = env;
  std::vector<std::string> tol_overrides;

  app.add_option("--config", rc.config_path, "input document (JSON)");
  app.add_option("--out", rc.out_dir, "output directory for records/tables");
  app.add_option("--seed", rc.seed, "seed for all sampling");
  app.add_option("--tol", tol_overrides,
                 "tolerance override name=value (repeatable)")
      ->take_all();
  app.add_flag("--quiet", rc.quiet, "suppress per-assertion output");

  for (const auto& name : lps::command_names())
    app.add_subcommand(name, "run the " + name + " command");
  app.require_subcommand(1);

  CLI11_PARSE(app, argc, argv);
  rc.command = app.get_subcommands().front()->get_name();

  try {
    for (const auto& ov : tol_overrides) {
      const auto eq = ov.find('=');
      if (eq == std::string::npos)
        throw lps::InputError("tolerance override must be name=value: " + ov);
      rc.tolerances.set(ov.substr(0, eq), std::stod(ov.substr(eq + 1)));
    }
    return lps::run_command(rc);
  } catch (const lps::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 1;
  } catch (const lps::UnsupportedError& e) {
    std::cerr << "unsupported: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
