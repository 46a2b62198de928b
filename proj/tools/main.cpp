#include <exception>
#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "common.hpp"

namespace emoctool {

int guarded(const char* name, const std::function<void()>& body) {
  try {
    body();
    return 0;
  } catch (const ToolError& e) {
    std::cerr << name << ": " << e.message << "\n";
    return e.code;
  } catch (const std::exception& e) {
    std::cerr << name << ": " << e.what() << "\n";
    return 2;
  }
}

}  // namespace emoctool

int main(int argc, char** argv) {
  CLI::App app{"EmotionCarrier biofeedback telemetry pipeline"};
  app.require_subcommand(1);

  int exit_code = 0;
  emoctool::register_simulate(app, exit_code);
  emoctool::register_serve(app, exit_code);
  emoctool::register_replay(app, exit_code);
  emoctool::register_analyze(app, exit_code);
  emoctool::register_aggregate(app, exit_code);
  emoctool::register_report(app, exit_code);
  emoctool::register_selftest(app, exit_code);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n\n" << app.help() << std::flush;
    return 1;  // usage error
  }
  return exit_code;
}
