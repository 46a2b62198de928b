#pragma once

#include <CLI11.hpp>

namespace emoctool {

// Each registers one subcommand; callbacks store their exit code via the
// shared reference (0 success, 2 runtime failure).
void register_simulate(CLI::App& app, int& exit_code);
void register_serve(CLI::App& app, int& exit_code);
void register_replay(CLI::App& app, int& exit_code);
void register_analyze(CLI::App& app, int& exit_code);
void register_aggregate(CLI::App& app, int& exit_code);
void register_report(CLI::App& app, int& exit_code);
void register_selftest(CLI::App& app, int& exit_code);

// Wraps a command body: ToolError and unexpected exceptions become exit codes.
int guarded(const char* name, const std::function<void()>& body);

}  // namespace emoctool
