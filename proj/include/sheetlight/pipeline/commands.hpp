#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace sheetlight::pipeline {

// Entry points behind the CLI subcommands. Each parses its own arguments
// (excluding the program and subcommand names) and returns the exit status.
// Exit codes: 0 success, 1 processing failure, 2 usage or missing input.

int relight_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int augment_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int mot_eval_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int iq_eval_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int mesh_dump_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Dispatches on the first argument; prints usage for unknown commands.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace sheetlight::pipeline
