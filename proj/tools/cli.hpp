// Copyright 2026 The ppseg Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef PPSEG_TOOLS_CLI_HPP_
#define PPSEG_TOOLS_CLI_HPP_

#include <ostream>

namespace ppseg::cli {

enum ExitCode : int {
  kExitOk = 0,
  kExitMissingInput = 2,
  kExitFormat = 3,
  kExitInvariant = 4,
  kExitUsage = 64,
};

// Runs `ppseg <subcommand> ...`. Results go to `out`, diagnostics to `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ppseg::cli

#endif  // PPSEG_TOOLS_CLI_HPP_
