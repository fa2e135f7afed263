//
// Copyright 2026 The PrivTree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#ifndef PRIVTREE_CLI_H_
#define PRIVTREE_CLI_H_

#include <ostream>

#include "absl/status/status.h"

namespace privtree {

// Process exit codes of the command-line tool.
inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 1;
inline constexpr int kExitDataError = 2;
inline constexpr int kExitNumericError = 3;

// kInvalidArgument -> configuration error; kDataLoss, kFailedPrecondition
// and kNotFound -> input-data error; anything else -> numeric error.
int ExitCodeFor(const absl::Status& status);

// Entry point of the `privtree` tool. Artifacts and reports go to `out` (or
// to --output), diagnostics to `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out,
           std::ostream& err);

}  // namespace privtree

#endif  // PRIVTREE_CLI_H_
