// Copyright 2026 The rlqc Authors
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

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace rlqc::cli {

/// Exit codes shared by every subcommand.
enum ExitCode : int {
    kOk = 0,
    kUnsolved = 1,
    kBadInput = 2,
    kNumerics = 3,
    kIo = 4,
    kIntegrity = 5,
    kInterrupted = 130,
};

/// Runs the command line `args` (args[0] is the program name). Output and
/// diagnostics go to `out` and `err`; nothing is written to the process streams.
int run(const std::vector<std::string> &args, std::ostream &out, std::ostream &err);

/// Installs a SIGINT/SIGTERM handler that asks running trainings to stop
/// (they checkpoint, then return kInterrupted).
void install_signal_handlers();

/// True once a stop was requested; `reset_stop_request` clears it (tests).
bool stop_requested();
void request_stop();
void reset_stop_request();

}  // namespace rlqc::cli
