// Copyright 2026 The derev Authors
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

#include <string>
#include <vector>

namespace derev {

/// Entry point behind the `derev` binary: subcommands simulate-rir, mix,
/// dereverb, vace-dereverb, evaluate and export-lps. Takes the argument list
/// without the program name; returns the process exit code. Runs are
/// deterministic for a fixed argument list and record an effective-config
/// dump next to their primary output.
int run_cli(const std::vector<std::string>& args);

}  // namespace derev
