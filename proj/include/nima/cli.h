// Copyright 2026 The NIMA Toolkit Authors. All Rights Reserved.
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

#ifndef NIMA_CLI_H_
#define NIMA_CLI_H_

// Command-line front end. Subcommands: train, eval, score, rank, fit-dist,
// tune, cross-eval, gen-synth. Exit codes: 0 success, 1 usage, 2 data,
// 3 numerical failure; failures print one `error: category=... detail="..."`
// line to the error stream.

#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "nima/tuner.h"

namespace nima::cli {

int Run(int argc, const char* const* argv, std::ostream& out,
        std::ostream& err);

// Flat `key = value` config file; `#` starts a comment. Keys may use `_` or
// `-`. Throws UsageError on a malformed line.
std::vector<std::pair<std::string, std::string>> ReadConfigFile(
    const std::string& path);

// `axis=v1,v2,...` or `axis=start:step:stop`, axes separated by `;`. Named
// axes replace the matching axis of `base`; the rest keep their defaults.
OperatorGrid ParseGridSpec(const std::string& spec, const OperatorGrid& base);

}  // namespace nima::cli

#endif  // NIMA_CLI_H_
