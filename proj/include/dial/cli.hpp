// Copyright 2026 The DiAL Lab Authors
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

#ifndef DIAL_CLI_HPP_
#define DIAL_CLI_HPP_

#include <iosfwd>
#include <string>
#include <vector>

namespace dial {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitRuntime = 3;

// Runs one command line (args[0] is the program name). Exit codes: 0 on
// success, 2 for usage or configuration errors, 3 for runtime failures.
int dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

std::string version_string();

}  // namespace dial

#endif  // DIAL_CLI_HPP_
