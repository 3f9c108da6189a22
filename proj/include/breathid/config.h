// breathid/config.h

// Copyright 2026  The breathid Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Run configuration: a flat file of "key = value" lines, '#' starts a
// comment. Keys are option names of the target subcommand without the
// leading dashes.

#ifndef BREATHID_CONFIG_H_
#define BREATHID_CONFIG_H_

#include <filesystem>
#include <string>
#include <vector>

namespace breathid {

struct ConfigEntry {
  std::string key;
  std::string value;
};

/// Throws Error(kFormat) on a malformed or duplicated key, naming the line.
std::vector<ConfigEntry> ParseConfig(const std::string &text, const std::string &origin);
std::vector<ConfigEntry> ReadConfig(const std::filesystem::path &path);

/// Appends "--key value" for each entry whose option does not already
/// appear in args. Explicit flags win over the file.
std::vector<std::string> MergeConfigArgs(const std::vector<std::string> &args,
                                         const std::vector<ConfigEntry> &entries);

}  // namespace breathid

#endif  // BREATHID_CONFIG_H_
