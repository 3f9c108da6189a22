// src/config.cc

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

#include "breathid/config.h"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "breathid/error.h"

namespace breathid {

namespace {

std::string Trim(const std::string &s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

std::vector<ConfigEntry> ParseConfig(const std::string &text, const std::string &origin) {
  std::vector<ConfigEntry> entries;
  std::set<std::string> seen;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.resize(hash);
    line = Trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string::npos) Fail(ErrorCode::kFormat, where + ": expected key = value");
    ConfigEntry e{Trim(line.substr(0, eq)), Trim(line.substr(eq + 1))};
    if (e.key.empty() || e.key.front() == '-' ||
        !std::all_of(e.key.begin(), e.key.end(),
                     [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '-'; }))
      Fail(ErrorCode::kFormat, where + ": bad key '" + e.key + "'");
    if (e.value.empty()) Fail(ErrorCode::kFormat, where + ": empty value for '" + e.key + "'");
    if (!seen.insert(e.key).second)
      Fail(ErrorCode::kFormat, where + ": duplicate key '" + e.key + "'");
    entries.push_back(std::move(e));
  }
  return entries;
}

std::vector<ConfigEntry> ReadConfig(const std::filesystem::path &path) {
  std::ifstream f(path);
  if (!f) Fail(ErrorCode::kNotFound, "cannot open config " + path.string());
  const std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return ParseConfig(text, path.string());
}

std::vector<std::string> MergeConfigArgs(const std::vector<std::string> &args,
                                         const std::vector<ConfigEntry> &entries) {
  std::vector<std::string> out = args;
  for (const auto &e : entries) {
    const std::string flag = "--" + e.key;
    const bool given = std::any_of(args.begin(), args.end(), [&](const std::string &a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
    if (given) continue;
    out.push_back(flag);
    // Whitespace-separated values feed multi-value options such as hidden.
    std::istringstream vs(e.value);
    std::string tok;
    while (vs >> tok) out.push_back(tok);
  }
  return out;
}

}  // namespace breathid
