// Copyright 2026 The hashloc Authors
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
#ifndef HASHLOC_IO_HPP_
#define HASHLOC_IO_HPP_

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>

#include "json.hpp"

#include "hashloc/corpus.hpp"

namespace hashloc {

inline constexpr std::string_view kVersion = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, std::string_view content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out << content;
}

/// Run manifest: what was run, with which configuration, and content hashes
/// of what it wrote.
class Manifest {
 public:
  Manifest(std::string command, nlohmann::json config) : command_(std::move(command)), config_(std::move(config)) {}

  void add_output(const std::string& name, std::string_view content) {
    outputs_[name] = hex64(fnv1a64(content));
  }

  nlohmann::json to_json() const {
    return {{"tool", "hashloc"},
            {"version", kVersion},
            {"command", command_},
            {"config", config_},
            {"config_hash", hex64(fnv1a64(config_.dump()))},
            {"outputs", outputs_}};
  }

 private:
  std::string command_;
  nlohmann::json config_;
  nlohmann::json outputs_ = nlohmann::json::object();
};

}  // namespace hashloc

#endif  // HASHLOC_IO_HPP_
