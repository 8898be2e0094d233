// Copyright 2026 The dpspace Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dpspace/stream_io.h"

#include <sstream>
#include <string>

namespace dpspace {
namespace {

struct LineWriter {
  std::ostream& out;
  void operator()(const EmptyUpdate&) const { out << "E\n"; }
  void operator()(const SignedUpdate& u) const {
    out << "S " << u.user << ' ' << (u.sign > 0 ? "+1" : "-1") << '\n';
  }
  void operator()(const FeatureFlip& u) const {
    out << "F " << u.user << ' ' << u.feature << '\n';
  }
  void operator()(const ItemChange& u) const {
    out << "I " << u.user << ' ' << u.item << '\n';
  }
};

[[noreturn]] void Malformed(uint64_t line, const std::string& what) {
  throw std::invalid_argument("stream line " + std::to_string(line) + ": " +
                              what);
}

void ExpectLineEnd(std::istringstream& ls, uint64_t line) {
  std::string rest;
  if (ls >> rest) Malformed(line, "trailing content '" + rest + "'");
}

}  // namespace

void WriteStream(std::ostream& out, const Stream& stream) {
  out << "N " << stream.num_users << " T " << stream.updates.size() << '\n';
  const LineWriter writer{out};
  for (const auto& u : stream.updates) std::visit(writer, u);
}

Stream ReadStream(std::istream& in) {
  std::string line;
  uint64_t lineno = 1;
  if (!std::getline(in, line)) Malformed(lineno, "missing header");
  Stream stream;
  uint64_t declared = 0;
  {
    std::istringstream hs(line);
    std::string n_tag, t_tag;
    if (!(hs >> n_tag >> stream.num_users >> t_tag >> declared) ||
        n_tag != "N" || t_tag != "T") {
      Malformed(lineno, "header must be 'N <users> T <length>'");
    }
  }
  stream.updates.reserve(declared);
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ls(line);
    std::string tag;
    ls >> tag;
    uint64_t user = 0;
    if (tag == "E") {
      stream.updates.emplace_back(EmptyUpdate{});
      ExpectLineEnd(ls, lineno);
      continue;
    }
    if (!(ls >> user) || user >= stream.num_users) {
      Malformed(lineno, "bad or out-of-range user id");
    }
    const auto uid = static_cast<UserId>(user);
    if (tag == "S") {
      std::string sign;
      ls >> sign;
      if (sign == "+1") {
        stream.updates.emplace_back(SignedUpdate{uid, +1});
      } else if (sign == "-1") {
        stream.updates.emplace_back(SignedUpdate{uid, -1});
      } else {
        Malformed(lineno, "sign must be +1 or -1");
      }
    } else if (tag == "F" || tag == "I") {
      uint32_t index = 0;
      if (!(ls >> index)) Malformed(lineno, "missing index");
      if (tag == "F") {
        stream.updates.emplace_back(FeatureFlip{uid, index});
      } else {
        stream.updates.emplace_back(ItemChange{uid, index});
      }
    } else {
      Malformed(lineno, "unknown update tag '" + tag + "'");
    }
    ExpectLineEnd(ls, lineno);
  }
  if (stream.updates.size() != declared) {
    Malformed(lineno, "header declares T=" + std::to_string(declared) +
                          " but found " +
                          std::to_string(stream.updates.size()));
  }
  return stream;
}

}  // namespace dpspace
