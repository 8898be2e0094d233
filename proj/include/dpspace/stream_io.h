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

// Canonical text format for streams:
//
//   N <num_users> T <num_updates>
//   E                      empty update
//   S <user> <+1|-1>       signed update
//   F <user> <feature>     feature flip
//   I <user> <item>        item change
//
// One update per line, '\n' line endings, no trailing whitespace.

#ifndef DPSPACE_STREAM_IO_H_
#define DPSPACE_STREAM_IO_H_

#include <istream>
#include <ostream>

#include "dpspace/core_model.h"

namespace dpspace {

void WriteStream(std::ostream& out, const Stream& stream);

// Throws std::invalid_argument with the offending line number on malformed
// input, including a header whose T disagrees with the number of lines.
Stream ReadStream(std::istream& in);

}  // namespace dpspace

#endif  // DPSPACE_STREAM_IO_H_
