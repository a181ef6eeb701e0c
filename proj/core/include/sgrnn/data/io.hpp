/*
 * Copyright 2026 The SGRNN Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Line-oriented snapshot text format:
//
//   T <count>
//   snapshot <t> nodes <N_t>
//   attrs <M>            (optional, followed by N_t rows of M decimals)
//   edges <E_t>          (followed by E_t lines "<i> <j>")
//
// Everything after '#' on a line is ignored.

#ifndef SGRNN_DATA_IO_HPP_
#define SGRNN_DATA_IO_HPP_

#include <filesystem>
#include <iosfwd>
#include <string>

#include "sgrnn/data/snapshot.hpp"

namespace sgrnn::data {

// Throws ParseError (with line number) or ValidationError (with snapshot index).
SnapshotSequence read_snapshots(std::istream& in, const std::string& source = "<stream>");
SnapshotSequence load_snapshots(const std::filesystem::path& path);

// Identity features are not written; they are reconstructed on demand.
void write_snapshots(std::ostream& out, const SnapshotSequence& seq);
void save_snapshots(const std::filesystem::path& path, const SnapshotSequence& seq);
std::string to_text(const SnapshotSequence& seq);

}  // namespace sgrnn::data

#endif  // SGRNN_DATA_IO_HPP_
