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

#include "sgrnn/data/io.hpp"

#include <charconv>
#include <fstream>
#include <limits>
#include <sstream>
#include <string_view>
#include <vector>

#include "sgrnn/errors.hpp"

namespace sgrnn::data {
namespace {

class LineReader {
 public:
  LineReader(std::istream& in, std::string source) : in_(in), source_(std::move(source)) {}

  // Next non-blank line split into tokens; false at end of input.
  bool next(std::vector<std::string_view>& tokens) {
    while (std::getline(in_, line_)) {
      ++number_;
      if (auto hash = line_.find('#'); hash != std::string::npos) line_.resize(hash);
      if (!line_.empty() && line_.back() == '\r') line_.pop_back();
      tokens.clear();
      std::string_view rest(line_);
      while (!rest.empty()) {
        const auto start = rest.find_first_not_of(" \t");
        if (start == std::string_view::npos) break;
        rest.remove_prefix(start);
        const auto end = rest.find_first_of(" \t");
        tokens.push_back(rest.substr(0, end));
        if (end == std::string_view::npos) break;
        rest.remove_prefix(end);
      }
      if (!tokens.empty()) return true;
    }
    return false;
  }

  void expect_line(std::vector<std::string_view>& tokens, const char* what) {
    if (!next(tokens)) fail(std::string("unexpected end of file, expected ") + what);
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw ParseError(source_, number_, what);
  }

  std::size_t to_count(std::string_view tok) const {
    std::size_t value = 0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      fail("expected a non-negative integer, got '" + std::string(tok) + "'");
    }
    return value;
  }

  double to_double(std::string_view tok) const {
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      fail("expected a decimal, got '" + std::string(tok) + "'");
    }
    return value;
  }

 private:
  std::istream& in_;
  std::string source_;
  std::string line_;
  std::size_t number_ = 0;
};

}  // namespace

SnapshotSequence read_snapshots(std::istream& in, const std::string& source) {
  LineReader reader(in, source);
  std::vector<std::string_view> tok;

  reader.expect_line(tok, "header 'T <count>'");
  if (tok.size() != 2 || tok[0] != "T") reader.fail("expected header 'T <count>'");
  const std::size_t count = reader.to_count(tok[1]);

  std::vector<Snapshot> snapshots;
  snapshots.reserve(count);
  bool any_attrs = false;
  for (std::size_t t = 0; t < count; ++t) {
    reader.expect_line(tok, "'snapshot <t> nodes <N>'");
    if (tok.size() != 4 || tok[0] != "snapshot" || tok[2] != "nodes") {
      reader.fail("expected 'snapshot <t> nodes <N>'");
    }
    if (reader.to_count(tok[1]) != t) {
      reader.fail("snapshot index " + std::string(tok[1]) + " out of order, expected " +
                  std::to_string(t));
    }
    Snapshot snap;
    snap.num_nodes = reader.to_count(tok[3]);
    if (snap.num_nodes > std::numeric_limits<NodeId>::max()) reader.fail("node count too large");

    reader.expect_line(tok, "'attrs <M>' or 'edges <E>'");
    if (tok.size() == 2 && tok[0] == "attrs") {
      const std::size_t m = reader.to_count(tok[1]);
      ad::Tensor x(snap.num_nodes, m);
      for (std::size_t r = 0; r < snap.num_nodes; ++r) {
        reader.expect_line(tok, "attribute row");
        if (tok.size() != m) {
          reader.fail("attribute row has " + std::to_string(tok.size()) + " values, expected " +
                      std::to_string(m));
        }
        for (std::size_t c = 0; c < m; ++c) x(r, c) = reader.to_double(tok[c]);
      }
      snap.attributes = ad::SparseMatrix::from_dense(x);
      any_attrs = true;
      reader.expect_line(tok, "'edges <E>'");
    }
    if (tok.size() != 2 || tok[0] != "edges") reader.fail("expected 'edges <E>'");
    const std::size_t e = reader.to_count(tok[1]);
    snap.edges.reserve(e);
    for (std::size_t k = 0; k < e; ++k) {
      reader.expect_line(tok, "edge '<i> <j>'");
      if (tok.size() != 2) reader.fail("expected edge '<i> <j>'");
      const std::size_t i = reader.to_count(tok[0]);
      const std::size_t j = reader.to_count(tok[1]);
      if (i > std::numeric_limits<NodeId>::max() || j > std::numeric_limits<NodeId>::max()) {
        throw ValidationError(t, "node id out of range");
      }
      snap.edges.push_back(Edge::canonical(static_cast<NodeId>(i), static_cast<NodeId>(j)));
    }
    snapshots.push_back(std::move(snap));
  }
  if (reader.next(tok)) reader.fail("trailing content after last snapshot");
  return SnapshotSequence(std::move(snapshots),
                          any_attrs ? FeatureMode::kAttributes : FeatureMode::kNone);
}

SnapshotSequence load_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_snapshots(in, path.string());
}

void write_snapshots(std::ostream& out, const SnapshotSequence& seq) {
  const bool attrs = seq.feature_mode() == FeatureMode::kAttributes;
  out << "T " << seq.size() << '\n';
  char buf[64];
  for (std::size_t t = 0; t < seq.size(); ++t) {
    const Snapshot& s = seq[t];
    out << "snapshot " << t << " nodes " << s.num_nodes << '\n';
    if (attrs) {
      const ad::Tensor x = s.attributes->to_dense();
      out << "attrs " << x.cols() << '\n';
      for (std::size_t r = 0; r < x.rows(); ++r) {
        for (std::size_t c = 0; c < x.cols(); ++c) {
          const auto res = std::to_chars(buf, buf + sizeof(buf), x(r, c));
          if (c) out << ' ';
          out.write(buf, res.ptr - buf);
        }
        out << '\n';
      }
    }
    out << "edges " << s.edges.size() << '\n';
    for (const Edge& e : s.edges) out << e.u << ' ' << e.v << '\n';
  }
}

void save_snapshots(const std::filesystem::path& path, const SnapshotSequence& seq) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_snapshots(out, seq);
}

std::string to_text(const SnapshotSequence& seq) {
  std::ostringstream os;
  write_snapshots(os, seq);
  return os.str();
}

}  // namespace sgrnn::data
