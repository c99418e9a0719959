// Copyright 2026 The alee Authors.
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


#include "alee/checkpoint.hpp"

#include "alee/extractor.hpp"
#include "alee/mblp.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace alee {

using json = nlohmann::json;

namespace {

constexpr char kMagic[8] = {'A', 'L', 'E', 'E', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

template <typename T>
void put(std::ostream &out, T v) {
  out.write(reinterpret_cast<const char *>(&v), sizeof(T));
}

template <typename T>
T take(std::istream &in, const std::string &path) {
  T v{};
  if (!in.read(reinterpret_cast<char *>(&v), sizeof(T))) {
    throw CheckpointError("checkpoint " + path + ": truncated");
  }
  return v;
}

}  // namespace

void write_checkpoint(const std::string &path, const Checkpoint &ckpt) {
  json header;
  header["config"] = ckpt.config;
  header["schema"] = {{"event_types", ckpt.schema.event_types()}, {"roles", ckpt.schema.roles()}};
  header["vocab"] = ckpt.vocab;
  json arrays = json::array();
  std::uint64_t offset = 0;
  for (const auto &[name, m] : ckpt.arrays) {
    arrays.push_back({{"name", name}, {"rows", m.rows()}, {"cols", m.cols()}, {"offset", offset}});
    offset += static_cast<std::uint64_t>(m.size()) * sizeof(double);
  }
  header["arrays"] = arrays;
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw CheckpointError("checkpoint: cannot write " + path);
  out.write(kMagic, sizeof(kMagic));
  put<std::uint32_t>(out, ckpt.version);
  put<std::uint64_t>(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (const auto &[name, m] : ckpt.arrays) {
    // Eigen defaults to column-major; store row-major.
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm = m;
    out.write(reinterpret_cast<const char *>(rm.data()),
              static_cast<std::streamsize>(rm.size() * sizeof(double)));
  }
  if (!out) throw CheckpointError("checkpoint: write failed for " + path);
}

Checkpoint read_checkpoint(const std::string &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("checkpoint: cannot open " + path);
  char magic[8];
  if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("checkpoint " + path + ": bad magic");
  }
  Checkpoint ckpt;
  ckpt.version = take<std::uint32_t>(in, path);
  if (ckpt.version != kCheckpointVersion) {
    throw CheckpointError("checkpoint " + path + ": unsupported version " +
                          std::to_string(ckpt.version));
  }
  const auto len = take<std::uint64_t>(in, path);
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw CheckpointError("checkpoint " + path + ": truncated header");
  }
  json header;
  try {
    header = json::parse(text);
    ckpt.config = header.at("config");
    ckpt.schema = TaskSchema(header.at("schema").at("event_types").get<std::vector<std::string>>(),
                             header.at("schema").at("roles").get<std::vector<std::string>>());
    ckpt.vocab = header.at("vocab").get<std::vector<std::string>>();
  } catch (const json::exception &e) {
    throw CheckpointError("checkpoint " + path + ": bad header: " + e.what());
  } catch (const CorpusError &e) {
    throw CheckpointError("checkpoint " + path + ": bad schema: " + e.what());
  }
  const std::streamoff data_start = in.tellg();
  for (const auto &a : header.at("arrays")) {
    const auto name = a.at("name").get<std::string>();
    const auto rows = a.at("rows").get<Eigen::Index>();
    const auto cols = a.at("cols").get<Eigen::Index>();
    const auto offset = a.at("offset").get<std::uint64_t>();
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> rm(rows, cols);
    in.seekg(data_start + static_cast<std::streamoff>(offset));
    if (!in.read(reinterpret_cast<char *>(rm.data()),
                 static_cast<std::streamsize>(rm.size() * sizeof(double)))) {
      throw CheckpointError("checkpoint " + path + ": truncated array " + name);
    }
    ckpt.arrays.emplace(name, Matrix(rm));
  }
  return ckpt;
}

Checkpoint make_checkpoint(const EventModel &model, const MblpModel *mblp, const json &config) {
  Checkpoint ckpt;
  ckpt.config = config;
  ckpt.schema = model.schema();
  ckpt.vocab = model.vocabulary().tokens();
  ckpt.arrays = model.parameters().snapshot();
  if (mblp != nullptr) {
    for (auto &[name, m] : mblp->parameters().snapshot()) ckpt.arrays.emplace(name, std::move(m));
  }
  return ckpt;
}

int restore_namespace(const Checkpoint &ckpt, nn::ParameterStore &store) {
  int restored = 0;
  for (auto &p : store.all()) {
    auto it = ckpt.arrays.find(p.name());
    if (it == ckpt.arrays.end()) throw CheckpointError("checkpoint: missing array " + p.name());
    if (it->second.rows() != p.value.rows() || it->second.cols() != p.value.cols()) {
      throw CheckpointError("checkpoint: shape mismatch for " + p.name());
    }
    p.value = it->second;
    ++restored;
  }
  return restored;
}

void check_schema(const Checkpoint &ckpt, const TaskSchema &schema) {
  if (!(ckpt.schema == schema)) {
    throw CheckpointError("inconsistent schema between corpus and checkpoint");
  }
}

Vocabulary checkpoint_vocabulary(const Checkpoint &ckpt) {
  Vocabulary v;
  for (std::size_t i = 1; i < ckpt.vocab.size(); ++i) v.add(ckpt.vocab[i]);
  return v;
}

}  // namespace alee
