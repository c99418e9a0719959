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


// Model checkpoints.
//
// Layout (little-endian):
//   8 bytes   magic "ALEECKPT"
//   u32       format version
//   u64       header length H
//   H bytes   JSON header: {"config", "schema", "vocab",
//                           "arrays": [{"name", "rows", "cols", "offset"}]}
//   ...       raw float64 data, row-major, offsets relative to the data start
//
// Extraction-model arrays are named "ee/..." and predictor arrays "mblp/...",
// so either namespace can be restored without the other.

#ifndef ALEE_CHECKPOINT_HPP_
#define ALEE_CHECKPOINT_HPP_

#include "alee/autodiff.hpp"
#include "alee/corpus.hpp"
#include "alee/encoder.hpp"
#include "alee/nn.hpp"

#include "json.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace alee {

class EventModel;
class MblpModel;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  std::uint32_t version = kCheckpointVersion;
  nlohmann::json config;
  TaskSchema schema;
  std::vector<std::string> vocab;
  std::map<std::string, Matrix> arrays;
};

void write_checkpoint(const std::string &path, const Checkpoint &ckpt);
Checkpoint read_checkpoint(const std::string &path);

// Collects the arrays of `model` and, when given, `mblp`.
Checkpoint make_checkpoint(const EventModel &model, const MblpModel *mblp,
                           const nlohmann::json &config);

// Copies every array under `store.prefix() + "/"` into `store`. Throws
// CheckpointError when an array is missing or has the wrong shape. Returns
// the number of arrays restored.
int restore_namespace(const Checkpoint &ckpt, nn::ParameterStore &store);

// Throws CheckpointError unless the checkpoint was written for `schema`.
void check_schema(const Checkpoint &ckpt, const TaskSchema &schema);

Vocabulary checkpoint_vocabulary(const Checkpoint &ckpt);

}  // namespace alee

#endif  // ALEE_CHECKPOINT_HPP_
