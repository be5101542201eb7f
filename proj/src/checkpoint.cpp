// Copyright 2026 The slimcast Authors. All Rights Reserved.
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

#include <cstring>
#include <fstream>
#include <iterator>
#include <stdexcept>

#include "slimcast/forecaster.hpp"

namespace slimcast {

namespace {

constexpr char kMagic[8] = {'S', 'L', 'M', 'C', 'K', 'P', 'T', '\0'};
constexpr std::uint32_t kVersion = 1;
constexpr std::size_t kHeaderSize = 8 + 4 + 8 + 8;

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Fixed-width little-endian fields (host order; all supported targets are little-endian).
class Writer {
 public:
  template <typename T>
  void put(T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.append(reinterpret_cast<const char*>(&v), sizeof v);
  }
  void put_string(const std::string& s) {
    put<std::uint64_t>(s.size());
    out_.append(s);
  }
  void put_tensor(const Tensor& t) {
    put<std::uint64_t>(t.rank());
    for (std::size_t d : t.shape()) put<std::uint64_t>(d);
    out_.append(reinterpret_cast<const char*>(t.raw()), t.size() * sizeof(double));
  }
  void put_ids(const std::vector<std::size_t>& ids) {
    put<std::uint64_t>(ids.size());
    for (std::size_t id : ids) put<std::uint64_t>(id);
  }
  const std::string& bytes() const { return out_; }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view bytes) : in_(bytes) {}

  template <typename T>
  T get() {
    T v;
    std::memcpy(&v, take(sizeof v), sizeof v);
    return v;
  }
  std::string get_string() {
    const std::uint64_t n = get<std::uint64_t>();
    return std::string(take(n), n);
  }
  Tensor get_tensor() {
    const std::uint64_t rank = get<std::uint64_t>();
    if (rank > 8) throw data::DataError("checkpoint: implausible tensor rank");
    Shape shape;
    std::size_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      shape.push_back(get<std::uint64_t>());
      if (shape.back() > remaining()) throw data::DataError("checkpoint: truncated tensor");
      count *= shape.back();
    }
    if (count > remaining() / sizeof(double)) throw data::DataError("checkpoint: truncated tensor");
    Tensor t(shape);
    std::memcpy(t.raw(), take(count * sizeof(double)), count * sizeof(double));
    return t;
  }
  std::vector<std::size_t> get_ids() {
    const std::uint64_t n = get<std::uint64_t>();
    if (n > remaining() / 8) throw data::DataError("checkpoint: truncated id list");
    std::vector<std::size_t> ids(n);
    for (auto& id : ids) id = get<std::uint64_t>();
    return ids;
  }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  const char* take(std::size_t n) {
    if (n > remaining()) throw data::DataError("checkpoint: unexpected end of payload");
    const char* p = in_.data() + pos_;
    pos_ += n;
    return p;
  }

  std::string_view in_;
  std::size_t pos_ = 0;
};

}  // namespace

void save_checkpoint(const TrainState& state, const std::filesystem::path& path) {
  Writer w;
  w.put_string(to_json(state.config).dump());
  w.put<double>(state.scaler.mean);
  w.put<double>(state.scaler.std);
  w.put<std::uint64_t>(state.iteration);
  w.put<std::int64_t>(state.convergence_iteration);
  w.put<double>(state.optimizer.learning_rate());
  w.put<std::uint64_t>(state.optimizer.steps());

  const auto params = state.model.parameters();
  w.put<std::uint64_t>(params.size());
  for (const Parameter* p : params) {
    w.put_string(p->name());
    w.put_tensor(p->value());
    const auto it = state.optimizer.moments().find(p->name());
    w.put<std::uint8_t>(it != state.optimizer.moments().end());
    if (it != state.optimizer.moments().end()) {
      w.put_tensor(it->second.first);
      w.put_tensor(it->second.second);
    }
  }
  w.put<std::uint64_t>(state.candidates.nodes());
  w.put<std::uint64_t>(state.candidates.width());
  w.put_ids(state.candidates.ids());
  w.put_ids(state.index_set.ids());

  const std::string& payload = w.bytes();
  Writer header;
  for (char c : kMagic) header.put<char>(c);
  header.put<std::uint32_t>(kVersion);
  header.put<std::uint64_t>(payload.size());
  header.put<std::uint64_t>(fnv1a(payload));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw data::DataError("cannot write checkpoint " + path.string());
  out.write(header.bytes().data(), static_cast<std::streamsize>(header.bytes().size()));
  out.write(payload.data(), static_cast<std::streamsize>(payload.size()));
  if (!out) throw data::DataError("failed writing checkpoint " + path.string());
}

TrainState load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data::DataError("cannot open checkpoint " + path.string());
  const std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const std::string where = "checkpoint " + path.string() + ": ";
  if (bytes.size() < kHeaderSize || std::memcmp(bytes.data(), kMagic, 8) != 0) {
    throw data::DataError(where + "not a checkpoint file");
  }
  Reader header(std::string_view(bytes).substr(8, kHeaderSize - 8));
  const auto version = header.get<std::uint32_t>();
  if (version != kVersion) {
    throw data::DataError(where + "unsupported version " + std::to_string(version));
  }
  const auto size = header.get<std::uint64_t>();
  const auto checksum = header.get<std::uint64_t>();
  const std::string payload = bytes.substr(kHeaderSize);
  if (payload.size() != size) throw data::DataError(where + "truncated or padded payload");
  if (fnv1a(payload) != checksum) throw data::DataError(where + "checksum mismatch");

  try {
    Reader r(payload);
    const ModelConfig config = config_from_json(nlohmann::json::parse(r.get_string()));
    data::Scaler scaler;
    scaler.mean = r.get<double>();
    scaler.std = r.get<double>();

    TrainState state;
    state.config = config;
    state.model = Model(config);
    state.scaler = scaler;
    state.iteration = r.get<std::uint64_t>();
    state.convergence_iteration = r.get<std::int64_t>();
    state.optimizer = Adam(AdamOptions{.learning_rate = r.get<double>()});
    state.optimizer.set_steps(r.get<std::uint64_t>());

    auto params = state.model.parameters();
    const auto count = r.get<std::uint64_t>();
    if (count != params.size()) {
      throw data::DataError(where + "parameter count " + std::to_string(count) + ", model expects " +
                            std::to_string(params.size()));
    }
    for (Parameter* p : params) {
      const std::string name = r.get_string();
      if (name != p->name()) throw data::DataError(where + "unexpected parameter '" + name + "'");
      p->assign(r.get_tensor());
      if (r.get<std::uint8_t>()) {
        Adam::Moments m{r.get_tensor(), r.get_tensor()};
        if (m.first.shape() != p->shape() || m.second.shape() != p->shape()) {
          throw data::DataError(where + "moment shape mismatch for " + name);
        }
        state.optimizer.moments()[name] = std::move(m);
      }
    }
    const auto nodes = r.get<std::uint64_t>();
    const auto width = r.get<std::uint64_t>();
    auto candidate_ids = r.get_ids();
    if (nodes > 0) state.candidates = graph::CandidateMatrix(nodes, width, std::move(candidate_ids));
    state.index_set = graph::IndexSet(r.get_ids(), config.nodes);
    if (r.remaining() != 0) throw data::DataError(where + "trailing bytes");
    return state;
  } catch (const data::DataError&) {
    throw;
  } catch (const std::exception& e) {
    throw data::DataError(where + e.what());
  }
}

}  // namespace slimcast
