#include "bfn/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>

#include "bfn/serialize.hpp"

namespace bfn {

namespace {

static_assert(std::endian::native == std::endian::little,
              "checkpoint format assumes a little-endian host");

constexpr char kMagic[8] = {'B', 'F', 'N', 'C', 'K', 'P', 'T', '1'};

void write_u64(std::ostream& out, std::uint64_t v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

std::uint64_t read_u64(std::istream& in) {
  std::uint64_t v = 0;
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
  if (!in) throw CheckpointError("checkpoint truncated");
  return v;
}

}  // namespace

void save_checkpoint(const std::string& path, const Checkpoint& ckpt) {
  json manifest;
  manifest["network"] = ckpt.net_spec;
  manifest["schedule"] = ckpt.schedule;
  manifest["schema"] = ckpt.schema;
  manifest["task_index"] = ckpt.task_index;
  if (!ckpt.codecs.empty()) manifest["codecs"] = ckpt.codecs;
  const std::string body = manifest.dump();

  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw CheckpointError("cannot write checkpoint: " + path);
    out.write(kMagic, sizeof(kMagic));
    write_u64(out, body.size());
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    write_u64(out, ckpt.params.size());
    out.write(reinterpret_cast<const char*>(ckpt.params.values.data()),
              static_cast<std::streamsize>(ckpt.params.size() * sizeof(double)));
    if (!out) throw CheckpointError("checkpoint write failed: " + path);
  }
  std::filesystem::rename(tmp, path);
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw CheckpointError("bad checkpoint magic: " + path);
  }
  const std::uint64_t len = read_u64(in);
  std::string body(len, '\0');
  in.read(body.data(), static_cast<std::streamsize>(len));
  if (!in) throw CheckpointError("checkpoint truncated");

  Checkpoint ckpt;
  json manifest;
  try {
    manifest = json::parse(body);
    ckpt.net_spec = manifest.at("network").get<NetworkSpec>();
    ckpt.schedule = manifest.at("schedule").get<AccuracySchedule>();
    ckpt.schema = manifest.at("schema").get<DataSchema>();
    ckpt.task_index = manifest.value("task_index", 0);
    if (manifest.contains("codecs")) {
      ckpt.codecs = manifest.at("codecs").get<std::vector<ColumnCodec>>();
    }
  } catch (const json::exception& e) {
    throw CheckpointError(std::string("bad checkpoint manifest: ") + e.what());
  }

  const std::uint64_t count = read_u64(in);
  ckpt.params.values.resize(count);
  in.read(reinterpret_cast<char*>(ckpt.params.values.data()),
          static_cast<std::streamsize>(count * sizeof(double)));
  if (!in) throw CheckpointError("checkpoint truncated");
  if (static_cast<int>(count) != ckpt.net_spec.param_count()) {
    throw CheckpointError("checkpoint parameter count mismatch");
  }
  return ckpt;
}

}  // namespace bfn
