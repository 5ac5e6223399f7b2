#ifndef BFN_CHECKPOINT_HPP
#define BFN_CHECKPOINT_HPP

#include <stdexcept>
#include <string>
#include <vector>

#include "bfn/bfn.hpp"
#include "bfn/data.hpp"
#include "bfn/model.hpp"
#include "bfn/schedule.hpp"

namespace bfn {

struct CheckpointError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// On-disk layout: magic "BFNCKPT1", u64-LE manifest length, manifest JSON
// (network spec, schedule, schema, task index, optional codecs), u64-LE
// parameter count, parameters as little-endian float64.
struct Checkpoint {
  NetworkSpec net_spec;
  AccuracySchedule schedule = AccuracySchedule::continuous(0.02, 20);
  DataSchema schema;
  int task_index = 0;
  std::vector<ColumnCodec> codecs;
  ParameterVector params;
};

void save_checkpoint(const std::string& path, const Checkpoint& ckpt);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace bfn

#endif
