// Binary checkpoint format, bit-exact across save/load:
//
//   magic "RPLYCKPT", u32 version, u64 seed, u64 epochs_completed,
//   i64 adam_steps, u64 tensor_count, then per tensor (name order):
//   u32 name_len, name bytes, u32 ndim, u64 dims..., then raw f64
//   arrays value, m, v.
//
// Gradients are not stored; they are zero between optimizer steps.

#pragma once

#include <cstdint>
#include <string>

#include "replay/tensor.hpp"

namespace replay {

struct CheckpointHeader {
    std::uint32_t version = 1;
    std::uint64_t seed = 0;
    std::uint64_t epochs_completed = 0;
    std::int64_t adam_steps = 0;
};

void save_checkpoint(const std::string& path, const ParameterStore& params,
                     const CheckpointHeader& header);

/// Reads only the header.
CheckpointHeader peek_checkpoint(const std::string& path);

/// Loads tensor contents into an already-constructed store. The store
/// must contain exactly the checkpoint's tensors with matching shapes;
/// mismatches raise ConfigError naming the tensor and expected shape.
CheckpointHeader load_checkpoint(const std::string& path,
                                 ParameterStore& params);

}  // namespace replay
