#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "glsp/nn/gaan.hpp"
#include "glsp/nn/optim.hpp"

namespace glsp::nn {

inline constexpr std::string_view kCheckpointMagic = "GLSPMODL";
inline constexpr std::uint32_t kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Checkpoint {
  GaanModel model;
  std::optional<AdamState> adam;
};

/// Magic, u32 version, u32 record count, then records of
/// (u32 name length, name, u32 rows, u32 cols, float32 values).
/// The first record holds the model dimensions.
std::string checkpoint_to_bytes(const GaanModel& model, const AdamState* adam = nullptr);
Checkpoint checkpoint_from_bytes(std::string_view bytes);

void save_checkpoint(const std::filesystem::path& path, const GaanModel& model,
                     const AdamState* adam = nullptr);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace glsp::nn
