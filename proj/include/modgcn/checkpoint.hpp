#pragma once

#include <filesystem>

#include "modgcn/model.hpp"

namespace modgcn {

// Text checkpoint: the ModelSpec followed by every parameter as hex floats,
// so a reload is bit-exact.
void save_checkpoint(const Model& model, const std::filesystem::path& path);

// Rebuilds the architecture on ctx and overwrites its parameters. Throws
// std::runtime_error on a malformed file or a shape mismatch with ctx.
Model load_checkpoint(const std::filesystem::path& path, const GraphContext& ctx);

}  // namespace modgcn
