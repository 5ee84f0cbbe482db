#pragma once

#include <string>

#include "triage/model.hpp"

namespace triage {

struct Checkpoint {
    ModelParams params;
    Vocab vocab;
};

// Binary archive: magic + version, the model configuration, the vocabulary
// and every named tensor with explicit shape and raw little-endian f64 data.
// Write/read round trips are bitwise exact. Layout documented in
// docs/formats.md.
void save_checkpoint(const ModelParams& params, const Vocab& vocab, const std::string& path);

Checkpoint load_checkpoint(const std::string& path);

} // namespace triage
