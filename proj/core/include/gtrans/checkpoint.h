#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "gtrans/gnn.h"

namespace gtrans {

// Text checkpoint: key=value header (kind, d, h, K, dropout) followed by the
// row-major values of W1, b1, W2, b2 at 17 significant digits.
std::string SerializeModel(const GcnModel& model);
GcnModel ParseModel(const std::string& text);

void SaveModel(const GcnModel& model, const std::filesystem::path& path);
GcnModel LoadModel(const std::filesystem::path& path);

// FNV-1a hash of the serialized checkpoint.
std::uint64_t ModelFingerprint(const GcnModel& model);

std::uint64_t Fnv1a(const std::string& bytes);

}  // namespace gtrans
