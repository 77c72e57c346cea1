#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "pesn/reservoir.hpp"

namespace pesn {

/// Versioned JSON document: dims, params, seed provenance, dense W_in, W_fb,
/// W_out and W as (row, col, value) triplets.
[[nodiscard]] std::string weights_to_json(const EsnWeights& w);
[[nodiscard]] EsnWeights weights_from_json(std::string_view text);

void save_weights(const EsnWeights& w, const std::filesystem::path& path);
[[nodiscard]] EsnWeights load_weights(const std::filesystem::path& path);

}  // namespace pesn
