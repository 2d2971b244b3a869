#pragma once

#include <string>

#include <json.hpp>

#include "yannrl/numerics/types.hpp"

namespace yannrl {

[[nodiscard]] nlohmann::json vector_to_json(const Vector& v);
[[nodiscard]] nlohmann::json matrix_to_json(const Matrix& m);  // row-major nested arrays
[[nodiscard]] Vector vector_from_json(const nlohmann::json& j);
[[nodiscard]] Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index cols_if_empty = 0);

/// Fetches a required key, throwing ConfigError naming it when absent.
[[nodiscard]] const nlohmann::json& require(const nlohmann::json& j, const std::string& key);

[[nodiscard]] nlohmann::json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const nlohmann::json& j);

/// 64-bit FNV-1a, used for content hashes in serialized artifacts.
[[nodiscard]] std::uint64_t fnv1a64(const std::string& bytes);

}  // namespace yannrl
