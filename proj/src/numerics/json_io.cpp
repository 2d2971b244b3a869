#include "yannrl/numerics/json_io.hpp"

#include <fstream>

#include "yannrl/numerics/errors.hpp"

namespace yannrl {

nlohmann::json vector_to_json(const Vector& v) {
    auto j = nlohmann::json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        j.push_back(v[i]);
    }
    return j;
}

nlohmann::json matrix_to_json(const Matrix& m) {
    auto j = nlohmann::json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c));
        }
        j.push_back(std::move(row));
    }
    return j;
}

Vector vector_from_json(const nlohmann::json& j) {
    if (!j.is_array()) {
        throw ConfigError("expected a numeric array, got " + j.dump());
    }
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index cols_if_empty) {
    if (!j.is_array()) {
        throw ConfigError("expected a nested numeric array, got " + j.dump());
    }
    if (j.empty()) {
        return Matrix(0, cols_if_empty);
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const auto& row = j[static_cast<std::size_t>(r)];
        if (static_cast<Eigen::Index>(row.size()) != cols) {
            throw ConfigError("ragged matrix in JSON");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = row[static_cast<std::size_t>(c)].get<double>();
        }
    }
    return m;
}

const nlohmann::json& require(const nlohmann::json& j, const std::string& key) {
    if (!j.is_object() || !j.contains(key)) {
        throw ConfigError("missing required key '" + key + "'");
    }
    return j.at(key);
}

nlohmann::json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open " + path);
    }
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError("invalid JSON in " + path + ": " + e.what());
    }
}

void write_json_file(const std::string& path, const nlohmann::json& j) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot open " + path + " for writing");
    }
    out << j.dump(2) << '\n';
}

std::uint64_t fnv1a64(const std::string& bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace yannrl
