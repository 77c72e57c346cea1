#include "pesn/dataset.hpp"

#include <sstream>
#include <string>

#include <json.hpp>

#include "pesn/errors.hpp"
#include "pesn/text.hpp"

namespace pesn {

void Dataset::validate() const {
  if (z.rows() != y.rows()) {
    throw ShapeError("Dataset: z has " + std::to_string(z.rows()) + " rows, y has " + std::to_string(y.rows()));
  }
  if (washout > train_end || train_end > rows()) {
    throw DomainError("Dataset: splits must satisfy washout <= train_end <= rows");
  }
}

std::string dataset_to_csv(const Dataset& data) {
  data.validate();
  std::ostringstream out;
  for (Eigen::Index j = 0; j < data.z.cols(); ++j) out << (j ? "," : "") << "z" << j;
  for (Eigen::Index j = 0; j < data.y.cols(); ++j) out << (data.z.cols() + j ? "," : "") << "y" << j;
  out << "\n";
  for (Eigen::Index i = 0; i < data.z.rows(); ++i) {
    for (Eigen::Index j = 0; j < data.z.cols(); ++j) out << (j ? "," : "") << format_double(data.z(i, j));
    for (Eigen::Index j = 0; j < data.y.cols(); ++j) out << "," << format_double(data.y(i, j));
    out << "\n";
  }
  return out.str();
}

Dataset dataset_from_csv(std::string_view text) {
  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    line = trim(line);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) {
    throw ConfigError("dataset: empty CSV");
  }
  const auto header = split(lines[0], ',');
  std::vector<Eigen::Index> z_col, y_col;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const auto name = trim(header[c]);
    if (name.size() < 2 || (name[0] != 'z' && name[0] != 'y')) {
      throw ConfigError("dataset: unexpected column '" + std::string(name) + "'");
    }
    const auto index = parse_int(name.substr(1));
    auto& cols = name[0] == 'z' ? z_col : y_col;
    if (index != static_cast<long long>(cols.size())) {
      throw ConfigError("dataset: columns must be z0.. then y0.. in order");
    }
    cols.push_back(static_cast<Eigen::Index>(c));
  }
  if (z_col.empty() || y_col.empty()) {
    throw ConfigError("dataset: need at least one z and one y column");
  }
  Dataset data;
  const auto n = static_cast<Eigen::Index>(lines.size() - 1);
  data.z.resize(n, static_cast<Eigen::Index>(z_col.size()));
  data.y.resize(n, static_cast<Eigen::Index>(y_col.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto fields = split(lines[static_cast<std::size_t>(i) + 1], ',');
    if (fields.size() != header.size()) {
      throw ConfigError("dataset: row " + std::to_string(i + 1) + " has " + std::to_string(fields.size()) +
                        " fields, header has " + std::to_string(header.size()));
    }
    for (std::size_t j = 0; j < z_col.size(); ++j)
      data.z(i, static_cast<Eigen::Index>(j)) = parse_double(fields[static_cast<std::size_t>(z_col[j])]);
    for (std::size_t j = 0; j < y_col.size(); ++j)
      data.y(i, static_cast<Eigen::Index>(j)) = parse_double(fields[static_cast<std::size_t>(y_col[j])]);
  }
  data.washout = 0;
  data.train_end = data.rows();
  return data;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  return std::filesystem::path(path.string() + ".meta.json");
}

void save_dataset(const Dataset& data, const std::filesystem::path& path) {
  write_file(path, dataset_to_csv(data));
  nlohmann::ordered_json meta;
  meta["format"] = "pesn-dataset";
  meta["version"] = 1;
  meta["rows"] = data.rows();
  meta["washout"] = data.washout;
  meta["train_end"] = data.train_end;
  meta["metadata"] = nlohmann::ordered_json::object();
  for (const auto& [key, value] : data.metadata) meta["metadata"][key] = value;
  write_file(sidecar_path(path), meta.dump(2) + "\n");
}

Dataset load_dataset(const std::filesystem::path& path) {
  Dataset data = dataset_from_csv(read_file(path));
  const auto meta_path = sidecar_path(path);
  if (std::filesystem::exists(meta_path)) {
    try {
      const auto meta = nlohmann::json::parse(read_file(meta_path));
      if (meta.at("format") != "pesn-dataset" || meta.at("version") != 1) {
        throw ConfigError("dataset sidecar: unsupported format or version");
      }
      data.washout = meta.at("washout").get<std::size_t>();
      data.train_end = meta.at("train_end").get<std::size_t>();
      if (meta.contains("metadata")) {
        for (const auto& [key, value] : meta["metadata"].items()) {
          data.metadata[key] = value.is_string() ? value.get<std::string>() : value.dump();
        }
      }
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("dataset sidecar " + meta_path.string() + ": " + e.what());
    }
  }
  data.validate();
  return data;
}

}  // namespace pesn
