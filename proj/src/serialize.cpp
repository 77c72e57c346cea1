#include "pesn/serialize.hpp"

#include <json.hpp>

#include "pesn/errors.hpp"
#include "pesn/text.hpp"

namespace pesn {

namespace {

using Json = nlohmann::ordered_json;

Json dense(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Eigen::MatrixXd dense_from(const Json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) {
    throw ConfigError("weights: row count mismatch");
  }
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw ConfigError("weights: column count mismatch");
    }
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

}  // namespace

std::string weights_to_json(const EsnWeights& w) {
  Json doc;
  doc["format"] = "pesn-weights";
  doc["version"] = 1;
  doc["dims"] = {{"inputs", w.dims.inputs}, {"outputs", w.dims.outputs}, {"hidden", w.hidden()}};
  const auto& p = w.params;
  doc["params"] = {{"reservoir_size", p.reservoir_size}, {"leak", p.leak},
                   {"noise", p.noise},                   {"sparsity", p.sparsity},
                   {"spectral_radius", p.spectral_radius}, {"washout", p.washout},
                   {"rls_lambda", p.rls_lambda},         {"rls_delta", p.rls_delta},
                   {"ridge", p.ridge},                   {"input_scale", p.input_scale},
                   {"feedback_scale", p.feedback_scale}};
  doc["provenance"] = {{"seed", w.seed}, {"stream", w.stream}};
  doc["w_in"] = dense(w.w_in);
  doc["w_fb"] = dense(w.w_fb);
  Json triplets = Json::array();
  for (Eigen::Index i = 0; i < w.w.outerSize(); ++i) {
    for (SparseMatrix::InnerIterator it(w.w, i); it; ++it) {
      triplets.push_back(Json::array({it.row(), it.col(), it.value()}));
    }
  }
  doc["w"] = {{"rows", w.w.rows()}, {"cols", w.w.cols()}, {"triplets", std::move(triplets)}};
  doc["w_out"] = dense(w.w_out);
  return doc.dump(1) + "\n";
}

EsnWeights weights_from_json(std::string_view text) {
  try {
    const Json doc = Json::parse(text);
    if (doc.at("format") != "pesn-weights" || doc.at("version") != 1) {
      throw ConfigError("weights: unsupported format or version");
    }
    EsnWeights w;
    w.dims.inputs = doc.at("dims").at("inputs").get<Eigen::Index>();
    w.dims.outputs = doc.at("dims").at("outputs").get<Eigen::Index>();
    const auto& p = doc.at("params");
    w.params.reservoir_size = p.at("reservoir_size").get<int>();
    w.params.leak = p.at("leak").get<double>();
    w.params.noise = p.at("noise").get<double>();
    w.params.sparsity = p.at("sparsity").get<double>();
    w.params.spectral_radius = p.at("spectral_radius").get<double>();
    w.params.washout = p.at("washout").get<std::size_t>();
    w.params.rls_lambda = p.at("rls_lambda").get<double>();
    w.params.rls_delta = p.at("rls_delta").get<double>();
    w.params.ridge = p.at("ridge").get<double>();
    w.params.input_scale = p.at("input_scale").get<double>();
    w.params.feedback_scale = p.at("feedback_scale").get<double>();
    w.params.validate();
    w.seed = doc.at("provenance").at("seed").get<std::uint64_t>();
    w.stream = doc.at("provenance").at("stream").get<std::uint64_t>();
    w.w_in = dense_from(doc.at("w_in"));
    w.w_fb = dense_from(doc.at("w_fb"));
    const auto& wj = doc.at("w");
    const auto n = wj.at("rows").get<Eigen::Index>();
    if (wj.at("cols").get<Eigen::Index>() != n) {
      throw ConfigError("weights: W must be square");
    }
    std::vector<Eigen::Triplet<double>> triplets;
    for (const auto& t : wj.at("triplets")) {
      const auto r = t.at(0).get<Eigen::Index>();
      const auto c = t.at(1).get<Eigen::Index>();
      if (r < 0 || r >= n || c < 0 || c >= n) {
        throw ConfigError("weights: W triplet out of range");
      }
      triplets.emplace_back(r, c, t.at(2).get<double>());
    }
    w.w.resize(n, n);
    w.w.setFromTriplets(triplets.begin(), triplets.end());
    w.w_out = dense_from(doc.at("w_out"));
    if (w.w_in.rows() != n || w.w_in.cols() != w.dims.inputs || w.w_fb.rows() != n ||
        w.w_fb.cols() != w.dims.outputs || w.w_out.rows() != w.dims.outputs || w.w_out.cols() != w.regressors() ||
        n != w.params.reservoir_size) {
      throw ConfigError("weights: matrix shapes are inconsistent with dims");
    }
    return w;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("weights: ") + e.what());
  }
}

void save_weights(const EsnWeights& w, const std::filesystem::path& path) { write_file(path, weights_to_json(w)); }

EsnWeights load_weights(const std::filesystem::path& path) { return weights_from_json(read_file(path)); }

}  // namespace pesn
