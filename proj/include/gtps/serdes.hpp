#ifndef GTPS_SERDES_HPP
#define GTPS_SERDES_HPP

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <string>

#include <json.hpp>

#include "gtps/algebra.hpp"
#include "gtps/sweep.hpp"

namespace gtps {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

#ifndef GTPS_BUILD_ID
#define GTPS_BUILD_ID "gtps-dev"
#endif

inline const char* build_id() { return GTPS_BUILD_ID; }

// shortest round-trip decimal representation, stable across runs
inline std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

inline json matrix_to_json(const cmat& m) {
  json data = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      data.push_back(m(i, j).real());
      data.push_back(m(i, j).imag());
    }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(data)}};
}

inline cmat matrix_from_json(const json& j) {
  const Eigen::Index rows = j.at("rows").get<Eigen::Index>();
  const Eigen::Index cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != 2 * rows * cols)
    throw std::invalid_argument("matrix_from_json: data length mismatch");
  cmat m(rows, cols);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const double re = data[k++].get<double>();
      const double im = data[k++].get<double>();
      m(i, c) = cxd(re, im);
    }
  return m;
}

// {dim, blocks: [[n, d], ...], frame: row-major interleaved re/im}
inline json algebra_to_json(const AlgebraSpec& a) {
  json blocks = json::array();
  for (const auto& b : a.blocks()) blocks.push_back(json::array({b.mult, b.dim}));
  json frame = json::array();
  for (Eigen::Index i = 0; i < a.dim(); ++i)
    for (Eigen::Index j = 0; j < a.dim(); ++j) {
      frame.push_back(a.frame()(i, j).real());
      frame.push_back(a.frame()(i, j).imag());
    }
  return json{{"dim", a.dim()}, {"blocks", std::move(blocks)}, {"frame", std::move(frame)}};
}

inline AlgebraSpec algebra_from_json(const json& j) {
  const Eigen::Index dim = j.at("dim").get<Eigen::Index>();
  std::vector<Block> blocks;
  for (const auto& b : j.at("blocks"))
    blocks.push_back(Block{b.at(0).get<Eigen::Index>(), b.at(1).get<Eigen::Index>()});
  const auto& fr = j.at("frame");
  if (static_cast<Eigen::Index>(fr.size()) != 2 * dim * dim)
    throw std::invalid_argument("algebra_from_json: frame length mismatch");
  cmat frame(dim, dim);
  std::size_t k = 0;
  for (Eigen::Index i = 0; i < dim; ++i)
    for (Eigen::Index c = 0; c < dim; ++c) {
      const double re = fr[k++].get<double>();
      const double im = fr[k++].get<double>();
      frame(i, c) = cxd(re, im);
    }
  return AlgebraSpec(dim, std::move(blocks), std::move(frame));
}

// reject config documents with keys outside the command's schema
inline void require_known_keys(const json& obj, const std::set<std::string>& allowed,
                               const std::string& context) {
  if (!obj.is_object()) throw std::invalid_argument(context + ": expected a JSON object");
  for (const auto& item : obj.items())
    if (!allowed.count(item.key()))
      throw std::invalid_argument(context + ": unknown field '" + item.key() + "'");
}

inline OptConfig opt_config_from_json(const json& j) {
  OptConfig cfg;
  if (j.is_null()) return cfg;
  require_known_keys(j, {"epsilon", "max_iters", "mu0"}, "optimizer");
  if (j.contains("epsilon")) cfg.epsilon = j["epsilon"].get<double>();
  if (j.contains("max_iters")) cfg.max_iters = j["max_iters"].get<int>();
  if (j.contains("mu0")) cfg.mu0 = j["mu0"].get<double>();
  if (cfg.epsilon <= 0.0 || cfg.max_iters < 1)
    throw std::invalid_argument("optimizer: epsilon must be > 0 and max_iters >= 1");
  return cfg;
}

// every output begins with the same provenance block
class CsvWriter {
 public:
  CsvWriter(const std::string& path, const std::string& command, const json& config,
            std::uint64_t seed)
      : out_(path, std::ios::binary) {
    if (!out_) throw std::runtime_error("cannot open output file: " + path);
    out_ << "# schema_version=" << kSchemaVersion << "\n";
    out_ << "# command=" << command << "\n";
    out_ << "# build=" << build_id() << "\n";
    out_ << "# seed=" << seed << "\n";
    out_ << "# config=" << config.dump() << "\n";
  }

  void columns(const std::string& header) { out_ << header << "\n"; }

  CsvWriter& field(const std::string& s) {
    if (!first_) out_ << ",";
    out_ << s;
    first_ = false;
    return *this;
  }
  CsvWriter& field(double v) { return field(fmt_double(v)); }
  CsvWriter& field(int v) { return field(std::to_string(v)); }
  CsvWriter& field(std::int64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(std::uint64_t v) { return field(std::to_string(v)); }
  CsvWriter& field(bool v) { return field(std::string(v ? "1" : "0")); }
  void endrow() {
    out_ << "\n";
    first_ = true;
  }

 private:
  std::ofstream out_;
  bool first_ = true;
};

// optimizer trace for convergence plots
inline void write_trace_csv(const OptState& state, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open trace file: " + path);
  out << "iter,f,grad_norm,mu\n";
  for (const auto& p : state.trace)
    out << p.iter << "," << fmt_double(p.f) << "," << fmt_double(p.grad_norm) << ","
        << fmt_double(p.mu) << "\n";
}

inline json record_to_json(const SweepRecord& rec, bool with_unitary = true) {
  json j{{"index", rec.index},
         {"strength", rec.strength},
         {"params", rec.params},
         {"f_min", rec.f_min},
         {"iters", rec.iters},
         {"converged", rec.converged},
         {"dist_prev", rec.dist_prev},
         {"dist_next", rec.dist_next},
         {"g", rec.g},
         {"endpoint", rec.endpoint},
         {"resonances", rec.resonances},
         {"seed", rec.seed}};
  if (with_unitary) j["v_min"] = matrix_to_json(rec.v_min);
  return j;
}

}  // namespace gtps

#endif
