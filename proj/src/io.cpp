#include "fwmips/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace fwmips {

namespace {

constexpr char kMagic[4] = {'F', 'W', 'P', 'S'};

void write_u32(std::ostream& out, std::uint32_t v) {
  char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(buf, 4);
}

std::uint32_t read_u32(std::istream& in) {
  char buf[4];
  in.read(buf, 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
  return v;
}

}  // namespace

void save_point_set(const PointSet& pts, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out.write(kMagic, 4);
  write_u32(out, static_cast<std::uint32_t>(pts.size()));
  write_u32(out, static_cast<std::uint32_t>(pts.dim()));
  for (Eigen::Index i = 0; i < pts.size(); ++i)
    for (Eigen::Index j = 0; j < pts.dim(); ++j) {
      const double v = pts.matrix()(i, j);
      out.write(reinterpret_cast<const char*>(&v), sizeof(double));
    }
  if (!out) throw IoError("write failed: " + path.string());
}

PointSet load_point_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open: " + path.string());
  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0)
    throw IoError("bad magic in " + path.string());
  const std::uint32_t n = read_u32(in);
  const std::uint32_t d = read_u32(in);
  if (!in || n == 0 || d == 0) throw IoError("bad header in " + path.string());
  Mat m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < d; ++j) {
      double v = 0.0;
      in.read(reinterpret_cast<char*>(&v), sizeof(double));
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
    }
  if (!in) throw IoError("truncated file: " + path.string());
  return PointSet(std::move(m));
}

PointSet load_point_set_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  std::vector<Vec> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> vals;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
    Vec v(static_cast<Eigen::Index>(vals.size()));
    for (std::size_t j = 0; j < vals.size(); ++j) v(static_cast<Eigen::Index>(j)) = vals[j];
    rows.push_back(std::move(v));
  }
  if (rows.empty()) throw IoError("no points in " + path.string());
  return PointSet::from_vectors(rows);
}

void save_ensemble_meta(const SketchEnsemble& ens, const std::filesystem::path& path) {
  nlohmann::json j;
  j["sketch_dim"] = ens.sketch_dim;
  j["input_dim"] = ens.input_dim;
  j["epsilon"] = ens.epsilon;
  j["delta"] = ens.delta;
  j["master_seed"] = ens.master_seed;
  j["seeds"] = nlohmann::json::array();
  for (const JlMatrix& spec : ens.specs) j["seeds"].push_back(spec.seed);
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

SketchEnsemble load_ensemble_meta(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open: " + path.string());
  nlohmann::json j;
  in >> j;
  SketchEnsemble ens;
  ens.sketch_dim = j.at("sketch_dim").get<int>();
  ens.input_dim = j.at("input_dim").get<int>();
  ens.epsilon = j.at("epsilon").get<double>();
  ens.delta = j.at("delta").get<double>();
  ens.master_seed = j.at("master_seed").get<std::uint64_t>();
  for (const auto& seed : j.at("seeds")) {
    JlMatrix spec{ens.sketch_dim, ens.input_dim, seed.get<std::uint64_t>()};
    ens.matrices.push_back(spec.materialize());
    ens.specs.push_back(spec);
  }
  if (ens.matrices.empty()) throw IoError("ensemble meta has no seeds: " + path.string());
  return ens;
}

void save_trace_csv(const FwTrace& trace, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "t,eta,r,outcome,selected,gap_surrogate,objective\n";
  out.precision(17);
  for (const FwRecord& rec : trace.records)
    out << rec.t << ',' << rec.eta << ',' << rec.r << ',' << to_string(rec.outcome) << ','
        << rec.selected << ',' << rec.gap_surrogate << ',' << rec.objective << '\n';
}

void save_trace_summary_json(const FwTrace& trace, const std::filesystem::path& path) {
  nlohmann::json j;
  j["reason"] = to_string(trace.reason);
  j["iterations"] = trace.iterations;
  j["wall_seconds"] = trace.wall_seconds;
  j["counters"] = {{"dot_ops", trace.counters.dot_ops},
                   {"sketch_ops", trace.counters.sketch_ops},
                   {"hash_evals", trace.counters.hash_evals},
                   {"candidates_verified", trace.counters.candidates_verified},
                   {"oracle_queries", trace.counters.oracle_queries},
                   {"oracle_hits", trace.counters.oracle_hits},
                   {"oracle_fails", trace.counters.oracle_fails},
                   {"r_halvings", trace.counters.r_halvings}};
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << j.dump(2) << "\n";
}

void save_estimates_csv(const std::vector<AipeEstimate>& estimates,
                        const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing: " + path.string());
  out << "index,distance,weight\n";
  out.precision(17);
  for (const AipeEstimate& e : estimates)
    out << e.index << ',' << e.distance << ',' << e.weight << '\n';
}

}  // namespace fwmips
