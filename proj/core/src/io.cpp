#include "cpfm/io.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "cpfm/rng.hpp"

namespace cpfm::io {
namespace {

using nlohmann::json;

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& s, int line, int column) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used])))
      ++used;
    if (used != s.size())
      throw ParseError("trailing characters in numeric field", line, column);
    return v;
  } catch (const ParseError&) {
    throw;
  } catch (const std::exception&) {
    throw ParseError("cannot parse '" + s + "' as a number", line, column);
  }
}

std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return in;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  return out;
}

void require(bool ok, const std::string& field) {
  if (!ok) throw ValidationError("config field '" + field + "' is out of range");
}

}  // namespace

TargetDist target_dist_from_string(const std::string& s) {
  if (s == "gaussian") return TargetDist::gaussian;
  if (s == "uniform_square" || s == "uniform-square")
    return TargetDist::uniform_square;
  if (s == "unit_circle" || s == "circle" || s == "unit-circle")
    return TargetDist::unit_circle;
  throw ValidationError("unknown target distribution '" + s + "'");
}

std::string to_string(TargetDist d) {
  switch (d) {
    case TargetDist::gaussian: return "gaussian";
    case TargetDist::uniform_square: return "uniform_square";
    case TargetDist::unit_circle: return "unit_circle";
  }
  return "gaussian";
}

void RunConfig::validate() const {
  require(epsilon_init > 0.0, "epsilon_init");
  require(tau > 0.0, "tau");
  require(delta > 0.0, "delta");
  require(eta > 0.0 && eta <= 1.0, "eta");
  require(alpha > 0.0 && alpha < 1.0, "alpha");
  require(mixture_weight > 0.0 && mixture_weight < 1.0, "mixture_weight");
  require(knn_k >= 1, "knn_k");
  require(steps_T >= 1, "steps_T");
  require(lr > 0.0, "lr");
  require(epochs >= 1, "epochs");
  require(batch >= 1, "batch");
  require(max_ot_points >= 2, "max_ot_points");
  require(d_y >= 1, "d_y");
  require(net_width >= 1, "net_width");
  require(net_depth >= 1, "net_depth");
}

RunConfig load_config(const std::filesystem::path& path) {
  auto in = open_in(path);
  json j;
  try {
    in >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1, 1);
  }
  RunConfig cfg;
  cfg.epsilon_init = j.value("epsilon_init", cfg.epsilon_init);
  cfg.tau = j.value("tau", cfg.tau);
  cfg.delta = j.value("delta", cfg.epsilon_init / 1024.0);
  cfg.eta = j.value("eta", cfg.eta);
  cfg.alpha = j.value("alpha", cfg.alpha);
  cfg.mixture_weight = j.value("mixture_weight", cfg.mixture_weight);
  cfg.knn_k = j.value("knn_k", cfg.knn_k);
  cfg.steps_T = j.value("steps_T", cfg.steps_T);
  cfg.lr = j.value("lr", cfg.lr);
  cfg.epochs = j.value("epochs", cfg.epochs);
  cfg.batch = j.value("batch", cfg.batch);
  cfg.seed = j.value("seed", cfg.seed);
  cfg.max_ot_points = j.value("max_ot_points", cfg.max_ot_points);
  if (j.contains("target_dist"))
    cfg.target_dist = target_dist_from_string(j["target_dist"].get<std::string>());
  cfg.d_y = j.value("d_y", cfg.d_y);
  cfg.deterministic = j.value("deterministic", cfg.deterministic);
  cfg.net_width = j.value("net_width", cfg.net_width);
  cfg.net_depth = j.value("net_depth", cfg.net_depth);
  cfg.validate();
  return cfg;
}

void save_config(const std::filesystem::path& path, const RunConfig& cfg) {
  json j{{"epsilon_init", cfg.epsilon_init},
         {"tau", cfg.tau},
         {"delta", cfg.delta},
         {"eta", cfg.eta},
         {"alpha", cfg.alpha},
         {"mixture_weight", cfg.mixture_weight},
         {"knn_k", cfg.knn_k},
         {"steps_T", cfg.steps_T},
         {"lr", cfg.lr},
         {"epochs", cfg.epochs},
         {"batch", cfg.batch},
         {"seed", cfg.seed},
         {"max_ot_points", cfg.max_ot_points},
         {"target_dist", to_string(cfg.target_dist)},
         {"d_y", cfg.d_y},
         {"deterministic", cfg.deterministic},
         {"net_width", cfg.net_width},
         {"net_depth", cfg.net_depth}};
  open_out(path) << j.dump(2) << '\n';
}

Dataset load_dataset(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty dataset file", 1, 1);
  const auto header = split_line(line);

  std::vector<int> feature_cols;
  int label_col = -1, property_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    const std::string& h = header[c];
    if (h == "label") label_col = static_cast<int>(c);
    else if (h == "property") property_col = static_cast<int>(c);
    else if (!h.empty() && h[0] == 'f') feature_cols.push_back(static_cast<int>(c));
    else throw ParseError("unexpected column '" + h + "'", 1, static_cast<int>(c) + 1);
  }
  if (feature_cols.empty())
    throw ParseError("dataset needs at least one feature column", 1, 1);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::vector<double> properties;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw ParseError("expected " + std::to_string(header.size()) +
                           " fields, found " + std::to_string(fields.size()),
                       line_no, 1);
    std::vector<double> feat(feature_cols.size());
    for (std::size_t k = 0; k < feature_cols.size(); ++k)
      feat[k] = parse_number(fields[feature_cols[k]], line_no,
                             feature_cols[k] + 1);
    rows.push_back(std::move(feat));
    if (label_col >= 0) {
      const double v = parse_number(fields[label_col], line_no, label_col + 1);
      if (v != std::floor(v))
        throw ParseError("label must be an integer", line_no, label_col + 1);
      labels.push_back(static_cast<int>(v));
    }
    if (property_col >= 0)
      properties.push_back(
          parse_number(fields[property_col], line_no, property_col + 1));
  }
  if (rows.empty()) throw ParseError("dataset has no samples", line_no, 1);

  Dataset ds;
  ds.features.resize(static_cast<Index>(rows.size()),
                     static_cast<Index>(feature_cols.size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      ds.features(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  if (label_col >= 0) {
    IntVector l(static_cast<Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i)
      l[static_cast<Index>(i)] = labels[i];
    ds.labels = std::move(l);
  }
  if (property_col >= 0) {
    Vector p(static_cast<Index>(properties.size()));
    for (std::size_t i = 0; i < properties.size(); ++i)
      p[static_cast<Index>(i)] = properties[i];
    ds.properties = std::move(p);
  }
  ds.validate();
  return ds;
}

void save_dataset(const std::filesystem::path& path, const Dataset& ds) {
  auto out = open_out(path);
  for (Index j = 0; j < ds.dim(); ++j) out << (j ? ",f" : "f") << j;
  if (ds.labels) out << ",label";
  if (ds.properties) out << ",property";
  out << '\n';
  for (Index i = 0; i < ds.size(); ++i) {
    for (Index j = 0; j < ds.dim(); ++j) {
      if (j) out << ',';
      out << format_value(ds.features(i, j));
    }
    if (ds.labels) out << ',' << (*ds.labels)[i];
    if (ds.properties) out << ',' << format_value((*ds.properties)[i]);
    out << '\n';
  }
}

FingerprintData load_fingerprints(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("empty fingerprint file", 1, 1);
  const auto header = split_line(line);
  std::vector<int> bit_cols;
  int property_col = -1;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == "property") property_col = static_cast<int>(c);
    else if (!header[c].empty() && header[c][0] == 'b')
      bit_cols.push_back(static_cast<int>(c));
    else
      throw ParseError("unexpected column '" + header[c] + "'", 1,
                       static_cast<int>(c) + 1);
  }
  if (bit_cols.empty())
    throw ParseError("fingerprint file needs b* columns", 1, 1);

  std::vector<std::vector<double>> bits;
  std::vector<double> props;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    if (fields.size() != header.size())
      throw ParseError("field count mismatch", line_no, 1);
    std::vector<double> row(bit_cols.size());
    for (std::size_t k = 0; k < bit_cols.size(); ++k) {
      const double v = parse_number(fields[bit_cols[k]], line_no, bit_cols[k] + 1);
      if (v != 0.0 && v != 1.0)
        throw ParseError("fingerprint bits must be 0 or 1", line_no,
                         bit_cols[k] + 1);
      row[k] = v;
    }
    bits.push_back(std::move(row));
    if (property_col >= 0)
      props.push_back(parse_number(fields[property_col], line_no, property_col + 1));
  }
  if (bits.empty()) throw ParseError("fingerprint file has no rows", line_no, 1);

  FingerprintData fp;
  fp.bits.resize(static_cast<Index>(bits.size()),
                 static_cast<Index>(bit_cols.size()));
  for (std::size_t i = 0; i < bits.size(); ++i)
    for (std::size_t j = 0; j < bits[i].size(); ++j)
      fp.bits(static_cast<Index>(i), static_cast<Index>(j)) = bits[i][j];
  if (property_col >= 0) {
    fp.properties.resize(static_cast<Index>(props.size()));
    for (std::size_t i = 0; i < props.size(); ++i)
      fp.properties[static_cast<Index>(i)] = props[i];
  } else {
    fp.properties = Vector::Zero(fp.bits.rows());
  }
  return fp;
}

void save_fingerprints(const std::filesystem::path& path,
                       const FingerprintData& fp) {
  auto out = open_out(path);
  for (Index j = 0; j < fp.bits.cols(); ++j) out << (j ? ",b" : "b") << j;
  out << ",property\n";
  for (Index i = 0; i < fp.bits.rows(); ++i) {
    for (Index j = 0; j < fp.bits.cols(); ++j) {
      if (j) out << ',';
      out << static_cast<int>(fp.bits(i, j));
    }
    out << ',' << format_value(fp.properties[i]) << '\n';
  }
}

Matrix load_matrix(const std::filesystem::path& path) {
  auto in = open_in(path);
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const auto fields = split_line(line);
    std::vector<double> row(fields.size());
    for (std::size_t k = 0; k < fields.size(); ++k)
      row[k] = parse_number(fields[k], line_no, static_cast<int>(k) + 1);
    if (!rows.empty() && row.size() != rows.front().size())
      throw ParseError("ragged matrix row", line_no, 1);
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw ParseError("matrix file is empty", 1, 1);
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j)
      m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

void save_matrix(const std::filesystem::path& path, const Matrix& m) {
  auto out = open_out(path);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_value(m(i, j));
    }
    out << '\n';
  }
}

void save_vector(const std::filesystem::path& path, const Vector& v) {
  save_matrix(path, v);
}

void save_factor(const std::filesystem::path& phi_path,
                 const std::filesystem::path& weights_path,
                 const std::filesystem::path& header_path,
                 const lowrank::GramFactor& f) {
  save_matrix(phi_path, f.phi);
  save_vector(weights_path, f.weights);
  json j{{"n", f.size()},      {"m", f.rank},
         {"eta", f.eta},       {"residual_trace", f.residual_trace},
         {"clipped_mass", f.clipped_mass}};
  open_out(header_path) << j.dump(2) << '\n';
}

lowrank::GramFactor load_factor(const std::filesystem::path& phi_path,
                                const std::filesystem::path& weights_path,
                                const std::filesystem::path& header_path) {
  lowrank::GramFactor f;
  f.phi = load_matrix(phi_path);
  const Matrix w = load_matrix(weights_path);
  f.weights = w.col(0);
  json j;
  try {
    open_in(header_path) >> j;
  } catch (const json::parse_error& e) {
    throw ParseError(e.what(), 1, 1);
  }
  f.rank = j.at("m").get<Index>();
  f.eta = j.at("eta").get<double>();
  f.residual_trace = j.at("residual_trace").get<double>();
  f.clipped_mass = j.at("clipped_mass").get<double>();
  if (f.phi.cols() != f.rank || f.weights.size() != f.phi.rows())
    throw ValidationError("factor files disagree with header");
  return f;
}

gwot::EmbeddingSet draw_target(TargetDist dist, Index n, int d_y,
                               std::uint64_t seed) {
  if (n < 1) throw ValidationError("need at least one target sample");
  if (d_y < 1) throw DimensionError("d_y must be positive");
  Rng rng(seed);
  Matrix y(n, d_y);
  switch (dist) {
    case TargetDist::gaussian:
      y = rng.normal_matrix(n, d_y);
      break;
    case TargetDist::uniform_square:
      for (Index i = 0; i < n; ++i)
        for (int j = 0; j < d_y; ++j) y(i, j) = rng.uniform(-1.0, 1.0);
      break;
    case TargetDist::unit_circle: {
      if (d_y != 2)
        throw DimensionError("unit_circle target requires d_y = 2");
      for (Index i = 0; i < n; ++i) {
        const double angle = rng.uniform(0.0, 2.0 * M_PI);
        y(i, 0) = std::cos(angle);
        y(i, 1) = std::sin(angle);
      }
      break;
    }
  }
  return gwot::EmbeddingSet::from_matrix(std::move(y));
}

Dataset make_synthetic(const MixtureSpec& spec) {
  if (spec.n < 1) throw ValidationError("need at least one sample");
  if (spec.classes < 1) throw ValidationError("need at least one class");
  if (spec.classes > spec.d_x)
    throw ValidationError("mixture needs classes <= d_x for equidistant centroids");
  Rng rng(spec.seed);

  // Random orthonormal directions scaled so centroids are pairwise
  // `separation` apart (within-class sigma is 1).
  Matrix dirs = rng.normal_matrix(spec.classes, spec.d_x);
  for (int c = 0; c < spec.classes; ++c) {
    for (int p = 0; p < c; ++p)
      dirs.row(c) -= dirs.row(c).dot(dirs.row(p)) * dirs.row(p);
    dirs.row(c).normalize();
  }
  const double scale = spec.classes > 1 ? spec.separation / std::sqrt(2.0) : 0.0;

  Dataset ds;
  ds.features.resize(spec.n, spec.d_x);
  IntVector labels(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    const int c = static_cast<int>(i % spec.classes);  // balanced
    labels[i] = c;
    ds.features.row(i) =
        scale * dirs.row(c) + rng.normal_vector(spec.d_x).transpose();
  }
  ds.labels = std::move(labels);
  return ds;
}

FingerprintData make_synthetic_molecules(const MoleculeSpec& spec) {
  if (spec.n < 1 || spec.bits < 1)
    throw ValidationError("molecule spec needs positive n and bits");
  Rng rng(spec.seed);
  FingerprintData fp;
  fp.bits = Matrix::Zero(spec.n, spec.bits);
  fp.properties.resize(spec.n);
  for (Index i = 0; i < spec.n; ++i) {
    for (int j = 0; j < spec.bits; ++j)
      fp.bits(i, j) = rng.bernoulli(0.3) ? 1.0 : 0.0;
    if (fp.bits.row(i).sum() == 0.0)
      fp.bits(i, static_cast<Index>(rng.below(spec.bits))) = 1.0;
    fp.properties[i] = std::abs(rng.normal()) * 2.0;  // Debye-like scale
  }
  return fp;
}

}  // namespace cpfm::io
