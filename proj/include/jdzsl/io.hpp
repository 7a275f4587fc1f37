/*
 * Copyright 2026 the jdzsl authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */
#pragma once

#include <jdzsl/data.hpp>
#include <jdzsl/eval.hpp>
#include <jdzsl/joint_dict.hpp>

#include <bit>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace jdzsl {

static_assert(std::endian::native == std::endian::little,
              "matrix and model files are little-endian");

/// 17 significant digits: round-trips an IEEE double exactly.
inline std::string format_double(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

namespace io_detail {

constexpr char kMatrixMagic[8] = {'J', 'D', 'Z', 'S', 'L', 'M', 'A', 'T'};
constexpr char kModelMagic[8] = {'J', 'D', 'Z', 'S', 'L', 'M', 'D', 'L'};

inline void write_matrix_stream(std::ostream& out, const Matrix& m) {
  out.write(kMatrixMagic, 8);
  const unsigned char header[4] = {1 /*version*/, 1 /*dtype f64*/, 0, 0};
  out.write(reinterpret_cast<const char*>(header), 4);
  const std::uint64_t rows = static_cast<std::uint64_t>(m.rows());
  const std::uint64_t cols = static_cast<std::uint64_t>(m.cols());
  out.write(reinterpret_cast<const char*>(&rows), 8);
  out.write(reinterpret_cast<const char*>(&cols), 8);
  // row-major in memory, row-major on disk
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double)) * m.size());
}

inline Matrix read_matrix_stream(std::istream& in, const std::string& what) {
  char magic[8];
  unsigned char header[4];
  std::uint64_t rows = 0, cols = 0;
  if (!in.read(magic, 8) || std::memcmp(magic, kMatrixMagic, 8) != 0)
    throw data_error(what + ": not a matrix file (bad magic)");
  if (!in.read(reinterpret_cast<char*>(header), 4))
    throw data_error(what + ": truncated header");
  if (header[0] != 1)
    throw data_error(what + ": unsupported version " +
                     std::to_string(header[0]));
  if (header[1] != 1)
    throw data_error(what + ": unsupported dtype " + std::to_string(header[1]));
  if (!in.read(reinterpret_cast<char*>(&rows), 8) ||
      !in.read(reinterpret_cast<char*>(&cols), 8))
    throw data_error(what + ": truncated header");

  Matrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  if (!in.read(reinterpret_cast<char*>(m.data()),
               static_cast<std::streamsize>(sizeof(double)) * m.size()))
    throw data_error(what + ": truncated payload");
  require_finite(m, what);
  return m;
}

inline std::ofstream open_out(const std::string& path, bool binary) {
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw data_error("cannot write " + path);
  return out;
}

inline std::ifstream open_in(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw data_error("cannot read " + path);
  return in;
}

}  // namespace io_detail

inline void write_matrix_raw(const std::string& path, const Matrix& m) {
  auto out = io_detail::open_out(path, true);
  io_detail::write_matrix_stream(out, m);
  if (!out) throw data_error("write failed: " + path);
}

inline Matrix read_matrix_raw(const std::string& path) {
  auto in = io_detail::open_in(path, true);
  return io_detail::read_matrix_stream(in, path);
}

inline void write_matrix_csv(const std::string& path, const Matrix& m) {
  auto out = io_detail::open_out(path, false);
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out << ',';
      out << format_double(m(i, j));
    }
    out << '\n';
  }
  if (!out) throw data_error("write failed: " + path);
}

inline Matrix read_matrix_csv(const std::string& path) {
  auto in = io_detail::open_in(path, false);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      char* end = nullptr;
      const double v = std::strtod(cell.c_str(), &end);
      if (end == cell.c_str())
        throw data_error(path + ": bad number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw data_error(path + ": ragged rows");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw data_error(path + ": empty csv");
  Matrix m(static_cast<Index>(rows.size()),
           static_cast<Index>(rows.front().size()));
  for (Index i = 0; i < m.rows(); ++i)
    for (Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  require_finite(m, path);
  return m;
}

/// Dispatch on extension: .csv reads/writes text, everything else raw.
inline bool is_csv_path(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0;
}

inline Matrix read_matrix(const std::string& path) {
  return is_csv_path(path) ? read_matrix_csv(path) : read_matrix_raw(path);
}

inline void write_matrix(const std::string& path, const Matrix& m) {
  if (is_csv_path(path))
    write_matrix_csv(path, m);
  else
    write_matrix_raw(path, m);
}

/// Newline-delimited integer class ids.
inline std::vector<int> read_labels(const std::string& path) {
  auto in = io_detail::open_in(path, false);
  std::vector<int> labels;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    char* end = nullptr;
    const long v = std::strtol(line.c_str(), &end, 10);
    if (end == line.c_str())
      throw data_error(path + ": bad class id '" + line + "'");
    labels.push_back(static_cast<int>(v));
  }
  return labels;
}

inline void write_labels(const std::string& path,
                         const std::vector<int>& labels) {
  auto out = io_detail::open_out(path, false);
  for (int v : labels) out << v << '\n';
  if (!out) throw data_error("write failed: " + path);
}

/// Model persistence: hyperparameters plus both dictionaries, bit-exact.
inline void save_model(const std::string& path, const JointDictionary& dict,
                       const HyperParams& params) {
  auto out = io_detail::open_out(path, true);
  out.write(io_detail::kModelMagic, 8);
  const unsigned char version = 1;
  out.write(reinterpret_cast<const char*>(&version), 1);

  auto put_f64 = [&](double v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  auto put_i64 = [&](std::int64_t v) {
    out.write(reinterpret_cast<const char*>(&v), 8);
  };
  put_f64(params.lambda);
  put_f64(params.gamma);
  put_f64(params.rho);
  put_f64(params.fista_tol);
  put_f64(params.aaw_step);
  put_f64(params.lp_alpha);
  put_f64(params.tsne_perplexity);
  put_i64(params.r);
  put_i64(params.outer_iters);
  put_i64(params.fista_max_iter);
  put_i64(params.aaw_max_iter);
  put_i64(params.knn_k);
  put_i64(params.tsne_iters);
  const std::uint64_t seed = params.seed;
  out.write(reinterpret_cast<const char*>(&seed), 8);

  io_detail::write_matrix_stream(out, dict.dx);
  io_detail::write_matrix_stream(out, dict.dz);
  if (!out) throw data_error("write failed: " + path);
}

inline std::pair<JointDictionary, HyperParams> load_model(
    const std::string& path) {
  auto in = io_detail::open_in(path, true);
  char magic[8];
  if (!in.read(magic, 8) ||
      std::memcmp(magic, io_detail::kModelMagic, 8) != 0)
    throw data_error(path + ": not a model file (bad magic)");
  unsigned char version = 0;
  if (!in.read(reinterpret_cast<char*>(&version), 1) || version != 1)
    throw data_error(path + ": unsupported model version");

  HyperParams params;
  auto get_f64 = [&](double& v) {
    if (!in.read(reinterpret_cast<char*>(&v), 8))
      throw data_error(path + ": truncated model");
  };
  auto get_i64 = [&](int& v) {
    std::int64_t raw = 0;
    if (!in.read(reinterpret_cast<char*>(&raw), 8))
      throw data_error(path + ": truncated model");
    v = static_cast<int>(raw);
  };
  get_f64(params.lambda);
  get_f64(params.gamma);
  get_f64(params.rho);
  get_f64(params.fista_tol);
  get_f64(params.aaw_step);
  get_f64(params.lp_alpha);
  get_f64(params.tsne_perplexity);
  get_i64(params.r);
  get_i64(params.outer_iters);
  get_i64(params.fista_max_iter);
  get_i64(params.aaw_max_iter);
  get_i64(params.knn_k);
  get_i64(params.tsne_iters);
  std::uint64_t seed = 0;
  if (!in.read(reinterpret_cast<char*>(&seed), 8))
    throw data_error(path + ": truncated model");
  params.seed = seed;

  JointDictionary dict;
  dict.dx = io_detail::read_matrix_stream(in, path + " (Dx)");
  dict.dz = io_detail::read_matrix_stream(in, path + " (Dz)");
  if (dict.dx.cols() != dict.dz.cols())
    throw data_error(path + ": dictionary atom counts disagree");
  return {std::move(dict), params};
}

/// Flat machine-readable report: one `key=value` per line, keys prefixed by
/// the mode name, doubles at full precision.
inline std::string render_report(
    const std::map<EvalMode, EvalReport>& reports) {
  std::ostringstream out;
  bool meta_written = false;
  for (const auto& [mode, report] : reports) {
    if (!meta_written) {
      out << "n_test=" << report.n_test << '\n';
      out << "seeds=";
      for (size_t i = 0; i < report.seeds_used.size(); ++i) {
        if (i) out << ',';
        out << report.seeds_used[i];
      }
      out << '\n';
      meta_written = true;
    }
    const std::string prefix = to_string(mode);
    for (const auto& [k, value] : report.hit_at)
      out << prefix << ".hit@" << k << '=' << format_double(value) << '\n';
    for (const auto& [k, value] : report.hit_at_std)
      out << prefix << ".hit@" << k << "_std=" << format_double(value)
          << '\n';
    for (const auto& [cls, value] : report.per_class_accuracy)
      out << prefix << ".class_acc[" << cls << "]=" << format_double(value)
          << '\n';
  }
  return out.str();
}

}  // namespace jdzsl
