// vaemm/embeddings.cpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#include "vaemm/embeddings.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <vector>

#include "vaemm/common.hpp"

namespace vaemm {

VisualEmbeddings load_embeddings_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings file: " + path);
  std::vector<std::vector<double>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw IoError(path + ": bad CSV value '" + cell + "' at row " +
                      std::to_string(rows.size() + 1));
      }
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path + ": ragged CSV row " + std::to_string(rows.size() + 1));
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError(path + ": empty embeddings file");
  VisualEmbeddings m(static_cast<Eigen::Index>(rows.size()),
                     static_cast<Eigen::Index>(rows.front().size()));
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j)
      m(i, j) = rows[static_cast<size_t>(i)][static_cast<size_t>(j)];
  return m;
}

void save_embeddings_csv(const std::string& path, const VisualEmbeddings& embeddings) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open embeddings file for writing: " + path);
  char buf[40];
  for (Eigen::Index i = 0; i < embeddings.rows(); ++i) {
    for (Eigen::Index j = 0; j < embeddings.cols(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.17g", embeddings(i, j));
      out << (j ? "," : "") << buf;
    }
    out << "\n";
  }
  if (!out) throw IoError("failed writing embeddings file: " + path);
}

VisualEmbeddings load_embeddings_bin(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open embeddings file: " + path);
  std::uint32_t n = 0, m = 0;
  in.read(reinterpret_cast<char*>(&n), 4);
  in.read(reinterpret_cast<char*>(&m), 4);
  if (!in || n == 0 || m == 0) throw IoError(path + ": bad embeddings header");
  VisualEmbeddings out(n, m);
  std::vector<double> row(m);
  for (std::uint32_t i = 0; i < n; ++i) {
    in.read(reinterpret_cast<char*>(row.data()), static_cast<std::streamsize>(8 * m));
    if (!in) throw IoError(path + ": truncated embeddings data");
    for (std::uint32_t j = 0; j < m; ++j) out(i, j) = row[j];
  }
  return out;
}

void save_embeddings_bin(const std::string& path, const VisualEmbeddings& embeddings) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open embeddings file for writing: " + path);
  const auto n = static_cast<std::uint32_t>(embeddings.rows());
  const auto m = static_cast<std::uint32_t>(embeddings.cols());
  out.write(reinterpret_cast<const char*>(&n), 4);
  out.write(reinterpret_cast<const char*>(&m), 4);
  for (std::uint32_t i = 0; i < n; ++i)
    for (std::uint32_t j = 0; j < m; ++j) {
      const double x = embeddings(i, j);
      out.write(reinterpret_cast<const char*>(&x), 8);
    }
  if (!out) throw IoError("failed writing embeddings file: " + path);
}

VisualEmbeddings load_embeddings(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0
             ? load_embeddings_csv(path)
             : load_embeddings_bin(path);
}

VisualEmbeddings align_embeddings(const VisualEmbeddings& embeddings, Eigen::Index n_frames) {
  const Eigen::Index n = embeddings.rows();
  if (n == n_frames) return embeddings;
  require(std::abs(n - n_frames) <= 2,
          "embeddings: " + std::to_string(n) + " rows cannot be aligned to " +
              std::to_string(n_frames) + " frames (off by more than 2)");
  VisualEmbeddings aligned(n_frames, embeddings.cols());
  for (Eigen::Index i = 0; i < n_frames; ++i) aligned.row(i) = embeddings.row(std::min(i, n - 1));
  return aligned;
}

}  // namespace vaemm
