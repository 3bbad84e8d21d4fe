// vaemm/embeddings.hpp
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0

#ifndef VAEMM_EMBEDDINGS_HPP_
#define VAEMM_EMBEDDINGS_HPP_

#include <string>

#include <Eigen/Dense>

namespace vaemm {

/// One visual embedding row per STFT frame: an N x M real matrix.
using VisualEmbeddings = Eigen::MatrixXd;

/// Headerless CSV, N rows x M columns.
VisualEmbeddings load_embeddings_csv(const std::string& path);
void save_embeddings_csv(const std::string& path, const VisualEmbeddings& embeddings);

/// Binary: uint32 N, uint32 M (little-endian), then N*M little-endian
/// doubles in row-major order.
VisualEmbeddings load_embeddings_bin(const std::string& path);
void save_embeddings_bin(const std::string& path, const VisualEmbeddings& embeddings);

/// Dispatches on extension: ".csv" for text, anything else binary.
VisualEmbeddings load_embeddings(const std::string& path);

/// Repeats or truncates the last row when the count is off by at most two
/// frames; larger disagreements are an error.
VisualEmbeddings align_embeddings(const VisualEmbeddings& embeddings, Eigen::Index n_frames);

}  // namespace vaemm

#endif  // VAEMM_EMBEDDINGS_HPP_
