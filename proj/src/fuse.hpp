// Copyright 2026 The Exp4Fuse Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "corpus.hpp"

namespace exp4fuse {

/// Parameters of the modified reciprocal rank fusion:
///
///   score(d) = sum over lists i containing d of (w_i + n(d) / bonus_divisor) / (k + rank_i(d))
///
/// where n(d) is the number of input lists that contain d. An empty weight
/// vector means every list has weight 1.
struct FusionConfig {
    double k = 60.0;
    std::vector<double> weights;
    double bonus_divisor = 10.0;
    std::size_t output_depth = 1000;

    /// Validates against the number of lists being fused.
    void validate(std::size_t list_count) const;
    double weight(std::size_t list) const { return weights.empty() ? 1.0 : weights[list]; }
};

inline constexpr const char* kFusedTag = "exp4fuse";

struct FusedEntry {
    std::string doc_id;
    double fr_score = 0.0;
    int n = 0;
    /// Rank in each input list, nullopt where the document is absent.
    std::vector<std::optional<int>> ranks;
};

/// Fused entries for one query in output order: fr_score desc, then n desc,
/// then doc_id asc. Scores within a relative 1e-12 of each other count as
/// tied and share the higher value. Truncated to config.output_depth.
std::vector<FusedEntry> fuse_entries(std::span<const RankedList> lists, const FusionConfig& config);

/// All lists must belong to the same query; individual lists may be empty.
RankedList fuse(std::span<const RankedList> lists, const FusionConfig& config);

/// Fuses whole runs query by query. A query missing from some run is fused
/// from the lists that are present (the missing run contributes an empty
/// list, keeping weights aligned with run positions).
Run fuse_runs(std::span<const Run> runs, const FusionConfig& config, unsigned threads = 1);

}  // namespace exp4fuse
