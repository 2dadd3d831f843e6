#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "eyectl/config.hpp"
#include "eyectl/features.hpp"

namespace eyectl {

struct MatchPair {
  std::size_t query_idx = 0;
  std::size_t train_idx = 0;
  int distance = 0;  // Hamming bits

  friend bool operator==(const MatchPair&, const MatchPair&) = default;
};

/// One row per query descriptor, each holding up to k pairs sorted by ascending distance.
using KnnResult = std::vector<std::vector<MatchPair>>;

/// Hamming distance over equal-length byte rows.
int hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b);

/// Exact k nearest neighbours by Hamming distance; equal distances keep the lower train index.
/// Throws WidthMismatch when descriptor widths differ.
KnnResult knn_bruteforce(const DescriptorMatrix& query, const DescriptorMatrix& train, int k = 2);
KnnResult knn_bruteforce(const FeatureSet& query, const FeatureSet& train, int k = 2);

struct LshParams {
  int tables = 12;
  int key_bits = 20;
  int probe_flips = 2;  // multi-probe: visit every bucket within this many key-bit flips
};

/// Multi-table bit-sampling LSH over binary descriptors. Immutable once built; queries are
/// safe from concurrent readers.
class LshIndex {
 public:
  LshIndex(const DescriptorMatrix& train, std::uint64_t seed, LshParams params = {});

  /// Candidates ranked by exact distance; at most k per row.
  KnnResult knn(const DescriptorMatrix& query, int k) const;

 private:
  std::uint32_t key(std::span<const std::uint8_t> row, std::size_t table) const;

  const DescriptorMatrix& train_;
  LshParams params_;
  std::vector<std::vector<int>> bit_positions_;                            // per table
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> buckets_;  // sorted (key, row)
  std::vector<std::uint32_t> probe_masks_;
};

/// Approximate k nearest neighbours through LshIndex. Deterministic for a given seed.
KnnResult knn_approx(const DescriptorMatrix& query, const DescriptorMatrix& train, int k, std::uint64_t seed);
KnnResult knn_approx(const FeatureSet& query, const FeatureSet& train, int k, std::uint64_t seed);

/// Keeps the best pair of every row with d1 < ratio * d2, in query order. Rows with fewer
/// than two neighbours are dropped.
std::vector<MatchPair> ratio_filter(const KnnResult& knn, double ratio);

/// 2-NN with the configured matcher followed by ratio_filter(cfg.ratio).
std::vector<MatchPair> match_and_filter(const FeatureSet& a, const FeatureSet& b, const PipelineConfig& cfg);

/// CSV `query_idx,train_idx,distance` with a header row.
void write_matches_csv(const std::filesystem::path& path, std::span<const MatchPair> matches);

}  // namespace eyectl
