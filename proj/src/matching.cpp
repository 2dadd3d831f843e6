#include "eyectl/matching.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>

#include "eyectl/error.hpp"

namespace eyectl {

namespace {

void check_widths(const DescriptorMatrix& a, const DescriptorMatrix& b) {
  if (a.bits() != b.bits() && !a.empty() && !b.empty()) {
    throw WidthMismatch("descriptor widths differ: " + std::to_string(a.bits()) + " vs " + std::to_string(b.bits()));
  }
}

/// Inserts `m` into a row kept sorted by (distance, train_idx) and capped at k entries.
void insert_top_k(std::vector<MatchPair>& row, const MatchPair& m, std::size_t k) {
  if (row.size() == k && (m.distance > row.back().distance ||
                          (m.distance == row.back().distance && m.train_idx > row.back().train_idx))) {
    return;
  }
  auto pos = std::upper_bound(row.begin(), row.end(), m, [](const MatchPair& x, const MatchPair& y) {
    return x.distance != y.distance ? x.distance < y.distance : x.train_idx < y.train_idx;
  });
  row.insert(pos, m);
  if (row.size() > k) row.pop_back();
}

}  // namespace

int hamming(std::span<const std::uint8_t> a, std::span<const std::uint8_t> b) {
  const std::size_t n = std::min(a.size(), b.size());
  int d = 0;
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    std::uint64_t x, y;
    std::memcpy(&x, a.data() + i, 8);
    std::memcpy(&y, b.data() + i, 8);
    d += std::popcount(x ^ y);
  }
  for (; i < n; ++i) d += std::popcount(static_cast<unsigned>(a[i] ^ b[i]));
  return d;
}

KnnResult knn_bruteforce(const DescriptorMatrix& query, const DescriptorMatrix& train, int k) {
  check_widths(query, train);
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const std::size_t kk = static_cast<std::size_t>(k);
  KnnResult out(query.rows());
  for (std::size_t q = 0; q < query.rows(); ++q) {
    auto& row = out[q];
    row.reserve(kk + 1);
    const auto qr = query.row(q);
    for (std::size_t t = 0; t < train.rows(); ++t) insert_top_k(row, {q, t, hamming(qr, train.row(t))}, kk);
  }
  return out;
}

KnnResult knn_bruteforce(const FeatureSet& query, const FeatureSet& train, int k) {
  return knn_bruteforce(query.descriptors, train.descriptors, k);
}

LshIndex::LshIndex(const DescriptorMatrix& train, std::uint64_t seed, LshParams params)
    : train_(train), params_(params) {
  const int bits = train.bits();
  std::mt19937_64 rng(seed);
  bit_positions_.resize(params_.tables);
  buckets_.resize(params_.tables);
  std::vector<int> all(bits);
  for (int i = 0; i < bits; ++i) all[i] = i;
  for (int t = 0; t < params_.tables && bits > 0; ++t) {
    // Partial Fisher-Yates with raw engine output keeps the draw portable across standard libraries.
    for (int i = 0; i < params_.key_bits && i < bits; ++i) {
      const int j = i + static_cast<int>(rng() % static_cast<std::uint64_t>(bits - i));
      std::swap(all[i], all[j]);
    }
    bit_positions_[t].assign(all.begin(), all.begin() + std::min(params_.key_bits, bits));
    auto& b = buckets_[t];
    b.reserve(train.rows());
    for (std::size_t r = 0; r < train.rows(); ++r) b.emplace_back(key(train.row(r), t), static_cast<std::uint32_t>(r));
    std::sort(b.begin(), b.end());
  }
  const int kb = std::min(params_.key_bits, bits);
  probe_masks_.push_back(0);
  if (params_.probe_flips >= 1) {
    for (int i = 0; i < kb; ++i) probe_masks_.push_back(1u << i);
  }
  if (params_.probe_flips >= 2) {
    for (int i = 0; i < kb; ++i)
      for (int j = i + 1; j < kb; ++j) probe_masks_.push_back((1u << i) | (1u << j));
  }
}

std::uint32_t LshIndex::key(std::span<const std::uint8_t> row, std::size_t table) const {
  std::uint32_t k = 0;
  const auto& pos = bit_positions_[table];
  for (std::size_t i = 0; i < pos.size(); ++i) {
    const int p = pos[i];
    k |= static_cast<std::uint32_t>((row[p >> 3] >> (p & 7)) & 1u) << i;
  }
  return k;
}

KnnResult LshIndex::knn(const DescriptorMatrix& query, int k) const {
  check_widths(query, train_);
  if (k < 1) throw std::invalid_argument("k must be at least 1");
  const std::size_t kk = static_cast<std::size_t>(k);
  KnnResult out(query.rows());
  if (train_.rows() == 0) return out;
  std::vector<std::size_t> seen(train_.rows(), 0);
  for (std::size_t q = 0; q < query.rows(); ++q) {
    const auto qr = query.row(q);
    auto& row = out[q];
    const std::size_t stamp = q + 1;
    for (std::size_t t = 0; t < bit_positions_.size(); ++t) {
      const std::uint32_t base = key(qr, t);
      const auto& b = buckets_[t];
      for (std::uint32_t mask : probe_masks_) {
        const std::uint32_t probe = base ^ mask;
        auto it = std::lower_bound(b.begin(), b.end(), std::pair<std::uint32_t, std::uint32_t>{probe, 0});
        for (; it != b.end() && it->first == probe; ++it) {
          if (seen[it->second] == stamp) continue;
          seen[it->second] = stamp;
          insert_top_k(row, {q, it->second, hamming(qr, train_.row(it->second))}, kk);
        }
      }
    }
  }
  return out;
}

KnnResult knn_approx(const DescriptorMatrix& query, const DescriptorMatrix& train, int k, std::uint64_t seed) {
  check_widths(query, train);
  if (train.empty()) return KnnResult(query.rows());
  const LshIndex index(train, seed);
  return index.knn(query, k);
}

KnnResult knn_approx(const FeatureSet& query, const FeatureSet& train, int k, std::uint64_t seed) {
  return knn_approx(query.descriptors, train.descriptors, k, seed);
}

std::vector<MatchPair> ratio_filter(const KnnResult& knn, double ratio) {
  std::vector<MatchPair> out;
  for (const auto& row : knn) {
    if (row.size() < 2) continue;
    if (static_cast<double>(row[0].distance) < ratio * static_cast<double>(row[1].distance)) out.push_back(row[0]);
  }
  return out;
}

std::vector<MatchPair> match_and_filter(const FeatureSet& a, const FeatureSet& b, const PipelineConfig& cfg) {
  if (a.descriptors.empty() || b.descriptors.empty()) {
    check_widths(a.descriptors, b.descriptors);
    return {};
  }
  const KnnResult knn = cfg.matcher == MatcherKind::BruteForce ? knn_bruteforce(a, b, 2) : knn_approx(a, b, 2, cfg.seed);
  return ratio_filter(knn, cfg.ratio);
}

void write_matches_csv(const std::filesystem::path& path, std::span<const MatchPair> matches) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "query_idx,train_idx,distance\n";
  for (const auto& m : matches) out << m.query_idx << ',' << m.train_idx << ',' << m.distance << '\n';
}

}  // namespace eyectl
