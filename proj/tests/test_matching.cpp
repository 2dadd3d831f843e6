#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>
#include <random>

#include "eyectl/error.hpp"
#include "eyectl/image.hpp"
#include "eyectl/matching.hpp"
#include "eyectl/synth.hpp"
#include "test_util.hpp"

namespace eyectl {
namespace {

using testing::random_descriptors;
using testing::slow_hamming;

/// Exhaustive scan sorted by (distance, train index), truncated to k.
KnnResult oracle_knn(const DescriptorMatrix& q, const DescriptorMatrix& t, int k) {
  KnnResult out(q.rows());
  for (std::size_t i = 0; i < q.rows(); ++i) {
    std::vector<MatchPair> all;
    for (std::size_t j = 0; j < t.rows(); ++j) all.push_back({i, j, slow_hamming(q, i, t, j)});
    std::sort(all.begin(), all.end(), [](const MatchPair& a, const MatchPair& b) {
      return a.distance != b.distance ? a.distance < b.distance : a.train_idx < b.train_idx;
    });
    all.resize(std::min<std::size_t>(all.size(), static_cast<std::size_t>(k)));
    out[i] = all;
  }
  return out;
}

/// Random rows with d1 <= d2, each row index as its own query.
KnnResult random_rows(std::size_t n, std::mt19937_64& rng) {
  KnnResult rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    const int d1 = static_cast<int>(rng() % 200);
    const int d2 = d1 + static_cast<int>(rng() % 120);
    rows[i] = {{i, rng() % 50, d1}, {i, rng() % 50, d2}};
    if (rng() % 20 == 0) rows[i].pop_back();
  }
  return rows;
}

FeatureSet with_descriptors(DescriptorMatrix d) {
  FeatureSet fs;
  fs.keypoints.resize(d.rows());
  fs.descriptors = std::move(d);
  return fs;
}

TEST(Hamming, CountsDifferingBits) {
  const std::vector<std::uint8_t> a = {0x00, 0xff, 0x0f}, b = {0x01, 0x7f, 0xf0};
  EXPECT_EQ(hamming(a, b), 1 + 1 + 8);
  std::mt19937_64 rng(1);
  const auto m = random_descriptors(50, 488, rng);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t j = 0; j < 50; ++j) ASSERT_EQ(hamming(m.row(i), m.row(j)), slow_hamming(m, i, m, j));
}

TEST(BruteForce, IdenticalDescriptorHasDistanceZero) {
  std::mt19937_64 rng(2);
  const auto train = random_descriptors(40, 256, rng);
  const auto query = train.select(std::vector<std::size_t>{17});
  const auto knn = knn_bruteforce(query, train, 2);
  ASSERT_EQ(knn[0].size(), 2u);
  EXPECT_EQ(knn[0][0].train_idx, 17u);
  EXPECT_EQ(knn[0][0].distance, 0);
}

TEST(BruteForce, SmallTrainSetTruncates) {
  std::mt19937_64 rng(3);
  const auto train = random_descriptors(1, 256, rng), query = random_descriptors(5, 256, rng);
  for (const auto& row : knn_bruteforce(query, train, 2)) EXPECT_EQ(row.size(), 1u);
}

TEST(BruteForce, EqualsExhaustiveOracle) {
  std::mt19937_64 rng(4);
  for (int bits : {256, 486, 488}) {
    const auto q = random_descriptors(200, bits, rng), t = random_descriptors(200, bits, rng);
    for (int k : {1, 2, 5}) EXPECT_EQ(knn_bruteforce(q, t, k), oracle_knn(q, t, k)) << bits << " bits, k=" << k;
  }
}

TEST(BruteForce, TiesKeepTheLowerTrainIndex) {
  std::mt19937_64 rng(5);
  auto t = random_descriptors(3, 256, rng);
  t.set_row(2, t.row(0));
  const auto q = t.select(std::vector<std::size_t>{0});
  const auto knn = knn_bruteforce(q, t, 2);
  EXPECT_EQ(knn[0][0].train_idx, 0u);
  EXPECT_EQ(knn[0][1].train_idx, 2u);
}

TEST(BruteForce, WidthMismatchThrows) {
  std::mt19937_64 rng(6);
  const auto a = random_descriptors(3, 256, rng), b = random_descriptors(3, 486, rng);
  EXPECT_THROW(knn_bruteforce(a, b, 2), WidthMismatch);
  EXPECT_THROW(knn_approx(a, b, 2, 0), WidthMismatch);
  EXPECT_THROW(match_and_filter(with_descriptors(a), with_descriptors(b), PipelineConfig{}), WidthMismatch);
}

TEST(Approximate, SelfRetrieval) {
  std::mt19937_64 rng(7);
  const auto t = random_descriptors(1000, 486, rng);
  const auto knn = knn_approx(t, t, 2, 99);
  std::size_t self = 0;
  for (std::size_t i = 0; i < knn.size(); ++i) self += !knn[i].empty() && knn[i][0].train_idx == i && knn[i][0].distance == 0;
  EXPECT_GE(self, 990u);
}

TEST(Approximate, EmptyTrainGivesEmptyRows) {
  std::mt19937_64 rng(8);
  const auto q = random_descriptors(4, 486, rng);
  for (const auto& row : knn_approx(q, DescriptorMatrix(0, 486), 2, 1)) EXPECT_TRUE(row.empty());
}

TEST(Approximate, DeterministicForASeed) {
  std::mt19937_64 rng(9);
  const auto q = random_descriptors(300, 256, rng), t = random_descriptors(600, 256, rng);
  EXPECT_EQ(knn_approx(q, t, 2, 5), knn_approx(q, t, 2, 5));
}

TEST(Approximate, CandidatesCarryExactDistances) {
  std::mt19937_64 rng(10);
  const auto q = random_descriptors(100, 486, rng), t = random_descriptors(400, 486, rng);
  for (const auto& row : knn_approx(q, t, 3, 2)) {
    EXPECT_LE(row.size(), 3u);
    for (std::size_t j = 0; j < row.size(); ++j) {
      EXPECT_EQ(row[j].distance, slow_hamming(q, row[j].query_idx, t, row[j].train_idx));
      if (j) EXPECT_LE(row[j - 1].distance, row[j].distance);
    }
  }
}

TEST(Approximate, RecallOnPerturbedAkazeDescriptors) {
  testing::TempDir dir("corpus");
  generate_corpus(dir.path(), 3);
  DescriptorMatrix train(0, kAkazeDescriptorBits), query(0, kAkazeDescriptorBits);
  std::mt19937_64 rng(11);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (const auto& name : {"robot_indoor.png", "robot_outdoor.png", "cup_indoor.png", "bottle_outdoor.png"}) {
    const auto img = load_gray(dir / name);
    auto noisy = img;
    for (auto& p : noisy.data) p = static_cast<std::uint8_t>(std::clamp(p + noise(rng), 0.0, 255.0));
    const auto a = detect_akaze(img), b = detect_akaze(noisy);
    for (std::size_t i = 0; i < a.descriptors.rows() && train.rows() < 1000; ++i) train.push_back(a.descriptors.row(i));
    for (std::size_t i = 0; i < b.descriptors.rows() && query.rows() < 1000; ++i) query.push_back(b.descriptors.row(i));
  }
  ASSERT_EQ(train.rows(), 1000u);
  ASSERT_GE(query.rows(), 500u);
  const auto exact = knn_bruteforce(query, train, 1);
  const auto approx = knn_approx(query, train, 1, 0);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < exact.size(); ++i) hits += !approx[i].empty() && approx[i][0].distance == exact[i][0].distance;
  EXPECT_GE(static_cast<double>(hits) / exact.size(), 0.9);
}

TEST(Ratio, ArithmeticExamples) {
  const KnnResult keep = {{{0, 0, 10}, {0, 1, 20}}};
  const KnnResult drop = {{{0, 0, 16}, {0, 1, 20}}};
  EXPECT_EQ(ratio_filter(keep, 0.75).size(), 1u);
  EXPECT_TRUE(ratio_filter(drop, 0.75).empty());
  const KnnResult single = {{{0, 0, 1}}};
  EXPECT_TRUE(ratio_filter(single, 0.75).empty());
  const KnnResult zeros = {{{0, 0, 0}, {0, 1, 0}}};
  EXPECT_TRUE(ratio_filter(zeros, 1.0).empty());
}

TEST(Ratio, EqualsPerRowOracle) {
  std::mt19937_64 rng(12);
  const auto rows = random_rows(100, rng);
  std::vector<MatchPair> expect;
  for (const auto& r : rows)
    if (r.size() >= 2 && r[0].distance < 0.75 * r[1].distance) expect.push_back(r[0]);
  EXPECT_EQ(ratio_filter(rows, 0.75), expect);
}

TEST(Ratio, SubsetAndMonotone) {
  std::mt19937_64 rng(13);
  const auto rows = random_rows(10000, rng);
  auto contains = [](const std::vector<MatchPair>& big, const MatchPair& m) {
    return std::binary_search(big.begin(), big.end(), m,
                              [](const MatchPair& a, const MatchPair& b) { return a.query_idx < b.query_idx; });
  };
  std::vector<MatchPair> prev;
  for (double r : {0.6, 0.65, 0.75, 1.0}) {
    const auto cur = ratio_filter(rows, r);
    for (const auto& m : cur) ASSERT_EQ(rows[m.query_idx].front(), m);
    for (const auto& m : prev) ASSERT_TRUE(contains(cur, m));
    prev = cur;
  }
}

TEST(MatchAndFilter, SelfMatchSurvives) {
  testing::TempDir dir("self");
  generate_corpus(dir.path(), 4);
  const auto fs = detect_akaze(load_gray(dir / "robot_indoor.png"));
  ASSERT_GE(fs.size(), 100u);
  for (MatcherKind m : {MatcherKind::BruteForce, MatcherKind::Approximate}) {
    PipelineConfig cfg;
    cfg.matcher = m;
    const auto kept = match_and_filter(fs, fs, cfg);
    std::size_t exact = 0;
    for (const auto& p : kept) exact += p.distance == 0 && p.query_idx == p.train_idx;
    EXPECT_GE(static_cast<double>(exact), 0.9 * fs.size());
  }
}

TEST(MatchAndFilter, EmptySetsGiveNothing) {
  EXPECT_TRUE(match_and_filter(FeatureSet{}, FeatureSet{}, PipelineConfig{}).empty());
  std::mt19937_64 rng(14);
  EXPECT_TRUE(match_and_filter(with_descriptors(random_descriptors(5, 486, rng)), FeatureSet{}, PipelineConfig{}).empty());
}

TEST(MatchAndFilter, ApproximateCountTracksBruteForce) {
  testing::TempDir dir("pair");
  generate_corpus(dir.path(), 5);
  std::ifstream pairs(dir / "pairs.csv");
  std::string line;
  std::getline(pairs, line);
  while (std::getline(pairs, line)) {
    const auto comma = line.find(',');
    const auto a = detect_akaze(load_gray(dir / line.substr(0, comma)));
    const auto b = detect_akaze(load_gray(dir / line.substr(comma + 1)));
    PipelineConfig bf, ap;
    bf.matcher = MatcherKind::BruteForce;
    ap.matcher = MatcherKind::Approximate;
    const double ref = static_cast<double>(match_and_filter(a, b, bf).size());
    const double got = static_cast<double>(match_and_filter(a, b, ap).size());
    EXPECT_LE(std::fabs(got - ref), 0.2 * ref + 1e-9) << line << ": " << got << " vs " << ref;
  }
}

TEST(MatchAndFilter, MutualBestPairsAreSymmetric) {
  std::mt19937_64 rng(15);
  const auto a = random_descriptors(150, 256, rng), b = random_descriptors(150, 256, rng);
  const auto ab = knn_bruteforce(a, b, 1), ba = knn_bruteforce(b, a, 1);
  for (std::size_t i = 0; i < ab.size(); ++i) {
    const auto& m = ab[i][0];
    if (ba[m.train_idx][0].train_idx == i) EXPECT_EQ(ba[m.train_idx][0].distance, m.distance);
  }
}

TEST(MatchAndFilter, CsvDump) {
  testing::TempDir dir("csv");
  const std::vector<MatchPair> m = {{0, 3, 12}, {4, 1, 0}};
  write_matches_csv(dir / "m.csv", m);
  std::ifstream in(dir / "m.csv");
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), "query_idx,train_idx,distance\n0,3,12\n4,1,0\n");
}

}  // namespace
}  // namespace eyectl
