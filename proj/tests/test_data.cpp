#include <gtest/gtest.h>

#include <sys/resource.h>

#include <algorithm>
#include <random>
#include <sstream>

#include "support.hpp"
#include "zoprox/data.hpp"
#include "zoprox/error.hpp"

using namespace zoprox;

namespace {

const std::filesystem::path kFixtures = ZOPROX_FIXTURES;

Dataset parse_text(const std::string& text, ParseOptions opts = {}) {
  std::istringstream in(text);
  return parse_libsvm(in, opts);
}

std::string serialize(const Dataset& d) {
  std::ostringstream os;
  write_libsvm(os, d);
  return os.str();
}

// Hand-rolled generator: random sparse rows with strictly increasing indices and
// values drawn from a mix of scales (including subnormal-free tiny and huge ones).
Dataset random_dataset(std::mt19937_64& gen) {
  std::uniform_int_distribution<int> rows(1, 40);
  std::uniform_int_distribution<int> dim(1, 60);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_int_distribution<int> exponent(-30, 30);
  Dataset d;
  d.dim = static_cast<std::size_t>(dim(gen));
  const int n = rows(gen);
  for (int i = 0; i < n; ++i) {
    Row r;
    r.label = (gen() & 1) ? 1.0 : -1.0;
    for (std::uint32_t j = 1; j <= d.dim; ++j) {
      if (gen() % 4 == 0) r.features.push_back({j, unit(gen) * std::pow(10.0, exponent(gen))});
    }
    d.rows.push_back(std::move(r));
  }
  // The parser reports the largest index seen as the dimension.
  std::size_t max_index = 0;
  for (const Row& r : d.rows) {
    if (!r.features.empty()) max_index = std::max<std::size_t>(max_index, r.features.back().index);
  }
  d.dim = max_index;
  if (d.rows.front().label == d.rows.back().label) d.rows.back().label = -d.rows.front().label;
  return d;
}

}  // namespace

TEST(Parse, SingleLine) {
  const Dataset d = parse_text("+1 1:0.5 3:-2\n-1\n");
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.rows[0].label, 1.0);
  EXPECT_EQ(d.rows[0].features, (std::vector<Feature>{{1, 0.5}, {3, -2.0}}));
  EXPECT_GE(d.dim, 3u);
  EXPECT_EQ(d.rows[1].label, -1.0);
  EXPECT_TRUE(d.rows[1].features.empty());
}

TEST(Parse, HandcraftedFixture) {
  const Dataset d = load_libsvm(kFixtures / "handcrafted.libsvm");
  EXPECT_EQ(d.size(), 4u);
  EXPECT_EQ(d.dim, 7u);
  EXPECT_EQ(d.nnz(), 11u);
  EXPECT_EQ(serialize(d), ref::read_file(kFixtures / "handcrafted.golden"));
}

TEST(Parse, GzipMatchesPlain) {
  const Dataset plain = load_libsvm(kFixtures / "handcrafted.libsvm");
  const Dataset gz = load_libsvm(kFixtures / "handcrafted.libsvm.gz");
  EXPECT_EQ(plain, gz);
}

TEST(Parse, OneTwoLabels) {
  const Dataset d = load_libsvm(kFixtures / "one_two.libsvm");
  EXPECT_EQ(d.mapping, LabelMapping::OneTwo);
  EXPECT_EQ(serialize(d), ref::read_file(kFixtures / "one_two.golden"));
}

TEST(Parse, ZeroOneLabels) {
  const Dataset d = load_libsvm(kFixtures / "zero_one.libsvm");
  EXPECT_EQ(d.mapping, LabelMapping::ZeroOne);
  EXPECT_EQ(d.rows[0].label, -1.0);
  EXPECT_EQ(d.rows[1].label, 1.0);
}

TEST(Parse, RawLabelsKept) {
  ParseOptions raw;
  raw.binary_labels = false;
  const Dataset d = load_libsvm(kFixtures / "attack_examples.libsvm", raw);
  EXPECT_EQ(d.mapping, LabelMapping::Raw);
  EXPECT_EQ(d.rows[0].label, 2.0);
  EXPECT_EQ(d.rows[1].label, 0.0);
}

TEST(Parse, ErrorsCarryPosition) {
  try {
    parse_text("+1 1:1\n\n-1 2:1 2:3\n");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_EQ(e.column(), 8u);
    EXPECT_EQ(std::string(e.what()).rfind("line 3, column 8: ", 0), 0u);
  }
  EXPECT_THROW(parse_text("+1 0:1\n"), ParseError);
  EXPECT_THROW(parse_text("+1 3\n"), ParseError);
  EXPECT_THROW(parse_text("+1 3:x\n"), ParseError);
  EXPECT_THROW(parse_text("abc 1:1\n"), ParseError);
  EXPECT_THROW(parse_text("+1 4:1 2:1\n"), ParseError);
  EXPECT_THROW(parse_text("+1 -2:1\n"), ParseError);
}

TEST(Parse, LabelSetErrors) {
  EXPECT_THROW(parse_text("-1 1:1\n0 1:1\n1 1:1\n"), LabelError);
  EXPECT_THROW(parse_text("3 1:1\n1 1:1\n"), LabelError);
}

TEST(Parse, MissingFileIsIOError) {
  EXPECT_THROW(load_libsvm(kFixtures / "does-not-exist.libsvm"), IOError);
}

TEST(Parse, CorruptGzip) {
  ref::TempDir dir("gz");
  std::string bytes = ref::read_file(kFixtures / "handcrafted.libsvm.gz");
  bytes.resize(bytes.size() / 2);
  ref::write_file(dir / "broken.gz", bytes);
  EXPECT_THROW(load_libsvm(dir / "broken.gz"), Error);
}

TEST(Parse, EmptyInput) {
  const Dataset d = parse_text("# nothing\n\n");
  EXPECT_EQ(d.size(), 0u);
  EXPECT_EQ(d.dim, 0u);
}

TEST(RoundTrip, Fixture) {
  const Dataset d = load_libsvm(kFixtures / "handcrafted.libsvm");
  EXPECT_EQ(parse_text(serialize(d)), d);
}

TEST(RoundTrip, RandomDatasets) {
  std::mt19937_64 gen(99);
  for (int trial = 0; trial < 200; ++trial) {
    const Dataset d = random_dataset(gen);
    const Dataset back = parse_text(serialize(d));
    ASSERT_EQ(back, d) << "trial " << trial;
    EXPECT_EQ(serialize(back), serialize(d));
  }
}

TEST(Streaming, MillionLines) {
  ref::TempDir dir("stream");
  const auto path = dir / "big.libsvm";
  {
    std::ofstream out(path);
    for (int i = 0; i < 1000000; ++i) {
      out << ((i & 1) ? "+1" : "-1") << ' ' << (i % 50 + 1) << ":0.5\n";
    }
  }
  rusage before{};
  getrusage(RUSAGE_SELF, &before);
  const Dataset d = load_libsvm(path);
  rusage after{};
  getrusage(RUSAGE_SELF, &after);
  EXPECT_EQ(d.size(), 1000000u);
  EXPECT_EQ(d.dim, 50u);
  EXPECT_EQ(d.nnz(), 1000000u);
  // Peak growth bounded by the parsed rows (vector headers, one feature each, allocator
  // slack), not by the text size plus rows.
  const double output_bytes = 1e6 * (sizeof(Row) + sizeof(Feature) + 32);
  const double growth_bytes = 1024.0 * static_cast<double>(after.ru_maxrss - before.ru_maxrss);
  EXPECT_LT(growth_bytes, 1.5 * output_bytes);
}

TEST(Split, HalfOfHundred) {
  Dataset d;
  d.dim = 1;
  for (int i = 0; i < 100; ++i) {
    d.rows.push_back({(i % 2) ? 1.0 : -1.0, {{1, static_cast<double>(i)}}});
  }
  const auto [train, test] = split(d, 0.5, 7);
  EXPECT_EQ(train.size(), 50u);
  EXPECT_EQ(test.size(), 50u);
  std::vector<double> seen;
  for (const Row& r : train.rows) seen.push_back(r.features[0].value);
  for (const Row& r : test.rows) seen.push_back(r.features[0].value);
  std::sort(seen.begin(), seen.end());
  for (int i = 0; i < 100; ++i) EXPECT_EQ(seen[static_cast<std::size_t>(i)], i);
  EXPECT_EQ(train.dim, 1u);
  EXPECT_EQ(test.dim, 1u);
}

TEST(Split, RoundsHalfUp) {
  Dataset d;
  d.dim = 1;
  for (int i = 0; i < 101; ++i) d.rows.push_back({1.0, {{1, static_cast<double>(i)}}});
  const auto [train, test] = split(d, 0.5, 1);
  EXPECT_EQ(train.size(), 51u);
  EXPECT_EQ(test.size(), 50u);
}

TEST(Split, Deterministic) {
  const Dataset d = load_libsvm(kFixtures / "handcrafted.libsvm");
  EXPECT_EQ(split(d, 0.5, 3), split(d, 0.5, 3));
}

TEST(Split, PartitionProperty) {
  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  for (int trial = 0; trial < 100; ++trial) {
    Dataset d;
    d.dim = 1;
    const int n = 2 + static_cast<int>(gen() % 200);
    for (int i = 0; i < n; ++i) d.rows.push_back({1.0, {{1, static_cast<double>(i)}}});
    const double f = frac(gen);
    std::pair<Dataset, Dataset> parts;
    try {
      parts = split(d, f, gen());
    } catch (const SplitError&) {
      continue;
    }
    std::vector<int> hits(static_cast<std::size_t>(n), 0);
    for (const Row& r : parts.first.rows) ++hits[static_cast<std::size_t>(r.features[0].value)];
    for (const Row& r : parts.second.rows) ++hits[static_cast<std::size_t>(r.features[0].value)];
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(Split, Errors) {
  Dataset one;
  one.dim = 1;
  one.rows.push_back({1.0, {}});
  EXPECT_THROW(split(one, 0.5, 1), SplitError);
  one.rows.push_back({-1.0, {}});
  EXPECT_THROW(split(one, 0.0, 1), SplitError);
  EXPECT_THROW(split(one, 1.0, 1), SplitError);
  EXPECT_THROW(split(one, 0.1, 1), SplitError);
}

TEST(Stats, Counts) {
  const DatasetStats s = stats(load_libsvm(kFixtures / "handcrafted.libsvm"));
  EXPECT_EQ(s.rows, 4u);
  EXPECT_EQ(s.dim, 7u);
  EXPECT_EQ(s.nnz, 11u);
  EXPECT_EQ(s.positives, 2u);
  EXPECT_EQ(s.negatives, 2u);
  EXPECT_DOUBLE_EQ(s.max_sq_norm, 49.0 + 2.25);
}
