#include <random>

#include "test_util.hpp"

namespace dmst {
namespace {

using test::E;

std::vector<WeightedEdge> random_sorted(std::mt19937_64& rng, std::size_t count, VertexId max_vertex) {
  std::uniform_int_distribution<VertexId> v(0, max_vertex);
  std::uniform_int_distribution<Weight> w(0, kMaxWeight);
  std::uniform_int_distribution<EdgeId> id(0, 1u << 30);
  std::vector<WeightedEdge> out(count);
  for (auto& e : out) e = {v(rng), v(rng), w(rng), id(rng)};
  std::sort(out.begin(), out.end(), lex_less);
  return out;
}

TEST(Varint, Leb128Of300) {
  std::vector<std::uint8_t> out;
  put_varint(out, 300);
  EXPECT_EQ(out, (std::vector<std::uint8_t>{0xAC, 0x02}));
}

TEST(Varint, SmallValuesAreOneByte) {
  for (std::uint64_t v : {0u, 1u, 127u}) {
    std::vector<std::uint8_t> out;
    put_varint(out, v);
    ASSERT_EQ(out.size(), 1u);
    EXPECT_EQ(out[0], v);
  }
}

TEST(Varint, ZigzagRoundTrip) {
  for (std::int64_t x : std::initializer_list<std::int64_t>{0, -1, 1, -2, 63, -64, INT64_MAX, INT64_MIN}) EXPECT_EQ(unzigzag(zigzag(x)), x);
  EXPECT_EQ(zigzag(2), 4u);
  EXPECT_EQ(zigzag(-1), 1u);
}

TEST(Varint, FirstEdgeFields) {
  const std::vector<WeightedEdge> edges{E(3, 5, 9, 0)};
  const auto bytes = encode_edges(edges);
  ASSERT_GE(bytes.size(), 2u);
  EXPECT_EQ(bytes[0], 0x03);
  EXPECT_EQ(bytes[1], 0x04);
}

TEST(Varint, EmptyRoundTrip) {
  EXPECT_TRUE(encode_edges({}).empty());
  EXPECT_TRUE(decode_edges({}).empty());
}

TEST(Varint, RandomRoundTrip) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const auto edges = random_sorted(rng, 1000, trial % 2 ? 100 : kMaxVertex / 4);
    EXPECT_EQ(decode_edges(encode_edges(edges)), edges);
  }
}

TEST(Varint, ExtremeValuesRoundTrip) {
  const std::vector<WeightedEdge> edges{E(0, kMaxVertex, kMaxWeight, kNoEdge - 1), E(kMaxVertex, 0, 0, 0),
                                        E(kMaxVertex, kMaxVertex, kMaxWeight, kNoEdge)};
  EXPECT_EQ(decode_edges(encode_edges(edges)), edges);
}

TEST(Varint, TruncatedStream) {
  auto bytes = encode_edges(std::vector<WeightedEdge>{E(1, 2, 300, 1000)});
  bytes.pop_back();
  try {
    decode_edges(bytes);
    FAIL() << "expected TruncatedStream";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::truncated_stream);
  }
  const std::vector<std::uint8_t> mid_varint{0x01, 0x80};
  EXPECT_THROW(decode_edges(mid_varint), Error);
}

TEST(Varint, ContinuationOverflow) {
  const std::vector<std::uint8_t> bytes(11, 0x80);
  try {
    decode_edges(bytes);
    FAIL() << "expected ContinuationOverflow";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::continuation_overflow);
  }
}

TEST(Varint, UnsortedInputRejected) {
  const std::vector<WeightedEdge> edges{E(2, 1, 1, 0), E(1, 2, 1, 0)};
  try {
    encode_edges(edges);
    FAIL() << "expected UnsortedInput";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), Errc::unsorted_input);
  }
}

TEST(Varint, GeneratedGraphsCompressWell) {
  for (const char* spec : {"gnm:n=4096,m=32768,seed=1", "grid2d:rows=64,cols=64", "rgg2d:n=4096,deg=8"}) {
    const auto s = parse_spec(spec);
    const auto edges = run_spmd(1, [&](Communicator& comm) { return generate(s, comm).local_edges; }).front();
    const auto bytes = encode_edges(edges);
    EXPECT_LT(bytes.size() * 2, edges.size() * 28) << spec;
    EXPECT_EQ(decode_edges(bytes), edges) << spec;
  }
}

TEST(EdgeFile, HeaderAndRoundTrip) {
  EdgeFile f;
  f.n = 16;
  f.flags = 3;
  f.edges = {E(1, 2, 5, 0), E(2, 1, 5, 0)};
  const auto bytes = serialize_edge_file(f);
  ASSERT_GE(bytes.size(), kHeaderBytes);
  EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 4), "MSTF");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[5], 0);
  EXPECT_EQ(bytes[8], 16);
  const auto back = parse_edge_file(bytes);
  EXPECT_EQ(back.n, 16u);
  EXPECT_EQ(back.flags, 3);
  EXPECT_EQ(back.edges, f.edges);
}

TEST(EdgeFile, BadMagicAndShortHeader) {
  std::vector<std::uint8_t> bytes(kHeaderBytes, 0);
  EXPECT_THROW(parse_edge_file(bytes), Error);
  bytes.resize(5);
  EXPECT_THROW(parse_edge_file(bytes), Error);
}

TEST(EdgeFile, TextParsing) {
  std::istringstream in("# comment\n1 2 5\n\n2 3 7 # trailing\n");
  const auto edges = parse_text_edges(in);
  ASSERT_EQ(edges.size(), 2u);
  EXPECT_EQ(edges[0].src, 1u);
  EXPECT_EQ(edges[1].weight, 7u);
  std::istringstream bad("1 2\n");
  EXPECT_THROW(parse_text_edges(bad), Error);
}

}  // namespace
}  // namespace dmst
