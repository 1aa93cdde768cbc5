#include <gtest/gtest.h>

#include <fstream>
#include <sstream>

#include "helpers.hpp"

using namespace netrca;
using netrca::testing::temp_dir;

namespace {

void write(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kSchema = R"({
  "target_feature": 0,
  "causes": [1, 2, 3],
  "adjacent": {"1": [13]},
  "cause_features": {"1": {"raw": [0, 13]}}
})";

std::string expect_data_error(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const DataError& e) {
    return e.what();
  }
  ADD_FAILURE() << "expected DataError";
  return {};
}

}  // namespace

TEST(LoadDataset, TwoSamplesOneLabeled) {
  const auto dir = temp_dir("io_two");
  write(dir / "data.csv", "sample_id,timestamp,0,13\na,1,1.5,2\na,2,NA,3\nb,1,4,5\n");
  write(dir / "schema.json", kSchema);
  write(dir / "labels.tsv", "a\t1\nb\tUNLABELED\n");
  const auto d = load_dataset(DatasetFiles{(dir / "data.csv").string(), (dir / "schema.json").string(), (dir / "labels.tsv").string(), {}});
  ASSERT_EQ(d.samples.size(), 2u);
  EXPECT_EQ(d.samples[0].label, CauseSet{1});
  EXPECT_FALSE(d.samples[1].label);
  EXPECT_TRUE(d.samples[0].is_missing(1, 0));
  EXPECT_EQ(d.samples[0].values(0, 0), 1.5);
}

TEST(LoadDataset, NoLabelFileMeansUnlabeled) {
  const auto dir = temp_dir("io_nolabels");
  write(dir / "data.csv", "sample_id,timestamp,0,13\na,1,1,2\n");
  write(dir / "schema.json", kSchema);
  const auto d = load_dataset((dir / "data.csv").string(), (dir / "schema.json").string());
  EXPECT_FALSE(d.samples[0].label);
}

TEST(LoadDataset, RepeatedTimestampNamesSample) {
  const auto dir = temp_dir("io_ts");
  write(dir / "data.csv", "sample_id,timestamp,0,13\nabc,5,1,2\nabc,5,1,2\n");
  write(dir / "schema.json", kSchema);
  const auto msg = expect_data_error([&] { load_dataset((dir / "data.csv").string(), (dir / "schema.json").string()); });
  EXPECT_NE(msg.find("non-increasing timestamps"), std::string::npos);
  EXPECT_NE(msg.find("abc"), std::string::npos);
}

TEST(LoadDataset, UnknownCauseRejected) {
  const auto dir = temp_dir("io_cause");
  write(dir / "data.csv", "sample_id,timestamp,0,13\na,1,1,2\n");
  write(dir / "schema.json", kSchema);
  write(dir / "labels.tsv", "a\t4\n");
  const auto msg = expect_data_error([&] {
    load_dataset(DatasetFiles{(dir / "data.csv").string(), (dir / "schema.json").string(), (dir / "labels.tsv").string(), {}});
  });
  EXPECT_NE(msg.find("unknown cause"), std::string::npos);
}

TEST(LoadDataset, MalformedRecordNamesLine) {
  const auto dir = temp_dir("io_malformed");
  write(dir / "data.csv", "sample_id,timestamp,0,13\na,1,1,2\na,2,1\n");
  write(dir / "schema.json", kSchema);
  const auto msg = expect_data_error([&] { load_dataset((dir / "data.csv").string(), (dir / "schema.json").string()); });
  EXPECT_NE(msg.find(":3:"), std::string::npos);
}

TEST(LoadDataset, BadNumberNamesLine) {
  std::istringstream in("sample_id,timestamp,0\na,1,x\n");
  try {
    read_sample_table(in, "t.csv");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("t.csv:2"), std::string::npos);
  }
}

TEST(LoadDataset, NonContiguousRowsRejected) {
  std::istringstream in("sample_id,timestamp,0\na,1,1\nb,1,1\na,2,1\n");
  EXPECT_THROW(read_sample_table(in, "t.csv"), DataError);
}

TEST(LoadDataset, SchemaUnknownFeatureRejected) {
  const auto dir = temp_dir("io_schema_feature");
  write(dir / "data.csv", "sample_id,timestamp,0\na,1,1\n");
  write(dir / "schema.json", kSchema);
  EXPECT_THROW(load_dataset((dir / "data.csv").string(), (dir / "schema.json").string()), DataError);
}

TEST(LoadDataset, LocationOutsideGridRejected) {
  const auto dir = temp_dir("io_grid");
  write(dir / "data.csv", "sample_id,timestamp,0,13,20\na,1,1,2,32\n");
  write(dir / "schema.json", R"({"target_feature":0,"causes":[1],"adjacent":{"1":[13]},"location_feature":20,
    "cause_features":{"1":{"raw":[0,13]}}})");
  const auto msg = expect_data_error([&] { load_dataset((dir / "data.csv").string(), (dir / "schema.json").string()); });
  EXPECT_NE(msg.find("outside grid"), std::string::npos);
}

TEST(WriteDataset, RoundTripsRecordForRecord) {
  const std::string text =
      "sample_id,timestamp,0,13\n"
      "a,1,1.5,2\n"
      "a,2,NA,0.1\n"
      "b,7,-4.25,1e-300\n";
  const auto dir = temp_dir("io_roundtrip");
  write(dir / "data.csv", text);
  write(dir / "schema.json", kSchema);
  write(dir / "labels.tsv", "a\t1,3\nb\t\n");
  const auto d = load_dataset(DatasetFiles{(dir / "data.csv").string(), (dir / "schema.json").string(), (dir / "labels.tsv").string(), {}});
  write_dataset(d, (dir / "out.csv").string(), (dir / "out.tsv").string());
  EXPECT_EQ(slurp(dir / "out.csv"), text);
  EXPECT_EQ(slurp(dir / "out.tsv"), "a\t1,3\nb\t\n");
}

TEST(WriteDataset, SyntheticRoundTripIsExact) {
  auto cfg = reference_config();
  cfg.n_samples = 30;
  const auto syn = generate(cfg, reference_graph(), reference_schema());
  const auto dir = temp_dir("io_synth");
  write_dataset(syn.dataset, (dir / "data.csv").string(), (dir / "labels.tsv").string());
  write_schema((dir / "schema.json").string(), syn.dataset.schema);
  const auto d = load_dataset(DatasetFiles{(dir / "data.csv").string(), (dir / "schema.json").string(), (dir / "labels.tsv").string(), {}});
  ASSERT_EQ(d.samples.size(), syn.dataset.samples.size());
  for (std::size_t i = 0; i < d.samples.size(); ++i) EXPECT_EQ(d.samples[i], syn.dataset.samples[i]);
  EXPECT_EQ(d.schema, syn.dataset.schema);
}

TEST(LabelFile, AcceptsPredictionLines) {
  const auto dir = temp_dir("io_pred");
  write(dir / "p.txt", "s1: 1,2 [base:1(p=0.9)]\ns2:  []\ns3:\n# comment\n");
  const auto labels = read_label_file((dir / "p.txt").string());
  EXPECT_EQ(labels.at("s1"), (CauseSet{1, 2}));
  EXPECT_EQ(labels.at("s2"), CauseSet{});
  EXPECT_EQ(labels.at("s3"), CauseSet{});
}

TEST(LabelFile, DuplicateIdRejected) {
  const auto dir = temp_dir("io_dup");
  write(dir / "l.tsv", "a\t1\na\t2\n");
  EXPECT_THROW(read_label_file((dir / "l.tsv").string()), DataError);
}

TEST(CausalGraphFile, TwoEdgesIntoTarget) {
  std::istringstream in("target 0\nnodes 0 1 2\n1 0\n2 0\n");
  const auto g = parse_causal_graph(in, "g");
  EXPECT_EQ(g.size(), 3u);
  const auto a = g.adjacency();
  EXPECT_EQ(a[1][0], 1);
  EXPECT_EQ(a[2][0], 1);
  EXPECT_EQ(a[0][1], 0);
  EXPECT_EQ(g.nodes[g.target], "0");
}

TEST(CausalGraphFile, SelfLoopRejected) {
  std::istringstream in("target 0\nnodes 0\n0 0\n");
  try {
    parse_causal_graph(in, "g");
    FAIL();
  } catch (const DataError& e) {
    EXPECT_NE(std::string(e.what()).find("self-loop"), std::string::npos);
  }
}

TEST(CausalGraphFile, SingleNodeNoEdges) {
  std::istringstream in("target 0\nnodes 0\n");
  const auto g = parse_causal_graph(in, "g");
  EXPECT_EQ(g.size(), 1u);
  EXPECT_TRUE(g.edges.empty());
}

TEST(CausalGraphFile, UndeclaredNodeAndMissingTarget) {
  std::istringstream a("target 0\nnodes 0 1\n1 5\n");
  EXPECT_THROW(parse_causal_graph(a, "g"), DataError);
  std::istringstream b("nodes 0 1\n1 0\n");
  EXPECT_THROW(parse_causal_graph(b, "g"), DataError);
}

TEST(CausalGraphFile, WriteParseRoundTrip) {
  const auto g = reference_graph();
  std::ostringstream out;
  write_causal_graph(out, g);
  std::istringstream in(out.str());
  EXPECT_EQ(parse_causal_graph(in, "g"), g);
}

TEST(Schema, JsonRoundTrip) {
  const auto s = reference_schema();
  EXPECT_EQ(schema_from_json(schema_to_json(s)), s);
}

TEST(Schema, MalformedJsonIsDataError) {
  EXPECT_THROW(schema_from_json(nlohmann::json::parse(R"({"causes": [1]})")), DataError);
}

TEST(FormatDouble, ShortestRoundTrip) {
  EXPECT_EQ(format_double(0.1), "0.1");
  const double x = 1.0 / 3.0;
  EXPECT_EQ(std::stod(format_double(x)), x);
}
