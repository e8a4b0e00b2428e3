#include "oracles.hpp"

#include <gtest/gtest.h>

using namespace dcdual;

namespace {

const char* kTri = R"({"schema_version": "1", "n": 1, "N": 1, "A": [-1], "B": [[1]],
                       "gamma": [1], "c": [0], "f": [0], "K": 1})";

ErrorCode parse_error_code(const std::string& text) {
  try {
    validate_instance(parse_instance_text(text));
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "parsed: " << text;
  return ErrorCode::singular_matrix;
}

std::string edited(const std::function<void(json&)>& edit) {
  json doc = json::parse(kTri);
  edit(doc);
  return doc.dump();
}

std::string instance_path(const std::string& name) { return std::string(DCDUAL_SOURCE_DIR) + "/instances/" + name; }

}  // namespace

TEST(Parse, ScalarKIsLiftedToMultipleOfIdentity) {
  const RawInstance raw = parse_instance_text(kTri);
  EXPECT_EQ(raw.K, Matrix::Constant(1, 1, 1.0));
  const RawInstance two = parse_instance_text(R"({"schema_version": "1", "n": 2, "N": 1, "A": [0, 0, 0, 0],
      "B": [[1, 0, 0, 1]], "gamma": [1], "c": [0], "f": [0, 0], "K": 3.5})");
  EXPECT_EQ(two.K, Matrix(3.5 * Matrix::Identity(2, 2)));
}

TEST(Parse, MatricesAreRowMajor) {
  const RawInstance raw = parse_instance_text(R"({"schema_version": "1", "n": 2, "N": 1, "A": [1, 2, 3, 4],
      "B": [[1, 0, 0, 1]], "gamma": [1], "c": [0], "f": [0, 0], "K": 9})");
  EXPECT_EQ(raw.A(0, 1), 2.0);
  EXPECT_EQ(raw.A(1, 0), 3.0);
}

TEST(Parse, StrictSchema) {
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["extra"] = 1; })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d.erase("f"); })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["schema_version"] = "2"; })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["schema_version"] = 1; })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["n"] = 1.5; })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["gamma"] = {"a"}; })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["coercivity_override"] = "yes"; })), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code("{not json"), ErrorCode::parse_error);
  EXPECT_EQ(parse_error_code("[1, 2]"), ErrorCode::parse_error);
}

TEST(Parse, SizeMismatchesAreDimensionErrors) {
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["A"] = {1, 2}; })), ErrorCode::dimension_mismatch);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["f"] = {0, 0}; })), ErrorCode::dimension_mismatch);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["N"] = 2; })), ErrorCode::dimension_mismatch);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["n"] = 0; })), ErrorCode::dimension_mismatch);
}

TEST(Parse, ValidationErrorsSurviveParsing) {
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["gamma"] = {-1}; })), ErrorCode::nonpositive_gamma);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["K"] = -1; })), ErrorCode::k_minus_a_not_pd);
  EXPECT_EQ(parse_error_code(edited([](json& d) { d["A"] = {-1.0}; d["B"] = {{0.0}}; })),
            ErrorCode::coercivity_failed);
}

TEST(RoundTrip, RandomInstancesAreBitExact) {
  std::mt19937_64 rng(71);
  for (int trial = 0; trial < 50; ++trial) {
    RawInstance raw = random_instance(rng(), 1 + trial % 6, 1 + trial % 4);
    raw.coercivity_override = trial % 2 == 0;
    const std::string text = instance_json(raw).dump();
    const RawInstance back = parse_instance_text(text);
    EXPECT_EQ(back.n, raw.n);
    EXPECT_EQ(back.N, raw.N);
    EXPECT_EQ(back.A, raw.A);
    ASSERT_EQ(back.B.size(), raw.B.size());
    for (std::size_t j = 0; j < raw.B.size(); ++j) EXPECT_EQ(back.B[j], raw.B[j]);
    EXPECT_EQ(back.gamma, raw.gamma);
    EXPECT_EQ(back.c, raw.c);
    EXPECT_EQ(back.f, raw.f);
    EXPECT_EQ(back.K, raw.K);
    EXPECT_EQ(back.coercivity_override, raw.coercivity_override);
    EXPECT_EQ(instance_json(back).dump(), text);
  }
}

TEST(Digest, StableAndSensitive) {
  const ProblemInstance a = validate_instance(oracle::p_tri());
  const ProblemInstance b = validate_instance(parse_instance_text(kTri));
  EXPECT_EQ(instance_digest(a), instance_digest(b));
  EXPECT_EQ(instance_digest(a).size(), 16u);
  RawInstance raw = oracle::p_tri();
  raw.f(0) = 1e-300;
  EXPECT_NE(instance_digest(validate_instance(raw)), instance_digest(a));
}

TEST(Files, ShippedInstances) {
  for (const char* name : {"p_tri.json", "p_min.json", "planar.json"}) {
    EXPECT_NO_THROW(validate_instance(read_instance_file(instance_path(name)))) << name;
  }
  const RawInstance tri = read_instance_file(instance_path("p_tri.json"));
  EXPECT_EQ(instance_digest(validate_instance(tri)), instance_digest(validate_instance(oracle::p_tri())));
  const RawInstance mn = read_instance_file(instance_path("p_min.json"));
  EXPECT_EQ(instance_digest(validate_instance(mn)), instance_digest(validate_instance(oracle::p_min())));

  const RawInstance bad = read_instance_file(instance_path("bad_gamma.json"));
  EXPECT_THROW(validate_instance(bad), Error);
  const RawInstance singular = read_instance_file(instance_path("k_minus_a_singular.json"));
  EXPECT_THROW(validate_instance(singular), Error);

  try {
    read_instance_file(instance_path("missing.json"));
    FAIL() << "expected parse-error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::parse_error);
  }
}

TEST(Reports, VerifyJsonIsDeterministic) {
  const ProblemInstance p = validate_instance(read_instance_file(instance_path("planar.json")));
  VerifyOptions opt;
  opt.samples = 200;
  const std::string a = verify_json(run_verify(p, opt)).dump();
  const std::string b = verify_json(run_verify(p, opt)).dump();
  EXPECT_EQ(a, b);
  const json doc = json::parse(a);
  EXPECT_EQ(doc["version"], kToolVersion);
  EXPECT_EQ(doc["instance_digest"], instance_digest(p));
  EXPECT_EQ(doc["critical_points"].size(), doc["summary"]["points"].get<std::size_t>());
}

TEST(Reports, NumbersRoundTripExactly) {
  std::mt19937_64 rng(72);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  Vector v(200);
  for (int i = 0; i < v.size(); ++i) v(i) = u(rng) * std::pow(10.0, i % 40 - 20);
  const json back = json::parse(vector_json(v).dump());
  for (int i = 0; i < v.size(); ++i) EXPECT_EQ(back[static_cast<std::size_t>(i)].get<double>(), v(i));
}
