#include <cmath>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "rfosm/error.hpp"
#include "rfosm/study.hpp"

using namespace rfosm;
using nlohmann::json;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an rfosm::Error";
  return ErrorKind::Io;
}

json modulus_study() {
  return json::parse(R"({
    "name": "modulus",
    "model": {"nominal": {"E": 30}, "random": ["E"]},
    "inputs": {"E": {"family": "weibull", "params": {"mean": 30}}},
    "methods": ["fosm", "sofm", "recfosm", "mc"],
    "mc_count": 2000,
    "cov_sweep": [0.05, 0.25],
    "seed": 7
  })");
}

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "rfosm_test_study";
  std::filesystem::create_directories(dir);
  return dir;
}

std::filesystem::path write_file(const std::string& name, const std::string& text) {
  const auto path = temp_dir() / name;
  std::ofstream(path) << text;
  return path;
}

}  // namespace

TEST(ParseStudy, Basic) {
  const auto spec = study::parse_study(modulus_study());
  EXPECT_EQ(spec.name, "modulus");
  EXPECT_EQ(spec.nominal.E, 30.0);
  EXPECT_EQ(spec.nominal.h, 30.0);
  ASSERT_EQ(spec.random.size(), 1u);
  EXPECT_EQ(spec.methods.size(), 4u);
  EXPECT_EQ(spec.cov_sweep.size(), 2u);
  EXPECT_EQ(spec.seed, 7u);
  EXPECT_EQ(spec.mc_count, 2000u);
  EXPECT_FALSE(spec.realizations.has_value());
}

TEST(ParseStudy, EmptyMethodsRejected) {
  auto doc = modulus_study();
  doc["methods"] = json::array();
  EXPECT_EQ(kind_of([&] { (void)study::parse_study(doc); }), ErrorKind::Validation);
}

TEST(ParseStudy, ValidationErrors) {
  const auto expect = [](const std::function<void(json&)>& edit, ErrorKind kind) {
    auto doc = modulus_study();
    edit(doc);
    EXPECT_EQ(kind_of([&] { (void)study::parse_study(doc); }), kind) << doc.dump();
  };
  expect([](json& d) { d["methods"] = {"fosm", "fosm"}; }, ErrorKind::Validation);
  expect([](json& d) { d["methods"] = {"form"}; }, ErrorKind::Validation);
  expect([](json& d) { d["unknown"] = 1; }, ErrorKind::Validation);
  expect([](json& d) { d["cov_sweep"] = {0.0}; }, ErrorKind::Validation);
  expect([](json& d) { d["cov_sweep"] = {1.5}; }, ErrorKind::Validation);
  expect([](json& d) { d.erase("cov_sweep"); }, ErrorKind::Validation);
  expect([](json& d) { d["model"]["random"] = {"E", "h"}; }, ErrorKind::Validation);
  expect([](json& d) { d["model"]["random"] = {"G"}; }, ErrorKind::Configuration);
  expect([](json& d) { d["model"]["nominal"]["E"] = -3; }, ErrorKind::ParameterDomain);
  expect([](json& d) { d["mc_count"] = 1; }, ErrorKind::Validation);
  expect([](json& d) { d["seed"] = -1; }, ErrorKind::Validation);
  expect([](json& d) { d["correlation"] = {{1, 0}, {0, 1}}; }, ErrorKind::Validation);
}

TEST(ParseStudy, BadDistributionRecordRejected) {
  auto doc = modulus_study();
  doc.erase("cov_sweep");
  doc["inputs"]["E"] = json::parse(R"({"family": "fisher_f", "params": {"m": 25, "n": -1}})");
  EXPECT_EQ(kind_of([&] { (void)study::parse_study(doc); }), ErrorKind::ParameterDomain);
}

TEST(LoadStudy, FileErrors) {
  EXPECT_EQ(kind_of([] { (void)study::load_study(temp_dir() / "missing.json"); }), ErrorKind::Io);
  const auto bad = write_file("bad.json", "{ not json");
  EXPECT_EQ(kind_of([&] { (void)study::load_study(bad); }), ErrorKind::Parse);
}

TEST(RunStudy, DeterministicAndComplete) {
  const auto spec = study::parse_study(modulus_study());
  const auto a = study::run_study(spec);
  const auto b = study::run_study(spec);
  ASSERT_EQ(a.rows.size(), 8u);
  EXPECT_EQ(a.rows, b.rows);
  const auto& mc = a.find(Method::MonteCarlo, 0.05);
  EXPECT_EQ(mc.estimate.meta.seed, study::row_seed(7, 0));
  EXPECT_EQ(mc.estimate.meta.sample_count, 2000u);
  const auto& rec = a.find(Method::RecFOSM, 0.25);
  EXPECT_EQ(rec.estimate.meta.reciprocal_source, ReciprocalSource::Quadrature);
  EXPECT_EQ(kind_of([&] { (void)a.find(Method::FOSM, 0.5); }), ErrorKind::Validation);
}

TEST(RunStudy, SeedChangesMonteCarloOnly) {
  auto doc = modulus_study();
  const auto a = study::run_study(study::parse_study(doc));
  doc["seed"] = 8;
  const auto b = study::run_study(study::parse_study(doc));
  EXPECT_EQ(a.find(Method::FOSM, 0.05).estimate.sd, b.find(Method::FOSM, 0.05).estimate.sd);
  EXPECT_EQ(a.find(Method::RecFOSM, 0.05).estimate.sd, b.find(Method::RecFOSM, 0.05).estimate.sd);
  EXPECT_NE(a.find(Method::MonteCarlo, 0.05).estimate.sd, b.find(Method::MonteCarlo, 0.05).estimate.sd);
}

TEST(RunStudy, RealizationsMakeRowsDataBacked) {
  auto doc = modulus_study();
  doc["realizations"] = 500;
  const auto t = study::run_study(study::parse_study(doc));
  const auto& rec = t.find(Method::RecFOSM, 0.05);
  EXPECT_EQ(rec.estimate.meta.reciprocal_source, ReciprocalSource::Empirical);
  EXPECT_EQ(rec.estimate.meta.sample_count, 500u);
  const auto& mc = t.find(Method::MonteCarlo, 0.05);
  EXPECT_EQ(mc.estimate.meta.sample_count, 500u);
  EXPECT_FALSE(mc.estimate.meta.seed.has_value());
}

TEST(RunStudy, CsvInputs) {
  std::string text = "E,h\n";
  for (int i = 0; i < 100; ++i) text += std::to_string(60 + i % 20) + "," + std::to_string(28 + i % 5) + "\n";
  write_file("beam_samples.csv", text);
  const json doc = json::parse(R"({
    "model": {"random": ["E", "h"]},
    "inputs": {"E": {"csv": "beam_samples.csv"}, "h": {"csv": "beam_samples.csv"}},
    "methods": ["fosm", "recfosm", "mc"]
  })");
  const auto spec = study::parse_study(doc, temp_dir());
  const auto t = study::run_study(spec);
  EXPECT_EQ(t.find(Method::MonteCarlo).estimate.meta.sample_count, 100u);
  EXPECT_GT(t.find(Method::RecFOSM).estimate.sd, 0.0);

  json sofm_doc = doc;
  sofm_doc["methods"] = {"sofm"};
  EXPECT_EQ(kind_of([&] { (void)study::run_study(study::parse_study(sofm_doc, temp_dir())); }),
            ErrorKind::UnsupportedConfiguration);
}

TEST(Output, CsvRoundTripIsExact) {
  const auto t = study::run_study(study::parse_study(modulus_study()));
  const auto csv = study::format_table(t, study::OutputFormat::Csv);
  const auto back = study::parse_table_csv(csv, t.study);
  ASSERT_EQ(back.rows.size(), t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) EXPECT_EQ(back.rows[i], t.rows[i]) << i;
}

TEST(Output, TableCsvParseErrors) {
  EXPECT_EQ(kind_of([] { (void)study::parse_table_csv("a,b\n"); }), ErrorKind::Parse);
  const std::string header = "cov,method,mean,sd,seed,sample_count,se_mean,se_sd,reciprocal_source,quadrature_residual\n";
  EXPECT_EQ(kind_of([&] { (void)study::parse_table_csv(header + ",fosm,1,x,,,,,,\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([&] { (void)study::parse_table_csv(header + ",fosm,1\n"); }), ErrorKind::Parse);
}

TEST(Output, JsonShape) {
  const auto t = study::run_study(study::parse_study(modulus_study()));
  const auto j = json::parse(study::format_table(t, study::OutputFormat::Json));
  EXPECT_EQ(j["study"], "modulus");
  ASSERT_EQ(j["rows"].size(), 8u);
  const auto& row = j["rows"][3];
  EXPECT_EQ(row["method"], "mc");
  EXPECT_EQ(row["cov"], 0.05);
  EXPECT_EQ(row["meta"]["sample_count"], 2000);
  EXPECT_TRUE(row["meta"].contains("se_mean"));
  EXPECT_EQ(row["mean"].get<double>(), t.rows[3].estimate.mean);
  EXPECT_EQ(j["rows"][2]["meta"]["reciprocal_source"], "quadrature");
}

TEST(Output, SweepSeriesAndSummary) {
  const auto t = study::run_study(study::parse_study(modulus_study()));
  const auto wide = study::parse_csv(study::sweep_series_csv(t));
  EXPECT_EQ(wide.header.front(), "cov");
  EXPECT_EQ(wide.header.size(), 9u);
  EXPECT_EQ(wide.values.rows(), 2);
  EXPECT_EQ(wide.values(1, 0), 0.25);
  EXPECT_NE(study::summarize(t).find("recfosm"), std::string::npos);
}

TEST(Output, DeflectionCurves) {
  beam::BeamParams p;
  const auto data = study::parse_csv(study::deflection_curves_csv(p, "E", 35, 140, 8));
  ASSERT_EQ(data.values.rows(), 8);
  for (Eigen::Index r = 0; r < data.values.rows(); ++r) {
    // the reciprocal expansion reproduces w ~ 1/E exactly
    EXPECT_NEAR(data.values(r, 4), data.values(r, 1), 1e-12 * data.values(r, 1));
  }
  EXPECT_EQ(kind_of([&] { (void)study::deflection_curves_csv(p, "E", 10, 5, 8); }), ErrorKind::Validation);
}

TEST(Csv, ParseAndErrors) {
  const auto d = study::parse_csv("a,b\n1,2\n3.5,-4e-1\n");
  EXPECT_EQ(d.header, (std::vector<std::string>{"a", "b"}));
  EXPECT_EQ(d.values(1, 1), -0.4);
  try {
    (void)study::parse_csv("a,b\n1,2\n3,x\n");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Parse);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    EXPECT_NE(std::string(e.what()).find("'b'"), std::string::npos) << e.what();
  }
  EXPECT_EQ(kind_of([] { (void)study::parse_csv("1,2\n3,4\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { (void)study::parse_csv("a,b\n1\n"); }), ErrorKind::Parse);
  EXPECT_EQ(kind_of([] { (void)study::parse_csv(""); }), ErrorKind::Parse);
}

TEST(Csv, IngestTwoColumns) {
  std::string text = "E,h\n";
  for (int i = 1; i <= 100; ++i) text += std::to_string(i) + "," + std::to_string(2 * i) + "\n";
  const auto in = study::ingest_samples(write_file("two.csv", text));
  EXPECT_TRUE(in.is_data_backed());
  EXPECT_EQ(in.dimension(), 2u);
  EXPECT_EQ(in.names()[1], "h");
  EXPECT_DOUBLE_EQ(in.mean()[0], 50.5);
  EXPECT_DOUBLE_EQ(in.mean()[1], 101.0);
  EXPECT_NEAR(in.covariance()(0, 1), 2.0 * 100.0 * 101.0 / 12.0, 1e-9);
}

TEST(Csv, SingleRowCannotEstimate) {
  EXPECT_EQ(kind_of([] { (void)study::ingest_samples(write_file("one.csv", "E\n70\n")); }),
            ErrorKind::EstimatorUndefined);
  EXPECT_EQ(kind_of([] { (void)study::ingest_samples(temp_dir() / "absent.csv"); }), ErrorKind::Io);
}

TEST(Report, DistributionRecord) {
  const DistributionRecord r{"fisher_f", {{"m", 25.0}, {"n", 100.0}}, 70.0, 0.0};
  const auto rep = study::reciprocal_report(r, 10'000, 3);
  ASSERT_TRUE(rep.reciprocal_law.has_value());
  EXPECT_EQ(rep.moments.source, ReciprocalSource::AnalyticPair);
  ASSERT_TRUE(rep.monte_carlo.has_value());
  const auto j = study::to_json(rep);
  EXPECT_EQ(j["source"], "analytic_pair");
  EXPECT_EQ(j["reciprocal_law"]["family"], "fisher_f");
  EXPECT_EQ(study::record_from_json(study::to_json(r)).params, r.params);
}

TEST(Report, CsvRecord) {
  const auto rep = study::reciprocal_report(write_file("pair.csv", "x\n1\n2\n"));
  EXPECT_DOUBLE_EQ(rep.moments.mean_z[0], 0.75);
  EXPECT_DOUBLE_EQ(rep.moments.cov_z(0, 0), 0.125);
  EXPECT_FALSE(rep.monte_carlo.has_value());
}

TEST(Csv, ExportedWeibullMatchesDistributionBacking) {
  const Distribution d = weibull_from_mean_cov(70.0, 0.1);
  const std::size_t n = 100'000;
  const auto xs = sample(d, n, 314);
  std::string text = "E\n";
  char buf[32];
  for (double x : xs) {
    std::snprintf(buf, sizeof buf, "%.17g\n", x);
    text += buf;
  }
  const auto data_in = study::ingest_samples(write_file("weibull_export.csv", text));
  const auto dist_in = RandomInput::from_marginals({d}, {"E"});
  const auto model = beam::tip_deflection_model(beam::BeamParams{}, {"E"});
  const auto a = fosm(model, data_in);
  const auto b = fosm(model, dist_in);
  const MomentSet m = moments(d);
  const double slope = std::abs(model.evaluate_gradient(Eigen::VectorXd::Constant(1, 70.0))[0]);
  const double se_mean = slope * m.sd() / std::sqrt(double(n));
  const double se_sd = slope * std::sqrt((m.fourth() - m.variance * m.variance) / n) / (2.0 * m.sd());
  EXPECT_LT(std::abs(a.mean - b.mean), 3.0 * se_mean);
  EXPECT_LT(std::abs(a.sd - b.sd), 3.0 * se_sd);
}
