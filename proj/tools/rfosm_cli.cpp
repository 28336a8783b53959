// rfosm: run moment-propagation studies on the cantilever model, report
// reciprocal moments and ingest measurement CSVs.
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "rfosm/error.hpp"
#include "rfosm/study.hpp"

using nlohmann::json;
using namespace rfosm;

namespace {

enum ExitCode { kOk = 0, kValidation = 2, kNumeric = 3, kIo = 4 };

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Validation:
    case ErrorKind::Configuration:
    case ErrorKind::Parse:
    case ErrorKind::ParameterDomain:
    case ErrorKind::UnsupportedConfiguration:
      return kValidation;
    case ErrorKind::Io:
      return kIo;
    default:
      return kNumeric;
  }
}

int report(std::string_view kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}}.dump() << "\n";
  return code;
}

void write_output(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw Error(ErrorKind::Io, "write to '" + path.string() + "' failed");
}

study::OutputFormat parse_format(const std::string& s) {
  if (s == "json") return study::OutputFormat::Json;
  if (s == "csv") return study::OutputFormat::Csv;
  throw Error(ErrorKind::Validation, "unknown format '" + s + "' (json or csv)");
}

// --dist accepts inline JSON or a path to a JSON file.
DistributionRecord load_record(const std::string& arg) {
  json j;
  const auto first = arg.find_first_not_of(" \t\r\n");
  try {
    if (first != std::string::npos && arg[first] == '{') {
      j = json::parse(arg);
    } else {
      std::ifstream in(arg);
      if (!in) throw Error(ErrorKind::Io, "cannot open '" + arg + "'");
      j = json::parse(in);
    }
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, std::string("distribution record: ") + e.what());
  }
  return study::record_from_json(j);
}

struct StudyArgs {
  std::string spec;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mc_count;
  std::optional<std::string> out;
  std::optional<std::string> format;
  std::optional<std::string> series;
};

int run_study_command(const StudyArgs& args) {
  study::StudySpec spec = study::load_study(args.spec);
  if (args.seed) spec.seed = *args.seed;
  if (args.mc_count) spec.mc_count = *args.mc_count;
  if (args.out) spec.output_path = *args.out;
  if (args.format) spec.format = parse_format(*args.format);
  study::validate(spec);

  const study::ResultTable table = study::run_study(spec);
  const std::string text = study::format_table(table, spec.format);
  if (args.series) write_output(*args.series, study::sweep_series_csv(table));
  if (spec.output_path) {
    write_output(*spec.output_path, text);
    std::cout << study::summarize(table);
  } else {
    std::cerr << study::summarize(table);
    std::cout << text;
  }
  return kOk;
}

int recip_command(const std::optional<std::string>& dist, const std::optional<std::string>& csv,
                  std::size_t mc_count, std::uint64_t seed) {
  const study::ReciprocalReport rep =
      dist ? study::reciprocal_report(load_record(*dist), mc_count, seed) : study::reciprocal_report(*csv);
  std::cout << study::to_json(rep).dump(2) << "\n";
  return kOk;
}

int ingest_command(const std::string& path) {
  const RandomInput in = study::ingest_samples(path);
  json mean = json::array();
  json cov = json::array();
  for (Eigen::Index i = 0; i < in.mean().size(); ++i) {
    mean.push_back(in.mean()[i]);
    json row = json::array();
    for (Eigen::Index j = 0; j < in.covariance().cols(); ++j) row.push_back(in.covariance()(i, j));
    cov.push_back(row);
  }
  const json out{{"names", in.names()},
                 {"rows", in.samples().rows()},
                 {"mean", mean},
                 {"covariance", cov},
                 {"reciprocal", study::to_json(empirical_reciprocal_moments(in.samples()))}};
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int curves_command(const std::string& param, double from, double to, std::size_t points,
                   const std::vector<std::string>& nominal, const std::optional<std::string>& out) {
  beam::BeamParams p;
  for (const auto& kv : nominal) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Validation, "expected NAME=VALUE, got '" + kv + "'");
    double v = 0.0;
    try {
      v = std::stod(kv.substr(eq + 1));
    } catch (const std::exception&) {
      throw Error(ErrorKind::Validation, "'" + kv + "' has a non-numeric value");
    }
    p.set(kv.substr(0, eq), v);
  }
  p.validate();
  const std::string text = study::deflection_curves_csv(p, param, from, to, points);
  if (out) {
    write_output(*out, text);
  } else {
    std::cout << text;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Mean and standard deviation of the cantilever tip deflection under random parameters"};
  app.require_subcommand(1);

  StudyArgs study_args;
  auto* study_cmd = app.add_subcommand("study", "Run a study declared in a JSON file");
  study_cmd->require_subcommand(1);
  auto* run_cmd = study_cmd->add_subcommand("run", "Run every method of the study");
  run_cmd->add_option("spec", study_args.spec, "Study JSON")->required();
  run_cmd->add_option("--seed", study_args.seed, "Override the study seed");
  run_cmd->add_option("--mc-count", study_args.mc_count, "Override the Monte Carlo sample count");
  run_cmd->add_option("--out", study_args.out, "Write the result table here");
  run_cmd->add_option("--format", study_args.format, "json or csv");
  run_cmd->add_option("--series", study_args.series, "Also write the CoV series CSV here");

  std::optional<std::string> dist;
  std::optional<std::string> csv;
  std::size_t recip_mc = 0;
  std::uint64_t recip_seed = 0;
  auto* recip_cmd = app.add_subcommand("recip", "Moments of the reciprocal of a random variable");
  recip_cmd->require_subcommand(1);
  auto* report_cmd = recip_cmd->add_subcommand("report", "Mean and variance of Z = 1/X");
  auto* dist_opt = report_cmd->add_option("--dist", dist, "Distribution record (inline JSON or file)");
  auto* csv_opt = report_cmd->add_option("--csv", csv, "CSV of realizations");
  dist_opt->excludes(csv_opt);
  report_cmd->add_option("--mc-count", recip_mc, "Sampling cross-check size (0 disables)");
  report_cmd->add_option("--seed", recip_seed, "Seed of the sampling cross-check");

  std::string ingest_path;
  auto* ingest_cmd = app.add_subcommand("ingest", "Summarize a CSV of realizations");
  ingest_cmd->add_option("path", ingest_path, "CSV with a header row")->required();

  auto* figure_cmd = app.add_subcommand("figure", "Emit figure data as CSV");
  figure_cmd->require_subcommand(1);
  std::string curve_param = "E";
  double curve_from = 0.0;
  double curve_to = 0.0;
  std::size_t curve_points = 101;
  std::vector<std::string> curve_nominal;
  std::optional<std::string> curve_out;
  auto* curves_cmd = figure_cmd->add_subcommand("curves", "Deflection and its expansions over one parameter");
  curves_cmd->add_option("--param", curve_param, "Beam parameter (F, L, E, h, b)");
  curves_cmd->add_option("--from", curve_from, "Range start")->required();
  curves_cmd->add_option("--to", curve_to, "Range end")->required();
  curves_cmd->add_option("--points", curve_points, "Number of points");
  curves_cmd->add_option("--nominal", curve_nominal, "Nominal override NAME=VALUE");
  curves_cmd->add_option("--out", curve_out, "Write the CSV here");

  StudyArgs sweep_args;
  auto* sweep_cmd = figure_cmd->add_subcommand("sweep", "Mean and sd per method over the study's CoV sweep");
  sweep_cmd->add_option("spec", sweep_args.spec, "Study JSON")->required();
  sweep_cmd->add_option("--seed", sweep_args.seed, "Override the study seed");
  sweep_cmd->add_option("--mc-count", sweep_args.mc_count, "Override the Monte Carlo sample count");
  sweep_cmd->add_option("--out", sweep_args.out, "Write the CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kValidation);
  }

  try {
    if (*run_cmd) return run_study_command(study_args);
    if (*report_cmd) {
      if (!dist && !csv) throw Error(ErrorKind::Validation, "recip report needs --dist or --csv");
      return recip_command(dist, csv, recip_mc, recip_seed);
    }
    if (*ingest_cmd) return ingest_command(ingest_path);
    if (*curves_cmd) {
      return curves_command(curve_param, curve_from, curve_to, curve_points, curve_nominal, curve_out);
    }
    if (*sweep_cmd) {
      study::StudySpec spec = study::load_study(sweep_args.spec);
      if (sweep_args.seed) spec.seed = *sweep_args.seed;
      if (sweep_args.mc_count) spec.mc_count = *sweep_args.mc_count;
      const std::string text = study::sweep_series_csv(study::run_study(spec));
      if (sweep_args.out) {
        write_output(*sweep_args.out, text);
      } else {
        std::cout << text;
      }
      return kOk;
    }
  } catch (const QuadratureError& e) {
    std::cerr << json{{"error", to_string(e.kind())},
                      {"message", e.what()},
                      {"partial_value", e.partial_value()},
                      {"residual", e.residual()}}
                     .dump()
              << "\n";
    return kNumeric;
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what(), exit_code(e.kind()));
  } catch (const std::exception& e) {
    return report("internal", e.what(), kNumeric);
  }
  return kOk;
}
