#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfosm/beam.hpp"
#include "rfosm/distributions.hpp"
#include "rfosm/propagation.hpp"
#include "rfosm/random_input.hpp"
#include "rfosm/reciprocal.hpp"

namespace rfosm::study {

enum class OutputFormat { Json, Csv };

/// Where the realizations or the law of one random parameter come from.
struct InputSpec {
  std::optional<DistributionRecord> distribution;
  std::optional<std::filesystem::path> csv;
  std::string column;  // CSV column; defaults to the parameter name
};

/// One experiment: beam model, random inputs, estimators and sweep.
struct StudySpec {
  std::string name = "study";
  beam::BeamParams nominal;
  std::vector<std::string> random;
  std::map<std::string, InputSpec> inputs;
  /// Gaussian-copula correlation over `random` (distribution inputs only).
  std::optional<Eigen::MatrixXd> correlation;
  std::vector<Method> methods;
  std::size_t mc_count = 100'000;
  std::vector<double> cov_sweep;
  /// When set, each row first draws this many realizations from the
  /// distribution-backed input and runs every method on that data set.
  std::optional<std::size_t> realizations;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> output_path;
  OutputFormat format = OutputFormat::Json;
};

/// Parses and validates a study document. Relative CSV paths resolve
/// against `base_dir`. Throws Validation / Configuration.
[[nodiscard]] StudySpec parse_study(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
[[nodiscard]] StudySpec load_study(const std::filesystem::path& path);
void validate(const StudySpec& spec);

struct ResultRow {
  std::optional<double> cov;
  Method method = Method::FOSM;
  MomentEstimate estimate;

  friend bool operator==(const ResultRow& a, const ResultRow& b);
};

struct ResultTable {
  std::string study;
  std::vector<ResultRow> rows;

  [[nodiscard]] const ResultRow& find(Method method, std::optional<double> cov = std::nullopt) const;
};

/// Seed used for sweep row `index`.
[[nodiscard]] std::uint64_t row_seed(std::uint64_t seed, std::size_t index);

/// Random input for one sweep row (cov empty when there is no sweep).
[[nodiscard]] RandomInput build_input(const StudySpec& spec, std::optional<double> cov, std::uint64_t seed);

[[nodiscard]] ResultTable run_study(const StudySpec& spec);

[[nodiscard]] std::string format_table(const ResultTable& table, OutputFormat format);
/// Reads the CSV produced by format_table back into a table.
[[nodiscard]] ResultTable parse_table_csv(const std::string& text, const std::string& study_name = "study");
/// One line per row, aligned for terminals.
[[nodiscard]] std::string summarize(const ResultTable& table);
/// Wide CSV: one line per CoV with <method>_mean,<method>_sd columns.
[[nodiscard]] std::string sweep_series_csv(const ResultTable& table);

/// Exact / first-order / second-order / reciprocal first-order curves of
/// the tip deflection over one parameter, expanded at the nominal value.
[[nodiscard]] std::string deflection_curves_csv(const beam::BeamParams& nominal, const std::string& parameter,
                                                double from, double to, std::size_t points);

// --- CSV ingestion --------------------------------------------------------

struct CsvData {
  std::vector<std::string> header;
  Eigen::MatrixXd values;
};

/// Comma separated, '.' decimal, header row required. Parse errors carry
/// the 1-based line number.
[[nodiscard]] CsvData parse_csv(const std::string& text);
[[nodiscard]] CsvData read_csv(const std::filesystem::path& path);

/// Data-backed input from a CSV file; labels from the header.
[[nodiscard]] RandomInput ingest_samples(const std::filesystem::path& path);

// --- reciprocal report -----------------------------------------------------

struct ReciprocalReport {
  ReciprocalMoments moments;
  /// Sampling cross-check for distribution records (empty for CSV input).
  std::optional<ReciprocalMoments> monte_carlo;
  std::optional<Distribution> reciprocal_law;
};

/// Analytic pair, then quadrature for a distribution record; empirical
/// estimator for CSV data. `mc_count` > 0 adds a sampling cross-check.
[[nodiscard]] ReciprocalReport reciprocal_report(const DistributionRecord& record, std::size_t mc_count,
                                                 std::uint64_t seed);
[[nodiscard]] ReciprocalReport reciprocal_report(const std::filesystem::path& csv_path);

// --- JSON ------------------------------------------------------------------

[[nodiscard]] nlohmann::json to_json(const MomentEstimate& estimate);
[[nodiscard]] nlohmann::json to_json(const ReciprocalMoments& moments);
[[nodiscard]] nlohmann::json to_json(const ReciprocalReport& report);
[[nodiscard]] nlohmann::json to_json(const DistributionRecord& record);
[[nodiscard]] DistributionRecord record_from_json(const nlohmann::json& j);

}  // namespace rfosm::study
