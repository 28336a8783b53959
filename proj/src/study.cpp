#include "rfosm/study.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>

#include "rfosm/error.hpp"

namespace rfosm::study {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& message) { throw Error(ErrorKind::Validation, message); }

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && (s[b] == ' ' || s[b] == '\t' || s[b] == '\r')) ++b;
  while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
  return std::string(s.substr(b, e - b));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma == std::string::npos ? std::string::npos
                                                                                        : comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

std::optional<double> parse_number(const std::string& cell) {
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (first != last && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last) return std::nullopt;
  return v;
}

// Shortest representation that parses back to the same double.
std::string exact(double v) {
  char buf[32];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buf, sizeof buf, "%.*g", precision, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

template <class T>
std::string cell(const std::optional<T>& v) {
  if (!v) return "";
  if constexpr (std::is_floating_point_v<T>) {
    return exact(*v);
  } else {
    return std::to_string(*v);
  }
}

double require_number(const json& j, const std::string& what) {
  if (!j.is_number()) invalid(what + " must be a number");
  return j.get<double>();
}

std::size_t require_count(const json& j, const std::string& what) {
  if (!j.is_number_integer() || j.get<long long>() < 0) invalid(what + " must be a non-negative integer");
  return j.get<std::size_t>();
}

void reject_unknown_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) invalid("unknown field '" + key + "' in " + where);
  }
}

bool sweepable(const InputSpec& in) {
  return in.distribution && in.distribution->family == "weibull" && in.distribution->params.contains("mean") &&
         !in.distribution->params.contains("cov");
}

}  // namespace

// --- JSON ------------------------------------------------------------------

json to_json(const DistributionRecord& record) {
  json j;
  j["family"] = record.family;
  j["params"] = json::object();
  for (const auto& [k, v] : record.params) j["params"][k] = v;
  j["scale"] = record.scale;
  j["shift"] = record.shift;
  return j;
}

DistributionRecord record_from_json(const json& j) {
  if (!j.is_object()) invalid("distribution record must be an object");
  reject_unknown_keys(j, {"family", "params", "scale", "shift"}, "distribution record");
  DistributionRecord r;
  if (!j.contains("family") || !j["family"].is_string()) invalid("distribution record needs a 'family' string");
  r.family = j["family"].get<std::string>();
  if (j.contains("params")) {
    if (!j["params"].is_object()) invalid("'params' must be an object");
    for (const auto& [k, v] : j["params"].items()) r.params[k] = require_number(v, "parameter '" + k + "'");
  }
  if (j.contains("scale")) r.scale = require_number(j["scale"], "scale");
  if (j.contains("shift")) r.shift = require_number(j["shift"], "shift");
  return r;
}

json to_json(const MomentEstimate& e) {
  json meta = json::object();
  if (e.meta.seed) meta["seed"] = *e.meta.seed;
  if (e.meta.sample_count) meta["sample_count"] = *e.meta.sample_count;
  if (e.meta.se_mean) meta["se_mean"] = *e.meta.se_mean;
  if (e.meta.se_sd) meta["se_sd"] = *e.meta.se_sd;
  if (e.meta.reciprocal_source) meta["reciprocal_source"] = std::string(to_string(*e.meta.reciprocal_source));
  if (e.meta.quadrature_residual) meta["quadrature_residual"] = *e.meta.quadrature_residual;
  return {{"method", std::string(to_string(e.method))}, {"mean", e.mean}, {"sd", e.sd}, {"meta", meta}};
}

json to_json(const ReciprocalMoments& m) {
  json mean = json::array();
  json cov = json::array();
  for (Eigen::Index i = 0; i < m.mean_z.size(); ++i) {
    mean.push_back(m.mean_z[i]);
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cov_z.cols(); ++j) row.push_back(m.cov_z(i, j));
    cov.push_back(row);
  }
  json diag = json::object();
  if (m.diagnostics.quadrature_residual) diag["quadrature_residual"] = *m.diagnostics.quadrature_residual;
  if (m.diagnostics.evaluations) diag["evaluations"] = *m.diagnostics.evaluations;
  if (m.diagnostics.sample_count) diag["sample_count"] = *m.diagnostics.sample_count;
  return {{"mean_z", mean}, {"cov_z", cov}, {"source", std::string(to_string(m.source))}, {"diagnostics", diag}};
}

json to_json(const ReciprocalReport& report) {
  json j = to_json(report.moments);
  if (report.reciprocal_law) j["reciprocal_law"] = to_json(to_record(*report.reciprocal_law));
  if (report.monte_carlo) j["monte_carlo"] = to_json(*report.monte_carlo);
  return j;
}

// --- study spec ------------------------------------------------------------

StudySpec parse_study(const json& doc, const std::filesystem::path& base_dir) {
  if (!doc.is_object()) invalid("study document must be a JSON object");
  reject_unknown_keys(doc,
                      {"name", "model", "inputs", "methods", "mc_count", "cov_sweep", "realizations", "seed",
                       "correlation", "output"},
                      "study");
  StudySpec spec;
  if (doc.contains("name")) spec.name = doc["name"].get<std::string>();

  if (!doc.contains("model") || !doc["model"].is_object()) invalid("study needs a 'model' object");
  const json& model = doc["model"];
  reject_unknown_keys(model, {"nominal", "random"}, "model");
  if (model.contains("nominal")) {
    if (!model["nominal"].is_object()) invalid("'model.nominal' must be an object");
    for (const auto& [k, v] : model["nominal"].items()) {
      spec.nominal.set(k, require_number(v, "nominal " + k));
    }
  }
  if (!model.contains("random") || !model["random"].is_array()) invalid("'model.random' must be an array");
  for (const auto& name : model["random"]) {
    if (!name.is_string()) invalid("'model.random' entries must be strings");
    spec.random.push_back(name.get<std::string>());
  }

  if (!doc.contains("inputs") || !doc["inputs"].is_object()) invalid("study needs an 'inputs' object");
  for (const auto& [name, value] : doc["inputs"].items()) {
    InputSpec in;
    if (!value.is_object()) invalid("input '" + name + "' must be an object");
    if (value.contains("csv")) {
      reject_unknown_keys(value, {"csv", "column"}, "input '" + name + "'");
      std::filesystem::path p = value["csv"].get<std::string>();
      in.csv = p.is_relative() && !base_dir.empty() ? base_dir / p : p;
      in.column = value.contains("column") ? value["column"].get<std::string>() : name;
    } else {
      in.distribution = record_from_json(value);
    }
    spec.inputs[name] = std::move(in);
  }

  if (!doc.contains("methods") || !doc["methods"].is_array()) invalid("'methods' must be an array");
  for (const auto& m : doc["methods"]) {
    if (!m.is_string()) invalid("'methods' entries must be strings");
    spec.methods.push_back(method_from_string(m.get<std::string>()));
  }
  if (doc.contains("mc_count")) spec.mc_count = require_count(doc["mc_count"], "mc_count");
  if (doc.contains("cov_sweep")) {
    if (!doc["cov_sweep"].is_array()) invalid("'cov_sweep' must be an array");
    for (const auto& c : doc["cov_sweep"]) spec.cov_sweep.push_back(require_number(c, "cov_sweep entry"));
  }
  if (doc.contains("realizations") && !doc["realizations"].is_null()) {
    spec.realizations = require_count(doc["realizations"], "realizations");
  }
  if (doc.contains("seed")) {
    const json& seed = doc["seed"];
    if (!seed.is_number_unsigned() && !(seed.is_number_integer() && seed.get<long long>() >= 0)) invalid("'seed' must be a non-negative integer");
    spec.seed = doc["seed"].get<std::uint64_t>();
  }
  if (doc.contains("correlation") && !doc["correlation"].is_null()) {
    const json& c = doc["correlation"];
    if (!c.is_array()) invalid("'correlation' must be a matrix");
    const auto n = static_cast<Eigen::Index>(c.size());
    Eigen::MatrixXd rho(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      const json& row = c[static_cast<std::size_t>(i)];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) invalid("'correlation' must be square");
      for (Eigen::Index j = 0; j < n; ++j) rho(i, j) = require_number(row[static_cast<std::size_t>(j)], "correlation");
    }
    spec.correlation = rho;
  }
  if (doc.contains("output")) {
    const json& out = doc["output"];
    if (!out.is_object()) invalid("'output' must be an object");
    reject_unknown_keys(out, {"path", "format"}, "output");
    if (out.contains("path") && !out["path"].is_null()) spec.output_path = out["path"].get<std::string>();
    if (out.contains("format")) {
      const auto f = out["format"].get<std::string>();
      if (f == "json") spec.format = OutputFormat::Json;
      else if (f == "csv") spec.format = OutputFormat::Csv;
      else invalid("output format must be 'json' or 'csv'");
    }
  }
  validate(spec);
  return spec;
}

StudySpec load_study(const std::filesystem::path& path) {
  const std::string text = read_file(path);
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::Parse, "'" + path.string() + "': " + e.what());
  }
  try {
    return parse_study(doc, path.parent_path());
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Validation, "'" + path.string() + "': " + e.what());
  }
}

void validate(const StudySpec& spec) {
  if (spec.methods.empty()) invalid("methods must not be empty");
  {
    std::set<Method> seen(spec.methods.begin(), spec.methods.end());
    if (seen.size() != spec.methods.size()) invalid("methods contain duplicates");
  }
  spec.nominal.validate();
  if (spec.random.empty()) invalid("model.random must name at least one parameter");
  (void)beam::tip_deflection_model(spec.nominal, spec.random);
  bool any_csv = false;
  bool any_dist = false;
  for (const auto& name : spec.random) {
    const auto it = spec.inputs.find(name);
    if (it == spec.inputs.end()) invalid("random parameter '" + name + "' has no input");
    any_csv = any_csv || it->second.csv.has_value();
    any_dist = any_dist || it->second.distribution.has_value();
  }
  for (const auto& [name, in] : spec.inputs) {
    if (std::find(spec.random.begin(), spec.random.end(), name) == spec.random.end()) {
      invalid("input '" + name + "' is not listed in model.random");
    }
  }
  if (any_csv && any_dist) invalid("inputs must be all distributions or all CSV columns");
  if (spec.mc_count < 2) invalid("mc_count must be at least 2");
  for (double c : spec.cov_sweep) {
    if (!(c > 0.0 && c < 1.0)) invalid("cov_sweep values must lie in (0, 1)");
  }
  if (!spec.cov_sweep.empty()) {
    if (any_csv) invalid("cov_sweep needs distribution inputs");
    bool any_sweepable = false;
    for (const auto& [name, in] : spec.inputs) any_sweepable = any_sweepable || sweepable(in);
    if (!any_sweepable) invalid("cov_sweep needs a weibull input given by 'mean' without 'cov'");
  } else {
    for (const auto& [name, in] : spec.inputs) {
      if (sweepable(in)) invalid("input '" + name + "' gives 'mean' without 'cov' but there is no cov_sweep");
    }
  }
  if (spec.realizations) {
    if (any_csv) invalid("realizations apply to distribution inputs only");
    if (*spec.realizations < 2) invalid("realizations must be at least 2");
  }
  if (spec.correlation) {
    if (any_csv) invalid("correlation applies to distribution inputs only");
    if (static_cast<std::size_t>(spec.correlation->rows()) != spec.random.size()) {
      invalid("correlation matrix dimension does not match model.random");
    }
  }
  // Distribution records without a sweep must construct now.
  if (spec.cov_sweep.empty() && any_dist) {
    for (const auto& name : spec.random) (void)from_record(*spec.inputs.at(name).distribution);
  }
}

std::uint64_t row_seed(std::uint64_t seed, std::size_t index) {
  return seed + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(index);
}

RandomInput build_input(const StudySpec& spec, std::optional<double> cov, std::uint64_t seed) {
  const InputSpec& first = spec.inputs.at(spec.random.front());
  if (first.csv) {
    std::map<std::filesystem::path, CsvData> cache;
    Eigen::Index rows = -1;
    std::vector<Eigen::VectorXd> columns;
    for (const auto& name : spec.random) {
      const InputSpec& in = spec.inputs.at(name);
      auto it = cache.find(*in.csv);
      if (it == cache.end()) it = cache.emplace(*in.csv, read_csv(*in.csv)).first;
      const CsvData& data = it->second;
      const auto col = std::find(data.header.begin(), data.header.end(), in.column);
      if (col == data.header.end()) {
        invalid("column '" + in.column + "' not found in '" + in.csv->string() + "'");
      }
      if (rows >= 0 && data.values.rows() != rows) invalid("CSV inputs have different row counts");
      rows = data.values.rows();
      columns.push_back(data.values.col(col - data.header.begin()));
    }
    Eigen::MatrixXd m(rows, static_cast<Eigen::Index>(columns.size()));
    for (std::size_t c = 0; c < columns.size(); ++c) m.col(static_cast<Eigen::Index>(c)) = columns[c];
    return RandomInput::from_samples(std::move(m), spec.random);
  }

  std::vector<Distribution> marginals;
  for (const auto& name : spec.random) {
    DistributionRecord r = *spec.inputs.at(name).distribution;
    if (cov && sweepable(spec.inputs.at(name))) r.params["cov"] = *cov;
    marginals.push_back(from_record(r));
  }
  RandomInput input = RandomInput::from_marginals(std::move(marginals), spec.random, spec.correlation);
  if (spec.realizations) {
    return RandomInput::from_samples(input.realizations(*spec.realizations, seed), spec.random);
  }
  return input;
}

ResultTable run_study(const StudySpec& spec) {
  validate(spec);
  ResultTable table;
  table.study = spec.name;
  const ObjectiveModel model = beam::tip_deflection_model(spec.nominal, spec.random);

  std::vector<std::optional<double>> covs;
  if (spec.cov_sweep.empty()) {
    covs.emplace_back(std::nullopt);
  } else {
    for (double c : spec.cov_sweep) covs.emplace_back(c);
  }

  for (std::size_t row = 0; row < covs.size(); ++row) {
    const std::uint64_t seed = row_seed(spec.seed, row);
    const RandomInput input = build_input(spec, covs[row], seed);
    for (Method method : spec.methods) {
      MomentEstimate e;
      switch (method) {
        case Method::FOSM: e = fosm(model, input); break;
        case Method::SOFM: e = sofm(model, input); break;
        case Method::RecFOSM: {
          const std::vector<bool> all(input.dimension(), true);
          e = rec_fosm(model, substituted_moments(input, all, SamplingOptions{spec.mc_count, seed}));
          if (input.is_data_backed()) e.meta.sample_count = static_cast<std::size_t>(input.samples().rows());
          break;
        }
        case Method::MonteCarlo: {
          std::size_t count = spec.mc_count;
          if (input.is_data_backed()) {
            count = std::min<std::size_t>(count, static_cast<std::size_t>(input.samples().rows()));
          }
          e = monte_carlo(model, input, count, seed);
          break;
        }
      }
      table.rows.push_back({covs[row], method, e});
    }
  }
  return table;
}

bool operator==(const ResultRow& a, const ResultRow& b) {
  const auto& m = a.estimate.meta;
  const auto& n = b.estimate.meta;
  return a.cov == b.cov && a.method == b.method && a.estimate.method == b.estimate.method &&
         a.estimate.mean == b.estimate.mean && a.estimate.sd == b.estimate.sd && m.seed == n.seed &&
         m.sample_count == n.sample_count && m.se_mean == n.se_mean && m.se_sd == n.se_sd &&
         m.reciprocal_source == n.reciprocal_source && m.quadrature_residual == n.quadrature_residual;
}

const ResultRow& ResultTable::find(Method method, std::optional<double> cov) const {
  for (const auto& r : rows) {
    if (r.method == method && r.cov == cov) return r;
  }
  std::ostringstream msg;
  msg << "no result row for method " << to_string(method);
  if (cov) msg << " at cov " << *cov;
  throw Error(ErrorKind::Validation, msg.str());
}

// --- output ----------------------------------------------------------------

namespace {

constexpr const char* kTableHeader =
    "cov,method,mean,sd,seed,sample_count,se_mean,se_sd,reciprocal_source,quadrature_residual";

}  // namespace

std::string format_table(const ResultTable& table, OutputFormat format) {
  if (format == OutputFormat::Json) {
    json rows = json::array();
    for (const auto& r : table.rows) {
      json j = to_json(r.estimate);
      j["cov"] = r.cov ? json(*r.cov) : json(nullptr);
      rows.push_back(j);
    }
    return json{{"study", table.study}, {"rows", rows}}.dump(2) + "\n";
  }
  std::ostringstream out;
  out << kTableHeader << "\n";
  for (const auto& r : table.rows) {
    const auto& m = r.estimate.meta;
    out << cell(r.cov) << ',' << to_string(r.method) << ',' << exact(r.estimate.mean) << ','
        << exact(r.estimate.sd) << ',' << cell(m.seed) << ',' << cell(m.sample_count) << ',' << cell(m.se_mean)
        << ',' << cell(m.se_sd) << ','
        << (m.reciprocal_source ? std::string(to_string(*m.reciprocal_source)) : std::string()) << ','
        << cell(m.quadrature_residual) << "\n";
  }
  return out.str();
}

ResultTable parse_table_csv(const std::string& text, const std::string& study_name) {
  ResultTable table;
  table.study = study_name;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  const auto fail = [&](const std::string& what) {
    throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": " + what);
  };
  const auto number = [&](const std::string& c) -> std::optional<double> {
    if (c.empty()) return std::nullopt;
    const auto v = parse_number(c);
    if (!v) fail("'" + c + "' is not a number");
    return v;
  };
  const auto integer = [&](const std::string& c) -> std::optional<std::uint64_t> {
    if (c.empty()) return std::nullopt;
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), v);
    if (ec != std::errc() || ptr != c.data() + c.size()) fail("'" + c + "' is not an integer");
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    if (line_no == 1) {
      if (trim(line) != kTableHeader) fail("unexpected header");
      continue;
    }
    const auto f = split_fields(line);
    if (f.size() != 10) fail("expected 10 fields, got " + std::to_string(f.size()));
    ResultRow r;
    r.cov = number(f[0]);
    r.method = method_from_string(f[1]);
    r.estimate.method = r.method;
    r.estimate.mean = *number(f[2]);
    r.estimate.sd = *number(f[3]);
    r.estimate.meta.seed = integer(f[4]);
    if (const auto c = integer(f[5])) r.estimate.meta.sample_count = static_cast<std::size_t>(*c);
    r.estimate.meta.se_mean = number(f[6]);
    r.estimate.meta.se_sd = number(f[7]);
    if (!f[8].empty()) {
      bool found = false;
      for (auto s : {ReciprocalSource::AnalyticPair, ReciprocalSource::Quadrature, ReciprocalSource::Empirical,
                     ReciprocalSource::Sampled}) {
        if (f[8] == to_string(s)) {
          r.estimate.meta.reciprocal_source = s;
          found = true;
        }
      }
      if (!found) fail("unknown reciprocal source '" + f[8] + "'");
    }
    r.estimate.meta.quadrature_residual = number(f[9]);
    table.rows.push_back(r);
  }
  return table;
}

std::string summarize(const ResultTable& table) {
  std::ostringstream out;
  out << "study " << table.study << "\n";
  out << std::fixed;
  for (const auto& r : table.rows) {
    out << "  ";
    if (r.cov) out << "cov=" << std::setprecision(3) << std::left << std::setw(7) << *r.cov << ' ';
    out << std::left << std::setw(8) << to_string(r.method) << std::right << " mean=" << std::setprecision(4)
        << std::setw(9) << r.estimate.mean << "  sd=" << std::setw(9) << r.estimate.sd;
    if (r.estimate.meta.se_mean) {
      out << "  (se " << std::setprecision(4) << *r.estimate.meta.se_mean << " / " << *r.estimate.meta.se_sd
          << ", n=" << *r.estimate.meta.sample_count << ")";
    }
    if (r.estimate.meta.reciprocal_source) out << "  [" << to_string(*r.estimate.meta.reciprocal_source) << "]";
    out << "\n";
  }
  return out.str();
}

std::string sweep_series_csv(const ResultTable& table) {
  std::vector<Method> methods;
  std::vector<std::optional<double>> covs;
  for (const auto& r : table.rows) {
    if (std::find(methods.begin(), methods.end(), r.method) == methods.end()) methods.push_back(r.method);
    if (std::find(covs.begin(), covs.end(), r.cov) == covs.end()) covs.push_back(r.cov);
  }
  std::ostringstream out;
  out << "cov";
  for (Method m : methods) out << ',' << to_string(m) << "_mean," << to_string(m) << "_sd";
  out << "\n";
  for (const auto& c : covs) {
    out << cell(c);
    for (Method m : methods) {
      const auto& e = table.find(m, c).estimate;
      out << ',' << exact(e.mean) << ',' << exact(e.sd);
    }
    out << "\n";
  }
  return out.str();
}

std::string deflection_curves_csv(const beam::BeamParams& nominal, const std::string& parameter, double from,
                                  double to, std::size_t points) {
  if (points < 2) invalid("need at least 2 points");
  if (!(from > 0.0 && to > from)) invalid("curve range must satisfy 0 < from < to");
  const ObjectiveModel model = beam::tip_deflection_model(nominal, {parameter});
  const Eigen::VectorXd x0 = Eigen::VectorXd::Constant(1, nominal.get(parameter));
  const double w0 = model.evaluate(x0);
  const double slope = model.evaluate_gradient(x0)[0];
  const double curvature = model.hessian_diagonal(x0)[0];
  const double slope_z = slope * -(x0[0] * x0[0]);  // dw/dz at z0 = 1/x0

  std::ostringstream out;
  out << parameter << ",exact,first_order,second_order,reciprocal_first_order\n";
  for (std::size_t k = 0; k < points; ++k) {
    const double x = from + (to - from) * static_cast<double>(k) / static_cast<double>(points - 1);
    const double dx = x - x0[0];
    const double exact_w = model.evaluate(Eigen::VectorXd::Constant(1, x));
    const double first = w0 + slope * dx;
    const double second = first + 0.5 * curvature * dx * dx;
    const double recip = w0 + slope_z * (1.0 / x - 1.0 / x0[0]);
    out << exact(x) << ',' << exact(exact_w) << ',' << exact(first) << ',' << exact(second) << ','
        << exact(recip) << "\n";
  }
  return out.str();
}

// --- CSV ingestion --------------------------------------------------------

CsvData parse_csv(const std::string& text) {
  CsvData data;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (data.header.empty()) {
      for (const auto& f : fields) {
        if (f.empty()) throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": empty column name");
        if (parse_number(f)) {
          throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": header row required, found number '" +
                                            f + "'");
        }
      }
      data.header = std::move(fields);
      continue;
    }
    if (fields.size() != data.header.size()) {
      throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ": expected " +
                                        std::to_string(data.header.size()) + " fields, got " +
                                        std::to_string(fields.size()));
    }
    std::vector<double> row;
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto v = parse_number(fields[c]);
      if (!v) {
        throw Error(ErrorKind::Parse, "line " + std::to_string(line_no) + ", column '" + data.header[c] +
                                          "': non-numeric cell '" + fields[c] + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  if (data.header.empty()) throw Error(ErrorKind::Parse, "CSV is empty; header row required");
  data.values.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(data.header.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < rows[r].size(); ++c) {
      data.values(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
    }
  }
  return data;
}

CsvData read_csv(const std::filesystem::path& path) {
  try {
    return parse_csv(read_file(path));
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::Parse) throw Error(ErrorKind::Parse, path.string() + ": " + e.what());
    throw;
  }
}

RandomInput ingest_samples(const std::filesystem::path& path) {
  CsvData data = read_csv(path);
  return RandomInput::from_samples(std::move(data.values), std::move(data.header));
}

// --- reciprocal report -----------------------------------------------------

ReciprocalReport reciprocal_report(const DistributionRecord& record, std::size_t mc_count, std::uint64_t seed) {
  const Distribution dist = from_record(record);
  ReciprocalReport report;
  report.reciprocal_law = reciprocal_analytic(dist);
  report.moments = reciprocal_moments(dist);
  if (mc_count > 0) {
    const RandomInput input = RandomInput::from_marginals({dist}, {"x"});
    report.monte_carlo = sampled_reciprocal_moments(input, mc_count, seed);
  }
  return report;
}

ReciprocalReport reciprocal_report(const std::filesystem::path& csv_path) {
  const CsvData data = read_csv(csv_path);
  ReciprocalReport report;
  report.moments = empirical_reciprocal_moments(data.values);
  return report;
}

}  // namespace rfosm::study
