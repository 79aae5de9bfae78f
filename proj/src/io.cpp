#include "aftxs/io.hpp"

#include "aftxs/error.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <sstream>

namespace aftxs::io {

namespace {

void expect_object(const Json& j, const std::string& where, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw InvalidArgument(where + ": expected a JSON object");
  for (const auto& [key, _] : j.items()) {
    bool ok = false;
    for (const char* a : allowed) ok = ok || key == a;
    if (!ok) throw InvalidArgument(where + ": unknown field '" + key + "'");
  }
}

const Json& field(const Json& j, const std::string& where, const char* key) {
  if (!j.contains(key)) throw InvalidArgument(where + ": missing field '" + key + "'");
  return j.at(key);
}

double number(const Json& j, const std::string& where) {
  if (!j.is_number()) throw InvalidArgument(where + ": expected a number");
  return j.get<double>();
}

double number_field(const Json& j, const std::string& where, const char* key) {
  return number(field(j, where, key), where + "." + key);
}

std::uint64_t unsigned_field(const Json& j, const std::string& where, const char* key) {
  const Json& v = field(j, where, key);
  if (!v.is_number_unsigned()) throw InvalidArgument(where + "." + key + ": expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string string_field(const Json& j, const std::string& where, const char* key) {
  const Json& v = field(j, where, key);
  if (!v.is_string()) throw InvalidArgument(where + "." + key + ": expected a string");
  return v.get<std::string>();
}

std::vector<double> numbers(const Json& j, const std::string& where) {
  if (!j.is_array()) throw InvalidArgument(where + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) out.push_back(number(j[i], where + "[" + std::to_string(i) + "]"));
  return out;
}

Vector vector_from(const Json& j, const std::string& where) {
  const auto v = numbers(j, where);
  return Eigen::Map<const Vector>(v.data(), static_cast<Eigen::Index>(v.size()));
}

Matrix matrix_from(const Json& j, const std::string& where) {
  if (!j.is_array() || j.empty()) throw InvalidArgument(where + ": expected a nonempty array of rows");
  const std::size_t rows = j.size();
  Matrix m;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = numbers(j[r], where + "[" + std::to_string(r) + "]");
    if (r == 0) m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(row.size()));
    if (row.size() != static_cast<std::size_t>(m.cols())) throw InvalidArgument(where + ": ragged matrix");
    for (std::size_t c = 0; c < row.size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

Json json_vector(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

Json json_matrix(const Matrix& m) {
  Json a = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(json_vector(m.row(r).transpose()));
  return a;
}

Json optional_number(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

ScalarLaw scalar_law_from_json(const Json& j, const std::string& where) {
  const std::string kind = string_field(j, where, "kind");
  if (kind == "normal") {
    expect_object(j, where, {"kind", "mean", "sd"});
    return NormalLaw{number_field(j, where, "mean"), number_field(j, where, "sd")};
  }
  if (kind == "uniform") {
    expect_object(j, where, {"kind", "lo", "hi"});
    return UniformLaw{number_field(j, where, "lo"), number_field(j, where, "hi")};
  }
  if (kind == "discrete") {
    expect_object(j, where, {"kind", "points", "probs"});
    return DiscreteLaw{numbers(field(j, where, "points"), where + ".points"),
                       numbers(field(j, where, "probs"), where + ".probs")};
  }
  throw InvalidArgument(where + ": unknown scalar law '" + kind + "' (normal, uniform, discrete)");
}

Json scalar_law_json(const ScalarLaw& law) {
  return std::visit(
      [](const auto& l) -> Json {
        using T = std::decay_t<decltype(l)>;
        if constexpr (std::is_same_v<T, NormalLaw>) {
          return {{"kind", "normal"}, {"mean", l.mean}, {"sd", l.sd}};
        } else if constexpr (std::is_same_v<T, UniformLaw>) {
          return {{"kind", "uniform"}, {"lo", l.lo}, {"hi", l.hi}};
        } else {
          return {{"kind", "discrete"}, {"points", l.points}, {"probs", l.probs}};
        }
      },
      law);
}

}  // namespace

Json to_json(const BaselineModel& b) {
  return std::visit(
      [](const auto& k) -> Json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, Exponential>) {
          return {{"kind", "exponential"}, {"params", {{"rate", k.rate}}}};
        } else if constexpr (std::is_same_v<T, Weibull>) {
          return {{"kind", "weibull"}, {"params", {{"shape", k.shape}, {"scale", k.scale}}}};
        } else if constexpr (std::is_same_v<T, Gamma>) {
          return {{"kind", "gamma"}, {"params", {{"shape", k.shape}, {"rate", k.rate}}}};
        } else {
          return {{"kind", "tabulated"}, {"params", {{"v", k.v}, {"g", k.g}}}};
        }
      },
      b.kind());
}

BaselineModel baseline_from_json(const Json& j) {
  const std::string where = "baseline";
  expect_object(j, where, {"kind", "params"});
  const std::string kind = string_field(j, where, "kind");
  const Json& p = field(j, where, "params");
  const std::string pw = where + ".params";
  if (kind == "exponential") {
    expect_object(p, pw, {"rate"});
    return BaselineModel(Exponential{number_field(p, pw, "rate")});
  }
  if (kind == "weibull") {
    expect_object(p, pw, {"shape", "scale"});
    return BaselineModel(Weibull{number_field(p, pw, "shape"), number_field(p, pw, "scale")});
  }
  if (kind == "gamma") {
    expect_object(p, pw, {"shape", "rate"});
    return BaselineModel(Gamma{number_field(p, pw, "shape"), number_field(p, pw, "rate")});
  }
  if (kind == "tabulated") {
    expect_object(p, pw, {"v", "g"});
    return BaselineModel(Tabulated{numbers(field(p, pw, "v"), pw + ".v"), numbers(field(p, pw, "g"), pw + ".g")});
  }
  throw InvalidArgument(where + ": unknown kind '" + kind + "' (exponential, weibull, gamma, tabulated)");
}

Json to_json(const CovariateModel& c) {
  return std::visit(
      [](const auto& k) -> Json {
        using T = std::decay_t<decltype(k)>;
        if constexpr (std::is_same_v<T, GaussianVector>) {
          return {{"kind", "gaussian"}, {"params", {{"mean", json_vector(k.mean)}, {"cov", json_matrix(k.cov)}}}};
        } else if constexpr (std::is_same_v<T, DiscreteSupport>) {
          Json pts = Json::array();
          for (const auto& p : k.points) pts.push_back(json_vector(p));
          return {{"kind", "discrete"}, {"params", {{"points", pts}, {"probs", k.probs}}}};
        } else {
          Json laws = Json::array();
          for (const auto& l : k.laws) laws.push_back(scalar_law_json(l));
          return {{"kind", "product"}, {"params", {{"laws", laws}}}};
        }
      },
      c.kind());
}

CovariateModel covariates_from_json(const Json& j) {
  const std::string where = "covariates";
  expect_object(j, where, {"kind", "params"});
  const std::string kind = string_field(j, where, "kind");
  const Json& p = field(j, where, "params");
  const std::string pw = where + ".params";
  if (kind == "gaussian") {
    expect_object(p, pw, {"mean", "cov"});
    return CovariateModel(
        GaussianVector{vector_from(field(p, pw, "mean"), pw + ".mean"), matrix_from(field(p, pw, "cov"), pw + ".cov")});
  }
  if (kind == "discrete") {
    expect_object(p, pw, {"points", "probs"});
    const Json& pts = field(p, pw, "points");
    if (!pts.is_array()) throw InvalidArgument(pw + ".points: expected an array of points");
    DiscreteSupport d;
    for (std::size_t i = 0; i < pts.size(); ++i) {
      const std::string w = pw + ".points[" + std::to_string(i) + "]";
      d.points.push_back(pts[i].is_number() ? Vector::Constant(1, number(pts[i], w)) : vector_from(pts[i], w));
    }
    d.probs = numbers(field(p, pw, "probs"), pw + ".probs");
    return CovariateModel(std::move(d));
  }
  if (kind == "product") {
    expect_object(p, pw, {"laws"});
    const Json& laws = field(p, pw, "laws");
    if (!laws.is_array()) throw InvalidArgument(pw + ".laws: expected an array");
    ProductOfScalars prod;
    for (std::size_t i = 0; i < laws.size(); ++i) {
      prod.laws.push_back(scalar_law_from_json(laws[i], pw + ".laws[" + std::to_string(i) + "]"));
    }
    return CovariateModel(std::move(prod));
  }
  throw InvalidArgument(where + ": unknown kind '" + kind + "' (gaussian, discrete, product)");
}

Json to_json(const ModelSpec& spec) {
  return {{"theta", json_vector(spec.theta.value())},
          {"baseline", to_json(spec.baseline)},
          {"covariates", to_json(spec.covariates)},
          {"variant", to_string(spec.variant)}};
}

ModelSpec model_spec_from_json(const Json& j) {
  expect_object(j, "spec", {"theta", "baseline", "covariates", "variant"});
  const Json& t = field(j, "spec", "theta");
  Vector theta = t.is_number() ? Vector::Constant(1, number(t, "spec.theta")) : vector_from(t, "spec.theta");
  const Variant variant = j.contains("variant") ? variant_from_string(string_field(j, "spec", "variant"))
                                                : Variant::kKnownH;
  return ModelSpec(RegressionParam(std::move(theta)), baseline_from_json(field(j, "spec", "baseline")),
                   covariates_from_json(field(j, "spec", "covariates")), variant);
}

Json to_json(const SeedSpec& seed) { return {{"base_seed", seed.base_seed}, {"stream_id", seed.stream_id}}; }

SeedSpec seed_from_json(const Json& j) {
  if (j.is_number_unsigned()) return SeedSpec{j.get<std::uint64_t>(), 0};
  expect_object(j, "seed", {"base_seed", "stream_id"});
  SeedSpec s;
  s.base_seed = unsigned_field(j, "seed", "base_seed");
  if (j.contains("stream_id")) s.stream_id = unsigned_field(j, "seed", "stream_id");
  return s;
}

Json to_json(const HazardOptions& opts, HazardMethod method) {
  Json bw = std::visit(
      [](const auto& b) -> Json {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, SilvermanScaled>) {
          return {{"rule", "silverman"}, {"c", b.c}};
        } else {
          return {{"rule", "fixed"}, {"h", b.h}};
        }
      },
      opts.bandwidth);
  return {{"method", to_string(method)},
          {"bandwidth", bw},
          {"trim_exponent", opts.trim_exponent},
          {"trim_floor", optional_number(opts.trim_floor)},
          {"clip_bound", optional_number(opts.clip_bound)},
          {"grid_cells", opts.grid_cells}};
}

HazardOptions hazard_options_from_json(const Json& j) {
  const std::string where = "hazard";
  expect_object(j, where, {"method", "bandwidth", "trim_exponent", "trim_floor", "clip_bound", "grid_cells"});
  HazardOptions o;
  if (j.contains("bandwidth")) {
    const Json& b = j.at("bandwidth");
    const std::string bw = where + ".bandwidth";
    const std::string rule = string_field(b, bw, "rule");
    if (rule == "silverman") {
      expect_object(b, bw, {"rule", "c"});
      o.bandwidth = SilvermanScaled{b.contains("c") ? number_field(b, bw, "c") : SilvermanScaled{}.c};
    } else if (rule == "fixed") {
      expect_object(b, bw, {"rule", "h"});
      o.bandwidth = FixedBandwidth{number_field(b, bw, "h")};
    } else {
      throw InvalidArgument(bw + ": unknown rule '" + rule + "' (silverman, fixed)");
    }
  }
  if (j.contains("trim_exponent")) o.trim_exponent = number_field(j, where, "trim_exponent");
  if (j.contains("trim_floor") && !j.at("trim_floor").is_null()) o.trim_floor = number_field(j, where, "trim_floor");
  if (j.contains("clip_bound") && !j.at("clip_bound").is_null()) o.clip_bound = number_field(j, where, "clip_bound");
  if (j.contains("grid_cells")) o.grid_cells = unsigned_field(j, where, "grid_cells");
  return o;
}

HazardMethod hazard_method_from_json(const Json& j) {
  if (!j.contains("method")) return HazardMethod::kKernel;
  return hazard_method_from_string(string_field(j, "hazard", "method"));
}

namespace {

Json fit_info_json(const HazardFitInfo& f) {
  return {{"method", to_string(f.method)},   {"n", f.n},
          {"bandwidth", f.bandwidth},        {"trim_floor", f.trim_floor},
          {"clip_bound", f.clip_bound},      {"trimmed", f.trimmed},
          {"clipped", f.clipped},            {"seed", f.seed ? to_json(*f.seed) : Json(nullptr)}};
}

}  // namespace

Json to_json(const EstimationResult& r) {
  const auto& d = r.diagnostics;
  Json fits = Json::array();
  for (const auto& f : d.hazard_fits) fits.push_back(fit_info_json(f));
  return {{"theta_hat", json_vector(r.theta_hat)},
          {"theta_prelim", json_vector(r.theta_prelim)},
          {"stderr", json_vector(r.stderr)},
          {"info_hat", json_matrix(r.info_hat)},
          {"diagnostics",
           {{"estimator", d.estimator},
            {"variant", to_string(d.variant)},
            {"n", d.n},
            {"newton_iterations", d.newton_iterations},
            {"used_bisection", d.used_bisection},
            {"split_scheme", d.split_scheme},
            {"hazard_fits", fits}}}};
}

Json to_json(const InformationBound& b) {
  return {{"info", json_matrix(b.info)}, {"bound", json_matrix(b.bound)}, {"variant", to_string(b.variant)}};
}

Json to_json(const ValidationReport& r) {
  Json checks = Json::array();
  for (const auto& c : r.checks) {
    checks.push_back({{"id", c.id}, {"quantity", c.quantity}, {"value", c.value}, {"passed", c.passed},
                      {"detail", c.detail}});
  }
  return {{"ok", r.ok()}, {"checks", checks}};
}

Json to_json(const StudyConfig& c) {
  Json ests = Json::array();
  for (auto e : c.estimators) ests.push_back(to_string(e));
  return {{"spec", to_json(c.spec)},
          {"n", c.n},
          {"replications", c.replications},
          {"estimators", ests},
          {"sampler", to_string(c.sampler)},
          {"pool_factor", c.pool.pool_factor},
          {"hazard", to_json(c.hazard, c.hazard_method)},
          {"base_seed", c.base_seed},
          {"keep_estimates", c.keep_estimates}};
}

StudyConfig study_config_from_json(const Json& j, const std::string& base_dir) {
  const std::string where = "study";
  expect_object(j, where,
                {"spec", "n", "replications", "estimators", "sampler", "pool_factor", "hazard", "base_seed",
                 "keep_estimates"});
  const Json& s = field(j, where, "spec");
  ModelSpec spec = s.is_string() ? read_model_spec((std::filesystem::path(base_dir) / s.get<std::string>()).string())
                                 : model_spec_from_json(s);
  StudyConfig c{std::move(spec)};
  c.n = unsigned_field(j, where, "n");
  c.replications = unsigned_field(j, where, "replications");
  if (j.contains("estimators")) {
    const Json& e = j.at("estimators");
    if (!e.is_array()) throw InvalidArgument("study.estimators: expected an array of names");
    c.estimators.clear();
    for (const auto& name : e) {
      if (!name.is_string()) throw InvalidArgument("study.estimators: expected strings");
      c.estimators.push_back(estimator_from_string(name.get<std::string>()));
    }
  }
  if (j.contains("sampler")) c.sampler = sampler_from_string(string_field(j, where, "sampler"));
  if (j.contains("pool_factor")) c.pool.pool_factor = unsigned_field(j, where, "pool_factor");
  if (j.contains("hazard")) {
    c.hazard = hazard_options_from_json(j.at("hazard"));
    c.hazard_method = hazard_method_from_json(j.at("hazard"));
  }
  c.base_seed = unsigned_field(j, where, "base_seed");
  if (j.contains("keep_estimates")) {
    if (!j.at("keep_estimates").is_boolean()) throw InvalidArgument("study.keep_estimates: expected a boolean");
    c.keep_estimates = j.at("keep_estimates").get<bool>();
  }
  c.check();
  return c;
}

Json to_json(const StudyReport& r) {
  Json ests = Json::array();
  for (const auto& e : r.estimators) {
    Json details = Json::array();
    for (const auto& f : e.failures) {
      details.push_back({{"replication", f.replication}, {"code", f.code}, {"message", f.message}});
    }
    Json by_code = Json::object();
    for (const auto& [code, count] : e.failure_counts) by_code[code] = count;
    Json entry = {{"estimator", to_string(e.kind)},
                  {"replications", e.successes + e.failures.size()},
                  {"successes", e.successes},
                  {"failures", {{"count", e.failures.size()}, {"by_code", by_code}, {"details", details}}},
                  {"mean", json_vector(e.mean)},
                  {"bias", json_vector(e.bias)},
                  {"n_var", json_matrix(e.n_var)},
                  {"coverage", json_vector(e.coverage)},
                  {"efficiency_ratio", json_vector(e.efficiency_ratio)},
                  {"mean_stderr", json_vector(e.mean_stderr)}};
    if (!e.estimates.empty()) {
      Json rows = Json::array();
      for (const auto& v : e.estimates) rows.push_back(json_vector(v));
      entry["estimates"] = rows;
    }
    ests.push_back(entry);
  }
  return {{"config", to_json(r.config)}, {"oracle", to_json(r.oracle)}, {"estimators", ests}};
}

Json to_json(const Dataset& d, const std::optional<ModelSpec>& spec) {
  Json cols = Json::array({"x"});
  for (Eigen::Index c = 0; c < d.dim(); ++c) cols.push_back("z" + std::to_string(c + 1));
  Json rows = Json::array();
  for (const auto& r : d.records) {
    Json row = Json::array({r.x});
    for (Eigen::Index c = 0; c < r.z.size(); ++c) row.push_back(r.z(c));
    rows.push_back(row);
  }
  return {{"spec", spec ? to_json(*spec) : Json(nullptr)},
          {"seed", d.seed ? to_json(*d.seed) : Json(nullptr)},
          {"columns", cols},
          {"records", rows}};
}

Dataset dataset_from_json(const Json& j) {
  expect_object(j, "dataset", {"spec", "seed", "columns", "records"});
  Dataset d;
  if (j.contains("seed") && !j.at("seed").is_null()) d.seed = seed_from_json(j.at("seed"));
  const Json& rows = field(j, "dataset", "records");
  if (!rows.is_array()) throw InvalidArgument("dataset.records: expected an array of rows");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto v = numbers(rows[i], "dataset.records[" + std::to_string(i) + "]");
    if (v.size() < 2) throw InvalidArgument("dataset.records[" + std::to_string(i) + "]: need x and covariates");
    Observation o;
    o.x = v[0];
    o.z = Eigen::Map<const Vector>(v.data() + 1, static_cast<Eigen::Index>(v.size() - 1));
    d.records.push_back(std::move(o));
  }
  d.check();
  return d;
}

Json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw InvalidArgument("'" + path + "' is not valid JSON: " + e.what());
  }
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write to '" + path + "' failed");
}

ModelSpec read_model_spec(const std::string& path) { return model_spec_from_json(read_json(path)); }

StudyConfig read_study_config(const std::string& path) {
  return study_config_from_json(read_json(path), std::filesystem::path(path).parent_path().string());
}

std::string dataset_csv(const Dataset& d) {
  std::string out = "x";
  for (Eigen::Index c = 0; c < d.dim(); ++c) out += ",z" + std::to_string(c + 1);
  out += '\n';
  char buf[32];
  for (const auto& r : d.records) {
    std::snprintf(buf, sizeof buf, "%.17g", r.x);
    out += buf;
    for (Eigen::Index c = 0; c < r.z.size(); ++c) {
      std::snprintf(buf, sizeof buf, ",%.17g", r.z(c));
      out += buf;
    }
    out += '\n';
  }
  return out;
}

void write_dataset_csv(const Dataset& d, const std::string& path) { write_text(path, dataset_csv(d)); }

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    std::string_view f = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!f.empty() && (f.front() == ' ' || f.front() == '\t')) f.remove_prefix(1);
    while (!f.empty() && (f.back() == ' ' || f.back() == '\t' || f.back() == '\r')) f.remove_suffix(1);
    out.push_back(f);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

Dataset parse_dataset_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::size_t k = 0;
  bool header = false;
  Dataset d;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_fields(line);
    const std::string at = "line " + std::to_string(lineno) + ": ";
    if (!header) {
      if (fields.size() < 2 || fields[0] != "x") {
        throw InvalidArgument(at + "expected header 'x,z1,...,zk'");
      }
      for (std::size_t c = 1; c < fields.size(); ++c) {
        if (fields[c] != "z" + std::to_string(c)) {
          throw InvalidArgument(at + "expected column 'z" + std::to_string(c) + "', found '" +
                                std::string(fields[c]) + "'");
        }
      }
      k = fields.size() - 1;
      header = true;
      continue;
    }
    if (fields.size() != k + 1) {
      throw InvalidArgument(at + "expected " + std::to_string(k + 1) + " fields, found " +
                            std::to_string(fields.size()));
    }
    std::vector<double> v(fields.size());
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const auto* first = fields[c].data();
      const auto* last = first + fields[c].size();
      const auto [ptr, ec] = std::from_chars(first, last, v[c]);
      if (ec != std::errc() || ptr != last || fields[c].empty()) {
        throw InvalidArgument(at + "field " + std::to_string(c + 1) + " ('" + std::string(fields[c]) +
                              "') is not a number");
      }
      if (!std::isfinite(v[c])) throw InvalidArgument(at + "field " + std::to_string(c + 1) + " is not finite");
    }
    if (!(v[0] > 0.0)) throw InvalidArgument(at + "x must be positive, found " + std::string(fields[0]));
    Observation o;
    o.x = v[0];
    o.z = Eigen::Map<const Vector>(v.data() + 1, static_cast<Eigen::Index>(k));
    d.records.push_back(std::move(o));
  }
  if (!header) throw InvalidArgument("empty dataset: expected header 'x,z1,...,zk'");
  if (d.records.empty()) throw InvalidArgument("dataset has a header but no rows");
  return d;
}

Dataset read_dataset_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_dataset_csv(ss.str());
}

}  // namespace aftxs::io
