// Command-line front end; talks to the library only through the C API.
#include "aftxs/aftxs.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitFailure = 2;

// Bad input files are reported like usage errors; model and numerical
// failures get their own exit status.
int exit_code(aftxs_status s) {
  switch (s) {
    case AFTXS_OK:
      return kExitOk;
    case AFTXS_E_INVALID_ARGUMENT:
    case AFTXS_E_IO:
      return kExitUsage;
    default:
      return kExitFailure;
  }
}

struct Failure {
  aftxs_status status;
};

void check(aftxs_status s) {
  if (s != AFTXS_OK) throw Failure{s};
}

struct SpecDeleter {
  void operator()(aftxs_spec* p) const { aftxs_spec_free(p); }
};
struct DatasetDeleter {
  void operator()(aftxs_dataset* p) const { aftxs_dataset_free(p); }
};
struct StringDeleter {
  void operator()(char* p) const { aftxs_string_free(p); }
};
using SpecPtr = std::unique_ptr<aftxs_spec, SpecDeleter>;
using DatasetPtr = std::unique_ptr<aftxs_dataset, DatasetDeleter>;
using StringPtr = std::unique_ptr<char, StringDeleter>;

SpecPtr read_spec(const std::string& path) {
  aftxs_spec* s = nullptr;
  check(aftxs_spec_read(path.c_str(), &s));
  return SpecPtr(s);
}

aftxs_variant parse_variant(const std::string& v) {
  if (v == "known-h") return AFTXS_KNOWN_H;
  return AFTXS_UNKNOWN_H_MEAN_ZERO;
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) {
    std::cerr << "error: cannot write '" << path << "'\n";
    throw Failure{AFTXS_E_IO};
  }
}

unsigned default_jobs() {
  if (const char* env = std::getenv("AFT_XSECT_JOBS")) {
    try {
      return static_cast<unsigned>(std::stoul(env));
    } catch (const std::exception&) {
      std::cerr << "warning: ignoring non-numeric AFT_XSECT_JOBS='" << env << "'\n";
    }
  }
  return 1;
}

void write_estimates_csv(const std::string& report, const std::string& path) {
  const auto j = nlohmann::ordered_json::parse(report);
  std::string out = "estimator,replication";
  const std::size_t k = j["config"]["spec"]["theta"].size();
  for (std::size_t c = 0; c < k; ++c) out += ",theta" + std::to_string(c + 1);
  out += '\n';
  for (const auto& e : j["estimators"]) {
    const auto& rows = e["estimates"];
    for (std::size_t r = 0; r < rows.size(); ++r) {
      out += e["estimator"].get<std::string>() + "," + std::to_string(r);
      for (const auto& v : rows[r]) out += "," + (v.is_null() ? std::string("nan") : v.dump());
      out += '\n';
    }
  }
  write_file(path, out);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Simulation and efficient estimation for the accelerated failure time model under cross-sectional "
               "sampling"};
  app.require_subcommand(1);
  app.set_version_flag("--version", aftxs_version());

  const std::vector<std::string> variants{"known-h", "unknown-h-mean-zero", "unknown-h"};

  std::string sim_spec, sim_out, sim_sampler = "direct";
  std::size_t sim_n = 0;
  std::uint64_t sim_seed = 0;
  auto* simulate = app.add_subcommand("simulate", "Draw a cross-sectional sample and write it as CSV");
  simulate->add_option("--spec", sim_spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  simulate->add_option("--n", sim_n, "Sample size")->required()->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim_seed, "Base seed")->required();
  simulate->add_option("--out", sim_out, "Output CSV (x,z1,...,zk)")->required();
  simulate->add_option("--sampler", sim_sampler, "direct or mechanistic")
      ->check(CLI::IsMember({"direct", "mechanistic"}));

  std::string est_data, est_variant, est_known_h, est_estimator = "one_step_split", est_hazard = "kernel",
                                                  est_out;
  std::uint64_t est_seed = 0;
  aftxs_estimate_options defaults;
  aftxs_estimate_options_init(&defaults);
  double est_bw_scale = defaults.bandwidth_scale;
  auto* estimate = app.add_subcommand("estimate", "Estimate theta from a CSV dataset");
  estimate->add_option("--data", est_data, "Input CSV (x,z1,...,zk)")->required()->check(CLI::ExistingFile);
  estimate->add_option("--variant", est_variant, "known-h or unknown-h-mean-zero")
      ->required()
      ->check(CLI::IsMember(variants));
  estimate->add_option("--known-h", est_known_h, "Spec JSON whose covariate law is the known h")
      ->check(CLI::ExistingFile);
  estimate->add_option("--estimator", est_estimator, "prelim, one_step_split or one_step_plugin")
      ->check(CLI::IsMember({"prelim", "one_step_split", "one_step_plugin"}));
  estimate->add_option("--hazard", est_hazard, "kernel or symmetrized")
      ->check(CLI::IsMember({"kernel", "symmetrized"}));
  estimate->add_option("--bandwidth-scale", est_bw_scale, "Multiplier of the Silverman bandwidth")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  estimate->add_option("--seed", est_seed, "Seed for the randomized hazard estimator");
  estimate->add_option("--out", est_out, "Write the result JSON here instead of stdout");

  std::string bound_spec, bound_variant;
  auto* bound = app.add_subcommand("bound", "Print the information bound of a spec as JSON");
  bound->add_option("--spec", bound_spec, "Model spec JSON")->required()->check(CLI::ExistingFile);
  bound->add_option("--variant", bound_variant, "known-h or unknown-h-mean-zero")
      ->required()
      ->check(CLI::IsMember(variants));

  std::string val_spec;
  auto* validate = app.add_subcommand("validate", "Check the regularity conditions of a spec");
  validate->add_option("--spec", val_spec, "Model spec JSON")->required()->check(CLI::ExistingFile);

  std::string study_config, study_out, study_csv;
  unsigned study_jobs = default_jobs();
  auto* study = app.add_subcommand("study", "Run a Monte Carlo study");
  study->add_option("--config", study_config, "Study config JSON")->required()->check(CLI::ExistingFile);
  study->add_option("--out", study_out, "Report JSON")->required();
  study->add_option("--jobs", study_jobs, "Worker threads (default $AFT_XSECT_JOBS or 1; 0 = all cores)");
  study->add_option("--estimates-csv", study_csv, "Also write per-replication estimates as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*simulate) {
      const SpecPtr spec = read_spec(sim_spec);
      aftxs_dataset* d = nullptr;
      check(aftxs_simulate(spec.get(), sim_n, sim_seed,
                           sim_sampler == "mechanistic" ? AFTXS_SAMPLER_MECHANISTIC : AFTXS_SAMPLER_DIRECT, &d));
      const DatasetPtr data(d);
      check(aftxs_dataset_write_csv(data.get(), sim_out.c_str()));
    } else if (*estimate) {
      const aftxs_variant variant = parse_variant(est_variant);
      if (variant == AFTXS_KNOWN_H && est_known_h.empty()) {
        std::cerr << "error: --variant known-h requires --known-h SPEC\n" << estimate->help();
        return kExitUsage;
      }
      aftxs_dataset* d = nullptr;
      check(aftxs_dataset_read_csv(est_data.c_str(), &d));
      const DatasetPtr data(d);
      SpecPtr known;
      if (!est_known_h.empty()) known = read_spec(est_known_h);
      aftxs_estimate_options opts;
      aftxs_estimate_options_init(&opts);
      opts.variant = variant;
      opts.estimator = est_estimator == "prelim"           ? AFTXS_PRELIM
                       : est_estimator == "one_step_plugin" ? AFTXS_ONE_STEP_PLUGIN
                                                            : AFTXS_ONE_STEP_SPLIT;
      opts.hazard = est_hazard == "symmetrized" ? AFTXS_HAZARD_SYMMETRIZED : AFTXS_HAZARD_KERNEL;
      opts.bandwidth_scale = est_bw_scale;
      opts.seed = est_seed;
      char* json = nullptr;
      check(aftxs_estimate(data.get(), known.get(), &opts, &json, nullptr));
      const StringPtr text(json);
      if (est_out.empty()) {
        std::cout << text.get() << '\n';
      } else {
        write_file(est_out, std::string(text.get()) + "\n");
      }
    } else if (*bound) {
      const SpecPtr spec = read_spec(bound_spec);
      char* json = nullptr;
      check(aftxs_information_bound(spec.get(), parse_variant(bound_variant), &json, nullptr, nullptr));
      const StringPtr text(json);
      std::cout << text.get() << '\n';
    } else if (*validate) {
      const SpecPtr spec = read_spec(val_spec);
      int ok = 0;
      char* json = nullptr;
      check(aftxs_spec_validate(spec.get(), &ok, &json));
      const StringPtr text(json);
      std::cout << text.get() << '\n';
      return ok ? kExitOk : kExitFailure;
    } else if (*study) {
      char* json = nullptr;
      check(aftxs_study_run(study_config.c_str(), study_jobs, study_csv.empty() ? 0 : 1, &json));
      const StringPtr text(json);
      write_file(study_out, std::string(text.get()) + "\n");
      if (!study_csv.empty()) write_estimates_csv(text.get(), study_csv);
    }
  } catch (const Failure& f) {
    if (f.status != AFTXS_OK && *aftxs_last_error()) {
      std::cerr << "error (" << aftxs_status_name(f.status) << "): " << aftxs_last_error() << '\n';
    }
    return exit_code(f.status);
  }
  return kExitOk;
}
