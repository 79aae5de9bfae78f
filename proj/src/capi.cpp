#include "aftxs/aftxs.h"

#include "aftxs/error.hpp"
#include "aftxs/information.hpp"
#include "aftxs/io.hpp"
#include "aftxs/sampler.hpp"
#include "aftxs/study.hpp"

#include <cstdlib>
#include <cstring>
#include <string>

struct aftxs_spec {
  aftxs::ModelSpec spec;
};

struct aftxs_dataset {
  aftxs::Dataset data;
};

namespace {

thread_local std::string last_error;

aftxs_status fail(aftxs_status s, const char* what) {
  last_error = what;
  return s;
}

// Runs f, translating exceptions into status codes.
template <class F>
aftxs_status guarded(F&& f) {
  try {
    f();
    last_error.clear();
    return AFTXS_OK;
  } catch (const aftxs::Error& e) {
    return fail(static_cast<aftxs_status>(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(AFTXS_E_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(AFTXS_E_INTERNAL, e.what());
  }
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

template <class T>
void require(const T* p, const char* name) {
  if (!p) throw aftxs::InvalidArgument(std::string(name) + " is NULL");
}

aftxs::Variant to_variant(aftxs_variant v) {
  switch (v) {
    case AFTXS_KNOWN_H:
      return aftxs::Variant::kKnownH;
    case AFTXS_UNKNOWN_H_MEAN_ZERO:
      return aftxs::Variant::kUnknownHMeanZero;
  }
  throw aftxs::InvalidArgument("unknown variant");
}

aftxs_variant from_variant(aftxs::Variant v) {
  return v == aftxs::Variant::kKnownH ? AFTXS_KNOWN_H : AFTXS_UNKNOWN_H_MEAN_ZERO;
}

void copy_matrix(const aftxs::Matrix& m, double* out) {
  if (!out) return;
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r * m.cols() + c] = m(r, c);
  }
}

}  // namespace

extern "C" {

const char* aftxs_version(void) { return "0.1.0"; }

const char* aftxs_last_error(void) { return last_error.c_str(); }

const char* aftxs_status_name(aftxs_status status) {
  switch (status) {
    case AFTXS_OK:
      return "ok";
    case AFTXS_E_INVALID_ARGUMENT:
      return "invalid argument";
    case AFTXS_E_MODEL:
      return "model condition violated";
    case AFTXS_E_NUMERICAL:
      return "numerical failure";
    case AFTXS_E_NO_ROOT:
      return "no root";
    case AFTXS_E_NO_SOLUTION:
      return "no solution";
    case AFTXS_E_DOMAIN:
      return "domain error";
    case AFTXS_E_IO:
      return "i/o error";
    case AFTXS_E_INTERNAL:
      return "internal error";
  }
  return "unknown status";
}

void aftxs_string_free(char* s) { std::free(s); }

aftxs_status aftxs_spec_from_json(const char* json, aftxs_spec** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    aftxs::io::Json j;
    try {
      j = aftxs::io::Json::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
      throw aftxs::InvalidArgument(std::string("spec is not valid JSON: ") + e.what());
    }
    *out = new aftxs_spec{aftxs::io::model_spec_from_json(j)};
  });
}

aftxs_status aftxs_spec_read(const char* path, aftxs_spec** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new aftxs_spec{aftxs::io::read_model_spec(path)};
  });
}

aftxs_status aftxs_spec_to_json(const aftxs_spec* spec, char** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    *out = dup_string(aftxs::io::to_json(spec->spec).dump(2));
  });
}

aftxs_status aftxs_spec_dim(const aftxs_spec* spec, size_t* k) {
  return guarded([&] {
    require(spec, "spec");
    require(k, "k");
    *k = static_cast<size_t>(spec->spec.theta.dim());
  });
}

aftxs_status aftxs_spec_variant(const aftxs_spec* spec, aftxs_variant* variant) {
  return guarded([&] {
    require(spec, "spec");
    require(variant, "variant");
    *variant = from_variant(spec->spec.variant);
  });
}

aftxs_status aftxs_spec_validate(const aftxs_spec* spec, int* ok, char** report_json) {
  return guarded([&] {
    require(spec, "spec");
    const aftxs::ValidationReport rep = aftxs::validate_model(spec->spec);
    if (ok) *ok = rep.ok() ? 1 : 0;
    if (report_json) *report_json = dup_string(aftxs::io::to_json(rep).dump(2));
  });
}

void aftxs_spec_free(aftxs_spec* spec) { delete spec; }

aftxs_status aftxs_simulate(const aftxs_spec* spec, size_t n, uint64_t seed, aftxs_sampler sampler,
                            aftxs_dataset** out) {
  return guarded([&] {
    require(spec, "spec");
    require(out, "out");
    if (n == 0) throw aftxs::InvalidArgument("n must be positive");
    const aftxs::SeedSpec s{seed, 0};
    aftxs::Dataset d = sampler == AFTXS_SAMPLER_MECHANISTIC ? aftxs::sample_mechanistic(spec->spec, n, s)
                                                             : aftxs::sample_direct(spec->spec, n, s);
    *out = new aftxs_dataset{std::move(d)};
  });
}

aftxs_status aftxs_dataset_from_arrays(size_t n, size_t k, const double* x, const double* z, aftxs_dataset** out) {
  return guarded([&] {
    require(x, "x");
    require(z, "z");
    require(out, "out");
    if (n == 0 || k == 0) throw aftxs::InvalidArgument("dataset needs n >= 1 and k >= 1");
    aftxs::Dataset d;
    d.records.resize(n);
    for (size_t i = 0; i < n; ++i) {
      d.records[i].x = x[i];
      d.records[i].z = Eigen::Map<const aftxs::Vector>(z + i * k, static_cast<Eigen::Index>(k));
    }
    d.check();
    *out = new aftxs_dataset{std::move(d)};
  });
}

aftxs_status aftxs_dataset_read_csv(const char* path, aftxs_dataset** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new aftxs_dataset{aftxs::io::read_dataset_csv(path)};
  });
}

aftxs_status aftxs_dataset_write_csv(const aftxs_dataset* data, const char* path) {
  return guarded([&] {
    require(data, "data");
    require(path, "path");
    aftxs::io::write_dataset_csv(data->data, path);
  });
}

aftxs_status aftxs_dataset_shape(const aftxs_dataset* data, size_t* n, size_t* k) {
  return guarded([&] {
    require(data, "data");
    if (n) *n = data->data.size();
    if (k) *k = static_cast<size_t>(data->data.dim());
  });
}

aftxs_status aftxs_dataset_record(const aftxs_dataset* data, size_t i, double* x, double* z) {
  return guarded([&] {
    require(data, "data");
    if (i >= data->data.size()) throw aftxs::InvalidArgument("record index out of range");
    const auto& r = data->data.records[i];
    if (x) *x = r.x;
    if (z) std::copy(r.z.data(), r.z.data() + r.z.size(), z);
  });
}

void aftxs_dataset_free(aftxs_dataset* data) { delete data; }

aftxs_status aftxs_information_bound(const aftxs_spec* spec, aftxs_variant variant, char** json, double* info,
                                     double* bound) {
  return guarded([&] {
    require(spec, "spec");
    const aftxs::InformationBound b = aftxs::fisher_information(spec->spec, to_variant(variant));
    if (json) *json = dup_string(aftxs::io::to_json(b).dump());
    copy_matrix(b.info, info);
    copy_matrix(b.bound, bound);
  });
}

void aftxs_estimate_options_init(aftxs_estimate_options* opts) {
  if (!opts) return;
  const aftxs::HazardOptions defaults;
  opts->variant = AFTXS_KNOWN_H;
  opts->estimator = AFTXS_ONE_STEP_SPLIT;
  opts->hazard = AFTXS_HAZARD_KERNEL;
  opts->bandwidth_scale = aftxs::SilvermanScaled{}.c;
  opts->bandwidth = 0.0;
  opts->trim_exponent = defaults.trim_exponent;
  opts->clip_bound = 0.0;
  opts->seed = 0;
}

aftxs_status aftxs_estimate(const aftxs_dataset* data, const aftxs_spec* known_h, const aftxs_estimate_options* opts,
                            char** result_json, double* theta) {
  return guarded([&] {
    require(data, "data");
    aftxs_estimate_options o;
    aftxs_estimate_options_init(&o);
    if (opts) o = *opts;
    const aftxs::Variant variant = to_variant(o.variant);
    std::optional<aftxs::CovariateModel> h;
    if (variant == aftxs::Variant::kKnownH) {
      if (!known_h) throw aftxs::InvalidArgument("the known-h variant needs a spec supplying the covariate law");
      h = known_h->spec.covariates;
    }
    aftxs::EstimatorOptions eo;
    eo.hazard = o.hazard == AFTXS_HAZARD_SYMMETRIZED ? aftxs::HazardMethod::kSymmetrized : aftxs::HazardMethod::kKernel;
    if (o.bandwidth > 0.0) {
      eo.hazard_options.bandwidth = aftxs::FixedBandwidth{o.bandwidth};
    } else {
      eo.hazard_options.bandwidth = aftxs::SilvermanScaled{o.bandwidth_scale};
    }
    eo.hazard_options.trim_exponent = o.trim_exponent;
    if (o.clip_bound > 0.0) eo.hazard_options.clip_bound = o.clip_bound;
    eo.seed = aftxs::SeedSpec{o.seed, 0};
    aftxs::EstimationResult r;
    switch (o.estimator) {
      case AFTXS_PRELIM:
        r = aftxs::preliminary(data->data, variant, h, eo);
        break;
      case AFTXS_ONE_STEP_SPLIT:
        r = aftxs::one_step_split(data->data, variant, h, eo);
        break;
      case AFTXS_ONE_STEP_PLUGIN:
        r = aftxs::one_step_plugin(data->data, variant, h, eo);
        break;
      default:
        throw aftxs::InvalidArgument("unknown estimator");
    }
    if (result_json) *result_json = dup_string(aftxs::io::to_json(r).dump(2));
    if (theta) std::copy(r.theta_hat.data(), r.theta_hat.data() + r.theta_hat.size(), theta);
  });
}

aftxs_status aftxs_study_run(const char* config_path, unsigned jobs, int keep_estimates, char** report_json) {
  return guarded([&] {
    require(config_path, "config_path");
    require(report_json, "report_json");
    aftxs::StudyConfig cfg = aftxs::io::read_study_config(config_path);
    if (keep_estimates) cfg.keep_estimates = true;
    const aftxs::StudyReport rep = aftxs::run_study(cfg, jobs);
    *report_json = dup_string(aftxs::io::to_json(rep).dump(2));
  });
}

}  // extern "C"
