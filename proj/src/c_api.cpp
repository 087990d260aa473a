#include "kitaev_lab/kitaev_lab.h"

#include "kitaev/error.hpp"
#include "kitaev/io.hpp"

#include <cstring>
#include <fstream>
#include <sstream>
#include <string>

struct kl_config {
    nlohmann::json document;
    kitaev::io::RunConfig resolved;
};

struct kl_spectrum {
    kitaev::SpectrumResult result;
    std::vector<kitaev::ModeInfo> modes;
};

namespace {

thread_local std::string last_error;

template <class Fn>
kl_status guarded(Fn&& fn) {
    try {
        fn();
        last_error.clear();
        return KL_OK;
    } catch (const kitaev::Error& e) {
        last_error = e.what();
        return static_cast<kl_status>(e.kind());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
    } catch (const std::exception& e) {
        last_error = e.what();
    } catch (...) {
        last_error = "unknown error";
    }
    return KL_ERR_INTERNAL;
}

void require(const void* p, const char* what) {
    if (!p) throw kitaev::ConfigError(std::string(what) + " must not be null");
}

void reparse(kl_config& c, nlohmann::json doc) {
    c.resolved = kitaev::io::parse_config(doc);
    c.document = std::move(doc);
}

kl_status make_config(const std::string& text, kl_config** out) {
    return guarded([&] {
        require(out, "out");
        *out = nullptr;
        nlohmann::json doc = nlohmann::json::parse(text, nullptr, false);
        if (doc.is_discarded()) throw kitaev::ConfigError("/: invalid JSON");
        auto c = std::make_unique<kl_config>();
        reparse(*c, std::move(doc));
        *out = c.release();
    });
}

}  // namespace

extern "C" {

const char* kl_version(void) {
    static const std::string v = kitaev::io::library_version();
    return v.c_str();
}

const char* kl_last_error(void) { return last_error.c_str(); }

kl_status kl_config_parse(const char* json_text, kl_config** out) {
    if (!json_text) {
        last_error = "json_text must not be null";
        return KL_ERR_CONFIG;
    }
    return make_config(json_text, out);
}

kl_status kl_config_load(const char* path, kl_config** out) {
    if (!path) {
        last_error = "path must not be null";
        return KL_ERR_CONFIG;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        last_error = std::string("cannot read config ") + path;
        return KL_ERR_CONFIG;
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return make_config(ss.str(), out);
}

void kl_config_free(kl_config* config) { delete config; }

kl_status kl_config_set(kl_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        nlohmann::json doc = config->document;
        kitaev::io::apply_override(doc, key, value);
        reparse(*config, std::move(doc));
    });
}

kl_status kl_config_set_task(kl_config* config, const char* task) {
    return guarded([&] {
        require(config, "config");
        require(task, "task");
        kitaev::io::parse_task(task);
        nlohmann::json doc = config->document;
        doc["task"] = task;
        reparse(*config, std::move(doc));
    });
}

kl_status kl_config_set_workers(kl_config* config, int workers) {
    return guarded([&] {
        require(config, "config");
        nlohmann::json doc = config->document;
        doc["workers"] = workers;
        reparse(*config, std::move(doc));
    });
}

kl_status kl_config_to_json(const kl_config* config, char** out_json) {
    return guarded([&] {
        require(config, "config");
        require(out_json, "out_json");
        const std::string s = kitaev::io::serialize_config(config->resolved).dump(2);
        char* buf = new char[s.size() + 1];
        std::memcpy(buf, s.c_str(), s.size() + 1);
        *out_json = buf;
    });
}

void kl_string_free(char* s) { delete[] s; }

kl_status kl_run(const kl_config* config, const char* out_dir, kl_diagnostic_fn diag, void* user) {
    return guarded([&] {
        require(config, "config");
        require(out_dir, "out_dir");
        kitaev::io::Diagnostics d;
        if (diag) d = [diag, user](const std::string& m) { diag(m.c_str(), user); };
        kitaev::io::run_task(config->resolved, out_dir, d);
    });
}

kl_status kl_spectrum_compute(const kl_config* config, kl_spectrum** out) {
    return guarded([&] {
        require(config, "config");
        require(out, "out");
        *out = nullptr;
        const auto& c = config->resolved;
        const auto H = c.model.boundary == kitaev::Boundary::open ? kitaev::build_bdg_obc(c.model)
                                                                    : kitaev::build_bdg_pbc(c.model);
        auto s = std::make_unique<kl_spectrum>();
        s->result = kitaev::eigendecompose(H.H, c.precision);
        s->modes = kitaev::mode_diagnostics(s->result, c.model.N, c.edge, c.model.t);
        *out = s.release();
    });
}

size_t kl_spectrum_size(const kl_spectrum* spectrum) {
    return spectrum ? static_cast<size_t>(spectrum->result.size()) : 0;
}

kl_status kl_spectrum_energy(const kl_spectrum* spectrum, size_t index, double* re, double* im) {
    return guarded([&] {
        require(spectrum, "spectrum");
        if (index >= kl_spectrum_size(spectrum)) throw kitaev::DomainError("mode index out of range");
        const auto z = spectrum->result.eigenvalues(static_cast<Eigen::Index>(index));
        if (re) *re = z.real();
        if (im) *im = z.imag();
    });
}

kl_status kl_spectrum_mode(const kl_spectrum* spectrum, size_t index, int* edge_flag, double* edge_weight,
                           double* ipr) {
    return guarded([&] {
        require(spectrum, "spectrum");
        if (index >= kl_spectrum_size(spectrum)) throw kitaev::DomainError("mode index out of range");
        const auto& m = spectrum->modes[index];
        if (edge_flag) *edge_flag = m.edge_flag ? 1 : 0;
        if (edge_weight) *edge_weight = m.edge_weight;
        if (ipr) *ipr = m.ipr;
    });
}

void kl_spectrum_free(kl_spectrum* spectrum) { delete spectrum; }

}  // extern "C"
