#include "cbas/cbas.h"

#include "cbas/bench.hpp"

#include <cstring>
#include <string>

namespace {

thread_local std::string g_last_error;

struct ConfigHandle {
    cbas::ExperimentConfig config;
};

cbas::ExperimentConfig& unwrap(cbas_config* c) {
    return reinterpret_cast<ConfigHandle*>(c)->config;
}

const cbas::ExperimentConfig& unwrap(const cbas_config* c) {
    return reinterpret_cast<const ConfigHandle*>(c)->config;
}

char* copy_string(const std::string& s) {
    char* out = static_cast<char*>(std::malloc(s.size() + 1));
    if (out != nullptr) std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

int fail(int code, const std::string& message) {
    g_last_error = message;
    return code;
}

// runs `body`, translating exceptions into status codes
template <typename F>
int guarded(F&& body) {
    try {
        g_last_error.clear();
        return body();
    } catch (const cbas::ConfigError& e) {
        return fail(CBAS_ERR_CONFIG, e.what());
    } catch (const std::invalid_argument& e) {
        return fail(CBAS_ERR_CONFIG, e.what());
    } catch (const std::exception& e) {
        return fail(CBAS_ERR_RUNTIME, e.what());
    } catch (...) {
        return fail(CBAS_ERR_RUNTIME, "unknown error");
    }
}

}  // namespace

extern "C" {

const char* cbas_version(void) { return "0.1.0"; }

const char* cbas_last_error(void) { return g_last_error.c_str(); }

int cbas_config_default(const char* scenario, cbas_config** out) {
    return guarded([&]() -> int {
        if (scenario == nullptr || out == nullptr) {
            return fail(CBAS_ERR_CONFIG, "null argument");
        }
        auto* handle = new ConfigHandle{
            cbas::ExperimentConfig::defaults(cbas::scenario_from_string(scenario))};
        *out = reinterpret_cast<cbas_config*>(handle);
        return CBAS_OK;
    });
}

int cbas_config_load(const char* path, cbas_config** out) {
    return guarded([&]() -> int {
        if (path == nullptr || out == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        auto* handle = new ConfigHandle{cbas::ExperimentConfig::load(path)};
        *out = reinterpret_cast<cbas_config*>(handle);
        return CBAS_OK;
    });
}

int cbas_config_parse(const char* json_text, cbas_config** out) {
    return guarded([&]() -> int {
        if (json_text == nullptr || out == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(json_text);
        } catch (const nlohmann::json::exception& e) {
            return fail(CBAS_ERR_CONFIG, std::string("config is not valid JSON: ") + e.what());
        }
        auto* handle = new ConfigHandle{cbas::ExperimentConfig::from_json(j)};
        *out = reinterpret_cast<cbas_config*>(handle);
        return CBAS_OK;
    });
}

int cbas_config_set_scenario(cbas_config* config, const char* scenario) {
    return guarded([&]() -> int {
        if (config == nullptr || scenario == nullptr) {
            return fail(CBAS_ERR_CONFIG, "null argument");
        }
        unwrap(config).scenario = cbas::scenario_from_string(scenario);
        return CBAS_OK;
    });
}

int cbas_config_set_seed(cbas_config* config, unsigned long long master_seed) {
    return guarded([&]() -> int {
        if (config == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        unwrap(config).master_seed = master_seed;
        return CBAS_OK;
    });
}

int cbas_config_set_out_dir(cbas_config* config, const char* dir) {
    return guarded([&]() -> int {
        if (config == nullptr || dir == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        unwrap(config).out_dir = dir;
        return CBAS_OK;
    });
}

int cbas_config_validate(const cbas_config* config) {
    return guarded([&]() -> int {
        if (config == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        unwrap(config).validate();
        return CBAS_OK;
    });
}

int cbas_config_to_json(const cbas_config* config, char** out_json) {
    return guarded([&]() -> int {
        if (config == nullptr || out_json == nullptr) {
            return fail(CBAS_ERR_CONFIG, "null argument");
        }
        *out_json = copy_string(unwrap(config).to_json().dump(2));
        return *out_json == nullptr ? fail(CBAS_ERR_RUNTIME, "out of memory") : CBAS_OK;
    });
}

void cbas_config_free(cbas_config* config) {
    delete reinterpret_cast<ConfigHandle*>(config);
}

int cbas_run(const cbas_config* config, char** out_summary_json) {
    return guarded([&]() -> int {
        if (config == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        const cbas::ScenarioResult result = cbas::run_scenario(unwrap(config));
        if (out_summary_json != nullptr) {
            *out_summary_json = copy_string(result.summary.dump(2));
            if (*out_summary_json == nullptr) return fail(CBAS_ERR_RUNTIME, "out of memory");
        }
        return CBAS_OK;
    });
}

int cbas_report(const char* dir, char** out_summary_json) {
    return guarded([&]() -> int {
        if (dir == nullptr) return fail(CBAS_ERR_CONFIG, "null argument");
        const nlohmann::json summary = cbas::report(dir);
        if (out_summary_json != nullptr) {
            *out_summary_json = copy_string(summary.dump(2));
            if (*out_summary_json == nullptr) return fail(CBAS_ERR_RUNTIME, "out of memory");
        }
        return CBAS_OK;
    });
}

void cbas_string_free(char* s) { std::free(s); }

}  // extern "C"
