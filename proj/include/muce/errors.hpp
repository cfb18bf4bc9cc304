#pragma once

#include <stdexcept>
#include <string>

namespace muce {

// Error codes mirror the failure modes of the public operations. The CLI maps
// them onto exit codes and machine-readable categories.
enum class Errc {
    unknown_feature,
    kind_mismatch,
    unknown_category,
    missing_labels,
    k_too_large,
    empty_dataset,
    not_categorical,
    empty_curve,
    mismatched_curves,
    predictor_failure,
    schema_mismatch,
    impossible_geometry,
    io_failure,
    bad_config,
};

inline const char* errc_name(Errc c) {
    switch (c) {
        case Errc::unknown_feature: return "unknown-feature";
        case Errc::kind_mismatch: return "kind-mismatch";
        case Errc::unknown_category: return "unknown-category";
        case Errc::missing_labels: return "missing-labels";
        case Errc::k_too_large: return "k-too-large";
        case Errc::empty_dataset: return "empty-dataset";
        case Errc::not_categorical: return "not-categorical";
        case Errc::empty_curve: return "empty-curve";
        case Errc::mismatched_curves: return "mismatched-curves";
        case Errc::predictor_failure: return "predictor-failure";
        case Errc::schema_mismatch: return "schema-mismatch";
        case Errc::impossible_geometry: return "impossible-geometry";
        case Errc::io_failure: return "io-failure";
        case Errc::bad_config: return "bad-config";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& message)
        : std::runtime_error(std::string(errc_name(code)) + ": " + message), code_(code) {}

    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& message) { throw Error(code, message); }

} // namespace muce
