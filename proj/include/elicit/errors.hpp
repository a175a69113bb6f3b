#pragma once

#include <stdexcept>
#include <string>

namespace elicit {

enum class ErrorCode {
    validation,
    provider_unreachable,
    auth_rejected,
    schema_exhausted,
    dimension_mismatch,
    duplicate_agent_names,
    degenerate_clustering,
    insufficient_clusters,
    too_few_points,
    step_count_out_of_range,
    missing_label,
    undefined_score,
    undefined_metric,
    degenerate_variance,
    missing_prior_stage,
    corrupt_manifest,
    artifact_hash_mismatch,
    config,
    io,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

class ValidationError : public Error {
public:
    explicit ValidationError(std::string message)
        : Error(ErrorCode::validation, std::move(message)) {}
};

/// All retry attempts produced schema-invalid output. Carries the last raw
/// provider response for diagnosis.
class SchemaExhausted : public Error {
public:
    SchemaExhausted(std::string message, std::string last_raw)
        : Error(ErrorCode::schema_exhausted, std::move(message)),
          last_raw_(std::move(last_raw)) {}

    const std::string& last_raw() const noexcept { return last_raw_; }

private:
    std::string last_raw_;
};

inline const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::validation: return "Validation";
        case ErrorCode::provider_unreachable: return "ProviderUnreachable";
        case ErrorCode::auth_rejected: return "AuthRejected";
        case ErrorCode::schema_exhausted: return "SchemaExhausted";
        case ErrorCode::dimension_mismatch: return "DimensionMismatch";
        case ErrorCode::duplicate_agent_names: return "DuplicateAgentNames";
        case ErrorCode::degenerate_clustering: return "DegenerateClustering";
        case ErrorCode::insufficient_clusters: return "InsufficientClusters";
        case ErrorCode::too_few_points: return "TooFewPoints";
        case ErrorCode::step_count_out_of_range: return "StepCountOutOfRange";
        case ErrorCode::missing_label: return "MissingLabel";
        case ErrorCode::undefined_score: return "UndefinedScore";
        case ErrorCode::undefined_metric: return "UndefinedMetric";
        case ErrorCode::degenerate_variance: return "DegenerateVariance";
        case ErrorCode::missing_prior_stage: return "MissingPriorStage";
        case ErrorCode::corrupt_manifest: return "CorruptManifest";
        case ErrorCode::artifact_hash_mismatch: return "ArtifactHashMismatch";
        case ErrorCode::config: return "Config";
        case ErrorCode::io: return "Io";
    }
    return "Unknown";
}

} // namespace elicit
