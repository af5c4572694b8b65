#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "goalrl/oracle.hpp"
#include "goalrl/training.hpp"

namespace goalrl {

/// Everything one profile file configures: environment, agent, schedule,
/// training run and the tabular oracle.
struct ProfileDocument {
    TrainingConfig training;
    OracleConfig oracle;

    bool operator==(const ProfileDocument&) const = default;
};

/// Parses a JSON profile document. Absent optional fields take their
/// defaults; unknown fields and missing required ones raise ValidationError.
/// Malformed JSON raises ParseError with line and column.
ProfileDocument parse_profile(std::string_view text);
ProfileDocument load_profile(const std::filesystem::path& path);

/// Full document with every field spelled out; parse_profile(to_json(d)) == d.
std::string to_json(const ProfileDocument& doc);

}  // namespace goalrl
