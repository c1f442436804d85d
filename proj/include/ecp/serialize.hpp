#pragma once

#include <iosfwd>
#include <string>

#include <json.hpp>

#include "ecp/bv_core.hpp"
#include "ecp/copula_models.hpp"

namespace ecp {

/// 17 significant digits: round-trip exact for doubles, '.' separator.
std::string format_double(double v);

nlohmann::json gsf_to_json(const GridStepFunction& f);
GridStepFunction gsf_from_json(const nlohmann::json& j);

nlohmann::json measure_to_json(const SignedMeasure& mu);
SignedMeasure measure_from_json(const nlohmann::json& j);

/// Header x1,...,xd then one row per observation, LF line endings. Lines in
/// `preamble` are emitted verbatim before the header (used for '#'-prefixed
/// metadata); the reader skips '#' lines.
std::string sample_to_csv(const SampleMatrix& s, const std::string& preamble = "");
SampleMatrix sample_from_csv(std::istream& in);
SampleMatrix sample_from_csv_file(const std::string& path);

}  // namespace ecp
