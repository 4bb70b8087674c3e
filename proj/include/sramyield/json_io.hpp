#pragma once

#include <cstdint>
#include <string>

#include <json.hpp>

#include "sramyield/mc_engine.hpp"
#include "sramyield/param_fitting.hpp"
#include "sramyield/transient_oracle.hpp"
#include "sramyield/yield_analytics.hpp"

namespace sramyield {

using Json = nlohmann::ordered_json;

inline constexpr int kSchemaVersion = 1;

/// Shortest decimal text that round-trips to the same double.
std::string format_number(double value);

/// 64-bit FNV-1a of `bytes`, as 16 lowercase hex digits.
std::string digest(std::string_view bytes);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, std::string_view text);

/// Parses JSON text; throws ParseError with `origin` in the message.
Json parse_json(std::string_view text, const std::string& origin);
Json read_json_file(const std::string& path);

/// Serialized with a fixed key order and trailing newline.
std::string dump_json(const Json& j);

Json to_json(const DeviceParams& p);
DeviceParams device_params_from_json(const Json& j);

/// Devices may be given as an object or as a table row name, optionally with
/// a vth override: {"ref": "pch_svt", "vth_nominal": 0.3}.
Json to_json(const CellConfig& c);
CellConfig cell_from_json(const Json& j);

Json to_json(const AssistConfig& a);
AssistConfig assist_from_json(const Json& j);

Json to_json(const OffsetVoltageDist& d);
OffsetVoltageDist offset_from_json(const Json& j);

Json to_json(const VariationSpec& v);
VariationSpec variation_from_json(const Json& j);

Json to_json(const DeltaVDistribution& d);
DeltaVDistribution delta_dist_from_json(const Json& j);

Json to_json(const WriteTimeDistribution& d);
WriteTimeDistribution write_dist_from_json(const Json& j);

/// Everything except wall_time and the sample rows.
Json to_json(const McResult& r);

Json to_json(const FitReport& r);

}  // namespace sramyield
