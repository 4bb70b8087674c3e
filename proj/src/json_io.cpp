#include "sramyield/json_io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <sstream>

#include "sramyield/errors.hpp"

namespace sramyield {

std::string format_number(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    std::array<char, 32> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
    if (ec != std::errc()) throw Error("number formatting failed");
    return std::string(buf.data(), ptr);
}

std::string digest(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    std::array<char, 17> out{};
    static constexpr char kHex[] = "0123456789abcdef";
    for (int i = 15; i >= 0; --i) {
        out[static_cast<std::size_t>(i)] = kHex[h & 0xf];
        h >>= 4;
    }
    return std::string(out.data(), 16);
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open '" + path + "'");
    return std::string(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

void write_text_file(const std::string& path, std::string_view text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw IoError("failed writing '" + path + "'");
}

Json parse_json(std::string_view text, const std::string& origin) {
    try {
        return Json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(origin + ": " + e.what());
    }
}

Json read_json_file(const std::string& path) { return parse_json(read_text_file(path), path); }

std::string dump_json(const Json& j) { return j.dump(2) + "\n"; }

namespace {

void check_schema(const Json& j, const char* what) {
    if (!j.is_object()) throw ParseError(std::string(what) + ": expected a JSON object");
    if (j.contains("schema") && j.at("schema") != kSchemaVersion) {
        throw ParseError(std::string(what) + ": unsupported schema " + j.at("schema").dump());
    }
}

double number(const Json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const Json& v = j.at(key);
    if (!v.is_number()) throw ParseError(std::string("field '") + key + "' must be a number");
    return v.get<double>();
}

double required(const Json& j, const char* key) {
    if (!j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    return number(j, key, 0.0);
}

}  // namespace

Json to_json(const DeviceParams& p) {
    return Json{{"i0", p.i0},         {"k1", p.k1}, {"k2", p.k2},
                {"lambda", p.lambda}, {"n", p.n},   {"vth_nominal", p.vth_nominal},
                {"polarity", std::string(to_string(p.polarity))}};
}

DeviceParams device_params_from_json(const Json& j) {
    if (j.is_string()) return reference_device(j.get<std::string>());
    if (!j.is_object()) throw ParseError("device: expected an object or a table row name");
    DeviceParams p;
    if (j.contains("ref")) {
        if (!j.at("ref").is_string()) throw ParseError("device: 'ref' must be a string");
        p = reference_device(j.at("ref").get<std::string>());
        p.i0 = number(j, "i0", p.i0);
        p.k1 = number(j, "k1", p.k1);
        p.k2 = number(j, "k2", p.k2);
        p.lambda = number(j, "lambda", p.lambda);
    } else {
        p.i0 = required(j, "i0");
        p.k1 = required(j, "k1");
        p.k2 = required(j, "k2");
        p.lambda = required(j, "lambda");
    }
    p.n = number(j, "n", p.n);
    p.vth_nominal = number(j, "vth_nominal", p.vth_nominal);
    if (j.contains("polarity")) p.polarity = polarity_from_string(j.at("polarity").get<std::string>());
    return p;
}

Json to_json(const CellConfig& c) {
    return Json{{"schema", kSchemaVersion},
                {"vdd", c.vdd},
                {"vwl", c.vwl},
                {"vddc", c.vddc},
                {"c_blb", c.c_blb},
                {"c_q", c.c_q},
                {"v_trip", c.v_trip},
                {"temperature", c.temperature},
                {"nmos", to_json(c.nmos)},
                {"pmos", to_json(c.pmos)}};
}

CellConfig cell_from_json(const Json& j) {
    check_schema(j, "cell config");
    CellConfig c;
    c.vdd = number(j, "vdd", c.vdd);
    c.vwl = number(j, "vwl", c.vdd);
    c.vddc = number(j, "vddc", c.vdd);
    c.c_blb = number(j, "c_blb", c.c_blb);
    c.c_q = number(j, "c_q", c.c_q);
    c.v_trip = number(j, "v_trip", 0.5 * c.vddc);
    c.temperature = number(j, "temperature", c.temperature);
    if (j.contains("nmos")) c.nmos = device_params_from_json(j.at("nmos"));
    if (j.contains("pmos")) c.pmos = device_params_from_json(j.at("pmos"));
    return c;
}

Json to_json(const AssistConfig& a) {
    return Json{{"wl_underdrive", a.wl_underdrive}, {"wl_boost", a.wl_boost}, {"cell_vdd_delta", a.cell_vdd_delta}};
}

AssistConfig assist_from_json(const Json& j) {
    check_schema(j, "assist config");
    AssistConfig a;
    a.wl_underdrive = number(j, "wl_underdrive", 0.0);
    a.wl_boost = number(j, "wl_boost", 0.0);
    a.cell_vdd_delta = number(j, "cell_vdd_delta", 0.0);
    return a;
}

Json to_json(const OffsetVoltageDist& d) { return Json{{"mu_vos", d.mu_vos}, {"sigma_vos", d.sigma_vos}}; }

OffsetVoltageDist offset_from_json(const Json& j) {
    check_schema(j, "offset");
    OffsetVoltageDist d;
    d.mu_vos = number(j, "mu_vos", d.mu_vos);
    d.sigma_vos = number(j, "sigma_vos", d.sigma_vos);
    return d;
}

Json to_json(const VariationSpec& v) {
    return Json{{"schema", kSchemaVersion},       {"vth_n_mean", v.vth_n_mean}, {"vth_n_sigma", v.vth_n_sigma},
                {"vth_p_mean", v.vth_p_mean},     {"vth_p_sigma", v.vth_p_sigma},
                {"offset", to_json(v.offset)},    {"seed", v.seed}};
}

VariationSpec variation_from_json(const Json& j) {
    check_schema(j, "variation");
    VariationSpec v;
    v.vth_n_mean = number(j, "vth_n_mean", v.vth_n_mean);
    v.vth_n_sigma = number(j, "vth_n_sigma", v.vth_n_sigma);
    v.vth_p_mean = number(j, "vth_p_mean", v.vth_p_mean);
    v.vth_p_sigma = number(j, "vth_p_sigma", v.vth_p_sigma);
    if (j.contains("offset")) v.offset = offset_from_json(j.at("offset"));
    if (j.contains("seed")) {
        if (!j.at("seed").is_number_unsigned()) throw ParseError("field 'seed' must be a non-negative integer");
        v.seed = j.at("seed").get<std::uint64_t>();
    }
    return v;
}

Json to_json(const DeltaVDistribution& d) { return Json{{"mu_delta", d.mu_delta}, {"sigma_delta", d.sigma_delta}}; }

DeltaVDistribution delta_dist_from_json(const Json& j) {
    DeltaVDistribution d{required(j, "mu_delta"), required(j, "sigma_delta")};
    validate(d);
    return d;
}

Json to_json(const WriteTimeDistribution& d) {
    return Json{{"mu_w", d.mu_w}, {"sigma_w", d.sigma_w}, {"t0", d.t0}};
}

WriteTimeDistribution write_dist_from_json(const Json& j) {
    WriteTimeDistribution d{required(j, "mu_w"), required(j, "sigma_w"), number(j, "t0", 1e-12)};
    validate(d);
    return d;
}

Json to_json(const McResult& r) {
    Json j{{"n", r.n}, {"failures", r.failures}, {"pf", r.pf}, {"ci95", Json::array({r.ci95.first, r.ci95.second})}};
    j["samples_path"] = r.samples_path ? Json(*r.samples_path) : Json(nullptr);
    return j;
}

Json to_json(const FitReport& r) {
    Json costs = Json::array();
    for (double c : r.accepted_costs) costs.push_back(c);
    return Json{{"schema", kSchemaVersion},
                {"params", to_json(r.params)},
                {"max_rel_error_sat", r.max_rel_error_sat},
                {"avg_rel_error_sat", r.avg_rel_error_sat},
                {"iterations", r.iterations},
                {"converged", r.converged},
                {"residual_norm", r.residual_norm},
                {"dropped_points", r.dropped_points},
                {"accepted_costs", costs}};
}

}  // namespace sramyield
