#pragma once

#include <bit>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "curvflow/fields.hpp"
#include "curvflow/version.hpp"

namespace curvflow {

using json = nlohmann::ordered_json;

inline constexpr const char* field_file_schema = "curvflow.field/1";

enum class FieldEncoding { csv, binary };

/// A named bundle of scalar fields sharing one grid; the on-disk form is a
/// one-line JSON manifest followed by the payload. CSV payload holds one node
/// per line (x1 fastest), one column per component, 17 significant digits.
/// Binary payload is raw little-endian float64, node-major.
struct FieldData {
    Grid3 grid;
    std::vector<std::string> components;
    std::vector<ScalarField> fields;

    const ScalarField& field(const std::string& name) const {
        for (std::size_t c = 0; c < components.size(); ++c)
            if (components[c] == name) return fields[c];
        throw validation_error("FieldData: no component named '" + name + "'");
    }
    bool has(const std::string& name) const {
        for (const auto& c : components)
            if (c == name) return true;
        return false;
    }
};

inline std::string format_double17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace detail {

inline Boundary boundary_from_string(const std::string& s) {
    if (s == "periodic") return Boundary::periodic;
    if (s == "clamped") return Boundary::clamped;
    throw validation_error("field file: unknown boundary kind '" + s + "'");
}

} // namespace detail

inline void write_field_file(const std::string& path, const FieldData& data,
                             FieldEncoding encoding = FieldEncoding::csv) {
    if (data.components.size() != data.fields.size() || data.components.empty())
        throw validation_error("write_field_file: component names and fields must match and be nonempty");
    for (const auto& f : data.fields) require_same_grid(f.grid, data.grid, "write_field_file");
    if (encoding == FieldEncoding::binary && std::endian::native != std::endian::little)
        throw validation_error("write_field_file: binary payload requires a little-endian host");

    json manifest;
    manifest["schema"] = field_file_schema;
    manifest["dims"] = data.grid.dims;
    manifest["spacing"] = data.grid.spacing;
    manifest["origin"] = data.grid.origin;
    manifest["boundary"] = {boundary_name(data.grid.boundary[0]), boundary_name(data.grid.boundary[1]),
                            boundary_name(data.grid.boundary[2])};
    manifest["components"] = data.components;
    manifest["encoding"] = encoding == FieldEncoding::csv ? "csv" : "binary";

    std::ofstream out(path, std::ios::binary);
    if (!out) throw validation_error("write_field_file: cannot open '" + path + "' for writing");
    out << manifest.dump() << "\n";

    const std::size_t N = data.grid.node_count();
    if (encoding == FieldEncoding::csv) {
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t c = 0; c < data.fields.size(); ++c) {
                if (c) out << ',';
                out << format_double17(data.fields[c].values[n]);
            }
            out << '\n';
        }
    } else {
        for (std::size_t n = 0; n < N; ++n)
            for (const auto& f : data.fields)
                out.write(reinterpret_cast<const char*>(&f.values[n]), sizeof(double));
    }
    if (!out) throw validation_error("write_field_file: write to '" + path + "' failed");
}

inline FieldData read_field_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw validation_error("read_field_file: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw validation_error("read_field_file: '" + path + "' is empty (line 1)");

    json manifest;
    try {
        manifest = json::parse(line);
    } catch (const json::parse_error& e) {
        throw validation_error("read_field_file: manifest parse error at line 1, byte " +
                               std::to_string(e.byte) + ": " + e.what());
    }
    if (!manifest.contains("schema") || manifest["schema"] != field_file_schema)
        throw validation_error("read_field_file: missing or unsupported schema version in manifest (line 1)");
    for (const char* key : {"dims", "spacing", "origin", "boundary", "components", "encoding"})
        if (!manifest.contains(key))
            throw validation_error(std::string("read_field_file: manifest missing '") + key + "' (line 1)");

    const auto dims = manifest["dims"].get<std::array<int, 3>>();
    const auto spacing = manifest["spacing"].get<std::array<double, 3>>();
    const auto origin = manifest["origin"].get<std::array<double, 3>>();
    const auto bnames = manifest["boundary"].get<std::array<std::string, 3>>();
    const Grid3 grid(dims, spacing, origin,
                     {detail::boundary_from_string(bnames[0]), detail::boundary_from_string(bnames[1]),
                      detail::boundary_from_string(bnames[2])});

    FieldData data;
    data.grid = grid;
    data.components = manifest["components"].get<std::vector<std::string>>();
    if (data.components.empty()) throw validation_error("read_field_file: manifest lists no components");
    const std::size_t ncomp = data.components.size();
    const std::size_t N = grid.node_count();
    data.fields.assign(ncomp, ScalarField(grid));

    const std::string encoding = manifest["encoding"].get<std::string>();
    if (encoding == "csv") {
        for (std::size_t n = 0; n < N; ++n) {
            if (!std::getline(in, line))
                throw validation_error("read_field_file: payload truncated at line " + std::to_string(n + 2) +
                                       " (expected " + std::to_string(N) + " data rows)");
            std::size_t pos = 0, c = 0;
            while (c < ncomp) {
                std::size_t next = line.find(',', pos);
                const std::string tok = line.substr(pos, next == std::string::npos ? next : next - pos);
                try {
                    data.fields[c].values[n] = std::stod(tok);
                } catch (const std::exception&) {
                    throw validation_error("read_field_file: bad number '" + tok + "' at line " +
                                           std::to_string(n + 2) + ", column " + std::to_string(c + 1));
                }
                ++c;
                if (next == std::string::npos) break;
                pos = next + 1;
            }
            if (c != ncomp)
                throw validation_error("read_field_file: line " + std::to_string(n + 2) + " has " +
                                       std::to_string(c) + " columns, expected " + std::to_string(ncomp));
        }
    } else if (encoding == "binary") {
        if (std::endian::native != std::endian::little)
            throw validation_error("read_field_file: binary payload requires a little-endian host");
        for (std::size_t n = 0; n < N; ++n) {
            for (std::size_t c = 0; c < ncomp; ++c) {
                double v = 0.0;
                if (!in.read(reinterpret_cast<char*>(&v), sizeof(double)))
                    throw validation_error("read_field_file: binary payload truncated at node " +
                                           std::to_string(n) + " (offset " +
                                           std::to_string((n * ncomp + c) * sizeof(double)) + ")");
                data.fields[c].values[n] = v;
            }
        }
    } else {
        throw validation_error("read_field_file: unknown encoding '" + encoding + "'");
    }
    return data;
}

// ---------------------------------------------------------------------------
// Profile CSV: two columns `x3,u1`, header row required, x3 strictly
// increasing and uniformly spaced.
// ---------------------------------------------------------------------------

struct ProfileSamples {
    std::vector<double> x3;
    std::vector<double> u1;

    double spacing() const { return x3.size() > 1 ? x3[1] - x3[0] : 0.0; }
};

inline ProfileSamples read_profile_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("read_profile_csv: cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw validation_error("read_profile_csv: '" + path + "' is empty");
    if (line.size() && line.back() == '\r') line.pop_back();
    if (line != "x3,u1")
        throw validation_error("read_profile_csv: line 1 must be the header 'x3,u1', got '" + line + "'");

    ProfileSamples prof;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.size() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const std::size_t comma = line.find(',');
        if (comma == std::string::npos)
            throw validation_error("read_profile_csv: line " + std::to_string(lineno) + " is not 'x3,u1'");
        try {
            prof.x3.push_back(std::stod(line.substr(0, comma)));
            prof.u1.push_back(std::stod(line.substr(comma + 1)));
        } catch (const std::exception&) {
            throw validation_error("read_profile_csv: bad number at line " + std::to_string(lineno));
        }
        if (prof.x3.size() > 1 && !(prof.x3.back() > prof.x3[prof.x3.size() - 2]))
            throw validation_error("read_profile_csv: x3 must be strictly increasing (line " +
                                   std::to_string(lineno) + ")");
    }
    if (prof.x3.size() < 2) throw validation_error("read_profile_csv: need at least 2 samples");
    return prof;
}

inline void write_profile_csv(const std::string& path, std::span<const double> x3,
                              std::span<const double> u1) {
    if (x3.size() != u1.size()) throw validation_error("write_profile_csv: column length mismatch");
    std::ofstream out(path);
    if (!out) throw validation_error("write_profile_csv: cannot open '" + path + "'");
    out << "x3,u1\n";
    for (std::size_t k = 0; k < x3.size(); ++k)
        out << format_double17(x3[k]) << ',' << format_double17(u1[k]) << '\n';
}

// ---------------------------------------------------------------------------
// Structured reports. Every numeric result sits under the name of the
// operation that produced it; identical inputs give byte-identical documents
// except for the provenance timestamp.
// ---------------------------------------------------------------------------

class ReportBuilder {
  public:
    ReportBuilder(std::string command, json config) {
        doc_["command"] = std::move(command);
        doc_["config"] = std::move(config);
        doc_["results"] = json::object();
        doc_["self_checks"] = json::object();
    }

    json& section(const std::string& op_name) { return doc_["results"][op_name]; }

    void self_check(const std::string& name, bool pass) {
        doc_["self_checks"][name] = pass ? "pass" : "fail";
    }

    bool all_checks_pass() const {
        for (const auto& [k, v] : doc_["self_checks"].items())
            if (v != "pass") return false;
        return true;
    }

    json finalize(bool with_timestamp = true) const {
        json out = doc_;
        json prov;
        prov["tool"] = "curvflow";
        prov["version"] = version_string;
        if (with_timestamp) {
            std::time_t t = std::time(nullptr);
            char buf[32];
            std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
            prov["timestamp"] = buf;
        }
        out["provenance"] = std::move(prov);
        return out;
    }

  private:
    json doc_;
};

inline json grid_to_json(const Grid3& g) {
    json j;
    j["dims"] = g.dims;
    j["spacing"] = g.spacing;
    j["origin"] = g.origin;
    j["boundary"] = {boundary_name(g.boundary[0]), boundary_name(g.boundary[1]), boundary_name(g.boundary[2])};
    return j;
}

} // namespace curvflow
