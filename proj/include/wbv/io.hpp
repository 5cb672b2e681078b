#pragma once

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "wbv/analysis.hpp"
#include "wbv/errors.hpp"
#include "wbv/hollow.hpp"
#include "wbv/solver.hpp"

namespace wbv::io {

using json = nlohmann::ordered_json;
namespace fs = std::filesystem;

inline constexpr int schema_version = 1;

// What every output file carries besides its payload. meta is the only time-dependent part.
struct Header {
    json config = json::object();
    std::optional<std::string> meta;
};

inline std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline void check_schema(const json& doc, const std::string& where) {
    if (!doc.is_object() || !doc.contains("schema_version")) throw SchemaError(where + ": missing schema_version");
    const auto& v = doc["schema_version"];
    if (!v.is_number_integer() || v.get<int>() != schema_version)
        throw SchemaError(where + ": schema_version " + v.dump() + " needs migration to " + std::to_string(schema_version));
}

namespace detail {

inline std::ofstream open_out(const fs::path& path) {
    if (path.has_parent_path()) {
        std::error_code ec;
        fs::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    return out;
}

inline void close_out(std::ofstream& out, const fs::path& path) {
    out.flush();
    if (!out) throw IoError("write failed on " + path.string());
}

inline std::ifstream open_in(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string() + " for reading");
    return in;
}

inline json stamp(json payload, const Header& h) {
    json doc = json::object();
    doc["schema_version"] = schema_version;
    doc["config"] = h.config;
    if (h.meta) doc["meta"] = *h.meta;
    for (auto& [k, v] : payload.items()) doc[k] = std::move(v);
    return doc;
}

inline json pair(Complex z) { return json::array({z.real(), z.imag()}); }

template <class J>
double num(const J& doc, const char* key, const std::string& where) {
    if (!doc.contains(key) || !doc[key].is_number()) throw SchemaError(where + ": field '" + key + "' missing or not a number");
    return doc[key].template get<double>();
}

}  // namespace detail

// ---- solution points and curves ----

struct StoredPoint {
    WaveParams params;
    SolutionPoint point;
    double residual_norm = 0.0;
    double min_fz = 1.0;
    bool monotone = true;
    double gamma = 0.0;
};

inline json point_json(const SolutionPoint& p, const WaveParams& params, const PointDiagnostics& d) {
    json doc = json::object();
    doc["schema_version"] = schema_version;
    doc["params"] = {{"delta", params.delta}, {"lambda", params.lambda}, {"M", params.M}};
    doc["coeffs"] = p.spec.coeffs;
    doc["Q"] = p.Q;
    doc["kappa"] = p.kappa;
    doc["beta"] = p.beta;
    doc["residual_norm"] = d.residual_norm;
    doc["diagnostics"] = {{"min_fz", d.min_fz}, {"monotone", d.monotone}, {"gamma", d.gamma}};
    return doc;
}

inline json point_json(const SolutionPoint& p, const WaveParams& params) {
    ResidualSystem sys(params);
    return point_json(p, params, diagnose(sys, p));
}

inline StoredPoint parse_point(const json& doc, const std::string& where = "solution") {
    check_schema(doc, where);
    if (!doc.contains("params") || !doc["params"].is_object()) throw SchemaError(where + ": missing params");
    if (!doc.contains("coeffs") || !doc["coeffs"].is_array()) throw SchemaError(where + ": missing coeffs");
    StoredPoint s;
    const auto& pr = doc["params"];
    s.params.delta = detail::num(pr, "delta", where);
    s.params.lambda = detail::num(pr, "lambda", where);
    if (!pr.contains("M") || !pr["M"].is_number_integer()) throw SchemaError(where + ": params.M missing or not an integer");
    s.params.M = pr["M"].get<int>();
    s.point.spec = SurfaceSpectrum{doc["coeffs"].get<std::vector<double>>(), s.params.lambda};
    if (s.point.spec.M() != s.params.M) throw SchemaError(where + ": coeffs length does not match params.M");
    s.point.Q = detail::num(doc, "Q", where);
    s.point.kappa = detail::num(doc, "kappa", where);
    s.point.beta = detail::num(doc, "beta", where);
    s.residual_norm = detail::num(doc, "residual_norm", where);
    if (doc.contains("diagnostics")) {
        const auto& d = doc["diagnostics"];
        s.min_fz = detail::num(d, "min_fz", where);
        s.gamma = detail::num(d, "gamma", where);
        if (!d.contains("monotone") || !d["monotone"].is_boolean()) throw SchemaError(where + ": diagnostics.monotone missing");
        s.monotone = d["monotone"].get<bool>();
    }
    return s;
}

inline void write_json(const fs::path& path, const json& payload, const Header& h) {
    auto out = detail::open_out(path);
    out << detail::stamp(payload, h).dump(1) << '\n';
    detail::close_out(out, path);
}

inline json read_json(const fs::path& path) {
    auto in = detail::open_in(path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
    check_schema(doc, path.string());
    return doc;
}

inline void write_point(const fs::path& path, const SolutionPoint& p, const WaveParams& params, const Header& h) {
    write_json(path, point_json(p, params), h);
}

inline StoredPoint read_point(const fs::path& path) { return parse_point(read_json(path), path.string()); }

// JSON lines: a header line, one solution document per point (with its arclength), a closing line.
inline void write_curve(const fs::path& path, const CurveRecord& rec, const Header& h) {
    auto out = detail::open_out(path);
    json head = detail::stamp(json{{"kind", "curve_header"}}, h);
    out << head.dump() << '\n';
    for (std::size_t i = 0; i < rec.points.size(); ++i) {
        json doc = point_json(rec.points[i], rec.params, rec.diagnostics[i]);
        doc["s"] = rec.arclength[i];
        out << doc.dump() << '\n';
    }
    json events = json::array();
    for (const auto& e : rec.events) events.push_back({{"index", e.index}, {"kind", e.kind}});
    out << json{{"schema_version", schema_version}, {"kind", "curve_end"}, {"stop_reason", rec.stop_reason}, {"events", events}}.dump()
        << '\n';
    detail::close_out(out, path);
}

struct StoredCurve {
    json config;
    std::vector<StoredPoint> points;
    std::vector<double> arclength;
    std::vector<CurveEvent> events;
    std::string stop_reason;
};

inline StoredCurve read_curve(const fs::path& path) {
    auto in = detail::open_in(path);
    StoredCurve c;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        const std::string where = path.string() + ":" + std::to_string(n);
        json doc;
        try {
            doc = json::parse(line);
        } catch (const json::exception& e) {
            throw SchemaError(where + ": " + e.what());
        }
        check_schema(doc, where);
        const std::string kind = doc.value("kind", "");
        if (kind == "curve_header") {
            c.config = doc.value("config", json::object());
        } else if (kind == "curve_end") {
            c.stop_reason = doc.value("stop_reason", "");
            for (const auto& e : doc.value("events", json::array())) c.events.push_back({e["index"].get<int>(), e["kind"].get<std::string>()});
        } else {
            c.points.push_back(parse_point(doc, where));
            c.arclength.push_back(doc.value("s", 0.0));
        }
    }
    return c;
}

// ---- CSV ----

struct CsvTable {
    json config;
    std::optional<std::string> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<std::string>> rows;
};

namespace detail {

inline void csv_header(std::ostream& out, const Header& h, const std::vector<std::string>& columns) {
    out << "# schema_version: " << schema_version << '\n';
    out << "# config: " << h.config.dump() << '\n';
    if (h.meta) out << "# meta: " << *h.meta << '\n';
    for (std::size_t i = 0; i < columns.size(); ++i) out << (i ? "," : "") << columns[i];
    out << '\n';
}

inline std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) f.push_back(cell);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    return f;
}

inline const char* flag(bool b) { return b ? "true" : "false"; }

}  // namespace detail

inline CsvTable read_csv(const fs::path& path) {
    auto in = detail::open_in(path);
    CsvTable t;
    std::string line;
    bool versioned = false;
    while (std::getline(in, line)) {
        if (line.rfind("# ", 0) == 0) {
            const auto colon = line.find(": ");
            if (colon == std::string::npos) continue;
            const std::string key = line.substr(2, colon - 2), val = line.substr(colon + 2);
            if (key == "schema_version") {
                if (val != std::to_string(schema_version))
                    throw SchemaError(path.string() + ": schema_version " + val + " needs migration to " + std::to_string(schema_version));
                versioned = true;
            } else if (key == "config") {
                t.config = json::parse(val);
            } else if (key == "meta") {
                t.meta = val;
            }
            continue;
        }
        if (!versioned) throw SchemaError(path.string() + ": missing schema_version");
        if (t.columns.empty()) {
            t.columns = detail::split(line);
            continue;
        }
        auto f = detail::split(line);
        if (f.size() != t.columns.size()) throw SchemaError(path.string() + ": row width does not match header");
        t.rows.push_back(std::move(f));
    }
    if (!versioned) throw SchemaError(path.string() + ": missing schema_version");
    return t;
}

inline void write_surface_csv(const fs::path& path, const PhysicalWave& w, const Header& h) {
    auto out = detail::open_out(path);
    detail::csv_header(out, h, {"x", "y"});
    for (const Complex& z : w.surface) out << fmt(z.real()) << ',' << fmt(z.imag()) << '\n';
    detail::close_out(out, path);
}

inline void write_streamlines_csv(const fs::path& path, const std::vector<Streamline>& lines, const Header& h) {
    auto out = detail::open_out(path);
    detail::csv_header(out, h, {"x", "y", "label"});
    for (const auto& s : lines)
        for (const Complex& z : s.physical) out << fmt(z.real()) << ',' << fmt(z.imag()) << ',' << s.label << '\n';
    detail::close_out(out, path);
}

inline const std::vector<std::string>& summary_columns() {
    static const std::vector<std::string> c{"s", "beta", "kappa", "Q", "gamma", "b", "overhang", "monotone", "min_fz"};
    return c;
}

inline void write_summary_csv(const fs::path& path, const std::vector<SummaryRow>& rows, const Header& h) {
    auto out = detail::open_out(path);
    detail::csv_header(out, h, summary_columns());
    for (const auto& r : rows)
        out << fmt(r.s) << ',' << fmt(r.beta) << ',' << fmt(r.kappa) << ',' << fmt(r.Q) << ',' << fmt(r.gamma) << ',' << fmt(r.b)
            << ',' << detail::flag(r.overhang) << ',' << detail::flag(r.monotone) << ',' << fmt(r.min_fz) << '\n';
    detail::close_out(out, path);
}

inline std::vector<SummaryRow> parse_summary(const CsvTable& t) {
    if (t.columns != summary_columns()) throw SchemaError("summary CSV columns do not match");
    std::vector<SummaryRow> rows;
    for (const auto& f : t.rows) {
        auto d = [&](int i) { return std::stod(f[static_cast<std::size_t>(i)]); };
        rows.push_back({d(0), d(1), d(2), d(3), d(4), d(5), f[6] == "true", f[7] == "true", d(8)});
    }
    return rows;
}

// ---- JSON mirrors ----

inline json summary_json(const std::vector<SummaryRow>& rows) {
    json arr = json::array();
    for (const auto& r : rows)
        arr.push_back({{"s", r.s}, {"beta", r.beta}, {"kappa", r.kappa}, {"Q", r.Q}, {"gamma", r.gamma}, {"b", r.b},
                       {"overhang", r.overhang}, {"monotone", r.monotone}, {"min_fz", r.min_fz}});
    return json{{"summary", arr}};
}

inline json physical_wave_json(const PhysicalWave& w) {
    json surf = json::array();
    for (const Complex& z : w.surface) surf.push_back(detail::pair(z));
    json lines = json::array();
    for (const auto& s : w.streamlines) {
        json pts = json::array();
        for (const Complex& z : s.physical) pts.push_back(detail::pair(z));
        lines.push_back({{"label", s.label}, {"level", s.level}, {"closed", s.closed}, {"truncated", s.truncated}, {"points", pts}});
    }
    return json{{"b", w.b},
                {"gamma", w.gamma},
                {"flags",
                 {{"overhanging", w.flags.overhanging},
                  {"monotone", w.flags.monotone},
                  {"monotone_degenerate", w.flags.monotone_degenerate},
                  {"self_intersecting", w.flags.self_intersecting}}},
                {"notices", w.notices},
                {"surface", surf},
                {"streamlines", lines}};
}

inline json hollow_json(const HollowVortexApprox& h) {
    json b = json::array();
    for (const Complex& z : h.boundary) b.push_back(detail::pair(z));
    return json{{"rho", h.rho},
                {"gamma_rho", h.gamma_rho},
                {"q_rho", h.q_rho},
                {"centroid", detail::pair(h.centroid)},
                {"mu_dot_coeff", h.mu_dot_coeff},
                {"boundary", b}};
}

inline HollowVortexApprox parse_hollow(const json& doc, const std::string& where = "hollow") {
    HollowVortexApprox h;
    h.rho = detail::num(doc, "rho", where);
    h.gamma_rho = detail::num(doc, "gamma_rho", where);
    h.q_rho = detail::num(doc, "q_rho", where);
    h.mu_dot_coeff = detail::num(doc, "mu_dot_coeff", where);
    auto pt = [&](const json& a) {
        if (!a.is_array() || a.size() != 2) throw SchemaError(where + ": expected [re, im]");
        return Complex(a[0].get<double>(), a[1].get<double>());
    };
    if (!doc.contains("centroid") || !doc.contains("boundary")) throw SchemaError(where + ": missing centroid or boundary");
    h.centroid = pt(doc["centroid"]);
    for (const auto& a : doc["boundary"]) h.boundary.push_back(pt(a));
    return h;
}

}  // namespace wbv::io
