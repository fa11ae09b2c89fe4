#include "fracdiff/report.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fracdiff {

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

/// JSON has no NaN or infinity; they are written as strings.
nlohmann::json num(double v) {
    if (std::isfinite(v)) return v;
    return format_double(v);
}

double from_num(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    const std::string s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    return std::numeric_limits<double>::quiet_NaN();
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '&': out += "&amp;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string f3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string tick_label(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

}  // namespace

nlohmann::json to_json(const ConstantUse& c) {
    return {{"name", c.name}, {"value", num(c.value)}, {"provenance", provenance_name(c.provenance)}, {"note", c.note}};
}

nlohmann::json to_json(const EstimateReport& r) {
    nlohmann::json j;
    j["name"] = r.name;
    j["params"] = {{"m", num(r.params.m)}, {"s", num(r.params.s)}, {"d", r.params.d}};
    j["lhs"] = num(r.lhs);
    j["rhs"] = num(r.rhs);
    j["margin"] = num(r.margin);
    j["tolerance"] = num(r.tolerance);
    j["pass"] = r.pass;
    j["flagged"] = r.flagged;
    j["instances"] = r.instances;
    j["tightness"] = num(r.tightness);
    j["constants"] = nlohmann::json::array();
    for (const auto& c : r.constants) j["constants"].push_back(to_json(c));
    j["metrics"] = nlohmann::json::array();
    for (const auto& [k, v] : r.metrics) j["metrics"].push_back({{"key", k}, {"value", num(v)}});
    j["notes"] = r.notes;
    return j;
}

EstimateReport report_from_json(const nlohmann::json& j) {
    EstimateReport r;
    r.name = j.at("name").get<std::string>();
    r.params.m = from_num(j.at("params").at("m"));
    r.params.s = from_num(j.at("params").at("s"));
    r.params.d = j.at("params").at("d").get<int>();
    r.lhs = from_num(j.at("lhs"));
    r.rhs = from_num(j.at("rhs"));
    r.margin = from_num(j.at("margin"));
    r.tolerance = from_num(j.at("tolerance"));
    r.pass = j.at("pass").get<bool>();
    r.flagged = j.at("flagged").get<bool>();
    r.instances = j.at("instances").get<int>();
    r.tightness = from_num(j.at("tightness"));
    for (const auto& m : j.at("metrics")) r.metrics.emplace_back(m.at("key").get<std::string>(), from_num(m.at("value")));
    for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    return r;
}

std::string csv_header() { return "name,lhs,rhs,margin,pass,run,m,s,d,flagged,instances,tightness\n"; }

std::string csv_row(const std::string& run, const EstimateReport& r) {
    std::ostringstream os;
    os << csv_escape(r.name) << ',' << format_double(r.lhs) << ',' << format_double(r.rhs) << ','
       << format_double(r.margin) << ',' << (r.pass ? "true" : "false") << ',' << csv_escape(run) << ','
       << format_double(r.params.m) << ',' << format_double(r.params.s) << ',' << r.params.d << ','
       << (r.flagged ? "true" : "false") << ',' << r.instances << ',' << format_double(r.tightness) << '\n';
    return os.str();
}

std::string render_svg(const PlotSpec& spec) {
    const double W = 720, H = 480, ml = 80, mr = 180, mt = 40, mb = 60;
    const double pw = W - ml - mr, ph = H - mt - mb;
    auto tx = [&](double v) { return spec.logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return spec.logy ? std::log10(v) : v; };
    auto usable = [&](double x, double y) {
        return std::isfinite(x) && std::isfinite(y) && (!spec.logx || x > 0.0) && (!spec.logy || y > 0.0);
    };
    double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    for (const auto& s : spec.series)
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, ty(s.y[i]));
            y1 = std::max(y1, ty(s.y[i]));
        }
    if (!std::isfinite(x0)) { x0 = 0; x1 = 1; y0 = 0; y1 = 1; }
    if (x1 - x0 < 1e-12) { x0 -= 0.5; x1 += 0.5; }
    if (y1 - y0 < 1e-12) { y0 -= 0.5; y1 += 0.5; }
    const double padx = 0.03 * (x1 - x0), pady = 0.05 * (y1 - y0);
    x0 -= padx; x1 += padx; y0 -= pady; y1 += pady;
    auto px = [&](double v) { return ml + (tx(v) - x0) / (x1 - x0) * pw; };
    auto py = [&](double v) { return mt + ph - (ty(v) - y0) / (y1 - y0) * ph; };

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << f3(ml + pw / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << xml_escape(spec.title) << "</text>\n";
    os << "<rect x=\"" << ml << "\" y=\"" << mt << "\" width=\"" << pw << "\" height=\"" << ph << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 5; ++k) {
        const double a = x0 + (x1 - x0) * k / 5.0, b = y0 + (y1 - y0) * k / 5.0;
        const double vx = spec.logx ? std::pow(10.0, a) : a, vy = spec.logy ? std::pow(10.0, b) : b;
        const double gx = ml + pw * k / 5.0, gy = mt + ph - ph * k / 5.0;
        os << "<line x1=\"" << f3(gx) << "\" y1=\"" << mt + ph << "\" x2=\"" << f3(gx) << "\" y2=\"" << mt + ph + 5 << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << f3(gx) << "\" y=\"" << mt + ph + 18 << "\" text-anchor=\"middle\">" << tick_label(vx) << "</text>\n";
        os << "<line x1=\"" << ml - 5 << "\" y1=\"" << f3(gy) << "\" x2=\"" << ml << "\" y2=\"" << f3(gy) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << ml - 8 << "\" y=\"" << f3(gy + 4) << "\" text-anchor=\"end\">" << tick_label(vy) << "</text>\n";
    }
    os << "<text x=\"" << f3(ml + pw / 2) << "\" y=\"" << H - 15 << "\" text-anchor=\"middle\">" << xml_escape(spec.xlabel) << "</text>\n";
    os << "<text x=\"18\" y=\"" << f3(mt + ph / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 18 " << f3(mt + ph / 2) << ")\">"
       << xml_escape(spec.ylabel) << "</text>\n";
    for (const auto& [x, label] : spec.vlines) {
        if (spec.logx && !(x > 0.0)) continue;
        const double gx = px(x);
        if (gx < ml || gx > ml + pw) continue;
        os << "<line x1=\"" << f3(gx) << "\" y1=\"" << mt << "\" x2=\"" << f3(gx) << "\" y2=\"" << mt + ph
           << "\" stroke=\"gray\" stroke-dasharray=\"2,3\"/>\n";
        os << "<text x=\"" << f3(gx + 3) << "\" y=\"" << mt + 12 << "\" fill=\"gray\">" << xml_escape(label) << "</text>\n";
    }
    int li = 0;
    for (const auto& s : spec.series) {
        std::ostringstream pts;
        int cnt = 0;
        for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
            if (!usable(s.x[i], s.y[i])) continue;
            pts << (cnt++ ? " " : "") << f3(px(s.x[i])) << "," << f3(py(s.y[i]));
            if (s.markers)
                os << "<circle cx=\"" << f3(px(s.x[i])) << "\" cy=\"" << f3(py(s.y[i])) << "\" r=\"3\" fill=\"" << s.color << "\"/>\n";
        }
        if (cnt > 1)
            os << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.6\""
               << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << " points=\"" << pts.str() << "\"/>\n";
        const double ly = mt + 10 + 18 * li++;
        os << "<line x1=\"" << ml + pw + 10 << "\" y1=\"" << ly << "\" x2=\"" << ml + pw + 34 << "\" y2=\"" << ly << "\" stroke=\""
           << s.color << "\" stroke-width=\"1.6\"" << (s.dashed ? " stroke-dasharray=\"6,4\"" : "") << "/>\n";
        os << "<text x=\"" << ml + pw + 40 << "\" y=\"" << ly + 4 << "\">" << xml_escape(s.label) << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    const std::filesystem::path p(path);
    if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace fracdiff
