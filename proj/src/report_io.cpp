#include "pathcalc/report_io.hpp"

#include <cstdio>
#include <ostream>

namespace pathcalc {

namespace {

nlohmann::ordered_json terms_to_json(const std::vector<Term>& terms) {
    auto arr = nlohmann::ordered_json::array();
    for (const Term& t : terms) {
        arr.push_back({{"name", t.name}, {"value", t.value}});
    }
    return arr;
}

std::vector<Term> terms_from_json(const nlohmann::ordered_json& arr) {
    std::vector<Term> out;
    for (const auto& t : arr) {
        out.push_back({t.at("name").get<std::string>(), t.at("value").get<double>()});
    }
    return out;
}

/// Shortest decimal that reparses to the same double.
std::string format_double(double v) {
    const nlohmann::ordered_json j = v;
    return j.dump();
}

void csv_line(std::ostream& out, const char* kind, const std::string& label,
              const std::string& name, double value) {
    out << kind << ',' << label << ',' << name << ',' << format_double(value) << '\n';
}

}  // namespace

nlohmann::ordered_json report_to_json(const VerificationReport& report) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    j["identity"] = report.identity;
    j["pass"] = report.pass;
    j["lhs"] = report.lhs;
    j["rhs"] = report.rhs;
    j["residual"] = report.residual;
    j["terms"] = terms_to_json(report.terms);
    if (!report.extras.empty()) j["extras"] = terms_to_json(report.extras);
    if (!report.compensator.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& [t, a] : report.compensator) arr.push_back({t, a});
        j["compensator"] = arr;
    }
    if (!report.rows.empty()) {
        auto arr = nlohmann::ordered_json::array();
        for (const auto& row : report.rows) {
            nlohmann::ordered_json cells;
            for (const Term& c : row.cells) cells[c.name] = c.value;
            arr.push_back({{"label", row.label}, {"cells", cells}});
        }
        j["rows"] = arr;
    }
    if (!report.notes.empty()) j["notes"] = report.notes;
    j["config"] = report.config;
    return j;
}

nlohmann::ordered_json reports_to_json(std::span<const VerificationReport> reports) {
    nlohmann::ordered_json j;
    j["schema_version"] = 1;
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        auto one = report_to_json(r);
        one.erase("schema_version");
        arr.push_back(std::move(one));
    }
    j["reports"] = arr;
    return j;
}

VerificationReport report_from_json(const nlohmann::ordered_json& j) {
    VerificationReport r;
    r.identity = j.at("identity").get<std::string>();
    r.pass = j.at("pass").get<bool>();
    r.lhs = j.at("lhs").get<double>();
    r.rhs = j.at("rhs").get<double>();
    r.residual = j.at("residual").get<double>();
    r.terms = terms_from_json(j.at("terms"));
    if (j.contains("extras")) r.extras = terms_from_json(j.at("extras"));
    if (j.contains("compensator")) {
        for (const auto& pair : j.at("compensator")) {
            r.compensator.emplace_back(pair.at(0).get<double>(), pair.at(1).get<double>());
        }
    }
    if (j.contains("rows")) {
        for (const auto& row : j.at("rows")) {
            VerificationReport::Row out;
            out.label = row.at("label").get<std::string>();
            for (const auto& [name, value] : row.at("cells").items()) {
                out.cells.push_back({name, value.get<double>()});
            }
            r.rows.push_back(std::move(out));
        }
    }
    if (j.contains("notes")) {
        for (const auto& n : j.at("notes")) r.notes.push_back(n.get<std::string>());
    }
    if (j.contains("config")) r.config = j.at("config");
    return r;
}

void write_report_csv(const VerificationReport& report, std::ostream& out) {
    out << "kind,label,name,value\n";
    csv_line(out, "summary", report.identity, "lhs", report.lhs);
    csv_line(out, "summary", report.identity, "rhs", report.rhs);
    csv_line(out, "summary", report.identity, "residual", report.residual);
    csv_line(out, "summary", report.identity, "pass", report.pass ? 1.0 : 0.0);
    for (const Term& t : report.terms) csv_line(out, "term", report.identity, t.name, t.value);
    for (const Term& t : report.extras) csv_line(out, "extra", report.identity, t.name, t.value);
    for (const auto& [t, a] : report.compensator) {
        csv_line(out, "compensator", format_double(t), "A", a);
    }
    for (const auto& row : report.rows) {
        for (const Term& c : row.cells) csv_line(out, "row", row.label, c.name, c.value);
    }
}

}  // namespace pathcalc
