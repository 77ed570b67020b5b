#pragma once

#include <iosfwd>
#include <span>

#include "json.hpp"

#include "pathcalc/verify.hpp"

namespace pathcalc {

/// Report as ordered JSON under schema_version 1. Doubles serialize in the
/// shortest form that reparses to the same bits, so residuals survive a
/// round trip exactly.
nlohmann::ordered_json report_to_json(const VerificationReport& report);

/// Several reports under one {"schema_version": 1, "reports": [...]} root.
nlohmann::ordered_json reports_to_json(std::span<const VerificationReport> reports);

/// Inverse of report_to_json; unknown fields are ignored, config is carried
/// through verbatim.
VerificationReport report_from_json(const nlohmann::ordered_json& j);

/// Flat CSV: kind,label,name,value with one line per summary figure, term,
/// extra, compensator sample, and row cell.
void write_report_csv(const VerificationReport& report, std::ostream& out);

}  // namespace pathcalc
