#pragma once

// Text outputs: limit tables, study CSVs and the log-log error chart.
// Numbers use 9 significant digits and '.' as decimal separator.

#include <iosfwd>
#include <string>

#include "thinspectra/limit_spectra.hpp"
#include "thinspectra/study.hpp"

namespace thinspectra {

/// "%.9g" formatting, locale independent; NaN prints as "nan".
std::string num(double v);

/// One line per distinct value: "<value>(<multiplicity>) <branches>".
void write_limit_table(std::ostream& os, const LimitSpectrum& spectrum);
/// CSV with header "index,lambda,multiplicity,branches".
void write_limit_csv(std::ostream& os, const LimitSpectrum& spectrum);

/// report.csv: n,r,h,k,lambda_n_k,lambda_limit,error,aH1,bH1,ga,gb,bound_ok.
/// Corrector columns are "nan" for clustered limit values; incomplete
/// records are omitted.
void write_report_csv(std::ostream& os, const StudyReport& report);
/// rates.csv: k,rate,intercept,points.
void write_rates_csv(std::ostream& os, const StudyReport& report);
/// Log-log chart of e_{n,k} against r_n, one polyline per k.
void write_error_svg(std::ostream& os, const StudyReport& report);

/// Writes report.csv, rates.csv and (when requested) plot.svg into `dir`,
/// creating it if needed.
void write_study_outputs(const std::string& dir, const StudyReport& report, bool svg);

}  // namespace thinspectra
