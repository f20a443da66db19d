#pragma once

#include <string>
#include <vector>

#include "rmf/filter.hpp"
#include "rmf/sde.hpp"

namespace rmf {

struct ErrorSeries;

// Shortest decimal form that parses back to the same double.
std::string format_real(double v);

// Header `t,pi_full,pi_reduced`. Throws ParameterError if the series are not
// on the same times.
void emit_csv(const FilterSeries& full, const FilterSeries& reduced, const std::string& path);
// Header `t,pi_full` or `t,pi_reduced` depending on the flavor.
void emit_csv(const FilterSeries& series, const std::string& path);
// Header `t,mse,std_err`.
void emit_csv(const ErrorSeries& series, const std::string& path);
// Header `t,x,y` (or `t,x1,..,xn,y1,..,ym` for vectors).
void emit_csv(const Trajectory& trajectory, const std::string& path);

// (t, pi_full, pi_reduced) to `<stem>_filters.csv` and (t, mse, std_err) to
// `<stem>_errors.csv`.
void emit_plot_data(const FilterSeries& full, const FilterSeries& reduced,
                    const ErrorSeries& errors, const std::string& stem);

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;
};

CsvTable read_csv(const std::string& path);

} // namespace rmf
