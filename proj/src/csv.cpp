#include "rmf/csv.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "rmf/errors.hpp"
#include "rmf/experiment.hpp"

namespace rmf {

std::string format_real(double v) {
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    if (ec != std::errc()) throw Error("format_real: conversion failed");
    return {buf.data(), ptr};
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + path);
    return out;
}

void finish(std::ofstream& out, const std::string& path) {
    out.flush();
    if (!out) throw Error("write failed for " + path);
}

void check_aligned(const std::vector<double>& a, const std::vector<double>& b, const char* what) {
    if (a.size() != b.size()) throw ParameterError(std::string(what) + ": series lengths differ");
    for (std::size_t i = 0; i < a.size(); ++i)
        if (std::abs(a[i] - b[i]) > 1e-9 * std::max(1.0, std::abs(a[i])))
            throw ParameterError(std::string(what) + ": series times differ");
}

} // namespace

void emit_csv(const FilterSeries& full, const FilterSeries& reduced, const std::string& path) {
    check_aligned(full.times, reduced.times, "emit_csv");
    auto out = open_out(path);
    out << "t,pi_full,pi_reduced\n";
    for (std::size_t i = 0; i < full.times.size(); ++i)
        out << format_real(full.times[i]) << ',' << format_real(full.estimates[i]) << ','
            << format_real(reduced.estimates[i]) << '\n';
    finish(out, path);
}

void emit_csv(const FilterSeries& series, const std::string& path) {
    auto out = open_out(path);
    out << (series.flavor == Flavor::Full ? "t,pi_full\n" : "t,pi_reduced\n");
    for (std::size_t i = 0; i < series.times.size(); ++i)
        out << format_real(series.times[i]) << ',' << format_real(series.estimates[i]) << '\n';
    finish(out, path);
}

void emit_csv(const ErrorSeries& series, const std::string& path) {
    auto out = open_out(path);
    out << "t,mse,std_err\n";
    for (std::size_t i = 0; i < series.times.size(); ++i)
        out << format_real(series.times[i]) << ',' << format_real(series.mse[i]) << ','
            << format_real(series.std_err[i]) << '\n';
    finish(out, path);
}

void emit_csv(const Trajectory& tr, const std::string& path) {
    auto out = open_out(path);
    out << 't';
    if (tr.n == 1) out << ",x";
    else
        for (std::size_t i = 1; i <= tr.n; ++i) out << ",x" << i;
    if (tr.m == 1) out << ",y";
    else
        for (std::size_t i = 1; i <= tr.m; ++i) out << ",y" << i;
    out << '\n';
    const std::size_t width = tr.n + tr.m;
    for (std::size_t k = 0; k < tr.size(); ++k) {
        out << format_real(tr.times[k]);
        for (std::size_t c = 0; c < width; ++c) out << ',' << format_real(tr.states[k * width + c]);
        out << '\n';
    }
    finish(out, path);
}

void emit_plot_data(const FilterSeries& full, const FilterSeries& reduced,
                    const ErrorSeries& errors, const std::string& stem) {
    check_aligned(full.times, reduced.times, "emit_plot_data");
    check_aligned(full.times, errors.times, "emit_plot_data");
    emit_csv(full, reduced, stem + "_filters.csv");
    emit_csv(errors, stem + "_errors.csv");
}

CsvTable read_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot read " + path);
    CsvTable table;
    std::string line;
    if (!std::getline(in, line)) return table;
    {
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) table.header.push_back(cell);
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            char* end = nullptr;
            const double v = std::strtod(cell.c_str(), &end);
            if (end == cell.c_str()) throw Error("bad number '" + cell + "' in " + path);
            row.push_back(v);
        }
        if (row.size() != table.header.size()) throw Error("ragged row in " + path);
        table.rows.push_back(std::move(row));
    }
    return table;
}

} // namespace rmf
