#pragma once

// CSV artifacts: header row, '.' decimal separator, '\n' line endings, shortest
// round-trip formatting of doubles.

#include <filesystem>
#include <string>
#include <vector>

#include "mgrisk/dp.hpp"
#include "mgrisk/sim.hpp"

namespace mgrisk {

std::string format_number(double value);

// Creates `dir` (and parents); IoError when that fails.
void ensure_directory(const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& content);

// values.csv: columns t, s, J, b_opt with 1-based t. Rows cover stages 1..T; a
// zero-horizon table is written as its single terminal J_1 row with empty b_opt.
std::string values_csv(const ValueTable& table);
ValueTable read_values_csv(const std::filesystem::path& path);

// trace.csv: t, s, b, n, n_tilde, p, shed, curtail, n_tilde_baseline.
std::string trace_csv(const DispatchTrace& trace);

// comparison.csv: t, n_tilde_with, n_tilde_without.
std::string comparison_csv(const DispatchTrace& trace);

// Single column `n`.
std::vector<double> read_realization_csv(const std::filesystem::path& path);

}  // namespace mgrisk
