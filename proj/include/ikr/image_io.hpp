#pragma once

#include "ikr/history.hpp"
#include "ikr/linear_operator.hpp"

#include <string>

namespace ikr {

/// 8-bit binary PGM, values clipped to [0, 1] at write time only.
void write_pgm(const std::string& path, const Matrix& image);
Matrix read_pgm(const std::string& path);

/// 8-bit grayscale PNG (zlib-deflated, no filtering tricks).
void write_png(const std::string& path, const Matrix& image);

/// history.csv with the fixed column schema documented in the README.
void write_history_csv(const std::string& path, const SolveHistory& history);

}  // namespace ikr
