#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "blend/complexgeo.hpp"
#include "blend/report.hpp"

namespace blend {

// Header "re,im", one point per line.
void write_points_csv(const std::string& path, const std::vector<cplx>& pts);
// Header "re1,im1,...,rek,imk".
void write_points_csv_k(const std::string& path, const std::vector<std::vector<cplx>>& pts);
// Binary 8-bit PGM (P5), row-major, first row at the top.
void write_pgm(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels);
void write_text(const std::string& path, const std::string& text);
void write_json(const std::string& path, const json& j);

json complex_json(cplx z);

}  // namespace blend
