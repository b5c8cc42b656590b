#include "blend/io.hpp"

#include <fstream>

#include "blend/errors.hpp"

namespace blend {

namespace {
std::ofstream open_out(const std::string& path, bool binary = false) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw InvalidArgument("cannot open " + path + " for writing");
    return f;
}
}  // namespace

void write_points_csv(const std::string& path, const std::vector<cplx>& pts) {
    auto f = open_out(path);
    f << "re,im\n";
    for (const auto& z : pts) f << format_double(z.real()) << ',' << format_double(z.imag()) << '\n';
}

void write_points_csv_k(const std::string& path, const std::vector<std::vector<cplx>>& pts) {
    auto f = open_out(path);
    std::size_t k = pts.empty() ? 0 : pts.front().size();
    for (std::size_t a = 0; a < k; ++a) f << (a ? "," : "") << "re" << a + 1 << ",im" << a + 1;
    f << '\n';
    for (const auto& p : pts) {
        for (std::size_t a = 0; a < p.size(); ++a)
            f << (a ? "," : "") << format_double(p[a].real()) << ',' << format_double(p[a].imag());
        f << '\n';
    }
}

void write_pgm(const std::string& path, int width, int height, const std::vector<std::uint8_t>& pixels) {
    if (width <= 0 || height <= 0 || pixels.size() != static_cast<std::size_t>(width) * height)
        throw InvalidArgument("pgm dimensions do not match pixel count");
    auto f = open_out(path, true);
    f << "P5\n" << width << ' ' << height << "\n255\n";
    f.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_text(const std::string& path, const std::string& text) {
    auto f = open_out(path);
    f << text;
}

void write_json(const std::string& path, const json& j) { write_text(path, dump_json(j) + "\n"); }

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

}  // namespace blend
