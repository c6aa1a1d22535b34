#include "negcurv/field_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>
#include <sstream>

#include "negcurv/errors.hpp"

namespace negcurv {

std::string format_double(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), x, std::chars_format::scientific, 16);
    return std::string(buf, res.ptr);
}

nlohmann::json grid_to_json(const GridSpec& grid) {
    nlohmann::json j;
    j["dim"] = grid.dim;
    j["origin"] = grid.origin;
    j["spacing"] = grid.spacing;
    j["points"] = grid.points;
    std::vector<double> extent(grid.dim);
    for (int a = 0; a < grid.dim; ++a) extent[a] = grid.extent(a);
    j["extent"] = extent;
    return j;
}

GridSpec grid_from_json(const nlohmann::json& j) {
    GridSpec g;
    try {
        g.dim = j.at("dim").get<int>();
        g.origin = j.at("origin").get<std::vector<double>>();
        g.spacing = j.at("spacing").get<std::vector<double>>();
        g.points = j.at("points").get<std::vector<std::size_t>>();
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorKind::InvalidArgument, std::string("malformed grid descriptor: ") + e.what());
    }
    g.validate();
    return g;
}

namespace {
void write_header(std::ostream& os, int dim, const std::string& prefix) {
    for (int a = 0; a < dim; ++a) os << (a ? "," : "") << prefix << a;
}

void write_coords(std::ostream& os, const GridSpec& grid, std::size_t i) {
    const Point p = grid.position(i);
    for (int a = 0; a < grid.dim; ++a) os << (a ? "," : "") << format_double(p[a]);
}
}  // namespace

void write_csv(std::ostream& os, const ScalarField& field, const std::string& value_name) {
    const GridSpec& g = field.grid();
    write_header(os, g.dim, "x");
    os << ',' << value_name << '\n';
    for (std::size_t i = 0; i < field.size(); ++i) {
        write_coords(os, g, i);
        os << ',' << format_double(field[i]) << '\n';
    }
}

void write_csv(std::ostream& os, const VectorField& field) {
    const GridSpec& g = field.grid();
    write_header(os, g.dim, "x");
    for (int k = 0; k < g.dim; ++k) os << ",v" << k;
    os << '\n';
    for (std::size_t i = 0; i < g.size(); ++i) {
        write_coords(os, g, i);
        for (int k = 0; k < g.dim; ++k) os << ',' << format_double(field(i, k));
        os << '\n';
    }
}

void write_mask_csv(std::ostream& os, const GridSpec& grid, const std::vector<std::uint8_t>& mask) {
    if (mask.size() != grid.size()) throw Error(ErrorKind::InvalidArgument, "mask size does not match grid");
    write_header(os, grid.dim, "i");
    os << ',';
    write_header(os, grid.dim, "x");
    os << '\n';
    for (std::size_t i = 0; i < mask.size(); ++i) {
        if (!mask[i]) continue;
        const MultiIndex idx = grid.unravel(i);
        for (int a = 0; a < grid.dim; ++a) os << idx[a] << ',';
        write_coords(os, grid, i);
        os << '\n';
    }
}

ScalarField read_csv(std::istream& is, const GridSpec& grid) {
    std::string line;
    if (!std::getline(is, line)) throw Error(ErrorKind::InvalidArgument, "empty CSV");
    std::vector<double> values;
    values.reserve(grid.size());
    std::size_t line_no = 1;
    while (std::getline(is, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto comma = line.rfind(',');
        const char* first = line.data() + (comma == std::string::npos ? 0 : comma + 1);
        double v = 0.0;
        auto res = std::from_chars(first, line.data() + line.size(), v);
        if (res.ec != std::errc())
            throw Error(ErrorKind::InvalidArgument, "bad value on CSV line " + std::to_string(line_no));
        values.push_back(v);
    }
    return ScalarField(grid, std::move(values));
}

nlohmann::json field_descriptor(const GridSpec& grid, const std::string& name, const std::string& csv_file) {
    return {{"name", name}, {"file", csv_file}, {"grid", grid_to_json(grid)}};
}

}  // namespace negcurv
