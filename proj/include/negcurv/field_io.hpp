#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "negcurv/grid.hpp"

namespace negcurv {

/// Shortest round-trip representation is not used on purpose: every value is
/// written as 17 significant digits in scientific notation, '.' decimal.
std::string format_double(double x);

nlohmann::json grid_to_json(const GridSpec& grid);
GridSpec grid_from_json(const nlohmann::json& j);

/// CSV: header "x0,...,x{n-1},value", one row per grid point in flat order.
void write_csv(std::ostream& os, const ScalarField& field, const std::string& value_name = "value");
void write_csv(std::ostream& os, const VectorField& field);
/// Only points with mask[i] != 0: header "i0,...,x0,...".
void write_mask_csv(std::ostream& os, const GridSpec& grid, const std::vector<std::uint8_t>& mask);

/// Reads back a scalar CSV written by write_csv against a known grid.
ScalarField read_csv(std::istream& is, const GridSpec& grid);

/// JSON descriptor that accompanies a CSV: grid metadata plus a name.
nlohmann::json field_descriptor(const GridSpec& grid, const std::string& name, const std::string& csv_file);

}  // namespace negcurv
