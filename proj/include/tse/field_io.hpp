#ifndef TSE_FIELD_IO_HPP
#define TSE_FIELD_IO_HPP

#include <iosfwd>
#include <string>

#include "tse/grid.hpp"

namespace tse {

/// Density-field CSV format (emission and ingestion share it):
///   line 1:        "# nx,nt,x0,x1,t0,t1" with the six values
///   lines 2..nt+2: (nt+1) rows of (nx+1) comma-separated densities,
///                  row i = time step i
/// Doubles are printed with 17 significant digits so a round trip is
/// bit-exact.
void write_field_csv(const DensityField& field, const std::string& path);
void write_field_csv(const DensityField& field, std::ostream& out);

DensityField read_field_csv(const std::string& path);
DensityField read_field_csv(std::istream& in, const std::string& name = "<stream>");

/// Formats a double with enough digits to reparse to the identical bits.
std::string format_double(double v);

}  // namespace tse

#endif  // TSE_FIELD_IO_HPP
