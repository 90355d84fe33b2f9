#ifndef CTMC_TF_IO_HPP
#define CTMC_TF_IO_HPP

#include <iosfwd>
#include <string>

#include "ctmc/grid.hpp"

namespace ctmc {

/// Text export, one "t,i,j,value" line per entry, preceded by a header
/// comment carrying the window size, horizon, step, solver id and
/// tolerance. Values are printed with 17 significant digits so a
/// load/save round trip is byte identical.
void write_csv(const TransitionFunction& fn, std::ostream& out);
TransitionFunction read_csv(std::istream& in);

/// Compact binary grid format: magic "CTMCTF01", then window size, point
/// count, horizon, step, solver id, tolerance, then raw row-major slices.
void write_binary(const TransitionFunction& fn, std::ostream& out);
TransitionFunction read_binary(std::istream& in);

/// Dispatches on extension: ".bin" binary, anything else CSV.
void save_transition_function(const TransitionFunction& fn,
                              const std::string& path);
TransitionFunction load_transition_function(const std::string& path);

}  // namespace ctmc

#endif
