#ifndef CTMC_MODEL_IO_HPP
#define CTMC_MODEL_IO_HPP

#include <iosfwd>
#include <string>
#include <variant>

#include "ctmc/qmatrix.hpp"

namespace ctmc {

/// A model file holds either a plain generator or a bounded perturbation;
/// which one depends on its `kind` field.
using LoadedModel = std::variant<RateMatrix, BoundedPerturbation>;

/// Parses a ctmc-model/1 file. Supported kinds: "branching" (b array),
/// "immigration_resurrection" (c and h arrays), "triplets" (explicit
/// [i, j, rate] entries, optional "states" count, optional "bounded" flag
/// to wrap as a perturbation), "power_birth" (coeff/power/offset).
/// Unknown fields and unknown schema versions are rejected.
LoadedModel load_model(std::istream& in, const std::string& origin = "model");
LoadedModel load_model_file(const std::string& path);

/// The generator inside either variant.
const RateMatrix& generator_of(const LoadedModel& m);

/// Fails with ModelError if the file does not describe a perturbation the
/// solver can bound.
BoundedPerturbation as_perturbation(LoadedModel m);

}  // namespace ctmc

#endif
