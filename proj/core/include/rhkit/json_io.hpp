// ---------------------------------------------------------------------------
// json_io.hpp
//
// String-level JSON serialization for every wire type.  Complex numbers
// travel as [re, im]; matrices as {"rows", "cols", "data"} with row-major
// data; numeric entries may be plain numbers, [re, im] pairs, or exact
// "p/q" rational strings on input.  Parse errors throw
// std::invalid_argument naming the offending key.
// ---------------------------------------------------------------------------

#pragma once

#include <string>

#include "rhkit/filtration.hpp"
#include "rhkit/finite_description.hpp"
#include "rhkit/fuchsian.hpp"
#include "rhkit/local_model.hpp"
#include "rhkit/rh_local.hpp"
#include "rhkit/types.hpp"

namespace rhkit {

// A model together with candidate filtrations on both sides, the input of
// the filtration-compatibility tools.
struct StabilityBundle {
  LocalModel model;
  Flag flag_e;
  Flag flag_f;
};

std::string to_json(const Matrix& m, int indent = -1);
Matrix matrix_from_json(const std::string& text);

std::string to_json(const LocalModel& m, int indent = 2);
LocalModel local_model_from_json(const std::string& text);

std::string to_json(const LocalRHData& d, int indent = 2);
LocalRHData rh_data_from_json(const std::string& text);

std::string to_json(const FiniteDescription& fd, int indent = 2);
FiniteDescription fd_from_json(const std::string& text);

std::string to_json(const FuchsianSystem& sys, int indent = 2);
FuchsianSystem fuchsian_from_json(const std::string& text);

std::string to_json(const Flag& f, int indent = 2);
Flag flag_from_json(const std::string& text);

std::string to_json(const StabilityBundle& b, int indent = 2);
StabilityBundle stability_bundle_from_json(const std::string& text);

// Top-level key sniffing for tools that accept several payload kinds.
// Returns "local_model", "rh_data", "finite_description", "fuchsian",
// "flag", "stability_bundle", or "" when unrecognized.
std::string json_kind(const std::string& text);

}  // namespace rhkit
