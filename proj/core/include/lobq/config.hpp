#pragma once

#include <iosfwd>
#include <map>
#include <string>

#include "lobq/model.hpp"

namespace lobq {

// Flat "key = value" model configuration ('#' comments, blank lines ok).
// Recognized keys: rho_xy rho_xz rho_yz phi0 sigma_b sigma_a reset_b_dist
// reset_a_dist tick spread depth. Reset distributions are written as
// lognormal(median, dispersion), fixed(value) or empirical(path) with one
// positive sample per line in the referenced file.
//
// Unknown keys raise std::invalid_argument naming the key; later duplicates
// override earlier ones (command-line overrides reuse apply_override).

ModelParams parse_params(std::istream& is);
ModelParams load_params(const std::string& path);

// As parse_params but layered on top of existing values (keys absent from
// the stream keep what p already holds).
void parse_params_into(std::istream& is, ModelParams& p);

void apply_override(ModelParams& p, const std::string& key, const std::string& value);

void write_params(std::ostream& os, const ModelParams& p);

}  // namespace lobq
