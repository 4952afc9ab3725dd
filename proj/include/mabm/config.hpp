#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "mabm/herding.hpp"
#include "mabm/market.hpp"
#include "mabm/soi.hpp"

namespace mabm {

/// Raw `key = value` pairs of a config document.
///
/// Grammar: one `key = value` per line; `#` or `;` starts a comment; blank
/// lines are ignored; `[section]` lines group keys and are optional. Keys are
/// unique across the whole document, and a key under a section header must
/// belong to that section.
using ConfigDocument = std::map<std::string, std::string>;

/// Throws std::invalid_argument on syntax errors, unknown keys or sections,
/// and duplicates.
ConfigDocument parse_document(std::string_view text);

struct Config {
    HerdingParams herding;
    MarketConfig market;
    SoiConfig soi;
};

/// Applies defaults and validates. Throws std::invalid_argument naming the
/// key or the violated condition.
Config resolve(const ConfigDocument& doc);

inline Config parse_config(std::string_view text) { return resolve(parse_document(text)); }

/// Every resolved value, one `key = value` per line, derived quantities
/// included.
std::string describe(const Config& config);

/// All recognised keys in documentation order.
const std::vector<std::string>& valid_keys();

}  // namespace mabm
