#pragma once

// File formats used by the command-line tool.
//
// Dataset CSV: optional header `t1,...,tk` (spacings) or `x1,...,xk` (raw
// component lifetimes, converted to spacings on load), then one row of k
// positive decimal numbers per system. LF or CRLF line endings; '.' decimal
// separator. A file without a header is read as spacings unless the caller
// forces lifetimes mode.
//
// Params JSON: {"model": "kim-kvam"|"ssk", "k": int, "s": int (ssk only),
//               "theta": number, "lambda": [k-1 numbers]}; other keys rejected.

#include "loadshare/model.hpp"

#include <filesystem>
#include <string>
#include <string_view>

namespace loadshare {

enum class DatasetMode { Spacings, Lifetimes };

struct Dataset {
    SpacingsMatrix spacings;
    DatasetMode mode;
    bool has_header;
};

/// Throws Error(MalformedData) for unparsable, non-finite or ragged input
/// and the positivity/tie errors of SpacingsMatrix / spacings_from_lifetimes.
/// Messages name the offending line and column.
Dataset parse_dataset(std::string_view text, bool force_lifetimes = false);
Dataset read_dataset_file(const std::filesystem::path& path, bool force_lifetimes = false);

/// Spacings-mode CSV with a t1..tk header and 17 significant digits.
std::string format_dataset(const SpacingsMatrix& t);

/// %.17g-style text (locale independent); parses back to the same double.
std::string format_number(double value);

struct ParamsFile {
    ModelSpec spec;
    Params params;
};

ParamsFile parse_params_json(std::string_view text);
ParamsFile read_params_file(const std::filesystem::path& path);
std::string format_params_json(const ModelSpec& spec, const Params& params);

/// Parses "kim-kvam" or "ssk"; throws Error(InvalidModelSpec) otherwise.
ModelKind parse_model_kind(std::string_view name);

}  // namespace loadshare
