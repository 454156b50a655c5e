#include "loadshare/io.hpp"

#include "loadshare/error.hpp"

#include <json.hpp>

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <span>
#include <sstream>
#include <vector>

namespace loadshare {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split_cells(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        cells.push_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

// Returns the header prefix ('t' or 'x') if the cells are exactly p1..pk.
char header_prefix(const std::vector<std::string_view>& cells) {
    for (const char prefix : {'t', 'x'}) {
        bool match = true;
        for (std::size_t j = 0; j < cells.size() && match; ++j) {
            match = cells[j] == std::string(1, prefix) + std::to_string(j + 1);
        }
        if (match) return prefix;
    }
    return '\0';
}

// A line is a header when some cell is a word rather than a number; "nan"
// and "inf" parse as numbers and are rejected later as non-finite.
bool looks_like_header(const std::vector<std::string_view>& cells) {
    for (const auto cell : cells) {
        if (cell.empty() || !std::isalpha(static_cast<unsigned char>(cell.front()))) continue;
        double value = 0.0;
        const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
        if (ec != std::errc() || ptr != cell.data() + cell.size()) return true;
    }
    return false;
}

[[noreturn]] void data_error(ErrorKind kind, std::size_t line, std::size_t column, const std::string& what) {
    std::ostringstream msg;
    msg << "line " << line;
    if (column > 0) msg << ", column " << column;
    msg << ": " << what;
    throw Error(kind, msg.str());
}

}  // namespace

Dataset parse_dataset(std::string_view text, bool force_lifetimes) {
    std::vector<std::pair<std::size_t, std::string_view>> lines;
    std::size_t line_no = 0;
    std::size_t start = 0;
    while (start <= text.size()) {
        const auto nl = text.find('\n', start);
        const auto raw = text.substr(start, nl == std::string_view::npos ? text.npos : nl - start);
        ++line_no;
        if (!trim(raw).empty()) lines.emplace_back(line_no, raw);
        if (nl == std::string_view::npos) break;
        start = nl + 1;
    }
    if (lines.empty()) throw Error(ErrorKind::MalformedData, "dataset is empty");

    bool has_header = false;
    DatasetMode mode = force_lifetimes ? DatasetMode::Lifetimes : DatasetMode::Spacings;
    std::size_t first_data = 0;
    const auto head = split_cells(lines.front().second);
    if (looks_like_header(head)) {
        const char prefix = header_prefix(head);
        if (prefix == '\0') {
            data_error(ErrorKind::MalformedData, lines.front().first, 0,
                       "header must be exactly t1,...,tk or x1,...,xk");
        }
        if (prefix == 't' && force_lifetimes) {
            data_error(ErrorKind::MalformedData, lines.front().first, 0,
                       "header declares spacings (t1,...,tk) but lifetimes mode was requested");
        }
        has_header = true;
        mode = prefix == 'x' ? DatasetMode::Lifetimes : DatasetMode::Spacings;
        first_data = 1;
    }

    const std::size_t k = head.size();
    if (k < 2) {
        data_error(ErrorKind::MalformedData, lines.front().first, 0,
                   "need at least 2 columns (k >= 2), found " + std::to_string(k));
    }
    if (first_data == lines.size()) throw Error(ErrorKind::MalformedData, "dataset has a header but no data rows");

    const ErrorKind nonpositive =
        mode == DatasetMode::Lifetimes ? ErrorKind::NonPositiveLifetime : ErrorKind::NonPositiveSpacing;
    std::vector<double> values;
    values.reserve((lines.size() - first_data) * k);
    for (std::size_t r = first_data; r < lines.size(); ++r) {
        const auto [number, line] = lines[r];
        const auto cells = split_cells(line);
        if (cells.size() != k) {
            data_error(ErrorKind::MalformedData, number, 0,
                       "expected " + std::to_string(k) + " values, found " + std::to_string(cells.size()));
        }
        for (std::size_t j = 0; j < k; ++j) {
            const auto cell = cells[j];
            double value = 0.0;
            const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
            if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size()) {
                data_error(ErrorKind::MalformedData, number, j + 1, "'" + std::string(cell) + "' is not a number");
            }
            if (!std::isfinite(value)) {
                data_error(ErrorKind::MalformedData, number, j + 1, "'" + std::string(cell) + "' is not finite");
            }
            if (!(value > 0.0)) {
                data_error(nonpositive, number, j + 1, "value " + std::string(cell) + " must be > 0");
            }
            values.push_back(value);
        }
        if (mode == DatasetMode::Lifetimes) {
            const auto row = std::span<const double>(values).last(k);
            for (std::size_t j = 1; j < k; ++j) {
                for (std::size_t m = 0; m < j; ++m) {
                    if (row[j] == row[m]) {
                        data_error(ErrorKind::DuplicateLifetime, number, j + 1,
                                   "lifetime " + std::string(cells[j]) + " repeats column " +
                                       std::to_string(m + 1) + " (ties give a zero spacing)");
                    }
                }
            }
        }
    }

    const std::size_t n = lines.size() - first_data;
    Matrix matrix(n, k, std::move(values));
    if (mode == DatasetMode::Lifetimes) return Dataset{spacings_from_lifetimes(matrix), mode, has_header};
    return Dataset{SpacingsMatrix(std::move(matrix)), mode, has_header};
}

Dataset read_dataset_file(const std::filesystem::path& path, bool force_lifetimes) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MalformedData, "cannot read dataset file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_dataset(buffer.str(), force_lifetimes);
}

std::string format_number(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string format_dataset(const SpacingsMatrix& t) {
    std::string out;
    for (std::size_t c = 0; c < t.k(); ++c) {
        if (c > 0) out += ',';
        out += 't' + std::to_string(c + 1);
    }
    out += '\n';
    for (std::size_t i = 0; i < t.n(); ++i) {
        for (std::size_t c = 0; c < t.k(); ++c) {
            if (c > 0) out += ',';
            out += format_number(t(i, c));
        }
        out += '\n';
    }
    return out;
}

ModelKind parse_model_kind(std::string_view name) {
    if (name == "kim-kvam") return ModelKind::KimKvam;
    if (name == "ssk") return ModelKind::SSK;
    throw Error(ErrorKind::InvalidModelSpec,
                "model must be 'kim-kvam' or 'ssk' (got '" + std::string(name) + "')");
}

ParamsFile parse_params_json(std::string_view text) {
    using nlohmann::json;
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::MalformedData, std::string("params file is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorKind::MalformedData, "params file must hold a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "model" && key != "k" && key != "s" && key != "theta" && key != "lambda") {
            throw Error(ErrorKind::MalformedData, "params file has unknown key '" + key + "'");
        }
    }
    for (const char* key : {"model", "k", "theta", "lambda"}) {
        if (!doc.contains(key)) {
            throw Error(ErrorKind::MalformedData, std::string("params file is missing key '") + key + "'");
        }
    }
    if (!doc["model"].is_string()) throw Error(ErrorKind::MalformedData, "'model' must be a string");
    if (!doc["k"].is_number_integer()) throw Error(ErrorKind::MalformedData, "'k' must be an integer");
    if (!doc["theta"].is_number()) throw Error(ErrorKind::MalformedData, "'theta' must be a number");
    if (!doc["lambda"].is_array()) throw Error(ErrorKind::MalformedData, "'lambda' must be an array");

    const ModelKind kind = parse_model_kind(doc["model"].get<std::string>());
    const auto k_signed = doc["k"].get<long long>();
    if (k_signed < 2) {
        throw Error(ErrorKind::InvalidModelSpec, "k must satisfy k >= 2 (got k = " + std::to_string(k_signed) + ")");
    }
    const auto k = static_cast<std::size_t>(k_signed);

    ModelSpec spec = ModelSpec::kim_kvam(k);
    if (kind == ModelKind::SSK) {
        if (!doc.contains("s")) throw Error(ErrorKind::MalformedData, "'s' is required for model 'ssk'");
        if (!doc["s"].is_number_integer()) throw Error(ErrorKind::MalformedData, "'s' must be an integer");
        const auto s_signed = doc["s"].get<long long>();
        if (s_signed < 0) {
            throw Error(ErrorKind::InvalidModelSpec, "s must satisfy 2 <= s <= k-1 (got s = " +
                                                         std::to_string(s_signed) + ")");
        }
        spec = ModelSpec::ssk(k, static_cast<std::size_t>(s_signed));
    } else if (doc.contains("s")) {
        throw Error(ErrorKind::MalformedData, "'s' is only allowed for model 'ssk'");
    }

    std::vector<double> lambdas;
    for (const auto& v : doc["lambda"]) {
        if (!v.is_number()) throw Error(ErrorKind::MalformedData, "'lambda' entries must be numbers");
        lambdas.push_back(v.get<double>());
    }
    if (lambdas.size() != k - 1) {
        throw Error(ErrorKind::InvalidParams, "'lambda' must hold k-1 = " + std::to_string(k - 1) +
                                                  " values, got " + std::to_string(lambdas.size()));
    }
    return ParamsFile{spec, Params(doc["theta"].get<double>(), std::move(lambdas))};
}

ParamsFile read_params_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorKind::MalformedData, "cannot read params file '" + path.string() + "'");
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_params_json(buffer.str());
}

std::string format_params_json(const ModelSpec& spec, const Params& params) {
    std::string out = "{\"model\":\"" + std::string(to_string(spec.kind())) + "\",\"k\":" + std::to_string(spec.k());
    if (spec.s()) out += ",\"s\":" + std::to_string(*spec.s());
    out += ",\"theta\":" + format_number(params.theta()) + ",\"lambda\":[";
    for (std::size_t j = 0; j < params.lambdas().size(); ++j) {
        if (j > 0) out += ',';
        out += format_number(params.lambdas()[j]);
    }
    out += "]}";
    return out;
}

}  // namespace loadshare
