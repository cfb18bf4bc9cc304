#pragma once

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "muce/feature_model.hpp"
#include "muce/format.hpp"

namespace muce {

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    fields.push_back(std::move(cur));
    return fields;
}

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    out += '"';
    return out;
}

// Numeric cell tolerant of float-formatted integers ("41.0" for an integer
// column); anything non-integral for an integer kind is an error.
inline std::int64_t parse_integer_cell(const std::string& cell, const std::string& feature) {
    double v = parse_double(cell);
    double r = std::round(v);
    if (std::abs(v - r) > 1e-9)
        fail(Errc::kind_mismatch, "feature '" + feature + "' expects an integer, got '" + cell + "'");
    return static_cast<std::int64_t>(r);
}

} // namespace detail

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_failure, "cannot open '" + path + "'");
    CsvTable table;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() && in.peek() == std::char_traits<char>::eof()) break;
        auto fields = detail::split_csv_line(line);
        if (first) {
            table.header = std::move(fields);
            first = false;
        } else {
            if (fields.size() != table.header.size())
                fail(Errc::io_failure, "'" + path + "': row with " + std::to_string(fields.size()) +
                                           " fields, header has " + std::to_string(table.header.size()));
            table.rows.push_back(std::move(fields));
        }
    }
    if (first) fail(Errc::io_failure, "'" + path + "' is empty");
    return table;
}

inline constexpr const char* kSchemaArtifactTag = "muce-schema";
inline constexpr int kSchemaArtifactVersion = 1;

struct DatasetSchemaFile {
    Schema schema;
    std::string label_column; // empty when the dataset is unlabeled
};

inline nlohmann::json schema_to_json(const Schema& schema, const std::string& label_column) {
    nlohmann::json j;
    j["artifact"] = kSchemaArtifactTag;
    j["version"] = kSchemaArtifactVersion;
    if (!label_column.empty()) j["label_column"] = label_column;
    j["features"] = nlohmann::json::array();
    for (const auto& spec : schema) {
        nlohmann::json f;
        f["name"] = spec.name;
        f["kind"] = kind_name(spec.kind);
        if (spec.kind == FeatureKind::ordinal) f["levels"] = {spec.level_min, spec.level_max};
        if (spec.kind == FeatureKind::categorical) f["categories"] = spec.categories;
        j["features"].push_back(std::move(f));
    }
    return j;
}

inline DatasetSchemaFile schema_from_json(const nlohmann::json& j) {
    if (!j.is_object() || j.value("artifact", "") != kSchemaArtifactTag)
        fail(Errc::schema_mismatch, "not a schema sidecar");
    if (j.value("version", 0) != kSchemaArtifactVersion)
        fail(Errc::schema_mismatch, "unsupported schema sidecar version");
    DatasetSchemaFile out;
    out.label_column = j.value("label_column", "");
    for (const auto& f : j.at("features")) {
        FeatureSpec spec;
        spec.name = f.at("name").get<std::string>();
        spec.kind = kind_from_name(f.at("kind").get<std::string>());
        if (spec.kind == FeatureKind::ordinal) {
            spec.level_min = f.at("levels")[0].get<std::int64_t>();
            spec.level_max = f.at("levels")[1].get<std::int64_t>();
        }
        if (spec.kind == FeatureKind::categorical) {
            spec.categories = f.at("categories").get<std::vector<std::string>>();
            if (spec.categories.empty())
                fail(Errc::schema_mismatch, "categorical feature '" + spec.name + "' has no labels");
        }
        out.schema.push_back(std::move(spec));
    }
    return out;
}

inline DatasetSchemaFile load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) fail(Errc::io_failure, "cannot open '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        fail(Errc::io_failure, "'" + path + "': " + e.what());
    }
    return schema_from_json(j);
}

inline FeatureValue parse_cell(const std::string& cell, const FeatureSpec& spec) {
    if (cell.empty()) fail(Errc::io_failure, "missing value for feature '" + spec.name + "'");
    switch (spec.kind) {
        case FeatureKind::continuous: return parse_double(cell);
        case FeatureKind::categorical: return cell;
        default: return detail::parse_integer_cell(cell, spec.name);
    }
}

/// Loads a CSV with a header row against its schema sidecar. Columns match by
/// name in any order; missing cells are a hard error.
inline Dataset load_dataset(const std::string& csv_path, const std::string& schema_path) {
    DatasetSchemaFile sf = load_schema(schema_path);
    CsvTable table = read_csv(csv_path);

    std::vector<int> column_of(sf.schema.size(), -1);
    int label_column = -1;
    for (std::size_t c = 0; c < table.header.size(); ++c) {
        const std::string& name = table.header[c];
        if (!sf.label_column.empty() && name == sf.label_column) {
            label_column = static_cast<int>(c);
            continue;
        }
        bool known = false;
        for (std::size_t f = 0; f < sf.schema.size(); ++f) {
            if (sf.schema[f].name == name) {
                column_of[f] = static_cast<int>(c);
                known = true;
                break;
            }
        }
        if (!known) fail(Errc::schema_mismatch, "column '" + name + "' not declared in the schema");
    }
    for (std::size_t f = 0; f < sf.schema.size(); ++f)
        if (column_of[f] < 0)
            fail(Errc::schema_mismatch, "column '" + sf.schema[f].name + "' missing from the CSV");
    if (!sf.label_column.empty() && label_column < 0)
        fail(Errc::schema_mismatch, "label column '" + sf.label_column + "' missing from the CSV");

    Dataset data;
    data.schema = sf.schema;
    if (label_column >= 0) data.labels.emplace();
    for (const auto& row : table.rows) {
        Observation obs;
        for (std::size_t f = 0; f < sf.schema.size(); ++f) {
            FeatureValue v = parse_cell(row[static_cast<std::size_t>(column_of[f])], sf.schema[f]);
            check_value(sf.schema[f], v);
            obs.set(sf.schema[f].name, std::move(v));
        }
        data.rows.push_back(std::move(obs));
        if (label_column >= 0) {
            auto lab = detail::parse_integer_cell(row[static_cast<std::size_t>(label_column)], "label");
            if (lab != 0 && lab != 1) fail(Errc::io_failure, "class labels must be 0 or 1");
            data.labels->push_back(static_cast<int>(lab));
        }
    }
    return data;
}

inline std::string dataset_to_csv(const Dataset& data, const std::string& label_column) {
    std::ostringstream out;
    for (std::size_t f = 0; f < data.schema.size(); ++f) {
        if (f) out << ',';
        out << detail::csv_escape(data.schema[f].name);
    }
    if (data.labels) out << ',' << detail::csv_escape(label_column);
    out << '\n';
    for (std::size_t r = 0; r < data.rows.size(); ++r) {
        for (std::size_t f = 0; f < data.schema.size(); ++f) {
            if (f) out << ',';
            out << detail::csv_escape(format_value(data.rows[r].at(data.schema[f].name)));
        }
        if (data.labels) out << ',' << (*data.labels)[r];
        out << '\n';
    }
    return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail(Errc::io_failure, "cannot write '" + path + "'");
    out << content;
    if (!out) fail(Errc::io_failure, "write to '" + path + "' failed");
}

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::io_failure, "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes the dataset CSV plus its schema sidecar next to it.
inline void save_dataset(const Dataset& data, const std::string& csv_path,
                         const std::string& schema_path, const std::string& label_column = "label") {
    write_file(csv_path, dataset_to_csv(data, label_column));
    write_file(schema_path,
               schema_to_json(data.schema, data.labels ? label_column : "").dump(2) + "\n");
}

/// Raw housing ingestion: a 9-column CSV (8 features of the original table
/// plus the median-house-value target). Header names are matched
/// case-insensitively and the common upstream spellings are accepted.
inline Dataset load_housing_csv(const std::string& path) {
    CsvTable table = read_csv(path);
    auto normalize = [](std::string s) {
        std::string out;
        for (char c : s)
            if (c != '_' && c != ' ') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        return out;
    };
    auto canonical = [&](const std::string& header) -> std::string {
        std::string n = normalize(header);
        if (n == "medinc" || n == "medianincome") return "medinc";
        if (n == "houseage" || n == "housingmedianage") return "houseage";
        if (n == "averooms" || n == "avgrooms") return "averooms";
        if (n == "avebedrms" || n == "avgbedrms" || n == "avebedrooms") return "avebedrms";
        if (n == "population") return "population";
        if (n == "aveoccup" || n == "avgoccup" || n == "aveoccupancy") return "aveoccup";
        if (n == "latitude") return "latitude";
        if (n == "longitude") return "longitude";
        if (n == "medhv" || n == "medhouseval" || n == "medianhousevalue" || n == "target")
            return "medhv";
        return n;
    };

    Schema schema;
    for (const auto& h : table.header) {
        FeatureSpec spec;
        spec.name = canonical(h);
        spec.kind = (spec.name == "houseage" || spec.name == "population") ? FeatureKind::integer
                                                                           : FeatureKind::continuous;
        schema.push_back(std::move(spec));
    }
    Dataset data;
    data.schema = schema;
    for (const auto& row : table.rows) {
        Observation obs;
        for (std::size_t c = 0; c < schema.size(); ++c) obs.set(schema[c].name, parse_cell(row[c], schema[c]));
        data.rows.push_back(std::move(obs));
    }
    return data;
}

} // namespace muce
