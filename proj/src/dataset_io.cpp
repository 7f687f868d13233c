#include "efs/dataset_io.hpp"

#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

#include "efs/error.hpp"

namespace efs {

namespace csv {

std::vector<Row> parse(std::istream& in)
{
    std::vector<Row> rows;
    Row row;
    std::string field;
    bool in_quotes = false;
    bool row_has_content = false;
    char ch = 0;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
        case '"':
            in_quotes = true;
            row_has_content = true;
            break;
        case ',':
            row.push_back(std::move(field));
            field.clear();
            row_has_content = true;
            break;
        case '\r':
            break;
        case '\n':
            if (row_has_content || !field.empty()) {
                row.push_back(std::move(field));
                rows.push_back(std::move(row));
            }
            field.clear();
            row.clear();
            row_has_content = false;
            break;
        default:
            field.push_back(ch);
            row_has_content = true;
        }
    }
    if (row_has_content || !field.empty()) {
        row.push_back(std::move(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<Row> read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
    return parse(in);
}

std::string escape(const std::string& field)
{
    if (field.find_first_of(",\"\n\r") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

void write_row(std::ostream& out, const Row& row)
{
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (k > 0) out << ',';
        out << escape(row[k]);
    }
    out << '\n';
}

} // namespace csv

std::string format_double(double v)
{
    return fmt::format("{}", v);
}

namespace {

std::optional<double> parse_number(const std::string& text)
{
    double v = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) return std::nullopt;
    return v;
}

std::optional<bool> parse_flag(const std::string& text)
{
    if (text == "1" || text == "true" || text == "TRUE" || text == "yes") return true;
    if (text == "0" || text == "false" || text == "FALSE" || text == "no") return false;
    return std::nullopt;
}

std::string where(std::size_t line, const std::string& column)
{
    return "line " + std::to_string(line) + ", column '" + column + "'";
}

struct Meta {
    std::string target;
    std::string censored;
    std::map<std::string, FeatureMeta> features;
};

Meta load_meta(const std::filesystem::path& meta_path)
{
    if (!std::filesystem::exists(meta_path)) {
        fail(ErrorCode::FileNotFound, "metadata file '" + meta_path.string() + "' does not exist");
    }
    YAML::Node root;
    try {
        root = YAML::LoadFile(meta_path.string());
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::SchemaMismatch, meta_path.string() + ": " + e.what());
    }
    Meta meta;
    try {
        meta.target = root["target"].as<std::string>("os_months");
        meta.censored = root["censored"].as<std::string>("censored");
        const auto features = root["features"];
        if (!features || !features.IsMap()) {
            fail(ErrorCode::SchemaMismatch, meta_path.string() + ": 'features' must be a mapping");
        }
        for (const auto& entry : features) {
            FeatureMeta f;
            f.name = entry.first.as<std::string>();
            const auto& spec = entry.second;
            const auto line = std::to_string(spec.Mark().line + 1);
            auto kind = parse_kind(spec["kind"].as<std::string>(""));
            auto block = parse_block(spec["block"].as<std::string>(""));
            if (!kind || !block) {
                fail(ErrorCode::SchemaMismatch,
                     meta_path.string() + ":" + line + ": feature '" + f.name + "' needs kind and block");
            }
            f.kind = *kind;
            f.block = *block;
            if (spec["levels"]) {
                for (const auto& level : spec["levels"]) {
                    auto label = level.as<std::string>();
                    if (label.empty()) {
                        fail(ErrorCode::InvalidLevel,
                             meta_path.string() + ":" + line + ": empty level label in '" + f.name + "'");
                    }
                    f.levels.push_back(std::move(label));
                }
            }
            if (f.categorical() && f.levels.size() < 2) {
                fail(ErrorCode::SchemaMismatch,
                     meta_path.string() + ":" + line + ": categorical feature '" + f.name + "' needs >= 2 levels");
            }
            meta.features.emplace(f.name, std::move(f));
        }
    } catch (const YAML::Exception& e) {
        fail(ErrorCode::SchemaMismatch, meta_path.string() + ": " + e.what());
    }
    return meta;
}

} // namespace

Dataset load_dataset(const std::filesystem::path& data_path, const std::filesystem::path& meta_path)
{
    const auto meta = load_meta(meta_path);
    const auto rows = csv::read_file(data_path);
    if (rows.empty()) fail(ErrorCode::SchemaMismatch, data_path.string() + ": missing header row");

    const auto& header = rows.front();
    std::optional<std::size_t> target_col;
    std::optional<std::size_t> censor_col;
    std::vector<std::size_t> feature_cols;
    std::vector<FeatureMeta> features;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const auto& name = header[c];
        if (name == meta.target) {
            target_col = c;
        } else if (name == meta.censored) {
            censor_col = c;
        } else if (auto it = meta.features.find(name); it != meta.features.end()) {
            feature_cols.push_back(c);
            features.push_back(it->second);
        } else {
            fail(ErrorCode::SchemaMismatch, "column '" + name + "' in data is not declared in metadata");
        }
    }
    if (!target_col) fail(ErrorCode::SchemaMismatch, "target column '" + meta.target + "' not found in data");
    if (features.size() != meta.features.size()) {
        for (const auto& [name, f] : meta.features) {
            bool found = false;
            for (const auto& g : features) found = found || g.name == name;
            if (!found) fail(ErrorCode::SchemaMismatch, "feature '" + name + "' declared in metadata is absent from data");
        }
        fail(ErrorCode::SchemaMismatch, "data header repeats a feature column");
    }

    std::vector<Cell> cells;
    std::vector<Survival> target;
    cells.reserve((rows.size() - 1) * features.size());
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        const std::size_t line = r + 1;
        if (row.size() != header.size()) {
            fail(ErrorCode::SchemaMismatch, "line " + std::to_string(line) + " has " + std::to_string(row.size()) +
                                                " fields, header has " + std::to_string(header.size()));
        }
        for (std::size_t k = 0; k < feature_cols.size(); ++k) {
            const auto& text = row[feature_cols[k]];
            const auto& f = features[k];
            if (text.empty()) {
                cells.emplace_back(Missing{});
            } else if (f.categorical()) {
                auto l = f.level_index(text);
                if (!l) fail(ErrorCode::InvalidLevel, where(line, f.name) + ": undeclared level '" + text + "'");
                cells.emplace_back(Level{*l});
            } else {
                auto v = parse_number(text);
                if (!v) fail(ErrorCode::InvalidLevel, where(line, f.name) + ": malformed number '" + text + "'");
                cells.emplace_back(*v);
            }
        }
        Survival s;
        auto os = parse_number(row[*target_col]);
        if (!os || *os < 0.0) {
            fail(ErrorCode::InvalidLevel, where(line, meta.target) + ": target must be a non-negative number");
        }
        s.os_months = *os;
        if (censor_col) {
            const auto& text = row[*censor_col];
            auto flag = text.empty() ? std::optional<bool>(false) : parse_flag(text);
            if (!flag) fail(ErrorCode::InvalidLevel, where(line, meta.censored) + ": expected 0/1, got '" + text + "'");
            s.censored = *flag;
        }
        target.push_back(s);
    }

    Dataset ds(std::move(features), std::move(cells), std::move(target));
    ds.target_name = meta.target;
    ds.censor_name = meta.censored;
    return ds;
}

void save_dataset(const Dataset& ds, const std::filesystem::path& data_path, const std::filesystem::path& meta_path)
{
    {
        std::ofstream out(data_path, std::ios::binary);
        if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + data_path.string() + "'");
        csv::Row header;
        for (const auto& f : ds.features()) header.push_back(f.name);
        header.push_back(ds.target_name);
        header.push_back(ds.censor_name);
        csv::write_row(out, header);
        for (std::size_t i = 0; i < ds.rows(); ++i) {
            csv::Row row;
            row.reserve(ds.cols() + 2);
            for (std::size_t j = 0; j < ds.cols(); ++j) {
                const auto& c = ds.cell(i, j);
                if (const auto* v = std::get_if<double>(&c)) {
                    row.push_back(format_double(*v));
                } else if (const auto* l = std::get_if<Level>(&c)) {
                    row.push_back(ds.feature(j).levels.at(l->index));
                } else {
                    row.emplace_back();
                }
            }
            row.push_back(format_double(ds.target()[i].os_months));
            row.emplace_back(ds.target()[i].censored ? "1" : "0");
            csv::write_row(out, row);
        }
    }

    YAML::Emitter em;
    em << YAML::BeginMap;
    em << YAML::Key << "target" << YAML::Value << ds.target_name;
    em << YAML::Key << "censored" << YAML::Value << ds.censor_name;
    em << YAML::Key << "features" << YAML::Value << YAML::BeginMap;
    for (const auto& f : ds.features()) {
        em << YAML::Key << f.name << YAML::Value << YAML::Flow << YAML::BeginMap;
        em << YAML::Key << "kind" << YAML::Value << to_string(f.kind);
        em << YAML::Key << "block" << YAML::Value << to_string(f.block);
        if (!f.levels.empty()) {
            em << YAML::Key << "levels" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (const auto& l : f.levels) em << YAML::DoubleQuoted << l;
            em << YAML::EndSeq;
        }
        em << YAML::EndMap;
    }
    em << YAML::EndMap << YAML::EndMap;
    std::ofstream out(meta_path, std::ios::binary);
    if (!out) fail(ErrorCode::FileNotFound, "cannot write '" + meta_path.string() + "'");
    out << em.c_str() << '\n';
}

} // namespace efs
