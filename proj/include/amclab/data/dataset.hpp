// Dataset container and CSV ingestion.
//
// CSV contract: header row, feature columns holding numbers or complex-valued
// strings, one label column (by name, default "label"; falls back to the last
// column). Complex entries are replaced by their modulus at load time.
#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "amclab/matrix.hpp"
#include "amclab/sim/constellation.hpp"

namespace amclab::data {

inline const std::vector<std::string>& label_names() { return sim::modulation_names(); }

inline std::string normalize_label(const std::string& raw) {
    std::string s;
    for (char c : raw)
        if (c != '-' && c != '_' && c != ' ')
            s.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
    return s;
}

// Fixed encoding in the canonical listing order; accepts "16-QAM" style names.
inline int encode_label(const std::string& raw) {
    const std::string s = normalize_label(raw);
    const auto& names = label_names();
    for (std::size_t i = 0; i < names.size(); ++i)
        if (s == names[i]) return static_cast<int>(i);
    std::string valid;
    for (const auto& n : names) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown label '" + raw + "' (valid: " + valid + ")");
}

inline const std::string& decode_label(int cls) {
    if (cls < 0 || static_cast<std::size_t>(cls) >= label_names().size())
        throw std::out_of_range("label index out of range: " + std::to_string(cls));
    return label_names()[static_cast<std::size_t>(cls)];
}

struct Dataset {
    Matrix features;                  // n x d
    std::vector<int> labels;          // class indices in [0, 5)
    std::string domain;               // channel domain tag
    std::string band;                 // frequency tag
    std::vector<std::string> header;  // feature column names, size d

    std::size_t size() const { return features.rows; }
    std::size_t dim() const { return features.cols; }

    Dataset subset(const std::vector<std::size_t>& idx) const {
        Dataset out;
        out.features = features.row_slice(idx);
        out.labels.reserve(idx.size());
        for (auto i : idx) out.labels.push_back(labels.at(i));
        out.domain = domain;
        out.band = band;
        out.header = header;
        return out;
    }

    void validate() const {
        if (labels.size() != features.rows)
            throw std::invalid_argument("Dataset: label count does not match row count");
        for (int l : labels)
            if (l < 0 || static_cast<std::size_t>(l) >= label_names().size())
                throw std::invalid_argument("Dataset: label out of range");
        if (!features.all_finite())
            throw std::invalid_argument("Dataset: non-finite feature value");
    }
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.push_back(field);
            field.clear();
        } else if (c != '\r') {
            field.push_back(c);
        }
    }
    out.push_back(field);
    return out;
}

inline std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

// Parses a real or complex-formatted cell ("a+bi", "a-bj", bare "bi", "3.5").
// Complex values collapse to their modulus; plain reals pass through signed.
inline std::optional<double> parse_cell(const std::string& raw) {
    const std::string s = trim(raw);
    if (s.empty()) return std::nullopt;

    const char suffix = s.back();
    const bool has_imag_suffix = (suffix == 'i' || suffix == 'j' || suffix == 'I' || suffix == 'J');

    if (!has_imag_suffix) {
        char* end = nullptr;
        const double v = std::strtod(s.c_str(), &end);
        if (end != s.c_str() + s.size()) return std::nullopt;
        return v;
    }

    // Split "a+bi" at the sign that starts the imaginary part (not an
    // exponent sign and not a leading sign).
    const std::string body = s.substr(0, s.size() - 1);
    std::size_t split = std::string::npos;
    for (std::size_t i = body.size(); i-- > 1;) {
        const char c = body[i];
        if ((c == '+' || c == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
            split = i;
            break;
        }
    }

    double re = 0.0, im;
    std::string im_text;
    if (split == std::string::npos) {
        im_text = body;  // bare imaginary, e.g. "4i", "-2.5j", "i"
    } else {
        const std::string re_text = body.substr(0, split);
        im_text = body.substr(split);
        char* end = nullptr;
        re = std::strtod(re_text.c_str(), &end);
        if (end != re_text.c_str() + re_text.size()) return std::nullopt;
    }
    if (im_text.empty() || im_text == "+") {
        im = 1.0;
    } else if (im_text == "-") {
        im = -1.0;
    } else {
        char* end = nullptr;
        im = std::strtod(im_text.c_str(), &end);
        if (end != im_text.c_str() + im_text.size()) return std::nullopt;
    }
    return std::sqrt(re * re + im * im);
}

}  // namespace detail

struct LoadOptions {
    std::string label_column = "label";
    std::string domain;  // tag recorded on the loaded dataset
    std::string band;
};

inline Dataset load_csv(const std::string& path, const LoadOptions& opt = {}) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_csv: cannot open " + path);

    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error("load_csv: missing header row in " + path);
    const auto header_fields = detail::split_csv_line(line);
    if (header_fields.size() < 2)
        throw std::runtime_error("load_csv: need at least one feature column and a label column");

    std::size_t label_col = header_fields.size() - 1;  // default position: last
    for (std::size_t j = 0; j < header_fields.size(); ++j)
        if (detail::trim(header_fields[j]) == opt.label_column) {
            label_col = j;
            break;
        }

    Dataset ds;
    ds.domain = opt.domain;
    ds.band = opt.band;
    for (std::size_t j = 0; j < header_fields.size(); ++j)
        if (j != label_col) ds.header.push_back(detail::trim(header_fields[j]));

    std::vector<double> values;
    std::size_t n_rows = 0;
    std::size_t row_no = 1;  // header was row 1
    while (std::getline(is, line)) {
        ++row_no;
        if (detail::trim(line).empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != header_fields.size())
            throw std::runtime_error("load_csv: row " + std::to_string(row_no) + " has " +
                                     std::to_string(fields.size()) + " fields, expected " +
                                     std::to_string(header_fields.size()));
        for (std::size_t j = 0; j < fields.size(); ++j) {
            if (j == label_col) {
                ds.labels.push_back(encode_label(detail::trim(fields[j])));
                continue;
            }
            const auto v = detail::parse_cell(fields[j]);
            if (!v || !std::isfinite(*v))
                throw std::runtime_error("load_csv: unparseable or non-finite cell at row " +
                                         std::to_string(row_no) + ", column " +
                                         std::to_string(j + 1) + " ('" +
                                         detail::trim(fields[j]) + "')");
            values.push_back(*v);
        }
        ++n_rows;
    }

    ds.features = Matrix(n_rows, header_fields.size() - 1);
    ds.features.data = std::move(values);
    ds.validate();
    return ds;
}

// Export in the same contract (label column last). Full double precision.
inline void save_csv(const Dataset& ds, const std::string& path,
                     const std::string& label_column = "label") {
    std::ofstream os(path, std::ios::trunc);
    if (!os) throw std::runtime_error("save_csv: cannot open " + path);
    for (const auto& h : ds.header) os << h << ",";
    os << label_column << "\n";
    char buf[32];
    for (std::size_t i = 0; i < ds.size(); ++i) {
        for (std::size_t j = 0; j < ds.dim(); ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", ds.features(i, j));
            os << buf << ",";
        }
        os << decode_label(ds.labels[i]) << "\n";
    }
    if (!os) throw std::runtime_error("save_csv: write failed: " + path);
}

}  // namespace amclab::data
