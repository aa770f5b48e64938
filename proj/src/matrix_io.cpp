#include "nrange/matrix_io.hpp"

#include <fstream>
#include <sstream>

namespace nrange {

namespace {

std::string line_column(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    std::ostringstream os;
    os << "line " << line << ", column " << col;
    return os.str();
}

}  // namespace

ComplexMatrix matrix_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("entries") || !j.contains("n"))
        throw InputError("matrix JSON must be an object with \"n\" and an \"entries\" array");
    const auto& rows = j.at("entries");
    if (!rows.is_array() || rows.empty()) throw DimensionError("\"entries\" must be a non-empty array");
    const auto n = static_cast<Eigen::Index>(rows.size());
    if (!j.at("n").is_number_integer() || j.at("n").get<long long>() != n) {
        std::ostringstream os;
        os << "\"n\" does not match the number of rows (" << n << ")";
        throw DimensionError(os.str());
    }
    CMat m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto& row = rows[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
            std::ostringstream os;
            os << "row " << i << " has " << (row.is_array() ? row.size() : 0) << " entries, expected "
               << n << " (ragged matrix)";
            throw DimensionError(os.str());
        }
        for (Eigen::Index k = 0; k < n; ++k) {
            const auto& e = row[static_cast<std::size_t>(k)];
            if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
                std::ostringstream os;
                os << "entry (" << i << "," << k << ") must be a [re, im] pair of numbers";
                throw InputError(os.str());
            }
            m(i, k) = Complex(e[0].get<double>(), e[1].get<double>());
        }
    }
    return ComplexMatrix(std::move(m));
}

ComplexMatrix parse_matrix_json(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw InputError("JSON parse error at " + line_column(text, e.byte > 0 ? e.byte - 1 : 0) +
                         ": " + e.what());
    }
    return matrix_from_json(j);
}

ComplexMatrix load_matrix_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open matrix file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_matrix_json(buf.str());
}

nlohmann::json complex_to_json(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

nlohmann::json matrix_to_json(const ComplexMatrix& a) {
    nlohmann::json rows = nlohmann::json::array();
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index k = 0; k < a.size(); ++k) row.push_back(complex_to_json(a(i, k)));
        rows.push_back(std::move(row));
    }
    return nlohmann::json{{"n", a.size()}, {"entries", std::move(rows)}};
}

}  // namespace nrange
