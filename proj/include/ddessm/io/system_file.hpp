#pragma once

#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"

#include "ddessm/model/linearize.hpp"

namespace ddessm::io {

using nlohmann::json;

namespace detail {

inline std::string line_col(const std::string& text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

inline MatR matrix(const json& j, int n, const std::string& where) {
    if (j.is_number() && n == 1) return MatR::Constant(1, 1, j.get<double>());
    if (!j.is_array() || int(j.size()) != n) throw Error(ErrorCode::ParseError, where + ": expected an n x n matrix");
    MatR m(n, n);
    for (int r = 0; r < n; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || int(row.size()) != n)
            throw Error(ErrorCode::ParseError, where + ": row " + std::to_string(r) + " has the wrong length");
        for (int c = 0; c < n; ++c) m(r, c) = row[c].get<double>();
    }
    return m;
}

template <class T>
T field(const json& j, const char* key, const std::string& where) {
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, where + ": missing field '" + key + "'");
    try {
        return j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, where + "." + key + ": " + e.what());
    }
}

} // namespace detail

/// Builds a system from its JSON description:
///   n, h, label, atoms [{tau, B}], densities [{a, b, poly: [C_0, C_1, ...]}],
///   lags, quadratic / cubic (dense row-major tensors), terms [{out, coef, factors: [[component, lag], ...]}],
///   x_minus_sin {component, lag, a}, lip_global, lip_f.
inline DDESystem system_from_json(const json& j) {
    using detail::field;
    PolynomialRhs rhs;
    rhs.n = field<int>(j, "n", "system");
    rhs.h = field<double>(j, "h", "system");
    if (rhs.n <= 0 || !(rhs.h > 0.0)) throw Error(ErrorCode::ParseError, "system: n and h must be positive");
    rhs.label = j.value("label", std::string{});
    if (j.contains("lags")) rhs.lags = field<std::vector<double>>(j, "lags", "system");

    if (j.contains("atoms"))
        for (std::size_t i = 0; i < j["atoms"].size(); ++i) {
            const auto where = "atoms[" + std::to_string(i) + "]";
            const auto& a = j["atoms"][i];
            if (!a.contains("B")) throw Error(ErrorCode::ParseError, where + ": missing field 'B'");
            rhs.atoms.push_back({field<double>(a, "tau", where), detail::matrix(a["B"], rhs.n, where + ".B")});
        }
    if (j.contains("densities"))
        for (std::size_t i = 0; i < j["densities"].size(); ++i) {
            const auto where = "densities[" + std::to_string(i) + "]";
            const auto& d = j["densities"][i];
            Density den{field<double>(d, "a", where), field<double>(d, "b", where), {}};
            if (!d.contains("poly") || !d["poly"].is_array() || d["poly"].empty())
                throw Error(ErrorCode::ParseError, where + ": 'poly' must list at least one coefficient");
            for (std::size_t k = 0; k < d["poly"].size(); ++k)
                den.coeffs.push_back(detail::matrix(d["poly"][k], rhs.n, where + ".poly[" + std::to_string(k) + "]"));
            rhs.densities.push_back(std::move(den));
        }

    if (j.contains("terms"))
        for (std::size_t i = 0; i < j["terms"].size(); ++i) {
            const auto where = "terms[" + std::to_string(i) + "]";
            const auto& t = j["terms"][i];
            Monomial m{t.value("out", 0), field<double>(t, "coef", where), {}};
            for (const auto& f : t.value("factors", json::array())) {
                if (!f.is_array() || f.size() != 2) throw Error(ErrorCode::ParseError, where + ": factor must be [component, lag]");
                m.factors.push_back({f[0].get<int>(), f[1].get<int>()});
            }
            rhs.terms.push_back(std::move(m));
        }

    if (j.contains("quadratic") || j.contains("cubic")) {
        try {
            const NonlinearityJet tensors(rhs.n, rhs.lags, j.value("quadratic", std::vector<double>{}),
                                          j.value("cubic", std::vector<double>{}));
            const auto extra = to_polynomial(DDESystem(DelayKernel(rhs.n, rhs.h), tensors)).terms;
            rhs.terms.insert(rhs.terms.end(), extra.begin(), extra.end());
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, "jet tensors: " + e.detail());
        }
    }
    if (j.contains("x_minus_sin")) {
        const auto& s = j["x_minus_sin"];
        rhs.x_minus_sin = PolynomialRhs::XMinusSin{s.value("component", 0), s.value("lag", 0), s.value("a", 1.0)};
    }
    if (j.contains("lip_global")) rhs.lip_global = field<double>(j, "lip_global", "system");
    if (j.contains("lip_f")) rhs.lip_f = field<double>(j, "lip_f", "system");

    try {
        return linearize(rhs);
    } catch (const Error& e) {
        if (e.code() == ErrorCode::NotAnEquilibrium) throw;
        throw Error(ErrorCode::ParseError, "invalid system: " + e.detail());
    }
}

inline DDESystem parse_system(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw Error(ErrorCode::ParseError, detail::line_col(text, e.byte == 0 ? 0 : e.byte - 1) + ": " + e.what());
    }
    try {
        return system_from_json(j);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, e.what());
    }
}

inline std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline DDESystem load_system(const std::string& path) {
    const std::string text = read_text(path);
    try {
        return parse_system(text);
    } catch (const Error& e) {
        throw Error(e.code(), path + ": " + e.detail());
    }
}

} // namespace ddessm::io
