#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "ddessm/inertial/certificate.hpp"
#include "ddessm/ssm/normal_form.hpp"

namespace ddessm::io {

using nlohmann::json;
using ordered_json = nlohmann::ordered_json;

/// 64-bit FNV-1a, used to fingerprint inputs in run manifests.
inline std::uint64_t fnv1a(const std::string& data) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : data) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

inline std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

/// Minimal CSV writer: fixed header, %.17g numbers.
class CsvWriter {
public:
    CsvWriter(const std::string& path, const std::vector<std::string>& header) : out_(path) {
        require(static_cast<bool>(out_), ErrorCode::InvalidArgument, "cannot write " + path);
        row_strings(header);
    }

    void row(const std::vector<double>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << fmt(values[i]);
        out_ << '\n';
    }

    void row_strings(const std::vector<std::string>& values) {
        for (std::size_t i = 0; i < values.size(); ++i) out_ << (i ? "," : "") << values[i];
        out_ << '\n';
    }

private:
    std::ofstream out_;
};

inline ordered_json to_json(cplx z) { return ordered_json::array({z.real(), z.imag()}); }

inline ordered_json to_json(const VecC& v) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(to_json(v[i]));
    return a;
}

inline ordered_json to_json(const MatC& m) {
    ordered_json a = ordered_json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(to_json(VecC(m.row(r).transpose())));
    return a;
}

inline ordered_json to_json(const ExpSum& u) {
    ordered_json a = ordered_json::array();
    for (const auto& t : u.terms()) a.push_back({{"rate", to_json(t.rate)}, {"coeff", to_json(t.coeff)}});
    return a;
}

inline ordered_json to_json(const Root& r) {
    return {{"re", r.value.real()}, {"im", r.value.imag()}, {"multiplicity", r.multiplicity}, {"residual", r.residual}};
}

inline ordered_json to_json(const SpectrumSlice& s) {
    ordered_json j;
    j["gamma"] = s.gamma;
    j["roots"] = ordered_json::array();
    for (const auto& r : s.roots) j["roots"].push_back(to_json(r));
    j["below"] = ordered_json::array();
    for (const auto& r : s.below) j["below"].push_back(to_json(r));
    j["complete_to"] = s.complete_to;
    j["conjugate_closed"] = s.conjugate_closed;
    if (!s.roots.empty()) j["alpha"] = s.alpha();
    if (s.beta()) j["beta"] = *s.beta();
    return j;
}

inline ordered_json to_json(const EigenData& e) {
    return {{"lambda", to_json(e.lambda)}, {"c", to_json(e.c)}, {"d", to_json(e.d)}, {"xi", to_json(e.xi)}};
}

inline std::string index_key(const MultiIndex& a) {
    std::string s;
    for (int v : a) s += std::to_string(v);
    return s;
}

inline ordered_json to_json(const SSMModel& m) {
    ordered_json j;
    j["order"] = m.order;
    j["smoothness"] = m.ell;
    j["formal"] = m.formal;
    j["jet_zero"] = m.jet_zero;
    j["eigen"] = ordered_json::array();
    for (const auto& e : m.eigen) j["eigen"].push_back(to_json(e));
    j["reduced_field"] = ordered_json::object();
    for (auto it = m.H.rbegin(); it != m.H.rend(); ++it) j["reduced_field"][index_key(it->first)] = to_json(it->second);
    j["manifold"] = ordered_json::object();
    for (auto it = m.K.rbegin(); it != m.K.rend(); ++it) j["manifold"][index_key(it->first)] = to_json(it->second);
    j["resonant"] = ordered_json::array();
    for (const auto& a : m.resonant) j["resonant"].push_back(index_key(a));
    return j;
}

inline ordered_json to_json(const NormalFormData& nf) {
    ordered_json j;
    j["lambda"] = to_json(nf.lambda);
    j["beta21"] = to_json(nf.beta21);
    j["transform"] = ordered_json::object();
    for (const auto& [e, c] : nf.p) j["transform"][std::to_string(e.first) + std::to_string(e.second)] = to_json(c);
    j["manifold"] = ordered_json::object();
    for (const auto& [e, k] : nf.manifold) j["manifold"][std::to_string(e.first) + std::to_string(e.second)] = to_json(k);
    j["polar"] = {{"radial_linear", nf.polar.radial_linear},
                  {"radial_cubic", nf.polar.radial_cubic},
                  {"angular_const", nf.polar.angular_const},
                  {"angular_quad", nf.polar.angular_quad}};
    return j;
}

inline ordered_json to_json(const LimitCycle& lc) {
    ordered_json j{{"exists", lc.exists}};
    if (lc.exists)
        j.update({{"stable", lc.stable}, {"radius", lc.radius}, {"frequency", lc.frequency}, {"period", lc.period()}});
    return j;
}

inline ordered_json to_json(const IMCertificate& c) {
    ordered_json j;
    j["route"] = to_string(c.route);
    j["verdict"] = to_string(c.verdict);
    if (!c.failing.empty()) j["failing"] = c.failing;
    j["witnesses"] = ordered_json::object();
    for (const auto& [k, v] : c.witnesses) j["witnesses"][k] = v;
    j["inequalities"] = ordered_json::array();
    for (const auto& q : c.inequalities)
        j["inequalities"].push_back(
            {{"id", q.id}, {"lhs", q.lhs}, {"rhs", q.rhs}, {"alternative", q.alternative}, {"holds", q.holds()}});
    if (c.rates) {
        j["decay_rate"] = c.rates->gamma2;
        j["decay_rate_kind"] = "upper_bound";
        j["rate_interval"] = {c.rates->gamma2, c.rates->gamma1};
        j["smoothness"] = c.smoothness;
    }
    return j;
}

inline void write_json(const std::string& path, const ordered_json& j) {
    std::ofstream out(path);
    require(static_cast<bool>(out), ErrorCode::InvalidArgument, "cannot write " + path);
    out << j.dump(2) << '\n';
}

} // namespace ddessm::io
