#include "equnfold/json_io.hpp"

#include "equnfold/errors.hpp"

#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace equnfold::io {

const json& require(const json& j, const char* key) {
    if (!j.is_object()) {
        throw SchemaError(std::string("expected an object holding '") + key + "'");
    }
    const auto it = j.find(key);
    if (it == j.end()) {
        throw SchemaError(std::string("missing key '") + key + "'");
    }
    return *it;
}

double require_number(const json& j, const char* key) {
    const json& v = require(j, key);
    if (!v.is_number()) {
        throw SchemaError(std::string("key '") + key + "' must be a number");
    }
    return v.get<double>();
}

json complex_to_json(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from_json(const json& j) {
    if (j.is_number()) {
        return {j.get<double>(), 0.0};
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw SchemaError("complex number must be [re, im] or a real number");
}

json matrix_to_json(const CMatrix& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(complex_to_json(m(r, c)));
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

CMatrix matrix_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw SchemaError("matrix must be a nonempty array of rows");
    }
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    CMatrix m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        const json& row = j[static_cast<std::size_t>(r)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols) {
            throw SchemaError("matrix rows have unequal lengths");
        }
        for (Eigen::Index c = 0; c < cols; ++c) {
            m(r, c) = complex_from_json(row[static_cast<std::size_t>(c)]);
        }
    }
    return m;
}

json vector_to_json(const CMatrix& v) {
    json out = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        out.push_back(complex_to_json(v(i)));
    }
    return out;
}

CVector vector_from_json(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw SchemaError("vector must be a nonempty array");
    }
    CVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        v(static_cast<Eigen::Index>(i)) = complex_from_json(j[i]);
    }
    return v;
}

json operator_to_json(const DelayOperator& op) {
    json terms = json::array();
    for (const auto& t : op.terms()) {
        terms.push_back({{"delay", t.delay}, {"matrix", matrix_to_json(t.coefficient)}});
    }
    return {{"n", op.dim()}, {"terms", terms}};
}

DelayOperator operator_from_json(const json& j) {
    const json& n = require(j, "n");
    if (!n.is_number_integer() || n.get<int>() <= 0) {
        throw SchemaError("'n' must be a positive integer");
    }
    const json& terms = require(j, "terms");
    if (!terms.is_array()) {
        throw SchemaError("'terms' must be an array");
    }
    std::vector<DelayTerm> out;
    for (const auto& t : terms) {
        out.push_back({require_number(t, "delay"), matrix_from_json(require(t, "matrix"))});
    }
    try {
        return DelayOperator(n.get<int>(), std::move(out));
    } catch (const Error& e) {
        throw SchemaError(e.what());
    }
}

json representation_to_json(const Representation& rep) {
    json gens = json::array();
    for (int g : rep.group->generators()) {
        gens.push_back(matrix_to_json(rep(g)));
    }
    return {{"order", rep.group->order()}, {"dim", rep.dim}, {"generators", gens}};
}

Representation representation_from_json(const json& j) {
    if (j.contains("generators")) {
        const json& gens = j["generators"];
        if (!gens.is_array() || gens.empty()) {
            throw SchemaError("'generators' must be a nonempty array of matrices");
        }
        std::vector<CMatrix> mats;
        for (const auto& g : gens) {
            mats.push_back(matrix_from_json(g));
        }
        return close_generators(mats);
    }
    const json& table = require(j, "mul_table");
    const json& mats = require(j, "matrices");
    if (!table.is_array() || !mats.is_array()) {
        throw SchemaError("'mul_table' and 'matrices' must be arrays");
    }
    std::vector<std::vector<int>> t;
    for (const auto& row : table) {
        t.push_back(row.get<std::vector<int>>());
    }
    std::vector<CMatrix> m;
    for (const auto& x : mats) {
        m.push_back(matrix_from_json(x));
    }
    return make_representation(std::make_shared<const FiniteGroup>(std::move(t)), std::move(m));
}

json frame_to_json(const SpectralFrame& frame) {
    json eig = json::array();
    for (cplx l : frame.eigenvalues) {
        eig.push_back(complex_to_json(l));
    }
    json phi = json::array();
    for (const auto& p : frame.phi) {
        phi.push_back({{"direction", vector_to_json(p.direction)}, {"exponent", complex_to_json(p.exponent)}});
    }
    json psi = json::array();
    for (const auto& p : frame.psi) {
        psi.push_back({{"direction", vector_to_json(p.direction)}, {"exponent", complex_to_json(p.exponent)}});
    }
    json out = {{"c", frame.size()}, {"eigenvalues", eig}, {"phi", phi}, {"psi", psi}, {"B", matrix_to_json(frame.B)}};
    if (frame.G) {
        out["G"] = representation_to_json(*frame.G);
    }
    return out;
}

json theta_to_json(const ThetaReport& theta) {
    return {{"theta", theta.theta.size() == 0 ? json::array() : matrix_to_json(theta.theta)},
            {"residuals", theta.residuals},
            {"selected_rows", theta.selected_rows},
            {"rank", theta.rank}};
}

json versality_to_json(const VersalityReport& r) {
    return {{"commutant_dim", r.commutant_dim},
            {"tangent_dim", r.tangent_dim},
            {"codimension", r.codimension},
            {"parameter_count", r.parameter_count},
            {"span_rank", r.span_rank},
            {"deficiency", r.deficiency},
            {"outside_residual", r.outside_residual},
            {"versal", r.versal},
            {"miniversal", r.miniversal}};
}

json family_to_json(const UnfoldingFamily& family) {
    json params = json::array();
    for (const auto& p : family.parameters) {
        json coeffs = json::array();
        for (const auto& a : p.coefficients) {
            coeffs.push_back(matrix_to_json(a));
        }
        params.push_back({{"name", p.name}, {"source_index", p.source_index}, {"coefficients", coeffs}});
    }
    return {{"lags", family.lags}, {"parameters", params}, {"gamma_equivariant", family.gamma_equivariant}};
}

UnfoldingFamily family_from_json(const json& j, const DelayOperator& base) {
    const json& lags = require(j, "lags");
    if (!lags.is_array()) {
        throw SchemaError("'lags' must be an array");
    }
    UnfoldingFamily fam{base, {}, {}, false};
    for (const auto& l : lags) {
        if (!l.is_number()) {
            throw SchemaError("lags must be numbers");
        }
        fam.lags.push_back(l.get<double>());
    }
    const json& params = require(j, "parameters");
    if (!params.is_array()) {
        throw SchemaError("'parameters' must be an array");
    }
    for (const auto& p : params) {
        UnfoldingParameter q;
        const json& name = require(p, "name");
        if (!name.is_string()) {
            throw SchemaError("parameter name must be a string");
        }
        q.name = name.get<std::string>();
        q.source_index = static_cast<int>(require_number(p, "source_index"));
        const json& coeffs = require(p, "coefficients");
        if (!coeffs.is_array() || coeffs.size() != fam.lags.size()) {
            throw SchemaError("parameter '" + q.name + "' needs one coefficient matrix per lag");
        }
        for (const auto& a : coeffs) {
            CMatrix m = matrix_from_json(a);
            if (m.rows() != base.dim() || m.cols() != base.dim()) {
                throw SchemaError("coefficient matrix has the wrong shape");
            }
            q.coefficients.push_back(std::move(m));
        }
        fam.parameters.push_back(std::move(q));
    }
    if (j.contains("gamma_equivariant") && j["gamma_equivariant"].is_boolean()) {
        fam.gamma_equivariant = j["gamma_equivariant"].get<bool>();
    }
    return fam;
}

json mask_to_json(const EntryMask& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            row.push_back(m(r, c) ? 1 : 0);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

EntryMask mask_from_json(const json& j) {
    if (!j.is_array() || j.empty() || !j[0].is_array()) {
        throw SchemaError("mask must be a nonempty array of 0/1 rows");
    }
    EntryMask m(static_cast<Eigen::Index>(j.size()), static_cast<Eigen::Index>(j[0].size()));
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || j[r].size() != j[0].size()) {
            throw SchemaError("mask rows have unequal lengths");
        }
        for (std::size_t c = 0; c < j[r].size(); ++c) {
            const json& x = j[r][c];
            if (x.is_boolean()) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x.get<bool>();
            } else if (x.is_number()) {
                m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = x.get<double>() != 0.0;
            } else {
                throw SchemaError("mask entries must be 0/1 or booleans");
            }
        }
    }
    return m;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void write_atomic(const std::filesystem::path& path, const std::string& contents) {
    const auto dir = path.has_parent_path() ? path.parent_path() : std::filesystem::path(".");
    if (!dir.empty()) {
        std::filesystem::create_directories(dir);
    }
    auto tmp = path;
    tmp += ".tmp." + std::to_string(::getpid());
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out << contents;
        out.flush();
        if (!out) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) {
        std::filesystem::remove(tmp);
        throw std::runtime_error("cannot rename onto " + path.string() + ": " + ec.message());
    }
}

json read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw SchemaError("cannot read " + path.string());
    }
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    json j = json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        throw SchemaError(path.string() + " is not valid JSON");
    }
    return j;
}

}  // namespace equnfold::io
