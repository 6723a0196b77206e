#include "cli.hpp"

#include "equnfold/errors.hpp"

#include <cmath>
#include <iomanip>
#include <ostream>

namespace equnfold::cli {

bool VerifyReport::passed() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

json VerifyReport::to_json() const {
    json list = json::array();
    for (const auto& c : checks) {
        list.push_back({{"name", c.name},
                        {"passed", c.passed},
                        {"value", c.value},
                        {"tolerance", c.tolerance},
                        {"detail", c.detail}});
    }
    return {{"schema", io::kSchema}, {"passed", passed()}, {"checks", list}};
}

void VerifyReport::print(std::ostream& os) const {
    for (const auto& c : checks) {
        os << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(30) << c.name << std::right
           << std::setprecision(3) << std::scientific << c.value << " (tol " << c.tolerance << ")";
        if (!c.detail.empty()) {
            os << "  " << c.detail;
        }
        os << std::defaultfloat << '\n';
    }
    os << (passed() ? "all checks passed" : "verification FAILED") << '\n';
}

namespace {

class Checker {
public:
    explicit Checker(VerifyReport& r) : report_(r) {}

    void le(const std::string& name, double value, double tol, std::string detail = {}) {
        report_.checks.push_back({name, std::isfinite(value) && value <= tol, value, tol, std::move(detail)});
    }
    void flag(const std::string& name, bool ok, std::string detail = {}) {
        report_.checks.push_back({name, ok, ok ? 0.0 : 1.0, 0.0, std::move(detail)});
    }
    template <class F>
    void guarded(const std::string& name, F&& f) {
        try {
            f();
        } catch (const io::SchemaError&) {
            throw;
        } catch (const Error& e) {
            flag(name, false, std::string(to_string(e.kind())) + ": " + e.what());
        }
    }

private:
    VerifyReport& report_;
};

std::vector<CMatrix> matrices(const json& j, const char* what) {
    if (!j.is_array()) {
        throw io::SchemaError(std::string("'") + what + "' must be an array of matrices");
    }
    std::vector<CMatrix> out;
    for (const auto& m : j) {
        out.push_back(io::matrix_from_json(m));
    }
    return out;
}

}  // namespace

VerifyReport verify_artifact(const json& art) {
    if (!art.is_object() || art.empty()) {
        throw io::SchemaError("artifact is empty or not a JSON object");
    }
    const json& schema = io::require(art, "schema");
    if (!schema.is_string() || schema.get<std::string>() != io::kSchema) {
        throw io::SchemaError(std::string("unsupported schema (expected ") + io::kSchema + ")");
    }
    VerifyReport report;
    Checker check(report);
    const json& status = io::require(art, "status");
    if (!status.is_string()) {
        throw io::SchemaError("'status' must be a string");
    }
    if (status.get<std::string>() != "ok") {
        std::string msg = "artifact records a pipeline failure";
        if (art.contains("error") && art["error"].contains("message")) {
            msg += ": " + art["error"]["message"].get<std::string>();
        }
        check.flag("status", false, msg);
        return report;
    }

    // Parse everything up front so schema problems surface as such.
    const DelayOperator op = [&] {
        try {
            return io::operator_from_json(io::require(art, "model"));
        } catch (const Error& e) {
            throw io::SchemaError(std::string("model: ") + e.what());
        }
    }();
    const json& group_j = io::require(art, "group");
    const json& frame_j = io::require(art, "frame");
    const json& family_j = io::require(art, "family");
    const UnfoldingFamily family = io::family_from_json(family_j, op);
    const std::vector<CMatrix> stored_dirs = matrices(io::require(art, "directions"), "directions");
    const json& theta_j = io::require(art, "theta");
    const json& vers_j = io::require(art, "versality");
    std::vector<cplx> col_eigs;
    for (const auto& e : io::require(frame_j, "eigenvalues")) {
        col_eigs.push_back(io::complex_from_json(e));
    }
    std::vector<CVector> phi_dirs;
    for (const auto& p : io::require(frame_j, "phi")) {
        phi_dirs.push_back(io::vector_from_json(io::require(p, "direction")));
    }
    std::vector<CRowVector> psi_dirs;
    for (const auto& p : io::require(frame_j, "psi")) {
        psi_dirs.push_back(io::vector_from_json(io::require(p, "direction")).transpose());
    }
    if (phi_dirs.size() != col_eigs.size() || psi_dirs.size() != col_eigs.size() || col_eigs.empty()) {
        throw io::SchemaError("frame needs one phi and one psi entry per eigenvalue column");
    }
    std::vector<int> selected;
    const json& sel = io::require(theta_j, "selected_rows");
    if (!sel.is_array()) {
        throw io::SchemaError("'selected_rows' must be an array");
    }
    for (const auto& s : sel) {
        selected.push_back(s.get<int>());
    }
    const bool claimed_mini = io::require(vers_j, "miniversal").get<bool>();

    Representation rho;
    try {
        rho = io::representation_from_json(group_j);
    } catch (const Error& e) {
        check.flag("group_representation", false, e.what());
        return report;
    }
    const auto rep_report = check_representation(rho);
    check.le("group_representation", rep_report.max_residual, 1e-10);
    if (rho.dim != op.dim()) {
        check.flag("group_dimension", false, "representation and model dimensions differ");
        return report;
    }
    check.le("model_equivariance", check_equivariance(op, rho), 1e-10);

    std::optional<SpectralFrame> frame;
    check.guarded("frame_rebuild", [&] {
        std::vector<cplx> distinct;
        std::vector<std::vector<CVector>> seeds;
        for (std::size_t i = 0; i < col_eigs.size(); ++i) {
            auto it = std::find_if(distinct.begin(), distinct.end(),
                                   [&](cplx e) { return std::abs(e - col_eigs[i]) <= 1e-12 * (1.0 + std::abs(e)); });
            if (it == distinct.end()) {
                distinct.push_back(col_eigs[i]);
                seeds.emplace_back();
                it = distinct.end() - 1;
            }
            seeds[static_cast<std::size_t>(it - distinct.begin())].push_back(phi_dirs[i]);
        }
        EigenbasisOptions eopt;
        eopt.seeds = seeds;
        SpectralFrame f = eigenbasis(op, distinct, eopt);
        f.G = induce_representation(f, rho);
        double psi_diff = 0.0;
        for (std::size_t i = 0; i < psi_dirs.size(); ++i) {
            psi_diff = std::max(psi_diff, max_abs(f.psi[i].direction - psi_dirs[i]));
        }
        const auto fr = check_frame(f, &rho);
        check.le("frame_null_vectors", fr.null_residual, 1e-9);
        check.le("frame_gram_identity", fr.gram_residual, 1e-9);
        check.le("frame_B_commutes_G", fr.commute_residual, 1e-8);
        check.le("frame_matches_artifact", psi_diff, 1e-8);
        if (frame_j.contains("G")) {
            const auto gens = matrices(io::require(frame_j["G"], "generators"), "G.generators");
            double gdiff = gens.size() == f.G->group->generators().size() ? 0.0 : 1.0;
            for (std::size_t k = 0; k < gens.size() && gdiff < 1.0; ++k) {
                gdiff = std::max(gdiff, max_abs(gens[k] - (*f.G)(f.G->group->generators()[k])));
            }
            check.le("induced_representation", gdiff, 1e-8);
        }
        frame = std::move(f);
    });
    if (!frame) {
        return report;
    }
    const Representation& g = *frame->G;

    std::vector<CMatrix> r_bar;
    check.guarded("direct_sum", [&] {
        const OrbitGeometry geo = orbit_geometry(frame->B, jordan_spec_of_diagonal(frame->B));
        check.flag("direct_sum", true, "tangent + complement spans c^2 = " + std::to_string(frame->size() * frame->size()));
        const auto gamma = gamma_orbit_geometry(frame->B, g);
        check.flag("centralizer_identity",
                   gamma.centralizer_dim == gamma.codimension() &&
                       static_cast<int>(gamma.commutant.size()) ==
                           static_cast<int>(gamma.tangent_basis.size()) + gamma.centralizer_dim,
                   "dim Mat^G = " + std::to_string(gamma.commutant.size()) + ", tangent " +
                       std::to_string(gamma.tangent_basis.size()));

        const auto raw = build_R_matrices(*frame, geo);
        const CMatrix psi0 = frame->psi_at(0.0);
        double ident = 0.0;
        double idem = 0.0;
        double stored = stored_dirs.size() == raw.size() ? 0.0 : 1.0;
        std::vector<CMatrix> dirs;
        for (std::size_t m = 0; m < raw.size(); ++m) {
            r_bar.push_back(equivariant_average(rho, g, raw[m]));
            const CMatrix d = psi0 * r_bar.back();
            ident = std::max(ident, max_abs(equivariant_average(g, g, psi0 * raw[m]) - d));
            idem = std::max(idem, max_abs(equivariant_average(g, g, d) - d));
            if (m < stored_dirs.size() && stored < 1.0) {
                stored = std::max(stored, max_abs(stored_dirs[m] - d));
            }
            dirs.push_back(d);
        }
        check.le("projection_identity", ident, 1e-10);
        check.le("projection_idempotent", idem, 1e-10);
        check.le("directions_match_artifact", stored, 1e-8);
        const auto theta = theta_extract(geo, dirs);
        double theta_res = 0.0;
        for (double r : theta.residuals) {
            theta_res = std::max(theta_res, r);
        }
        check.le("theta_decomposition", theta_res, 1e-8);
        check.flag("theta_selection", theta.selected_rows == selected,
                   "rank " + std::to_string(theta.rank) + ", artifact lists " + std::to_string(selected.size()));
    });

    double eq = 0.0;
    for (const auto& p : family.parameters) {
        for (const auto& a : p.coefficients) {
            eq = std::max(eq, commutation_residual(rho, a));
        }
    }
    check.le("coefficient_equivariance", eq, 1e-10);

    if (!r_bar.empty()) {
        double recon = 0.0;
        bool indices_ok = true;
        for (const auto& p : family.parameters) {
            if (p.source_index < 0 || static_cast<std::size_t>(p.source_index) >= r_bar.size()) {
                indices_ok = false;
                continue;
            }
            CMatrix acc = CMatrix::Zero(op.dim(), frame->size());
            for (std::size_t j = 0; j < family.lags.size(); ++j) {
                acc += p.coefficients[j] * frame->phi_at(-family.lags[j]);
            }
            recon = std::max(recon, max_abs(acc - r_bar[static_cast<std::size_t>(p.source_index)]));
        }
        check.le("reconstruction", indices_ok ? recon : 1.0, 1e-9, indices_ok ? "" : "source_index out of range");
    }

    check.guarded("gamma_versality", [&] {
        const auto v = verify_gamma_versality(frame->B, g, family.directions(*frame));
        check.flag("gamma_versality", v.versal,
                   "span rank " + std::to_string(v.span_rank) + " of " + std::to_string(v.commutant_dim) +
                       ", deficiency " + std::to_string(v.deficiency));
        check.flag("miniversal_claim", v.miniversal == claimed_mini,
                   std::to_string(v.parameter_count) + " parameters, codimension " + std::to_string(v.codimension));
    });

    if (art.contains("real_family")) {
        check.guarded("real_family", [&] {
            const UnfoldingFamily real = io::family_from_json(art["real_family"], op);
            double imag = 0.0;
            double req = 0.0;
            for (const auto& p : real.parameters) {
                for (const auto& a : p.coefficients) {
                    imag = std::max(imag, a.imag().cwiseAbs().maxCoeff());
                    req = std::max(req, commutation_residual(rho, a));
                }
            }
            check.le("real_family_real", imag, 1e-12);
            check.le("real_family_equivariance", req, 1e-10);
            const RealFamily redo = realify(family);
            double diff = redo.family.parameters.size() == real.parameters.size() ? 0.0 : 1.0;
            for (std::size_t m = 0; m < real.parameters.size() && diff < 1.0; ++m) {
                for (std::size_t j = 0; j < real.lags.size(); ++j) {
                    diff = std::max(diff, max_abs(redo.family.parameters[m].coefficients[j] -
                                                  real.parameters[m].coefficients[j]));
                }
            }
            check.le("real_family_matches", diff, 1e-9);
            check.flag("real_reparametrization", redo.inverse_condition > 1e-8,
                       "inverse condition " + std::to_string(redo.inverse_condition));
            const auto v = verify_gamma_versality(frame->B, g, real.directions(*frame));
            check.flag("real_family_versality", v.versal, "deficiency " + std::to_string(v.deficiency));
        });
    }

    if (art.contains("d3")) {
        const auto pat = d3::coefficient_patterns(family);
        check.le("d3_coefficient_patterns", pat.ok ? pat.residual : std::max(pat.residual, 1.0), 1e-8);
    }
    return report;
}

}  // namespace equnfold::cli
